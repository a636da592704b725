"""``manireg`` command line.

Numeric results go to files (``--out``); a short human summary goes to
standard output. Exit status is 0 on success, 2 on usage errors and 1 on
runtime errors.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import math
import os
import sys

import numpy as np

from manireg import __version__
from manireg import graph as G
from manireg import learn, manifold, spectral
from manireg.harness import io
from manireg.harness.datasets import KINDS, ToyDatasetSpec, generate_toy_dataset
from manireg.kernels import KernelError, kernel_from_spec, parse_kernel

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("manireg")

THREADS_ENV = "MANIREG_NUM_THREADS"
KERNEL_PARAMS = ("sigma2", "c", "p", "gamma")


class UsageError(Exception):
    pass


def _floats(text):
    return [float(s) for s in text.split(",") if s.strip()]


def _ints(text):
    return [int(s) for s in text.split(",") if s.strip()]


def _kernel_from_args(args):
    text = args.kernel
    if ":" in text:
        return parse_kernel(text)
    # bare name; hyperparameters may come from the config file
    spec = {"kind": text}
    for p in KERNEL_PARAMS:
        v = getattr(args, p, None)
        if v is not None:
            spec[p] = int(v) if p == "p" else v
    return kernel_from_spec(spec)


def _meta(command, args, **extra):
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "config") and not callable(v)}
    doc = {"command": command, "artifact_version": __version__, "config": cfg}
    if "seed" in cfg:
        doc["seed"] = cfg["seed"]
    doc.update(extra)
    return doc


def _load_graph(args):
    return G.read_edge_list(args.edges) if os.path.exists(args.edges) else _missing(args.edges)


def _missing(path):
    raise FileNotFoundError(f"no such file: {path}")


def _emit(report, args):
    if args.out:
        io.save_report(report, args.out)
    else:
        sys.stdout.write(io.dumps(report))


# -- subcommands ------------------------------------------------------------------

def cmd_gen(args):
    spec = ToyDatasetSpec(kind=args.kind, n_per_class=args.n_per_class,
                          n_labeled_per_class=args.labeled, seed=args.seed, noise=args.noise,
                          gap=args.gap, count=args.count, spread=args.spread)
    ds, truth = generate_toy_dataset(spec)
    io.save_dataset(ds, args.out)
    if args.truth_out:
        with open(args.truth_out, "w", newline="") as fh:
            fh.write("label\n" + "".join(io.fmt(v) + "\n" for v in truth))
    io.save_report(_meta("gen", args, dataset=spec.as_dict()), args.out + ".meta.json")
    print(f"wrote {len(ds.points)} points ({ds.n_labeled} labeled) to {args.out}")


def cmd_train(args):
    ds = io.load_dataset(args.data, args.labels)
    kernel = _kernel_from_args(args)
    cfg = learn.SolverConfig(max_iters=args.max_iters, step_size=args.step_size,
                             grad_tol=args.grad_tol, seed=args.seed)
    algo = args.algo
    if algo in ("rls", "logistic", "svm"):
        X, y = ds.labeled_points, ds.labels
        if algo == "rls":
            model = learn.fit_rls(kernel, X, y, args.gamma_k)
        elif algo == "logistic":
            model = learn.fit_kernel_logistic(kernel, X, y, args.gamma_k, cfg)
        else:
            model = learn.fit_svm(kernel, X, y, args.gamma_k, cfg)
    else:
        gspec = G.parse_graph_spec(args.graph)
        if algo == "lap-rls":
            model = learn.fit_lap_rls(kernel, ds, args.gamma_k, args.gamma_i, gspec)
        else:
            model = learn.fit_lap_svm(kernel, ds, args.gamma_k, args.gamma_i, gspec, cfg)
    doc = io.model_to_dict(model)
    doc["meta"] = _meta("train", args)
    io.save_report(doc, args.out)
    obj = model.info.get("objective")
    print(f"{algo}: {len(model.coefficients)} coefficients, objective "
          f"{obj:.6g}" if obj is not None else f"{algo}: fitted")


def cmd_predict(args):
    model = io.load_model(args.model)
    X = io.load_points(args.data)
    scores = model.decision_function(X)
    text = "score,sign\n" + "".join(
        f"{io.fmt(s)},{1 if s >= 0 else -1}\n" for s in scores)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"scored {len(scores)} points")
    else:
        sys.stdout.write(text)


def cmd_graph(args):
    X = io.load_points(args.data)
    g = G.build_graph(X, G.parse_graph_spec(args.graph))
    G.write_edge_list(g, args.out)
    print(f"graph: {g.n} vertices, {g.num_edges} edges, "
          f"{G.connected_components(g)} component(s)")


def cmd_spectrum(args):
    g = _load_graph(args)
    rep = spectral.spectral_report(g, args.normalized)
    _emit(_meta("spectrum", args, **rep), args)
    print("eigenvalues: " + " ".join(f"{v:.6g}" for v in rep["eigenvalues"][:12])
          + (" ..." if g.n > 12 else ""), file=sys.stderr if not args.out else sys.stdout)


def cmd_bounds(args):
    g = _load_graph(args)
    b = spectral.eigenvalue_bounds(g)
    rep = {
        "lambda2": b.lambda2, "lambda_n": b.lambda_n, "fiedler_upper": b.fiedler_upper,
        "fiedler_lower_lambda_n": b.fiedler_lower_lambda_n, "merris_upper": b.merris_upper,
        "anderson_morley_upper": b.anderson_morley_upper,
        "trace": {"sum_eigenvalues": b.trace_check[0], "two_edges_or_degree_sum": b.trace_check[1]},
        "lambda_n_le_n": b.lambda_n_le_n, "connected": b.connected,
        "checks": {k: bool(v) for k, v in sorted(b.checks.items())},
    }
    _emit(_meta("bounds", args, **rep), args)
    _summary("bounds", b.all_hold(), args)
    return 0


def _summary(name, ok, args):
    stream = sys.stdout if args.out else sys.stderr
    print(f"{name}: {'all checks pass' if ok else 'CHECK FAILED'}", file=stream)


def cmd_cheeger(args):
    g = _load_graph(args)
    h, S = spectral.cheeger_constant_bruteforce(g)
    rep = {"h": h, "subset": list(S), "boundary": spectral.boundary_size(g, S), "n": g.n}
    regular = bool(np.all(g.degrees == g.degrees[0]))
    if regular and g.is_unweighted() and G.connected_components(g) == 1:
        ub = spectral.cheeger_upper_bound(g)
        rep["cheeger_upper_bound"] = ub
        rep["checks"] = {"h_le_sqrt_2_d_lambda2": h <= ub + 1e-12}
    _emit(_meta("cheeger", args, **rep), args)
    print(f"h(G) = {h:.12g}", file=sys.stdout if args.out else sys.stderr)


def cmd_sweep(args):
    g = _load_graph(args)
    cut = spectral.sweep_cut(g)
    rep = {"subset": list(cut.subset), "conductance": cut.conductance,
           "boundary": cut.boundary, "sweep_threshold": cut.sweep_threshold, "n": g.n}
    checks = {}
    if g.n <= spectral.CHEEGER_MAX_N:
        h, _ = spectral.cheeger_constant_bruteforce(g)
        rep["h_bruteforce"] = h
        checks["conductance_ge_h"] = cut.conductance >= h - 1e-12
    if bool(np.all(g.degrees == g.degrees[0])) and g.is_unweighted():
        ub = spectral.cheeger_upper_bound(g)
        rep["cheeger_upper_bound"] = ub
        checks["conductance_le_sqrt_2_d_lambda2"] = cut.conductance <= ub + 1e-12
    rep["checks"] = checks
    _emit(_meta("sweep", args, **rep), args)
    print(f"sweep cut: |S| = {len(cut.subset)}, h_G(S) = {cut.conductance:.12g}",
          file=sys.stdout if args.out else sys.stderr)


def cmd_interlace(args):
    g = _load_graph(args)
    try:
        i, j = _ints(args.edge)
    except ValueError:
        raise UsageError("--edge expects two vertex indices, e.g. 0,3") from None
    r = spectral.check_interlacing(g, (i, j))
    rep = {"before": r.before.tolist(), "after": r.after.tolist(),
           "trace_difference": r.trace_difference, "violations": r.violations,
           "checks": {"interlacing": r.chain_holds, "trace_difference_is_2": r.trace_difference == 2.0}}
    _emit(_meta("interlace", args, **rep), args)
    _summary("interlace", r.ok, args)
    return 0


def cmd_heat(args):
    g = _load_graph(args)
    lap = G.laplacian(g, args.normalized)
    H = G.heat_kernel(lap, args.t)
    rep = {"t": args.t, "normalized": args.normalized, "matrix": H.matrix.tolist()}
    _emit(_meta("heat", args, **rep), args)
    print(f"heat kernel at t = {args.t:g} on {g.n} vertices",
          file=sys.stdout if args.out else sys.stderr)


def cmd_converge(args):
    m = manifold.AnalyticManifold(args.manifold, args.radius)
    z = _floats(args.z)
    ns = _ints(args.n)
    reps = manifold.convergence_experiment(m, args.f, z, ns, args.a, args.seeds)
    text = "n,t_n,seed,estimate,target,abs_error\n" + "".join(
        f"{r.n},{io.fmt(r.t_n)},{r.seed},{io.fmt(r.estimate)},{io.fmt(r.analytic_target)},"
        f"{io.fmt(r.abs_error)}\n" for r in reps)
    with open(args.out, "w", newline="") as fh:
        fh.write(text)
    med = manifold.median_errors(reps)
    first, last = med[ns[0]], med[ns[-1]]
    target = reps[0].analytic_target
    summary = {
        "median_abs_error": {str(n): v for n, v in med.items()},
        "target": target,
        "reduction_factor": first / last if last > 0 else math.inf,
        "final_relative_error": last / abs(target) if target else None,
    }
    io.save_report(_meta("converge", args, summary=summary), args.out + ".meta.json")
    for n, v in med.items():
        print(f"n = {n:6d}  median |error| = {v:.4g}")


# -- parser -------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(2) from UsageError(f"{self.prog}: error: {message}")

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        raise SystemExit(status)


def _add_edges(p):
    p.add_argument("--edges", required=True, help="edge list file ('i j w' per line)")
    p.add_argument("--out", help="JSON report path (default: standard output)")


def build_parser():
    ap = _Parser(prog="manireg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"manireg {__version__}")
    ap.add_argument("--config", help="TOML file whose keys provide defaults for the flags")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a toy semi-supervised dataset")
    p.add_argument("--kind", choices=KINDS, default="two_moons")
    p.add_argument("--n-per-class", type=int, default=100)
    p.add_argument("--labeled", type=int, default=1, help="labeled points per class")
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--gap", type=float, default=1.0)
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--spread", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", help="also write every row's class here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit a kernel model")
    p.add_argument("--algo", choices=("rls", "logistic", "svm", "lap-rls", "lap-svm"),
                   required=True)
    p.add_argument("--kernel", default="gaussian:sigma2=0.1",
                   help="e.g. linear, gaussian:sigma2=0.5, polynomial:c=1,p=2")
    for name in KERNEL_PARAMS:
        p.add_argument(f"--{name}", type=float, help=argparse.SUPPRESS)
    p.add_argument("--gamma-k", type=float, default=1e-3,
                   help="ambient weight (lambda for rls/logistic/svm)")
    p.add_argument("--gamma-i", type=float, default=1000.0, help="intrinsic weight")
    p.add_argument("--graph", default="knn:8", help="knn:K, knn:K,T, eps:E or gaussian:T")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", type=int, required=True, help="number of leading labeled rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--step-size", type=float)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score points with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("graph", help="build a data graph from a point CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--graph", default="knn:8")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("spectrum", help="Laplacian eigenvalues")
    _add_edges(p)
    p.add_argument("--normalized", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    for name, func, text in (("bounds", cmd_bounds, "eigenvalue bounds"),
                             ("cheeger", cmd_cheeger, "exact Cheeger constant"),
                             ("sweep", cmd_sweep, "sweep cut from the Fiedler vector")):
        p = sub.add_parser(name, help=text)
        _add_edges(p)
        p.set_defaults(func=func)

    p = sub.add_parser("interlace", help="spectra before and after adding an edge")
    _add_edges(p)
    p.add_argument("--edge", required=True, help="i,j")
    p.set_defaults(func=cmd_interlace)

    p = sub.add_parser("heat", help="graph heat kernel")
    _add_edges(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--normalized", action="store_true")
    p.set_defaults(func=cmd_heat)

    p = sub.add_parser("converge", help="graph Laplacian convergence experiment")
    p.add_argument("--manifold", choices=("circle", "flat_torus"), default="circle")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--f", default="sin:1", help="const, sin:K, cos:K or sin:K1,K2 on the torus")
    p.add_argument("--z", default="1.5708", help="angle(s) of the evaluation point")
    p.add_argument("--n", default="500,1000,2000,4000,8000")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_converge)
    return ap


def _config_defaults(argv):
    """Pull ``--config FILE`` out early so its keys can act as flag defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config, "rb") as fh:
        cfg = tomllib.load(fh)
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _apply_config(parser, argv, defaults):
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if command is None:
        return
    sub = choices[command]
    dests = {a.dest: a for a in sub._actions}
    unknown = set(defaults) - set(dests)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    for key in defaults:
        dests[key].required = False
    sub.set_defaults(**defaults)


@contextlib.contextmanager
def _thread_limit():
    n = os.environ.get(THREADS_ENV)
    if not n:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=int(n)):
        yield


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        defaults = _config_defaults(argv)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"manireg: error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        if defaults:
            _apply_config(parser, argv, defaults)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"manireg: error: {exc}", file=sys.stderr)
        return 2
    try:
        with _thread_limit():
            rc = args.func(args)
    except UsageError as exc:
        print(f"manireg: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError, KernelError) as exc:
        print(f"manireg: error: {exc}", file=sys.stderr)
        return 1
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
