"""Data graphs over point clouds, their Laplacians and heat kernels.

Graphs are dense: the problem sizes here are desk scale (a few thousand
vertices at most) and every consumer wants a full spectrum anyway.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components as _cc

from manireg import _backend

#: Zero-eigenvalue threshold relative to the largest eigenvalue.
TOL_ZERO = 1e-8


class GraphError(ValueError):
    pass


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DataGraph:
    """Undirected graph with a symmetric, nonnegative, zero-diagonal weight matrix."""

    weights: np.ndarray
    points: np.ndarray | None = None

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise GraphError("weights must be a square matrix")
        if (W < 0).any():
            raise GraphError("weights must be nonnegative")
        if np.any(np.diag(W) != 0):
            raise GraphError("weights must have a zero diagonal")
        if not np.array_equal(W, W.T):
            raise GraphError("weights must be symmetric")
        object.__setattr__(self, "weights", _frozen(W))
        if self.points is not None:
            P = np.asarray(self.points, dtype=float)
            if len(P) != len(W):
                raise GraphError("one point per vertex expected")
            object.__setattr__(self, "points", _frozen(P))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(1)

    def edges(self):
        """``(i, j, w)`` for ``i < j`` in lexicographic order."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def is_unweighted(self) -> bool:
        return bool(np.all((self.weights == 0) | (self.weights == 1)))

    def has_edge(self, i, j) -> bool:
        return self.weights[i, j] != 0

    def with_edge(self, i, j, w=1.0) -> "DataGraph":
        W = np.array(self.weights)
        W[i, j] = W[j, i] = w
        return DataGraph(W, self.points)

    def complement(self) -> "DataGraph":
        if not self.is_unweighted():
            raise GraphError("complement is defined for simple unweighted graphs")
        W = 1.0 - self.weights
        np.fill_diagonal(W, 0.0)
        return DataGraph(W)

    @classmethod
    def from_edges(cls, n, edges) -> "DataGraph":
        W = np.zeros((n, n))
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for {n} vertices")
            W[i, j] = W[j, i] = w
        return cls(W)


@dataclass(frozen=True, eq=False)
class Laplacian:
    matrix: np.ndarray
    normalized: bool = False
    graph: DataGraph | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class HeatKernel:
    t: float
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))


def _as_points(points):
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or len(X) == 0:
        raise GraphError("points must be a nonempty (n, d) array")
    return X


def pairwise_sqdist(X):
    X = _as_points(X)
    diff = X[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def build_knn_graph(points, k: int, weighting: str = "unit", t: float | None = None) -> DataGraph:
    """Symmetric kNN graph: ``i ~ j`` when either picks the other.

    Neighbour ties are broken by the lower vertex index. ``weighting`` is
    ``"unit"`` or ``"gaussian"`` (weights ``exp(-|xi - xj|^2 / (4 t))``).
    """
    X = _as_points(points)
    n = len(X)
    if not 1 <= k < n:
        raise GraphError(f"k must satisfy 1 <= k < n = {n}, got {k}")
    D2 = pairwise_sqdist(X)
    nbrs = _backend.knn_select(D2, int(k))
    A = np.zeros((n, n), dtype=bool)
    A[np.repeat(np.arange(n), k), nbrs.ravel()] = True
    A |= A.T
    if weighting == "unit":
        W = A.astype(float)
    elif weighting == "gaussian":
        if t is None or not t > 0:
            raise GraphError("gaussian weighting needs t > 0")
        W = np.where(A, np.exp(-D2 / (4.0 * t)), 0.0)
    else:
        raise GraphError(f"unknown weighting {weighting!r}")
    return DataGraph(W, X)


def build_epsilon_graph(points, eps: float) -> DataGraph:
    """Unit-weight graph joining points closer than ``eps``."""
    if not eps > 0:
        raise GraphError("eps must be positive")
    X = _as_points(points)
    # compare squared distances so eps is never rounded through a square root
    W = (pairwise_sqdist(X) < eps * eps).astype(float)
    np.fill_diagonal(W, 0.0)
    return DataGraph(W, X)


def build_gaussian_graph(points, t: float) -> DataGraph:
    """Complete graph with ``w_ij = exp(-|xi - xj|^2 / (4 t))``."""
    if not t > 0:
        raise GraphError("t must be positive")
    X = _as_points(points)
    W = np.exp(-pairwise_sqdist(X) / (4.0 * t))
    np.fill_diagonal(W, 0.0)
    return DataGraph(W, X)


def parse_graph_spec(spec: str) -> dict:
    """Parse ``knn:K``, ``knn:K,T`` (gaussian weights), ``eps:E`` or ``gaussian:T``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "knn":
            parts = arg.split(",")
            out = {"kind": "knn", "k": int(parts[0])}
            if len(parts) > 1:
                out["t"] = float(parts[1])
            return out
        if kind == "eps":
            return {"kind": "eps", "eps": float(arg)}
        if kind == "gaussian":
            return {"kind": "gaussian", "t": float(arg)}
    except ValueError:
        raise GraphError(f"malformed graph spec {spec!r}") from None
    raise GraphError(f"unknown graph spec {spec!r}; use knn:K, eps:E or gaussian:T")


def build_graph(points, spec) -> DataGraph:
    """Build from a parsed or textual graph spec."""
    if isinstance(spec, str):
        spec = parse_graph_spec(spec)
    kind = spec["kind"]
    if kind == "knn":
        if "t" in spec:
            return build_knn_graph(points, spec["k"], "gaussian", spec["t"])
        return build_knn_graph(points, spec["k"])
    if kind == "eps":
        return build_epsilon_graph(points, spec["eps"])
    if kind == "gaussian":
        return build_gaussian_graph(points, spec["t"])
    raise GraphError(f"unknown graph kind {kind!r}")


def laplacian(graph: DataGraph, normalized: bool = False) -> Laplacian:
    """``D - W``, or ``I - D^{-1/2} W D^{-1/2}`` when ``normalized``."""
    W = graph.weights
    d = W.sum(1)
    if not normalized:
        return Laplacian(np.diag(d) - W, False, graph)
    if (d <= 0).any():
        raise GraphError("normalized Laplacian undefined: graph has an isolated vertex")
    s = 1.0 / np.sqrt(d)
    M = np.eye(len(d)) - s[:, None] * W * s[None, :]
    M = 0.5 * (M + M.T)
    return Laplacian(M, True, graph)


def quadratic_form(lap: Laplacian, f) -> float:
    f = np.asarray(f, dtype=float)
    if f.shape != (lap.n,):
        raise GraphError(f"vector length {f.shape} does not match {lap.n} vertices")
    return float(f @ lap.matrix @ f)


def edge_sum_form(graph: DataGraph, f) -> float:
    """``sum_{i<j} w_ij (f_i - f_j)^2``."""
    f = np.asarray(f, dtype=float)
    return float(sum(w * (f[i] - f[j]) ** 2 for i, j, w in graph.edges()))


def connected_components(graph: DataGraph) -> int:
    ncomp, _ = _cc(graph.weights != 0, directed=False)
    return int(ncomp)


def heat_kernel(lap: Laplacian, t: float) -> HeatKernel:
    """``Phi exp(-t Lambda) Phi^T`` from the full eigendecomposition."""
    if t < 0:
        raise GraphError("t must be nonnegative")
    from manireg.spectral import spectrum

    sd = spectrum(lap)
    P = sd.eigenvectors
    H = (P * np.exp(-t * sd.eigenvalues)[None, :]) @ P.T
    H = 0.5 * (H + H.T)
    return HeatKernel(float(t), H)


def _format_weight(w):
    return "%d" % w if float(w).is_integer() else "%.17g" % w


def write_edge_list(graph: DataGraph, dest=None) -> str:
    """Serialize as ``i j w`` lines; returns the text and writes it when ``dest`` is given.

    A ``# n = N`` header is emitted only when trailing vertices are isolated,
    so edge lists read from such files are reproduced byte for byte.
    """
    edges = graph.edges()
    lines = []
    top = max((j for _, j, _ in edges), default=-1)
    if top + 1 != graph.n:
        lines.append(f"# n = {graph.n}")
    lines.extend(f"{i} {j} {_format_weight(w)}" for i, j, w in edges)
    text = "".join(line + "\n" for line in lines)
    if dest is not None:
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)
    return text


def read_edge_list(source) -> DataGraph:
    """Parse an edge list from a path, file object or string of text."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source) as fh:
            text = fh.read()
    else:
        text = str(source)
    n = None
    edges = []
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].replace(" ", "")
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'i j w', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise GraphError(f"line {lineno}: non-numeric field in {line!r}") from None
        if i < 0 or j < 0 or i == j or w < 0:
            raise GraphError(f"line {lineno}: invalid edge {line!r}")
        edges.append((i, j, w))
    top = max((max(i, j) for i, j, _ in edges), default=-1) + 1
    if n is None:
        n = top
    elif n < top:
        raise GraphError(f"header declares {n} vertices but edges reach {top - 1}")
    if n == 0:
        raise GraphError("empty edge list")
    return DataGraph.from_edges(n, edges)


# Small named graphs used by tests, examples and the CLI.

def complete_graph(n):
    W = np.ones((n, n))
    np.fill_diagonal(W, 0.0)
    return DataGraph(W)


def empty_graph(n):
    return DataGraph(np.zeros((n, n)))


def path_graph(n):
    return DataGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return DataGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n):
    """Vertex 0 joined to ``n - 1`` leaves."""
    return DataGraph.from_edges(n, [(0, i) for i in range(1, n)])


def complete_bipartite_graph(m, k):
    return DataGraph.from_edges(m + k, [(i, m + j) for i in range(m) for j in range(k)])


def disjoint_union(*graphs):
    n = sum(g.n for g in graphs)
    W = np.zeros((n, n))
    o = 0
    for g in graphs:
        W[o:o + g.n, o:o + g.n] = g.weights
        o += g.n
    return DataGraph(W)


def two_cliques_bridge(m):
    """Two copies of K_m joined by the single edge ``(m - 1, m)``."""
    return disjoint_union(complete_graph(m), complete_graph(m)).with_edge(m - 1, m)


def random_graph(n, p, rng):
    U = rng.random((n, n))
    W = np.triu((U < p).astype(float), 1)
    return DataGraph(W + W.T)


def random_regular_graph(n, d, rng, max_tries=1000):
    """Uniform-ish random simple ``d``-regular graph via the pairing model."""
    if (n * d) % 2 or d >= n:
        raise GraphError("need n * d even and d < n")
    for _ in range(max_tries):
        stubs = rng.permutation(np.repeat(np.arange(n), d))
        a, b = stubs[0::2], stubs[1::2]
        if (a == b).any():
            continue
        pairs = {(min(i, j), max(i, j)) for i, j in zip(a, b)}
        if len(pairs) != len(a):
            continue
        return DataGraph.from_edges(n, sorted(pairs))
    raise GraphError("failed to sample a simple regular graph")
