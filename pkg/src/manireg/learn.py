"""Kernel solvers with Tikhonov and manifold (graph Laplacian) regularization.

Every solver returns a :class:`KernelModel` whose prediction is the finite
expansion ``f(x) = sum_i a_i K(x_i, x)`` over the training points.

All objectives share one shape::

    (1/N_L) sum_{i <= N_L} loss(y_i, (K a)_i)
        + gamma_K a^T K a + gamma_I / N^2 a^T K L K a

with ``N = N_L + N_U``. The supervised solvers are the case ``N_U = 0``,
``gamma_I = 0`` with ``lambda`` in place of ``gamma_K``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from manireg.graph import DataGraph, Laplacian, build_graph, laplacian
from manireg.kernels import Kernel, gram_matrix

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class DivergenceError(SolverError):
    """Objective rose on too many consecutive steps."""


@dataclass(frozen=True, eq=False)
class SemiSupervisedDataset:
    """``points[:n_labeled]`` carry ``labels``; the rest are unlabeled."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError("points must be an (N, d) array")
        if not 1 <= len(y) <= len(X):
            raise ValueError(f"need 1 <= N_L <= N, got N_L={len(y)}, N={len(X)}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("points and labels must be finite")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "points", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_labeled(self):
        return len(self.labels)

    @property
    def n_unlabeled(self):
        return len(self.points) - len(self.labels)

    @property
    def labeled_points(self):
        return self.points[: self.n_labeled]

    def is_binary(self):
        return bool(np.all(np.abs(self.labels) == 1))


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    step_size: float | None = None
    grad_tol: float = 1e-6
    seed: int = 0
    divergence_window: int = 10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")


@dataclass(frozen=True, eq=False)
class KernelModel:
    kernel: Kernel
    support_points: np.ndarray
    coefficients: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.array(self.support_points, dtype=float)
        a = np.array(self.coefficients, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if len(X) != len(a):
            raise ValueError("one coefficient per support point expected")
        if not np.all(np.isfinite(a)):
            raise SolverError("non-finite coefficients")
        X.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "support_points", X)
        object.__setattr__(self, "coefficients", a)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None] if self.support_points.shape[1] == 1 else X[None, :]
        if X.shape[1] != self.support_points.shape[1]:
            raise ValueError(
                f"dimension mismatch: model has d={self.support_points.shape[1]}, got {X.shape[1]}")
        return self.kernel.cross(X, self.support_points) @ self.coefficients


def predict(model: KernelModel, x):
    """``sum_i a_i K(x_i, x)``; a single point gives a float, an (m, d) array a vector."""
    x = np.asarray(x, dtype=float)
    d = model.support_points.shape[1]
    single = x.ndim == 0 or (x.ndim == 1 and (d > 1 or x.shape[0] == 1))
    if single:
        x = np.atleast_1d(x)
        if x.shape[0] != d:
            raise ValueError(f"dimension mismatch: model has d={d}, got {x.shape[0]}")
        return float(model.decision_function(x[None, :])[0])
    return model.decision_function(x)


def classify(model: KernelModel, x):
    """Sign of :func:`predict`, with ``sign(0) = +1``."""
    s = predict(model, x)
    if np.ndim(s) == 0:
        return 1 if s >= 0 else -1
    return np.where(s >= 0, 1, -1)


# -- objectives ---------------------------------------------------------------

_LOSSES = ("squared", "logistic", "hinge")


@dataclass(frozen=True, eq=False)
class Objective:
    """Regularized empirical risk over representer coefficients ``a``."""

    K: np.ndarray
    y: np.ndarray
    loss: str
    gamma_K: float
    gamma_I: float = 0.0
    L: np.ndarray | None = None

    def __post_init__(self):
        if self.loss not in _LOSSES:
            raise ValueError(f"loss must be one of {_LOSSES}")

    @property
    def n_labeled(self):
        return len(self.y)

    @property
    def n(self):
        return self.K.shape[0]

    def _intrinsic(self):
        return self.gamma_I != 0 and self.L is not None

    def margins(self, a):
        return self.K[: self.n_labeled] @ a

    def data_term(self, a):
        f = self.margins(a)
        y = self.y
        if self.loss == "squared":
            r = f - y
            return float(r @ r) / len(y)
        if self.loss == "logistic":
            return float(np.logaddexp(0.0, -y * f).mean())
        return float(np.maximum(0.0, 1.0 - y * f).mean())

    def intrinsic_penalty(self, a):
        """``a^T K L K a`` (unscaled)."""
        if self.L is None:
            return 0.0
        f = self.K @ a
        return float(f @ self.L @ f)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        val = self.data_term(a) + self.gamma_K * float(a @ self.K @ a)
        if self._intrinsic():
            val += self.gamma_I / self.n ** 2 * self.intrinsic_penalty(a)
        return val

    def gradient(self, a):
        """Gradient, or the subgradient taking 0 at hinge kinks."""
        a = np.asarray(a, dtype=float)
        nl = self.n_labeled
        Kl = self.K[:nl]
        f = Kl @ a
        y = self.y
        if self.loss == "squared":
            g_f = 2.0 * (f - y) / nl
        elif self.loss == "logistic":
            # d/df log(1 + exp(-y f)) = -y sigmoid(-y f)
            g_f = -y * np.exp(-np.logaddexp(0.0, y * f)) / nl
        else:
            g_f = np.where(1.0 - y * f > 0.0, -y, 0.0) / nl
        Ka = self.K @ a
        g = Kl.T @ g_f + 2.0 * self.gamma_K * Ka
        if self._intrinsic():
            g += 2.0 * self.gamma_I / self.n ** 2 * (self.K @ (self.L @ Ka))
        return g

    def curvature_matrix(self):
        """PSD majorant of the Hessian; its top eigenvalue sets the default step."""
        c = {"squared": 2.0, "logistic": 0.25, "hinge": 1.0}[self.loss]
        Kl = self.K[: self.n_labeled]
        M = c / self.n_labeled * Kl.T @ Kl + 2.0 * self.gamma_K * self.K
        if self._intrinsic():
            M += 2.0 * self.gamma_I / self.n ** 2 * self.K @ self.L @ self.K
        return M


def power_iteration(M, iters=200, seed=0, rtol=1e-10):
    """Largest eigenvalue of a symmetric PSD matrix."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(v @ w)
        v = w / nw
        if abs(new - lam) <= rtol * abs(new):
            return new
        lam = new
    return lam


def gradient_descent(obj: Objective, config: SolverConfig, a0=None):
    """Fixed-step (sub)gradient descent with best-iterate tracking.

    Returns ``(a_best, info)``; ``info["history"]`` holds the objective at
    every iterate.
    """
    n = obj.n
    step = config.step_size
    if step is None:
        lhat = power_iteration(obj.curvature_matrix(), seed=config.seed)
        step = 0.1 / lhat if lhat > 0 else 1.0
    a = np.zeros(n) if a0 is None else np.array(a0, dtype=float)
    val = obj(a)
    best_a, best_val = a.copy(), val
    history = [val]
    rises = 0
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        g = obj.gradient(a)
        if np.linalg.norm(g) <= config.grad_tol:
            converged = True
            break
        a = a - step * g
        new = obj(a)
        if not np.isfinite(new):
            raise DivergenceError("objective is no longer finite; use a smaller step_size")
        rises = rises + 1 if new > val else 0
        if rises >= config.divergence_window:
            raise DivergenceError(
                f"objective rose on {rises} consecutive steps; use a smaller step_size")
        val = new
        history.append(val)
        if val < best_val:
            best_a, best_val = a.copy(), val
    info = {
        "iterations": it,
        "converged": converged,
        "step_size": step,
        "objective": best_val,
        "history": history,
    }
    return best_a, info


# -- solvers --------------------------------------------------------------------

def _labels(y, binary):
    y = np.asarray(y, dtype=float).ravel()
    if binary and not np.all(np.abs(y) == 1):
        raise ValueError("classification labels must be -1 or +1")
    return y


def _points(X):
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _solve_checked(A, b, assume_pd, rtol=1e-8):
    """Solve ``A x = b``; falls back to least squares when the residual check fails."""
    flagged = False
    try:
        if assume_pd:
            x = scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), b)
        else:
            x = scipy.linalg.solve(A, b)
        ok = np.linalg.norm(A @ x - b) <= rtol * max(1.0, np.linalg.norm(b))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        ok = False
    if not ok:
        log.warning("direct solve failed its residual check; using least squares")
        x = scipy.linalg.lstsq(A, b)[0]
        flagged = True
    return x, flagged


def fit_rls(kernel: Kernel, X, y, lam: float) -> KernelModel:
    """Kernel ridge regression: ``(K + lam N I) a = y``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = _points(X)
    y = _labels(y, False)
    N = len(X)
    if N < 1 or len(y) != N:
        raise ValueError("need one label per point")
    K = gram_matrix(kernel, X)
    a, flagged = _solve_checked(K + lam * N * np.eye(N), y, assume_pd=True)
    obj = Objective(K, y, "squared", lam)
    return KernelModel(kernel, X, a, {"algo": "rls", "lambda": lam, "least_squares": flagged,
                                       "objective": obj(a)})


def rls_regression_form(X, y, lam, X_test):
    """Linear-kernel RLS through the ``d x d`` system ``(X^T X + lam N I) w = X^T y``."""
    X = _points(X)
    N, d = X.shape
    w = np.linalg.solve(X.T @ X + lam * N * np.eye(d), X.T @ np.asarray(y, dtype=float))
    return _points(X_test) @ w


def fit_kernel_logistic(kernel: Kernel, X, y, lam: float,
                        config: SolverConfig = SolverConfig()) -> KernelModel:
    """Kernel logistic regression by gradient descent."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = _points(X)
    y = _labels(y, True)
    K = gram_matrix(kernel, X)
    obj = Objective(K, y, "logistic", lam)
    a, info = gradient_descent(obj, config)
    info.update(algo="logistic", **{"lambda": lam})
    return KernelModel(kernel, X, a, info)


def _fit_hinge(kernel, X, y, gamma_K, gamma_I, L, config, algo):
    K = gram_matrix(kernel, X)
    obj = Objective(K, y, "hinge", gamma_K, gamma_I, L)
    a, info = gradient_descent(obj, config)
    info.update(algo=algo, intrinsic_penalty=obj.intrinsic_penalty(a) if L is not None else None)
    return KernelModel(kernel, X, a, info)


def fit_svm(kernel: Kernel, X, y, lam: float, config: SolverConfig = SolverConfig()) -> KernelModel:
    """Kernel SVM (hinge loss) by subgradient descent in the representer coefficients."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = _points(X)
    y = _labels(y, True)
    model = _fit_hinge(kernel, X, y, lam, 0.0, None, config, "svm")
    model.info["lambda"] = lam
    return model


def _graph_laplacian(dataset, graph_spec, normalized=False):
    if isinstance(graph_spec, Laplacian):
        L = graph_spec
    elif isinstance(graph_spec, DataGraph):
        L = laplacian(graph_spec, normalized)
    else:
        L = laplacian(build_graph(dataset.points, graph_spec), normalized)
    if L.n != len(dataset.points):
        raise ValueError("graph must span all labeled and unlabeled points")
    return L.matrix


def fit_lap_rls(kernel: Kernel, dataset: SemiSupervisedDataset, gamma_K: float, gamma_I: float,
                graph_spec="knn:8") -> KernelModel:
    """Laplacian RLS.

    Setting the objective gradient to zero and cancelling a factor of ``K``
    gives ``(J K + N_L gamma_K I + N_L gamma_I / N^2 L K) a = Y``.
    """
    if not gamma_K > 0:
        raise ValueError("gamma_K must be positive")
    if gamma_I < 0:
        raise ValueError("gamma_I must be nonnegative")
    X = dataset.points
    N, NL = len(X), dataset.n_labeled
    K = gram_matrix(kernel, X)
    L = _graph_laplacian(dataset, graph_spec) if gamma_I > 0 else None
    Y = np.zeros(N)
    Y[:NL] = dataset.labels
    A = np.zeros((N, N))
    A[:NL] = K[:NL]
    A += NL * gamma_K * np.eye(N)
    if L is not None:
        A += NL * gamma_I / N ** 2 * (L @ K)
    # with gamma_I = 0 the system is symmetric positive definite only when N_U = 0
    a, flagged = _solve_checked(A, Y, assume_pd=(L is None and NL == N))
    obj = Objective(K, dataset.labels, "squared", gamma_K, gamma_I, L)
    return KernelModel(kernel, X, a, {
        "algo": "lap-rls", "gamma_K": gamma_K, "gamma_I": gamma_I, "least_squares": flagged,
        "objective": obj(a),
        "gradient_norm": float(np.linalg.norm(obj.gradient(a))),
    })


def fit_lap_svm(kernel: Kernel, dataset: SemiSupervisedDataset, gamma_K: float, gamma_I: float,
                graph_spec="knn:8", config: SolverConfig = SolverConfig()) -> KernelModel:
    """Laplacian SVM by subgradient descent."""
    if not gamma_K > 0:
        raise ValueError("gamma_K must be positive")
    if gamma_I < 0:
        raise ValueError("gamma_I must be nonnegative")
    if not dataset.is_binary():
        raise ValueError("classification labels must be -1 or +1")
    L = _graph_laplacian(dataset, graph_spec) if gamma_I > 0 else None
    model = _fit_hinge(kernel, dataset.points, dataset.labels, gamma_K, gamma_I, L, config,
                       "lap-svm")
    model.info.update(gamma_K=gamma_K, gamma_I=gamma_I)
    return model


def lap_objective(model: KernelModel, dataset: SemiSupervisedDataset, loss, gamma_K, gamma_I,
                  graph_spec="knn:8") -> Objective:
    """Rebuild the objective a model was fit against, for auditing."""
    K = gram_matrix(model.kernel, dataset.points)
    L = _graph_laplacian(dataset, graph_spec)
    return Objective(K, dataset.labels, loss, gamma_K, gamma_I, L)
