"""Pure numpy versions of the compiled kernels in ``_core.pyx``.

Both modules expose the same functions with the same tie-breaking rules, so
results agree exactly on integer-weighted graphs.
"""
import numpy as np

_CHUNK = 1 << 15


def cheeger_enumerate(W):
    """Minimize ``cut(S) / min(|S|, n - |S|)`` over all nonempty proper subsets.

    Only subsets excluding vertex ``n - 1`` are visited (the ratio is
    invariant under complement). Ties go to the smallest bitmask.

    Returns ``(boundary, size, mask)`` for the minimizer.
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    n = W.shape[0]
    total = 1 << (n - 1)
    shifts = np.arange(n - 1, dtype=np.int64)
    Wsub = W[: n - 1, :]
    best = (np.inf, 0.0, 0, 0)
    for start in range(1, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        B = ((masks[:, None] >> shifts) & 1).astype(np.float64)
        # boundary = sum_{i in S, j not in S} w_ij; column n-1 is never in S
        inside = B @ Wsub[:, : n - 1]
        boundary = (B * (Wsub.sum(1)[None, :] - inside)).sum(1)
        size = B.sum(1)
        ratio = boundary / np.minimum(size, n - size)
        i = int(np.argmin(ratio))
        if ratio[i] < best[0]:
            best = (float(ratio[i]), float(boundary[i]), int(size[i]), int(masks[i]))
    return best[1], best[2], best[3]


def sweep_scan(W, order):
    """Cut ratios of the prefixes ``order[:i]`` for ``i = 1 .. n-1``.

    Returns ``(i_best, boundaries)`` with ties going to the smaller prefix.
    """
    W = np.asarray(W, dtype=np.float64)
    order = np.asarray(order, dtype=np.intp)
    n = W.shape[0]
    Wp = W[np.ix_(order, order)]
    # adding vertex i to the prefix: boundary += deg_i - 2 * w(i, prefix)
    delta = Wp.sum(1) - 2.0 * np.triu(Wp, 1).sum(0)
    boundary = np.cumsum(delta)[: n - 1]
    sizes = np.arange(1, n, dtype=np.float64)
    ratio = boundary / np.minimum(sizes, n - sizes)
    return int(np.argmin(ratio)) + 1, boundary


def knn_select(D2, k):
    """Indices of the ``k`` nearest other points per row, ties to the lowest index."""
    D2 = np.array(D2, dtype=np.float64)
    np.fill_diagonal(D2, np.inf)
    return np.argsort(D2, axis=1, kind="stable")[:, :k].astype(np.intp)
