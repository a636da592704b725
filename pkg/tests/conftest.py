import itertools

import numpy as np
import pytest

from manireg import _purecore

try:
    from manireg import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = [pytest.param(_purecore, id="python")]
if _core is not None:
    BACKENDS.append(pytest.param(_core, id="cython"))


@pytest.fixture(params=BACKENDS)
def core(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_cheeger(W):
    """Independent oracle: every subset via itertools, boundary by explicit loops."""
    n = len(W)
    best = np.inf
    for r in range(1, n):
        for S in itertools.combinations(range(n), r):
            inside = set(S)
            b = sum(W[i][j] for i in S for j in range(n) if j not in inside)
            best = min(best, b / min(r, n - r))
    return best
