"""Backend selection and the deterministic reduction primitive.

The hot momentum sums are compiled with numba when it is importable and not
disabled. Set ``QFLAT_NUMBA=0`` to force the pure-numpy path; both paths use
the same reduction tree, so results agree up to ulp-level differences in the
transcendental functions.
"""
import os
import warnings

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None
else:
    # an old system TBB only means numba falls back to another threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer")


def _env_flag(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() not in ("0", "false", "no", "off", "")


USE_NUMBA = numba is not None and _env_flag("QFLAT_NUMBA", True)


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator without numba."""
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


if numba is not None:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n):
    """Set the numba worker count; ignored on the numpy path."""
    if n is None or numba is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


def default_threads():
    env = os.environ.get("QFLAT_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


# Pairwise tree: at each level neighbours (2i, 2i+1) are added and an odd tail
# element is carried unchanged. The order depends only on the length.


def pairwise_sum(a, axis=-1):
    """Deterministic pairwise (tree) sum of ``a`` along ``axis``."""
    a = np.moveaxis(np.asarray(a), axis, -1)
    n = a.shape[-1]
    if n == 0:
        return np.zeros(a.shape[:-1], dtype=a.dtype)
    while n > 1:
        half = n // 2
        s = a[..., 0:2 * half:2] + a[..., 1:2 * half:2]
        if n % 2:
            s = np.concatenate([s, a[..., n - 1:n]], axis=-1)
        a = s
        n = a.shape[-1]
    return a[..., 0]


@njit
def pairwise_sum_1d(buf):
    """In-place pairwise tree sum of a non-empty 1-D buffer (destroys ``buf``)."""
    n = buf.shape[0]
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]
