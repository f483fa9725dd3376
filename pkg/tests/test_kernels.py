"""Backend equivalence and determinism of the enumeration kernel."""

import numpy as np
import pytest
from scipy.special import gammaln

from dimerfield import ModelParams, split_sizes
from dimerfield._kernels import (
    _partition_sums_numpy,
    active_backend,
    get_numba_kernel,
)


def _kernel_args(n, params):
    sizes = split_sizes(n, params.alpha)
    lgf = gammaln(np.arange(n + 2, dtype=float) + 1.0)
    return (
        sizes.n_a,
        sizes.n_b,
        float(np.log(n)),
        1.0 / n,
        lgf,
        np.ascontiguousarray(params.h),
        np.ascontiguousarray(params.j_sym),
    )


def test_active_backend_named():
    assert active_backend() in ("numba", "numpy")


@pytest.mark.parametrize("n", [5, 30, 120])
def test_backends_agree(n):
    kernel = get_numba_kernel()
    if kernel is None:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(n)
    params = ModelParams(
        alpha=rng.uniform(0.2, 0.8),
        h=rng.uniform(-1.5, 1.0, 3),
        J=rng.uniform(-1, 1, (3, 3)),
    )
    args = _kernel_args(n, params)
    jit = kernel(*args)
    ref = _partition_sums_numpy(*args)
    for a, b in zip(jit, ref):
        assert a == pytest.approx(b, rel=1e-11, abs=1e-11)


def test_numpy_path_deterministic():
    params = ModelParams(alpha=0.37, h=[0.2, -0.4, 0.6], J=0.8 * np.eye(3))
    args = _kernel_args(40, params)
    first = _partition_sums_numpy(*args)
    second = _partition_sums_numpy(*args)
    assert first == second
