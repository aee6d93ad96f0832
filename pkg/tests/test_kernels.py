import numpy as np
import pytest

from flexinvest.solver.kernels import BACKENDS, DEFAULT_BACKEND, get_kernels


BASIC, AT_LB, AT_UB, FREE, FIXED = 0, 1, 2, 3, 4


@pytest.fixture
def both():
    if "compiled" not in BACKENDS:
        pytest.skip("compiled kernels not built")
    return get_kernels("compiled"), get_kernels("python")


def test_default_prefers_compiled():
    assert DEFAULT_BACKEND in BACKENDS
    with pytest.raises(ValueError):
        get_kernels("fortran")


@pytest.mark.parametrize("seed", range(20))
def test_price_agrees(both, seed):
    rng = np.random.default_rng(seed)
    n = 200
    d = rng.normal(size=n)
    w = rng.uniform(0.5, 4.0, n)
    status = rng.integers(0, 5, n).astype(np.int8)
    for bland in (False, True):
        assert both[0].price(d, w, status, 1e-9, bland) == both[1].price(d, w, status, 1e-9, bland)
    none = np.zeros(n)
    assert both[0].price(none, w, status, 1e-9, False) == -1 == both[1].price(none, w, status, 1e-9, False)


@pytest.mark.parametrize("seed", range(20))
def test_ratio_test_agrees(both, seed):
    rng = np.random.default_rng(seed)
    m = 150
    lb = np.where(rng.random(m) < 0.2, -np.inf, rng.uniform(-1, 0, m))
    ub = np.where(rng.random(m) < 0.3, np.inf, rng.uniform(1, 3, m))
    x = np.clip(rng.uniform(-1, 3, m), lb, ub)
    alpha = rng.normal(size=m) * (rng.random(m) < 0.4)
    head = rng.permutation(1000)[:m].astype(np.int64)
    for bland in (False, True):
        for direction in (1.0, -1.0):
            a = both[0].ratio_test(x, lb, ub, alpha, direction, 1e-9, 1e-9, bland, head)
            b = both[1].ratio_test(x, lb, ub, alpha, direction, 1e-9, 1e-9, bland, head)
            assert a[0] == b[0] and a[1] == pytest.approx(b[1], rel=1e-15, abs=0)


def _etas(rng, m, k):
    # like the solver's eta file: distinct off-pivot rows per eta column
    eta_r = rng.integers(0, m, k).astype(np.int64)
    eta_piv = rng.uniform(0.5, 2.0, k) * rng.choice([-1, 1], k)
    idx = [np.sort(rng.choice(np.delete(np.arange(m), r), rng.integers(0, 6), replace=False)) for r in eta_r]
    eta_start = np.concatenate([[0], np.cumsum([len(i) for i in idx])]).astype(np.int64)
    eta_idx = np.concatenate(idx).astype(np.int64)
    eta_val = rng.normal(size=len(eta_idx))
    return eta_r, eta_piv, eta_start, eta_idx, eta_val


@pytest.mark.parametrize("seed", range(10))
def test_eta_products_agree(both, seed):
    rng = np.random.default_rng(seed)
    m, k = 40, 12
    etas = _etas(rng, m, k)
    for op in ("ftran_etas", "btran_etas"):
        z0 = rng.normal(size=m)
        za, zb = z0.copy(), z0.copy()
        getattr(both[0], op)(za, k, *etas)
        getattr(both[1], op)(zb, k, *etas)
        assert np.allclose(za, zb, rtol=1e-13, atol=1e-13)


def test_env_forces_python_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, FLEXINVEST_KERNELS="python")
    code = "from flexinvest.solver.kernels import DEFAULT_BACKEND; print(DEFAULT_BACKEND)"
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert res.stdout.strip() == "python"
