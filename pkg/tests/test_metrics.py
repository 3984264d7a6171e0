import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from toporisk.metrics import (
    downside_dev,
    emr,
    f_test_variance,
    metric_report,
    ratios,
    realized_ptr,
    stdev,
    tail_index,
    var_cvar,
    z_test_cvar,
    z_test_sharpe,
    z_test_var,
)
from toporisk.topo_risk import TopoRiskConfig, asset_topological_risk

SMALL = TopoRiskConfig(sub_len=30, hop=10, grid_len=256)


@pytest.mark.parametrize("r, rf, expected", [([0.01, 0.03], 0, 0.02), ([0.05, 0.05], 0.05, 0.0),
                                             ([0.1, -0.1, 0.3], 0.1, 0.0)])
def test_emr(r, rf, expected):
    assert emr(r, rf) == pytest.approx(expected, abs=1e-15)


def test_emr_empty():
    with pytest.raises(ValueError):
        emr([])


@pytest.mark.parametrize("r, expected", [([0.2, 0.2], 0.0), ([1, -1], 1.0), ([0, 0, 3], math.sqrt(2))])
def test_stdev(r, expected):
    assert stdev(r) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("r, expected", [([1, 2], 0.0), ([-1, 0], math.sqrt(0.5)), ([-2, -2], 2.0)])
def test_downside_dev(r, expected):
    assert downside_dev(r) == pytest.approx(expected, abs=1e-15)


def test_var_cvar_hand_example():
    # losses {1,2,3,4}: returns are their negatives
    assert var_cvar([-1, -2, -3, -4], 0.5) == (3.0, 3.5)


def test_var_cvar_constant_losses():
    assert var_cvar(np.full(10, -0.02), 0.8) == pytest.approx((0.02, 0.02), abs=1e-15)


def test_var_cvar_k_equals_t():
    # T=4, alpha=0.75: k = 4, CVaR = max loss / (T (1 - alpha)) = max loss
    var, cvar = var_cvar([-1.0, -2.0, -3.0, -5.0], 0.75)
    assert (var, cvar) == (5.0, 5.0)
    var, cvar = var_cvar([-1.0, -2.0, -3.0, -5.0], 0.8)
    assert cvar == pytest.approx(5.0 / (4 * 0.2))


def test_var_cvar_alpha_too_high():
    with pytest.raises(ValueError, match="alpha too high"):
        var_cvar([-1, -2], 1 - 1e-12)


def test_tail_index_floor_round_off():
    # 0.7 * 10 is 7.000000000000001 in binary; 0.3 * 10 falls just short of 3
    assert tail_index(10, 0.7) == 8
    assert tail_index(10, 0.3) == 4


def test_ratios_hand_example():
    out = ratios([0.02, 0.02, -0.01], alpha=2 / 3)
    assert out["sharpe"] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert out["sortino"] == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert out["svr"] == pytest.approx(1.0, abs=1e-12)
    assert out["scr"] == pytest.approx(1.0, abs=1e-12)
    assert out["rachev"] == pytest.approx(2.0, abs=1e-12)


def test_ratios_symmetric_series():
    out = ratios([0.01, -0.01, 0.02, -0.02] * 5, alpha=0.9)
    assert out["sharpe"] == 0.0
    assert out["rachev"] == 1.0


def test_ratios_constant_series_undefined():
    out = ratios(np.full(20, 0.01), alpha=0.9)
    assert out["sharpe"] is None and out["sortino"] is None


def test_cvar_at_least_var(rng):
    for alpha in (0.5, 0.9, 0.95):
        for _ in range(20):
            var, cvar = var_cvar(rng.standard_t(3, 60), alpha)
            assert cvar >= var


series_st = st.lists(st.floats(-0.1, 0.1), min_size=25, max_size=60).map(np.array)


@given(series_st, st.floats(0.1, 20))
def test_scale_invariance(r, c):
    base, scaled = ratios(r, 0.9), ratios(c * r, 0.9)
    for key, value in base.items():
        if value is None or scaled[key] is None:
            continue
        assert scaled[key] == pytest.approx(value, rel=1e-10, abs=1e-10)
    assert emr(c * r) == pytest.approx(c * emr(r), rel=1e-10, abs=1e-15)
    assert stdev(c * r) == pytest.approx(c * stdev(r), rel=1e-10, abs=1e-15)
    assert downside_dev(c * r) == pytest.approx(c * downside_dev(r), rel=1e-10, abs=1e-15)
    v, cv = var_cvar(r, 0.9)
    v2, cv2 = var_cvar(c * r, 0.9)
    assert v2 == pytest.approx(c * v, rel=1e-10, abs=1e-15)
    assert cv2 == pytest.approx(c * cv, rel=1e-10, abs=1e-15)


@given(series_st, st.integers(0, 1000))
def test_permutation_invariance(r, seed):
    perm = np.random.default_rng(seed).permutation(len(r))
    a = metric_report(r, 0.9, topo_cfg=None).as_dict()
    b = metric_report(r[perm], 0.9, topo_cfg=None).as_dict()
    for key in a:
        if a[key] is None:
            assert b[key] is None
        else:
            assert b[key] == pytest.approx(a[key], rel=1e-10, abs=1e-14)


def test_report_marks_short_ptr():
    rep = metric_report(np.linspace(-0.01, 0.01, 40), 0.9)
    assert rep.ptr is None


def test_ptr_delegates_and_scales(rng):
    r = rng.normal(0, 0.01, 80)
    assert realized_ptr(r, SMALL) == asset_topological_risk(r, SMALL)
    assert realized_ptr(3 * r, SMALL) == pytest.approx(81 * realized_ptr(r, SMALL), rel=1e-8)
    assert realized_ptr(np.full(80, 0.002), SMALL) == 0.0


# ---------------------------------------------------------------- tests

def sharpe_z_reference(a, b):
    n = len(a)
    m1, m2 = sum(a) / n, sum(b) / n
    v1 = sum((x - m1) ** 2 for x in a) / (n - 1)
    v2 = sum((x - m2) ** 2 for x in b) / (n - 1)
    c12 = sum((x - m1) * (y - m2) for x, y in zip(a, b)) / (n - 1)
    s1, s2 = math.sqrt(v1), math.sqrt(v2)
    upsilon = (2 * v1 * v2 - 2 * s1 * s2 * c12 + 0.5 * m1 * m1 * v2 + 0.5 * m2 * m2 * v1
               - m1 * m2 / (s1 * s2) * c12 * c12) / n
    return (s2 * m1 - s1 * m2) / math.sqrt(upsilon)


def test_sharpe_identical():
    r = np.random.default_rng(0).normal(0.001, 0.01, 50)
    assert z_test_sharpe(r, r) == (0.0, 0.5)


def test_sharpe_vs_negation():
    r = np.random.default_rng(1).normal(0.002, 0.01, 50)
    r += 0.003 - r.mean()
    z, p = z_test_sharpe(r, -r)
    assert z > 0 and p < 0.5


def test_sharpe_matches_reimplementation():
    a = [0.012, -0.004, 0.007, 0.001, -0.010, 0.015, 0.003, -0.002, 0.009, 0.004]
    b = [0.006, 0.002, -0.008, 0.011, -0.001, 0.004, -0.006, 0.013, 0.000, 0.002]
    z, p = z_test_sharpe(a, b)
    assert z == pytest.approx(sharpe_z_reference(a, b), rel=1e-12)
    assert p == pytest.approx(0.5 * math.erfc(z / math.sqrt(2)), rel=1e-12)


def test_sharpe_zero_variance():
    with pytest.raises(ValueError):
        z_test_sharpe([0.01] * 5, [0.01, 0.02, 0.0, 0.01, 0.02])


def test_f_identical_and_doubled(rng):
    r = rng.normal(size=30)
    assert f_test_variance(r, r)[0] == 1.0
    assert f_test_variance(r, 2 * r)[0] == pytest.approx(4.0, rel=1e-14)


def test_f_two_points_closed_form():
    # F(1,1): P(F >= x) = 1 - (2/pi) arctan(sqrt(x))
    F, p = f_test_variance([0.0, 1.0], [0.0, 3.0])
    assert F == 9.0
    assert p == pytest.approx(1 - 2 / math.pi * math.atan(3.0), rel=1e-12)


def cvar_z_reference(values, c, alpha):
    y = sorted(values)
    n = len(y)
    j = int(math.floor(n * alpha + 1e-9))
    var = y[j - 1]
    tail = y[j:]
    nb = n * (1 - alpha)
    cvar = sum(tail) / nb
    spread = sum((t - cvar) ** 2 for t in tail) / nb + alpha * (cvar - var) ** 2
    return math.sqrt(nb) * (c - cvar) / math.sqrt(spread)


def test_cvar_z_matches_reimplementation():
    y = np.random.default_rng(9).standard_t(4, 20) * 0.01
    for c in (0.0, 0.01, 0.05):
        z, p = z_test_cvar(y, c, 0.9)
        assert z == pytest.approx(cvar_z_reference(list(y), c, 0.9), rel=1e-12)
        assert p == pytest.approx(stats.norm.cdf(z), rel=1e-12)


def test_cvar_z_zero_at_sample_cvar():
    y = np.arange(1.0, 21.0)
    # tail = {19, 20} over n(1 - alpha) = 2 gives 19.5
    assert z_test_cvar(y, 19.5, 0.9)[0] == pytest.approx(0.0, abs=1e-12)
    assert z_test_cvar(y, 100.0, 0.9)[0] > z_test_cvar(y, 30.0, 0.9)[0] > 0


def test_cvar_z_needs_tail():
    with pytest.raises(ValueError):
        z_test_cvar(np.arange(5.0), 1.0, 0.9)


def test_var_z_examples():
    y = np.arange(100.0)
    assert z_test_var(y, 5.0, 0.05)[0] == 0.0
    assert z_test_var(y, -1.0, 0.05)[0] == pytest.approx(-5 / math.sqrt(4.75), rel=1e-14)
    z, _ = z_test_var(y, 1000.0, 0.05)
    assert z == pytest.approx(100 * 0.95 / math.sqrt(100 * 0.05 * 0.95), rel=1e-14)
    with pytest.raises(ValueError):
        z_test_var(y, 0.0, 1.0)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_sharpe_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(0.001, 0.01, 40), rng.normal(0.0, 0.02, 40)
    assert z_test_sharpe(a, b)[0] == pytest.approx(-z_test_sharpe(b, a)[0], rel=1e-10)
