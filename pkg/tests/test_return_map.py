from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest
from scipy.optimize import root

from biflab.bif_curves import CurveId, CurveTag, h0_mu1, pullback_curve
from biflab.orbit_solver import Stability, classify_trace, fixed_points
from biflab.return_map import (
    DomainError,
    LocalSaddleMap,
    ModelFamily,
    conjugated_return,
    convergence_table,
    first_return,
    first_return_differential,
    h0_detect,
    local_iterate,
    nu_for,
    rescale_params,
    unrescale_params,
    unstable_image,
    write_convergence_csv,
)

from oracles import tangency_mu1_numeric


def simple_model(lam=0.5, beta1=0.0, mu1=0.0, mu2=0.0, b=1.0, d=1.0, xp=1.0, ym=1.0):
    return ModelFamily(LocalSaddleMap(lam, beta1), mu1, mu2, b, d, xp, ym)


def test_linear_saddle_iterate():
    loc = LocalSaddleMap(0.5)
    assert local_iterate(loc, (0.3, 0.2), 5) == pytest.approx((0.3 / 32, 0.2 * 32), rel=1e-15)


def test_product_is_conserved():
    loc = LocalSaddleMap(-0.6, 0.4)
    p = (0.7, 0.3)
    for k in (1, 5, 17):
        q = local_iterate(loc, p, k)
        assert q[0] * q[1] == pytest.approx(p[0] * p[1], rel=1e-14)


def test_exact_iterate_agrees_with_loop():
    loc = LocalSaddleMap(0.7, 0.3)
    p = (0.4, 0.05)
    q = p
    for k in range(1, 31):
        q = loc.apply(q)
        exact = local_iterate(loc, p, k)
        assert abs(q[0] - exact[0]) <= 1e-12 * max(1, abs(exact[0]))
        assert abs(q[1] - exact[1]) <= 1e-12 * max(1, abs(exact[1]))


def test_cross_form_coefficient_matches_linear_term():
    loc = LocalSaddleMap(0.5, 0.3)
    s, k = 1e-4, 6
    factor = loc.factor(s) ** k
    assert (factor - 1) / s == pytest.approx(0.3 * k, rel=1e-3)


def test_local_differential_is_symplectic():
    loc = LocalSaddleMap(0.45, -0.2)
    for k in (1, 4, 9):
        jac = loc.iterate_differential((0.3, 0.8), k)
        assert np.linalg.det(jac) == pytest.approx(1.0, abs=1e-12)


def test_moser_factor_domain():
    loc = LocalSaddleMap(0.5, -1.0)
    with pytest.raises(DomainError):
        local_iterate(loc, (2.0, 1.0), 3)
    with pytest.raises(DomainError):
        LocalSaddleMap(1.5)
    with pytest.raises(DomainError):
        LocalSaddleMap(0.0)


def test_first_return_closed_form():
    m = simple_model(lam=0.4, mu1=0.01, mu2=-0.02, b=1.3, d=0.8, xp=0.9, ym=1.1)
    k = 6
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = m.x_plus + rng.uniform(-0.1, 0.1)
        y = m.lam**k * (m.y_minus + rng.uniform(-0.1, 0.1))
        v = y / m.lam**k - m.y_minus
        want = (m.x_plus + m.b * v, m.mu1 + m.c * m.lam**k * x + m.mu2 * v + m.d * v**3)
        got = first_return(m, k, (x, y))
        assert abs(got[0] - want[0]) < 1e-13 and abs(got[1] - want[1]) < 1e-13


def test_first_return_is_symplectic():
    m = simple_model(lam=0.6, beta1=0.2, mu1=0.03, mu2=0.01, b=0.7, d=-1.2)
    for k in (2, 5, 8):
        for dx, dy in ((0.0, 0.0), (0.05, -0.02), (-0.03, 0.04)):
            p = (m.x_plus + dx, m.lam**k * (m.y_minus + dy))
            assert np.linalg.det(first_return_differential(m, k, p)) == pytest.approx(1.0, abs=1e-12)


def test_first_return_differential_matches_finite_differences():
    m = simple_model(lam=0.6, beta1=0.2, mu1=0.03, mu2=0.01)
    k = 3
    p = np.array([m.x_plus + 0.02, m.lam**k * (m.y_minus - 0.01)])
    jac = first_return_differential(m, k, p)
    for j, h in enumerate((1e-6, 1e-6 * m.lam**k)):
        e = np.zeros(2)
        e[j] = h
        fd = (np.array(first_return(m, k, p + e)) - np.array(first_return(m, k, p - e))) / (2 * h)
        assert np.allclose(fd, jac[:, j], rtol=1e-6, atol=1e-6)


def test_fixed_point_of_return_is_elliptic_single_round_orbit():
    m = simple_model(mu1=1 / 8, mu2=-1 / 16)
    k = 4
    assert rescale_params(m, k) == pytest.approx((0.0, -1.0, 1), abs=1e-15)
    # the limit map C+ at (0, -1) has the elliptic fixed point Y=0; start Newton there
    scale = math.sqrt(abs(m.lam**k) / abs(m.d))
    sol = root(lambda p: np.array(first_return(m, k, p)) - p,
               [m.x_plus, m.lam**k * m.y_minus], method="hybr", options={"xtol": 1e-15})
    assert sol.success
    p = sol.x
    trace = np.trace(first_return_differential(m, k, p))
    assert classify_trace(trace)[0] is Stability.ELLIPTIC
    assert trace == pytest.approx(-1.0, abs=1e-10)
    assert (p[0] - m.x_plus) / (m.b * scale) == pytest.approx(0.0, abs=1e-10)


def test_rescale_example():
    m = simple_model(mu1=1 / 8, mu2=-1 / 16)
    m1, m2, nu = rescale_params(m, 4)
    assert m1 == 0.0
    assert m2 == -1.0
    assert nu == 1


def test_nu_sign_rule():
    m = simple_model(lam=-0.5, d=1.0)
    assert nu_for(m, 3) == -1 and nu_for(m, 4) == 1
    m = simple_model(lam=-0.5, d=-1.0)
    assert nu_for(m, 3) == 1 and nu_for(m, 4) == -1
    assert rescale_params(simple_model(lam=-0.5), 5)[2] == -1


def test_m2_scales_by_inverse_lambda():
    m = simple_model(lam=0.3, mu2=0.002)
    for k in (2, 5, 9):
        assert rescale_params(m, k + 1)[1] == pytest.approx(rescale_params(m, k)[1] / 0.3, rel=1e-14)


def test_unrescale_round_trip():
    m = simple_model(lam=-0.7, b=1.3, d=0.8, xp=0.9, ym=1.1)
    for k in (2, 7, 15):
        mu = unrescale_params(m, k, 0.4, -0.7)
        m1, m2, _ = rescale_params(m.with_mu(*mu), k)
        assert m1 == pytest.approx(0.4, abs=1e-12)
        assert m2 == pytest.approx(-0.7, abs=1e-12)


@pytest.mark.parametrize("lam", [0.3, -0.5, 0.7])
def test_conjugated_return_exact_for_linear_saddle(lam):
    m = simple_model(lam=lam, b=1.3, d=0.8, xp=0.9, ym=1.1)
    for k in (2, 9):
        mm = m.with_mu(*unrescale_params(m, k, 0.4, -0.7))
        assert conjugated_return(mm, k).sup_error(2.0, 11) < 1e-12


def test_conjugated_return_parity_of_cubic_sign():
    m = simple_model(lam=-0.5, d=1.0)
    for k in (6, 7):
        rr = conjugated_return(m.with_mu(*unrescale_params(m, k, 0.0, 0.0)), k)
        cubic = ((rr.apply((0.0, 2.0))[1] - rr.apply((0.0, -2.0))[1]) / 2
                 - (rr.apply((0.0, 1.0))[1] - rr.apply((0.0, -1.0))[1]))
        assert cubic == pytest.approx(6.0 * (1 if k % 2 == 0 else -1), abs=1e-9)
        assert rr.nu == (1 if k % 2 == 0 else -1)


def test_remainder_decays_with_k():
    m = simple_model(lam=0.5, beta1=0.3, b=1.3, d=0.8, xp=0.9, ym=1.1)
    rows = convergence_table(m, range(8, 21), target=(0.4, -0.7))
    errs = np.array([r["sup_error"] for r in rows])
    ks = np.array([r["k"] for r in rows])
    assert np.all(np.diff(errs) < 0)
    slope = np.polyfit(ks, np.log(errs / ks), 1)[0]
    exponent = slope / math.log(0.5)  # error ~ k |lambda|^(exponent*k)
    assert 0.4 <= exponent <= 0.6


def test_convergence_csv(tmp_path):
    m = simple_model(b=1.3, d=0.8, xp=0.9, ym=1.1)
    rows = convergence_table(m, [2, 3], target=(0.4, -0.7), n=5)
    path = tmp_path / "conv.csv"
    write_convergence_csv(rows, path)
    with open(path, newline="") as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["k", "sup_error", "m1", "m2", "nu"]
    assert len(data) == 3
    assert float(data[1][2]) == pytest.approx(0.4, abs=1e-12)


def test_model_json(tmp_path):
    cfg = {"lambda": 0.5, "beta1": 0.3, "mu1": 0.0, "mu2": 0.0, "b": 1.0, "d": 1.0, "x_plus": 1.0, "y_minus": 1.0}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(cfg))
    m = ModelFamily.from_json(path)
    assert m.lam == 0.5 and m.local.beta1 == 0.3 and m.c == -1.0
    with pytest.raises(DomainError):
        ModelFamily.from_dict({**cfg, "f11": 0.1})
    with pytest.raises(DomainError):
        ModelFamily.from_dict({**cfg, "lambda": 1.5})
    with pytest.raises(DomainError):
        ModelFamily.from_dict({k: v for k, v in cfg.items() if k != "d"})
    with pytest.raises(DomainError):
        ModelFamily.from_dict({**cfg, "b": "one"})


def test_model_invariants():
    m = simple_model(b=1.3)
    assert m.b * m.c == pytest.approx(-1.0, abs=1e-16)
    with pytest.raises(DomainError):
        simple_model(d=0.0)
    with pytest.raises(DomainError):
        simple_model(xp=-1.0)


def test_non_simplified_model_not_realized():
    m = ModelFamily(LocalSaddleMap(0.5), 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, f11=0.1)
    with pytest.raises(NotImplementedError):
        first_return(m, 3, (1.0, 0.1))


def test_h0_examples():
    m = simple_model()
    assert h0_detect(m, -3.0) == pytest.approx([-2.0, 2.0], abs=1e-14)
    assert h0_detect(m, 0.0) == [0.0]
    assert h0_detect(simple_model(d=-1.0), -3.0) == []


@pytest.mark.parametrize("b,d", [(1.0, 1.0), (1.7, 0.6), (-0.8, 2.0), (1.2, -0.9)])
def test_h0_against_numeric_tangency(b, d):
    m = simple_model(b=b, d=d)
    for mu2 in np.linspace(-2.0, 2.0, 9):
        got = h0_detect(m, float(mu2))
        assert got == pytest.approx(h0_mu1(float(mu2), d), abs=1e-12)
        want = tangency_mu1_numeric(float(mu2), d, b)
        if mu2 == 0:
            continue
        assert len(got) == len(want)
        assert got == pytest.approx(want, abs=1e-10)
        for mu1 in got:
            # at the detected mu1 the image curve touches y = 0 without crossing nearby
            t = abs(b) * math.sqrt(-mu2 / (3 * d))
            vals = [unstable_image(m.with_mu(mu1, float(mu2)), m.x_plus + s * t) for s in (1, -1)]
            assert min(abs(v) for v in vals) < 1e-12


@pytest.mark.parametrize("k", [3, 4, 6])
def test_pullback_matches_fold_of_return_map(k):
    m = simple_model(lam=0.5, b=1.3, d=0.8, xp=0.9, ym=1.1)
    m2 = -1.0
    predicted = pullback_curve(CurveId(CurveTag.L_PLUS, 1), m, k, [m2])[1]
    mu2 = predicted[1]
    lk = m.lam**k
    scale = math.sqrt(abs(lk) / abs(m.d))
    # start from the parabolic fixed point (1, 1) of the limit map, moved to original coordinates
    guess = [m.x_plus + m.b * scale * 1.0 * 1.05, lk * (m.y_minus + scale * 1.0 * 0.95), predicted[0] * (1 + 1e-4)]

    def system(v):
        x, y, mu1 = v
        mm = m.with_mu(mu1, mu2)
        fx, fy = first_return(mm, k, (x, y))
        tr = np.trace(first_return_differential(mm, k, (x, y)))
        return [(fx - x) / scale, (fy - y) / (lk * scale), tr - 2.0]

    sol = root(system, guess, method="hybr", options={"xtol": 1e-15})
    assert sol.success
    assert abs(sol.x[2] - predicted[0]) < 1e-6 * abs(m.lam) ** (1.5 * k)
    # and the limit map agrees: this is the fold of C+ at (2, -1)
    traces = [o.trace for o in fixed_points(conjugated_return(m.with_mu(sol.x[2], mu2), k).henon)]
    assert min(abs(t - 2) for t in traces) < 1e-6
