from __future__ import annotations

import numpy as np
import pytest

from biflab.core_maps import CubicHenonMap, PlanePoint, apply, differential, invert, reversor


def random_points(n, radius=5.0, seed=0):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    a = 2 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def test_origin_fixed_when_m1_zero():
    m = CubicHenonMap(1, 0.0, 0.0)
    assert apply(m, PlanePoint(0.0, 0.0)) == (0.0, 0.0)


def test_apply_direct_evaluation():
    assert apply(CubicHenonMap(1, 1.0, 2.0), (1.0, 1.0)) == (1.0, 3.0)


def test_apply_fixed_point_of_c_minus():
    assert apply(CubicHenonMap(-1, 0.0, 3.0), (1.0, 1.0)) == (1.0, 1.0)


def test_invert_examples():
    m = CubicHenonMap(1, 0.3, -0.7)
    p = (0.1, 0.2)
    back = invert(m, apply(m, p))
    assert np.allclose(back, p, atol=1e-14, rtol=0)
    assert invert(CubicHenonMap(1, 0.0, 0.0), (0.0, 0.0)) == (0.0, 0.0)
    assert invert(CubicHenonMap(-1, 0.0, 3.0), (1.0, 1.0)) == (1.0, 1.0)


def test_dissipative_inverse():
    m = CubicHenonMap(-1, 0.2, 0.5, j=0.3)
    for p in random_points(50, 2.0, seed=3):
        back = m.invert(m.apply(p))
        assert np.allclose(back, p, atol=1e-12)


def test_differential_trace_on_x_axis():
    m = CubicHenonMap(-1, 0.4, 1.7)
    assert np.trace(differential(m, (2.5, 0.0))) == pytest.approx(1.7, abs=0)


def test_differential_at_fold_point():
    m = CubicHenonMap(1, 2.0, -1.0)
    assert np.trace(differential(m, (1.0, 1.0))) == 2.0


def test_differential_matches_finite_differences():
    m = CubicHenonMap(1, 0.3, -0.4, j=0.8)
    p = np.array([0.3, -0.6])
    h = 1e-6
    fd = np.column_stack([
        (np.array(m.apply(p + h * e)) - np.array(m.apply(p - h * e))) / (2 * h) for e in np.eye(2)
    ])
    assert np.allclose(fd, m.differential(p), atol=1e-8)


def test_determinant_is_one_when_conservative():
    m = CubicHenonMap(1, 0.3, -0.7)
    dets = [np.linalg.det(m.differential(p)) for p in random_points(1000)]
    assert max(abs(d - 1) for d in dets) < 1e-14


def test_reversor_examples():
    assert reversor((1.0, 2.0)) == (2.0, 1.0)
    for p in random_points(20):
        assert reversor(reversor(p)) == tuple(p)


@pytest.mark.parametrize("nu", [1, -1])
def test_reversibility_and_round_trip(nu):
    m = CubicHenonMap(nu, 0.37, -0.81)
    for p in random_points(1000, seed=nu + 5):
        lfl = reversor(m.apply(reversor(p)))
        inv = m.invert(p)
        assert np.allclose(lfl, inv, atol=1e-13, rtol=0)
        assert np.allclose(m.invert(m.apply(p)), p, atol=1e-13, rtol=0)


def test_parameter_symmetry():
    m = CubicHenonMap(1, 0.6, -0.2)
    mm = m.with_params(m1=-0.6)
    for p in random_points(100, 3.0, seed=9):
        a = np.array(mm.apply(-p))
        b = -np.array(m.apply(p))
        assert np.allclose(a, b, atol=1e-12)


def test_vectorised_apply_matches_scalar():
    m = CubicHenonMap(-1, 0.1, 0.9)
    pts = random_points(10, 1.0)
    xs, ys = m.apply((pts[:, 0], pts[:, 1]))
    for i, p in enumerate(pts):
        assert m.apply(p) == (xs[i], ys[i])


def test_iterate_monodromy_determinant():
    m = CubicHenonMap(1, 0.2, -0.3, j=0.9)
    _, mono = m.iterate((0.1, 0.2), 5)
    assert np.linalg.det(mono) == pytest.approx(0.9**5, rel=1e-12)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        CubicHenonMap(0, 0.0, 0.0)
    with pytest.raises(ValueError):
        CubicHenonMap(2, 0.0, 0.0)
    with pytest.raises(ValueError):
        CubicHenonMap(1, 0.0, 0.0, j=0.0)
    with pytest.raises(ValueError):
        CubicHenonMap(True, 0.0, 0.0)


def test_conservative_flag_is_exact():
    assert CubicHenonMap(1, 0, 0).conservative
    assert not CubicHenonMap(1, 0, 0, j=1 + 1e-15).conservative


def test_overflow_propagates():
    m = CubicHenonMap(1, 0.0, 0.0)
    p = (1e200, 1e200)
    with np.errstate(over="ignore"):
        q = m.apply(np.array(p))
    assert not np.all(np.isfinite(q))
