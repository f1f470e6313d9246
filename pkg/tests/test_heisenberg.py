"""Group law, vector fields, representation, Fourier transform, and cutoff."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szlab.errors import SupportTruncationError
from szlab.grids import centered_grid
from szlab.heisenberg import (
    HeisenbergPoint,
    RepresentationParams,
    band_cutoff,
    calibrate_plancherel_constant,
    dilate,
    group_fourier,
    group_inverse,
    group_mul,
    homogeneous_norm,
    identity_point,
    plancherel_check,
    plancherel_constant,
    schrodinger_rep,
    sublaplacian,
    symmetric_lambda_grid,
    vector_field,
)

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def _point(vals):
    return HeisenbergPoint([vals[0]], [vals[1]], vals[2])


# -- group structure ---------------------------------------------------------

def test_group_law_example():
    g = group_mul(_point((1.0, 0.0, 0.0)), _point((0.0, 1.0, 0.0)))
    assert np.allclose(g.x, [1.0]) and np.allclose(g.y, [1.0])
    assert g.t == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite),
       st.tuples(finite, finite, finite))
def test_group_axioms(a, b, c):
    ga, gb, gc = _point(a), _point(b), _point(c)
    left = group_mul(group_mul(ga, gb), gc)
    right = group_mul(ga, group_mul(gb, gc))
    assert np.max(np.abs(left.x - right.x)) < 1e-12 * (1 + np.max(np.abs(left.x)))
    assert abs(left.t - right.t) <= 1e-10 * (1.0 + abs(left.t))
    e = identity_point(1)
    assert group_mul(ga, e).t == ga.t
    gi = group_mul(ga, group_inverse(ga))
    assert np.allclose(gi.x, 0) and np.allclose(gi.y, 0) and gi.t == 0.0


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        group_mul(identity_point(1), identity_point(2))


def test_homogeneous_norm_values():
    assert homogeneous_norm(_point((1.0, 0.0, 0.0))) == 1.0
    assert homogeneous_norm(HeisenbergPoint([0.0], [0.0], 4.0)) == 2.0


def test_homogeneous_norm_dilation_and_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = HeisenbergPoint(rng.normal(size=2), rng.normal(size=2), rng.normal())
        base = homogeneous_norm(g)
        assert homogeneous_norm(group_inverse(g)) == pytest.approx(base, rel=1e-13)
        for s in (2.0, 3.0, 10.0):
            assert homogeneous_norm(dilate(g, s)) == pytest.approx(s * base, rel=1e-12)


# -- vector fields -----------------------------------------------------------

def _group_grid(rule, half, pts):
    return centered_grid(rule, ("x1", "y1", "t"), [half] * 3, [pts] * 3)


def test_vector_field_linear_coordinate():
    f = _group_grid(lambda x, y, t: x + 0 * y + 0 * t, 2.0, 17)
    out = vector_field("X1", f)
    assert np.nanmax(np.abs(out.interior(1) - 1.0)) < 1e-12


def test_vector_field_missing_axis():
    f = centered_grid(lambda u: u, ("u1",), [1.0], [9])
    with pytest.raises(Exception):
        vector_field("X1", f)


def test_commutator_is_t_with_h2_rate():
    # [X1, Y1] f = T f with O(h^2) stencil error: halving h divides the
    # defect by ~4 on smooth data
    def rule(x, y, t):
        return np.exp(-(x ** 2 + y ** 2 + t ** 2) / 2.0) * (1.0 + x * y * t)

    defects = []
    for pts in (21, 41):
        f = _group_grid(rule, 3.0, pts)
        xy = vector_field("X1", vector_field("Y1", f))
        yx = vector_field("Y1", vector_field("X1", f))
        tt = vector_field("T", f)
        inner = np.s_[2:-2, 2:-2, 2:-2]
        defects.append(np.nanmax(np.abs(
            xy.values[inner] - yx.values[inner] - tt.values[inner])))
    assert defects[1] < defects[0] / 2.5


def test_other_brackets_vanish():
    def rule(x, y, t):
        return np.exp(-(x ** 2 + y ** 2 + t ** 2) / 2.0) * (1.0 + 0.3 * x - 0.2 * y)

    f = _group_grid(rule, 3.0, 33)
    tx = vector_field("T", vector_field("X1", f))
    xt = vector_field("X1", vector_field("T", f))
    inner = np.s_[2:-2, 2:-2, 2:-2]
    scale = np.nanmax(np.abs(vector_field("X1", f).values[inner]))
    assert np.nanmax(np.abs(tx.values[inner] - xt.values[inner])) < 1e-10 * max(scale, 1)


def test_sublaplacian_on_x_squared():
    f = _group_grid(lambda x, y, t: x ** 2 + 0 * y + 0 * t, 2.0, 17)
    out = sublaplacian(f)
    assert np.nanmax(np.abs(out.interior(2) - 2.0)) < 1e-11


# -- representation ----------------------------------------------------------

def _test_packet():
    return centered_grid(lambda u: np.exp(-u ** 2 / 2) * (1 + 0.3 * u),
                         ("u1",), [10.0], [1201])


def test_rep_identity_and_pure_phase():
    f = _test_packet()
    par = RepresentationParams(1.0)
    out = schrodinger_rep(par, identity_point(1), f)
    assert np.max(np.abs(out.values - f.values)) == 0.0
    gt = HeisenbergPoint([0.0], [0.0], 0.9)
    out = schrodinger_rep(par, gt, f)
    assert np.max(np.abs(out.values - np.exp(1j * 0.9) * f.values)) < 1e-14


def test_rep_homomorphism_and_unitarity():
    f = _test_packet()
    for lam in (1.0, -1.3):
        par = RepresentationParams(lam)
        ga = HeisenbergPoint([0.7123], [0.4], 0.3)
        gb = HeisenbergPoint([-0.2917], [0.8], -0.5)
        lhs = schrodinger_rep(par, ga, schrodinger_rep(par, gb, f))
        rhs = schrodinger_rep(par, group_mul(ga, gb), f)
        rel = lhs.copy_with(lhs.values - rhs.values).l2_norm() / f.l2_norm()
        assert rel <= 1e-3
        out = schrodinger_rep(par, ga, f)
        assert abs(out.l2_norm() - f.l2_norm()) / f.l2_norm() <= 1e-3


def test_rep_adjoint_identity_numerically():
    # <pi(g) f, h> = <f, pi(g^{-1}) h>, both signs of lambda
    f = _test_packet()
    h = centered_grid(lambda u: np.exp(-(u - 0.4) ** 2), ("u1",), [10.0], [1201])
    g = HeisenbergPoint([0.51], [-0.37], 0.23)
    for lam in (0.9, -0.9):
        par = RepresentationParams(lam)
        lhs = schrodinger_rep(par, g, f).inner(h)
        rhs = f.inner(schrodinger_rep(par, group_inverse(g), h))
        assert abs(lhs - rhs) <= 1e-3 * f.l2_norm() * h.l2_norm()


def test_rep_truncation_guard():
    f = centered_grid(lambda u: np.exp(-u ** 2 / 2), ("u1",), [4.0], [161])
    par = RepresentationParams(4.0)
    with pytest.raises(SupportTruncationError):
        schrodinger_rep(par, HeisenbergPoint([3.0], [0.0], 0.0), f)


# -- group Fourier transform -------------------------------------------------

def _packet3(x, y, t):
    return np.exp(-(x ** 2 + y ** 2) / 2.0) * np.exp(-t ** 2 / 2.0) * np.cos(3.0 * t)


def test_group_fourier_zero():
    f = centered_grid(lambda x, y, t: 0.0 * x, ("x1", "y1", "t"), [4.0] * 3, [15] * 3)
    assert np.max(np.abs(group_fourier(f, 1.0, 8))) == 0.0


def test_group_fourier_self_adjoint_for_symmetric_f():
    f = centered_grid(lambda x, y, t: np.exp(-(x ** 2 + y ** 2 + t ** 2) / 2),
                      ("x1", "y1", "t"), [5.0] * 3, [41] * 3)
    for lam in (1.3, -0.8):
        m = group_fourier(f, lam, 14)
        assert np.max(np.abs(m - m.conj().T)) < 1e-10 * max(1.0, np.max(np.abs(m)))


def test_plancherel_ratio_and_calibration():
    f = centered_grid(_packet3, ("x1", "y1", "t"), [5.0] * 3, [41] * 3)
    nodes, weights = symmetric_lambda_grid(0.4, 6.6, 24)
    res = plancherel_check(f, nodes, weights, basis_size=22)
    assert 0.98 <= res["ratio"] <= 1.02
    cal = calibrate_plancherel_constant(f, nodes, weights, basis_size=22)
    assert cal["fitted_c_n"] == pytest.approx(plancherel_constant(1), rel=5e-3)


def test_plancherel_refinement_monotone():
    nodes, weights = symmetric_lambda_grid(0.4, 6.6, 20)
    ratios = []
    for pts in (11, 21, 41, 61):  # the finest level anchors the limit
        f = centered_grid(_packet3, ("x1", "y1", "t"), [5.0] * 3, [pts] * 3)
        ratios.append(plancherel_check(f, nodes, weights, basis_size=18)["ratio"])
    gaps = [abs(r - ratios[-1]) for r in ratios[:3]]
    assert gaps[0] > gaps[1] > gaps[2]


def test_plancherel_degenerate_zero_input():
    f = centered_grid(lambda x, y, t: 0.0 * x, ("x1", "y1", "t"), [4.0] * 3, [9] * 3)
    nodes, weights = symmetric_lambda_grid(0.5, 2.0, 4)
    with pytest.raises(ZeroDivisionError):
        plancherel_check(f, nodes, weights, basis_size=4)


def test_plancherel_n2_small():
    def packet2(x1, x2, y1, y2, t):
        return (np.exp(-(x1 ** 2 + x2 ** 2 + y1 ** 2 + y2 ** 2) / 2.0)
                * np.exp(-t ** 2 / 2.0) * np.cos(3.0 * t))

    f = centered_grid(packet2, ("x1", "x2", "y1", "y2", "t"),
                      [4.0] * 4 + [5.0], [15] * 4 + [33])
    nodes, weights = symmetric_lambda_grid(0.5, 6.0, 8)
    res = plancherel_check(f, nodes, weights, basis_size=12)
    assert 0.9 <= res["ratio"] <= 1.1


def test_band_cutoff_inversion_and_monotonicity():
    f = centered_grid(_packet3, ("x1", "y1", "t"), [5.0] * 3, [41] * 3)
    nodes, weights = symmetric_lambda_grid(0.4, 6.6, 24)
    rec = band_cutoff(f, nodes, weights, r=10.0, basis_size=22)
    rel = rec.copy_with(rec.values - f.values).l2_norm() / f.l2_norm()
    assert rel <= 0.05
    errs = []
    for r in (2.0, 3.5, 5.0, 7.0):
        rec = band_cutoff(f, nodes, weights, r=r, basis_size=22)
        errs.append(rec.copy_with(rec.values - f.values).l2_norm() / f.l2_norm())
    assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))


def test_band_cutoff_zero_and_bad_radius():
    f = centered_grid(lambda x, y, t: 0.0 * x, ("x1", "y1", "t"), [4.0] * 3, [9] * 3)
    nodes, weights = symmetric_lambda_grid(0.5, 2.0, 4)
    out = band_cutoff(f, nodes, weights, r=1.0, basis_size=4)
    assert np.max(np.abs(out.values)) == 0.0
    with pytest.raises(ValueError):
        band_cutoff(f, nodes, weights, r=-1.0, basis_size=4)
