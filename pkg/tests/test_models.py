"""Finite-model assembly, Szego ratios, trace inequalities, and sweeps."""

import numpy as np
import pytest

from szlab.linalg import eig_self_adjoint, operator_norm
from szlab.models import (
    FiniteModel,
    build_model,
    commutator_sweep,
    compact_perturbation_check,
    counting_function,
    counting_increment,
    counting_increment_bound,
    laptev_safarov_check,
    random_low_rank,
    resolvent_trace_ratio,
    scaled_szego_sum,
    szego_ratio,
    thresholds_for_counts,
)

BUMP_EDGE = 2.5


def _b1(s):
    w = 1.0 - (s / BUMP_EDGE) ** 2
    return np.where(np.abs(s) < BUMP_EDGE, w ** 3, 0.0)


def _bump(x, y, t):
    return _b1(x) * _b1(y) * _b1(t)


def _mult_model(points=7, b=_bump):
    return build_model("multiplication", n=1, kappa=0.5,
                       half_widths=[3.0, 3.0, 3.0], points=[points] * 3, b=b)


# -- assembly -----------------------------------------------------------------

def test_multiplication_zero_observable():
    m = build_model("multiplication", n=1, kappa=0.5,
                    half_widths=[2.0] * 3, points=[5] * 3)
    assert np.all(m.a_diag == 0.0)
    assert m.dim == 125


def test_memory_guard():
    with pytest.raises(MemoryError):
        build_model("multiplication", n=1, kappa=0.5,
                    half_widths=[2.0] * 3, points=[20, 20, 20])


def test_lattice_cosine_band_oracle():
    size = 31
    m = build_model("lattice_schrodinger", size=size, potential="zero")
    eigs = np.sort(eig_self_adjoint(m.h_mat).eigenvalues)
    k = np.arange(1, size + 1)
    oracle = np.sort(2.0 + 2.0 * np.cos(np.pi * k / (size + 1)))
    assert np.max(np.abs(eigs - oracle)) < 1e-8


def test_lattice_paper_potential():
    m = build_model("lattice_schrodinger", size=7, potential="paper", kappa=0.5)
    v = m.params["v_diag"]
    assert v[3] == 1.0  # site k = 0
    assert v[4] == 1.0  # |k| = 1
    assert v[6] == pytest.approx(3 ** 0.5)


def test_heisenberg_grid_stencil_on_coordinate():
    m = build_model("heisenberg_grid", kappa=0.5,
                    half_widths=[2.0] * 3, points=[9] * 3)
    x_sq = m.coords[:, 0] ** 2
    out = (m.h_mat - np.diag(m.params["v_diag"])) @ x_sq
    pts = m.params["points"]
    interior = np.zeros(pts, dtype=bool)
    interior[2:-2, 2:-2, 2:-2] = True
    # -(X^2 + Y^2) x^2 = -2 pointwise in the interior
    assert np.max(np.abs(out[interior.ravel()] + 2.0)) < 1e-10


def test_heisenberg_grid_kappa_guard():
    with pytest.raises(ValueError):
        build_model("heisenberg_grid", kappa=1.5,
                    half_widths=[2.0] * 3, points=[5] * 3)


def test_heisenberg_grid_self_adjoint():
    m = build_model("heisenberg_grid", kappa=0.5,
                    half_widths=[2.0] * 3, points=[7] * 3)
    assert np.max(np.abs(m.h_mat - m.h_mat.T)) < 1e-10


# -- projections and ratios ------------------------------------------------------

def test_counting_functions():
    eigs = np.array([0.0, 0.0, 1.0, 2.0, 2.5, 3.2, 7.0])
    assert counting_function(eigs, 2.2) == 4
    assert counting_increment(eigs, 0.0, 5.0) == 2  # max multiplicity
    assert counting_increment(eigs, 1.1, 3.0) == 3


def test_counting_increment_bound_multiplication():
    m = _mult_model(points=9)
    eigs = np.sort(m.h_diag)
    r1 = float(eigs[int(0.8 * len(eigs))])
    rep = counting_increment_bound(eigs, r=0.1 * r1, r1=r1, growth_exponent=8.0)
    assert rep["holds"]


def test_counting_increment_ratio_decays():
    m = _mult_model(points=9, b=None)
    eigs = np.sort(m.h_diag)
    ratios = []
    for q in (0.3, 0.6, 0.95):
        r1 = float(eigs[int(q * (len(eigs) - 1))])
        n_incr = counting_increment(eigs, r=r1 ** 0.5 * 0.2, r1=r1)
        ratios.append(n_incr / counting_function(eigs, r1))
    assert ratios[-1] < ratios[0]


def test_szego_ratio_identity_function():
    m = _mult_model()
    r = float(np.median(m.h_diag))
    keep = m.h_diag <= r
    expected = float(np.mean(m.a_diag[keep]))
    assert szego_ratio(m, lambda x: x, r) == pytest.approx(expected, abs=1e-14)


def test_szego_ratio_scalar_observable():
    m = _mult_model()
    dense = FiniteModel(kind="dense", coords=m.coords, cell_volume=m.cell_volume,
                        h_mat=np.diag(m.h_diag), a_mat=2.5 * np.eye(m.dim))
    assert szego_ratio(dense, lambda x: x ** 3, 1.0) == pytest.approx(15.625, abs=1e-10)


def test_szego_ratio_diagonal_equals_dense():
    m = _mult_model()
    dense = FiniteModel(kind="dense", coords=m.coords, cell_volume=m.cell_volume,
                        h_mat=np.diag(m.h_diag), a_mat=np.diag(m.a_diag))
    r = 1.1
    assert abs(szego_ratio(m, np.square, r)
               - szego_ratio(dense, np.square, r)) <= 1e-12


def test_szego_ratio_spectral_inclusion():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((30, 30))
    h = 0.5 * (h + h.T)
    a = rng.standard_normal((30, 30))
    a = 0.5 * (a + a.T)
    model = FiniteModel(kind="dense", coords=np.zeros((30, 1)), cell_volume=1.0,
                        h_mat=h, a_mat=a)
    bounds = eig_self_adjoint(a).eigenvalues
    val = szego_ratio(model, lambda x: x, 0.5)
    assert bounds[0] - 1e-10 <= val <= bounds[-1] + 1e-10


def test_szego_ratio_empty_projection():
    m = _mult_model()
    with pytest.raises(ValueError):
        szego_ratio(m, np.square, -1.0)


def test_scaled_sum_converges_to_integral():
    s = np.linspace(-BUMP_EDGE, BUMP_EDGE, 200001)
    ref = float(np.trapezoid(_b1(s) ** 2, s)) ** 3
    errors = []
    for pts, r in ((9, 1.2), (11, 1.6), (15, 2.2)):
        m = _mult_model(points=pts)
        val = scaled_szego_sum(m, np.square, r)
        errors.append(abs(val - ref) / ref)
    assert errors[-1] <= 0.02
    assert errors[-1] < errors[0]


# -- resolvent ratios --------------------------------------------------------------

def _resolvent_setup(seed=7):
    m = build_model("multiplication", n=1, kappa=0.5,
                    half_widths=[3.0] * 3, points=[6] * 3)
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((m.dim, m.dim))
    b = 0.5 * (b + b.T)
    b *= 0.5 / operator_norm(b)
    return m.h_diag, b


def test_resolvent_ratio_zero_perturbation():
    v, _ = _resolvent_setup()
    rows = resolvent_trace_ratio(v, np.zeros((len(v), len(v))), 2, [10.0])
    assert rows["ratio_minus_1"] == [0.0]


def test_resolvent_ratio_bounded_and_decreasing():
    v, b = _resolvent_setup()
    rows = resolvent_trace_ratio(v, b, 2, [10.0, 100.0, 1000.0])
    col = rows["ratio_minus_1"]
    assert all(x <= bd for x, bd in zip(col, rows["bound"]))
    assert col[0] > col[1] > col[2]


def test_resolvent_ratio_weighted_variant():
    v, b = _resolvent_setup()
    rng = np.random.default_rng(11)
    w = np.diag(rng.uniform(0.5, 2.0, size=len(v)))
    rows = resolvent_trace_ratio(v, b, 2, [10.0, 100.0, 1000.0], weight=w)
    assert all(x <= bd for x, bd in zip(rows["ratio_minus_1"], rows["bound"]))


# -- trace smoothing ----------------------------------------------------------------

def test_laptev_safarov_200_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        h = rng.standard_normal((40, 40))
        h = 0.5 * (h + h.T)
        a = rng.standard_normal((40, 40))
        a = 0.5 * (a + a.T)
        r1 = rng.uniform(0.5, 4.0)
        r = rng.uniform(0.1, 0.9) * r1
        rep = laptev_safarov_check(h, a, np.square, 2.0, r1, r)
        assert rep["holds"], (rep["left"], rep["right"])


def test_laptev_safarov_commuting_pair():
    rep = laptev_safarov_check(np.diag([0.0, 1.0, 2.0, 3.0]),
                               np.diag([5.0, 6.0, 7.0, 8.0]), np.square,
                               2.0, 2.5, 1.0)
    assert rep["left"] <= 1e-10
    assert rep["holds"]


def test_laptev_safarov_linear_function():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((12, 12))
    h = 0.5 * (h + h.T)
    a = rng.standard_normal((12, 12))
    a = 0.5 * (a + a.T)
    rep = laptev_safarov_check(h, a, lambda x: 3.0 * x - 1.0, 0.0, 1.0, 0.5)
    assert rep["left"] <= 1e-12


def test_laptev_safarov_input_guard():
    with pytest.raises(ValueError):
        laptev_safarov_check(np.eye(3), np.eye(3), np.square, 2.0, 1.0, 2.0)


# -- sweeps and perturbations ---------------------------------------------------------

def test_commutator_identity_observable():
    m = build_model("lattice_schrodinger", size=31, kappa=0.5,
                    potential="power", observable="multiplication",
                    b=lambda s: np.ones_like(s))
    v = np.diag(m.params["v_diag"])
    assert operator_norm(v @ m.a_mat - m.a_mat @ v) <= 1e-12


def test_commutator_sweep_plateau_subcritical():
    rows = commutator_sweep([0.5], [101, 201, 401], spacing=0.1)
    last, prev = rows[-1]["norm_comm_v"], rows[-2]["norm_comm_v"]
    assert abs(last - prev) <= 0.1 * prev
    hlast, hprev = rows[-1]["norm_comm_h"], rows[-2]["norm_comm_h"]
    assert abs(hlast - hprev) <= 0.1 * hprev


def test_commutator_sweep_supercritical_grows_faster():
    sizes = [101, 201, 401]
    sub = commutator_sweep([0.5], sizes, spacing=0.1)
    sup = commutator_sweep([1.5], sizes, spacing=0.1)
    growth_sub = sub[-1]["norm_comm_v"] / sub[0]["norm_comm_v"]
    growth_sup = sup[-1]["norm_comm_v"] / sup[0]["norm_comm_v"]
    assert growth_sup > growth_sub


def test_compact_perturbation_zero():
    m = _mult_model()
    rows = compact_perturbation_check(
        m, np.zeros((m.dim, m.dim)), lambda x: x,
        thresholds_for_counts(m.h_diag, [16, 64]))
    assert rows["delta_ratio"] == [0.0, 0.0]


def test_compact_perturbation_identity_exact_bound():
    m = _mult_model()
    low = np.argsort(m.h_diag)[:8]
    k = random_low_rank(m.dim, 3, 1.0, seed=5, support=low)
    rs = thresholds_for_counts(m.h_diag, [8, 16, 32, 64, 128, 256])
    rows = compact_perturbation_check(m, k, lambda x: x, rs, f_lip=1.0)
    for delta, count in zip(rows["delta_ratio"], rows["count"]):
        assert delta <= 3.0 * 1.0 / count + 1e-12


def test_compact_perturbation_square_decreases():
    m = _mult_model()
    low = np.argsort(m.h_diag)[:8]
    k = random_low_rank(m.dim, 3, 1.0, seed=5, support=low)
    rs = thresholds_for_counts(m.h_diag, [8, 16, 32, 64, 128, 256])
    col = compact_perturbation_check(m, k, np.square, rs)["delta_ratio"]
    assert all(a > b for a, b in zip(col, col[1:]))
