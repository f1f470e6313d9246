"""Grid containers, interpolation, and serialization round trips."""

import numpy as np
import pytest

from szlab.errors import GridAxisError
from szlab.grids import (
    GridFunction,
    SampledSymbol,
    centered_grid,
    grid_from_rule,
    interp_multilinear,
    read_container,
    symbol_from_rule,
    write_container,
)


def test_l2_norm_matches_definition():
    f = centered_grid(lambda u: np.exp(-u ** 2), ("u1",), [8.0], [401])
    direct = np.sqrt(np.sum(np.abs(f.values) ** 2) * f.spacing[0])
    assert f.l2_norm() == pytest.approx(direct, rel=1e-14)
    # against the analytic integral of e^{-2u^2}
    assert f.l2_norm() ** 2 == pytest.approx(np.sqrt(np.pi / 2.0), rel=1e-10)


def test_spacing_must_be_positive():
    with pytest.raises(GridAxisError):
        GridFunction(values=np.zeros((4,)), origin=[0.0], spacing=[0.0], axes=("u1",))


def test_integrate_trapezoid_gaussian():
    f = centered_grid(lambda x, y: np.exp(-(x ** 2 + y ** 2)), ("x1", "y1"),
                      [6.0, 6.0], [121, 121])
    assert complex(f.integrate()).real == pytest.approx(np.pi, rel=1e-10)


def test_shift_linear_function_exact_on_grid():
    f = centered_grid(lambda u: u, ("u1",), [4.0], [81])
    g = f.shifted({"u1": 0.125})
    inner = slice(5, -5)
    assert np.max(np.abs(g.values[inner] - (f.coords(0)[inner] + 0.125))) < 1e-12


def test_shift_off_grid_mass():
    f = centered_grid(lambda u: np.exp(-u ** 2), ("u1",), [3.0], [61])
    assert f.off_grid_mass_fraction({"u1": 0.05}) < 1e-4
    assert f.off_grid_mass_fraction({"u1": 5.0}) > 0.4


def test_interior_view():
    f = centered_grid(lambda x, y: x + y, ("a", "b"), [1.0, 1.0], [9, 9])
    assert f.interior(2).shape == (5, 5)


def test_container_roundtrip_grid(tmp_path):
    f = centered_grid(lambda x, y: np.exp(1j * x) * np.cos(y), ("x1", "y1"),
                      [2.0, 3.0], [17, 33])
    path = tmp_path / "grid.szgf"
    write_container(path, f)
    g = read_container(path)
    assert isinstance(g, GridFunction) and not isinstance(g, SampledSymbol)
    assert g.axes == f.axes
    assert np.allclose(g.origin, f.origin)
    assert np.allclose(g.spacing, f.spacing)
    # storage is complex64, so round trip is float32-accurate
    assert np.max(np.abs(g.values - f.values)) < 1e-6


def test_container_roundtrip_symbol(tmp_path):
    sym = symbol_from_rule(lambda xi, u: np.exp(-(xi ** 2 + u ** 2)),
                           {"xi": ("xi1",), "u": ("u1",)}, [3.0, 3.0], [21, 21],
                           smooth_order=3)
    path = tmp_path / "symbol.szgf"
    write_container(path, sym)
    back = read_container(path)
    assert isinstance(back, SampledSymbol)
    assert back.blocks == {"xi": ("xi1",), "u": ("u1",)}
    assert back.smooth_order == 3
    assert np.max(np.abs(back.values - sym.values)) < 1e-6


def test_container_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.szgf"
    path.write_bytes(b"NOTAGRID" + b"\x00" * 16)
    with pytest.raises(ValueError):
        read_container(path)


def test_symbol_blocks_must_partition_axes():
    with pytest.raises(GridAxisError):
        SampledSymbol(values=np.zeros((3, 3)), origin=[0, 0], spacing=[1, 1],
                      axes=("xi1", "u1"), blocks={"xi": ("xi1",)})


def test_symbol_derivative_linear_exact():
    sym = symbol_from_rule(lambda xi, u: xi + 0 * u,
                           {"xi": ("xi1",), "u": ("u1",)}, [2.0, 2.0], [17, 17])
    d = sym.derivative("xi1")
    inner = d.values[1:-1, :]
    assert np.max(np.abs(inner - 1.0)) < 1e-12
    assert np.all(np.isnan(d.values[0, :]))


def test_symbol_mixed_partials_commute():
    sym = symbol_from_rule(lambda xi, u: np.exp(-(xi ** 2 + u ** 2) / 2),
                           {"xi": ("xi1",), "u": ("u1",)}, [3.0, 3.0], [41, 41])
    d1 = sym.derivative("xi1").derivative("u1")
    d2 = sym.derivative("u1").derivative("xi1")
    inner = np.s_[2:-2, 2:-2]
    assert np.nanmax(np.abs(d1.values[inner] - d2.values[inner])) < 1e-12


def test_symbol_smoothness_guard():
    sym = symbol_from_rule(lambda xi, u: xi * u, {"xi": ("xi1",), "u": ("u1",)},
                           [2.0, 2.0], [9, 9], smooth_order=1)
    with pytest.raises(ValueError):
        sym.derivative("xi1", order=2)


def test_multilinear_interpolation_exact_on_affine():
    grid = grid_from_rule(lambda x, y: 2.0 * x - 3.0 * y + 1.0, ("x1", "y1"),
                          origin=[-1.0, -1.0], spacing=[0.25, 0.5], shape=(9, 5))
    pts = np.array([[0.37, 0.21], [-0.9, 0.9], [0.0, 0.0]])
    vals = interp_multilinear(grid.values, grid.origin, grid.spacing, pts)
    expected = 2.0 * pts[:, 0] - 3.0 * pts[:, 1] + 1.0
    assert np.max(np.abs(vals - expected)) < 1e-12


def test_multilinear_interpolation_outside_reads_zero():
    grid = grid_from_rule(lambda x: x, ("u1",), origin=[0.0], spacing=[1.0], shape=(5,))
    vals = interp_multilinear(grid.values, grid.origin, grid.spacing,
                              np.array([[10.0], [2.0]]))
    assert vals[0] == 0.0
    assert vals[1] == pytest.approx(2.0)
