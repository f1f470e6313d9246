"""Heisenberg group computations: group law, vector fields, representation,
group Fourier transform, Plancherel ratio, and the lambda-band cutoff.

Conventions
-----------
A point is g = (x, y, t) with x, y in R^n; the product is

    (x, y, t)(x', y', t') = (x + x', y + y', t + t' + (x.y' - x'.y)/2),

the homogeneous norm is |g| = (|(x,y)|^4 + t^2)^(1/4), and the left-invariant
fields are X_j = d/dx_j - (y_j/2) d/dt, Y_j = d/dy_j + (x_j/2) d/dt, T = d/dt.
The representation at lambda != 0 acts on L^2(R^n) by

    [pi_lam(g) f](u) = exp(i lam (t + x.y/2)) exp(i sqrt(lam) y.u)
                       f(u + sqrt(|lam|) x),

with sqrt(lam) = sgn(lam) sqrt(|lam|).  Grid functions over the group carry
axes ("x1", .., "xn", "y1", .., "yn", "t"); functions over R^n carry
("u1", .., "un").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridAxisError, SupportTruncationError
from .grids import GridFunction, _central_difference
from .hermite import first_multi_indices, hermite_values

DEFAULT_PLANCHEREL_EXPONENT = True  # c_n = (2 pi)^-(n+1)


def plancherel_constant(n: int) -> float:
    """Default normalization of the spectral measure c_n |lambda|^n d lambda."""
    return (2.0 * np.pi) ** (-(n + 1))


@dataclass(frozen=True)
class HeisenbergPoint:
    """A point of the (2n+1)-dimensional Heisenberg group."""

    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)))
        object.__setattr__(self, "t", float(self.t))
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")

    @property
    def n(self) -> int:
        return self.x.shape[0]


def identity_point(n: int) -> HeisenbergPoint:
    return HeisenbergPoint(np.zeros(n), np.zeros(n), 0.0)


def group_mul(g1: HeisenbergPoint, g2: HeisenbergPoint) -> HeisenbergPoint:
    """Group product with the symmetric twist (x.y' - x'.y)/2."""
    if g1.n != g2.n:
        raise ValueError(f"dimension mismatch: {g1.n} vs {g2.n}")
    twist = 0.5 * (float(g1.x @ g2.y) - float(g2.x @ g1.y))
    return HeisenbergPoint(g1.x + g2.x, g1.y + g2.y, g1.t + g2.t + twist)


def group_inverse(g: HeisenbergPoint) -> HeisenbergPoint:
    return HeisenbergPoint(-g.x, -g.y, -g.t)


def homogeneous_norm(g: HeisenbergPoint) -> float:
    """(|(x,y)|^4 + t^2)^(1/4), 1-homogeneous under (x,y,t) -> (sx, sy, s^2 t)."""
    r2 = float(g.x @ g.x + g.y @ g.y)
    return (r2 * r2 + g.t * g.t) ** 0.25


def homogeneous_norm_coords(x2_plus_y2, t):
    """Same norm from |x|^2+|y|^2 and t given as arrays (vectorized form)."""
    r2 = np.asarray(x2_plus_y2, dtype=float)
    return (r2 * r2 + np.asarray(t, dtype=float) ** 2) ** 0.25


def dilate(g: HeisenbergPoint, s: float) -> HeisenbergPoint:
    return HeisenbergPoint(s * g.x, s * g.y, s * s * g.t)


def heisenberg_axes(n: int) -> tuple:
    return tuple(f"x{j}" for j in range(1, n + 1)) + \
        tuple(f"y{j}" for j in range(1, n + 1)) + ("t",)


def _grid_dim(f: GridFunction) -> int:
    if "t" not in f.axes:
        raise GridAxisError("group grid must carry a 't' axis")
    n = sum(1 for a in f.axes if a.startswith("x"))
    if f.axes != heisenberg_axes(n):
        raise GridAxisError(f"expected axes {heisenberg_axes(n)}, got {f.axes}")
    return n


def vector_field(which: str, f: GridFunction) -> GridFunction:
    """Apply a left-invariant field (``"X1"``, ``"Y2"``, ``"T"``) by central
    differences; the affected boundary layer is marked NaN."""
    n = _grid_dim(f)
    which = which.strip().upper()
    t_axis = f.axis_index("t")
    if which == "T":
        return f.copy_with(_central_difference(f.values, t_axis, f.spacing[t_axis]))
    kind, j = which[0], int(which[1:])
    if kind not in ("X", "Y") or not (1 <= j <= n):
        raise GridAxisError(f"unknown field {which!r} for n={n}")
    main_axis = f.axis_index(f"x{j}" if kind == "X" else f"y{j}")
    partner_name = f"y{j}" if kind == "X" else f"x{j}"
    partner_axis = f.axis_index(partner_name)
    sign = -0.5 if kind == "X" else 0.5
    d_main = _central_difference(f.values, main_axis, f.spacing[main_axis])
    d_t = _central_difference(f.values, t_axis, f.spacing[t_axis])
    coord = f.coords(partner_axis)
    shape = [1] * f.values.ndim
    shape[partner_axis] = -1
    return f.copy_with(d_main + sign * coord.reshape(shape) * d_t)


def sublaplacian(f: GridFunction) -> GridFunction:
    """sum_j (X_j^2 + Y_j^2) f as nested stencils (2-cell NaN boundary)."""
    n = _grid_dim(f)
    total = None
    for j in range(1, n + 1):
        for kind in ("X", "Y"):
            term = vector_field(f"{kind}{j}", vector_field(f"{kind}{j}", f))
            total = term.values if total is None else total + term.values
    return f.copy_with(total)


def sqrt_lambda(lam: float) -> float:
    """sgn(lambda) sqrt(|lambda|); the branch used everywhere below."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return math.copysign(math.sqrt(abs(lam)), lam)


@dataclass(frozen=True)
class RepresentationParams:
    """Representation label lambda with the sign convention pinned."""

    lam: float

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")

    @property
    def sqrt(self) -> float:
        return sqrt_lambda(self.lam)


def schrodinger_rep(params: RepresentationParams, g: HeisenbergPoint,
                    f: GridFunction, max_truncation: float = 1e-6) -> GridFunction:
    """Apply pi_lambda(g) on a grid function over R^n.

    The argument shift u -> u + sqrt(|lam|) x is resolved by linear
    interpolation; if the shift pushes more than ``max_truncation`` of the
    squared mass off the grid, a truncation error is raised.
    """
    lam = params.lam
    n = g.n
    expected = tuple(f"u{j}" for j in range(1, n + 1))
    if f.axes != expected:
        raise GridAxisError(f"expected axes {expected}, got {f.axes}")
    root = params.sqrt
    shifts = {f"u{j}": math.sqrt(abs(lam)) * g.x[j - 1] for j in range(1, n + 1)}
    lost = f.off_grid_mass_fraction(shifts)
    if lost > max_truncation:
        raise SupportTruncationError(
            f"shift pushes {lost:.3e} of the squared mass off the grid "
            f"(budget {max_truncation:.1e})",
            lost_fraction=lost,
        )
    shifted = f.shifted(shifts)
    mesh = shifted.meshgrid()
    phase = np.exp(1j * lam * (g.t + 0.5 * float(g.x @ g.y)))
    osc = np.zeros(shifted.shape)
    for j in range(n):
        osc = osc + root * g.y[j] * mesh[j]
    return shifted.copy_with(phase * np.exp(1j * osc) * shifted.values)


# -- group Fourier transform -------------------------------------------------

def _hermite_u_grid(basis_size: int, n: int, oscillation: float,
                    points: int | None = None):
    """Quadrature grid for the Hermite-side integrals.

    Covers the classical support of the highest basis function and resolves
    the e^{i sqrt(lam) y u} oscillation with ~6 points per period.
    """
    degrees = [max(alpha) for alpha in first_multi_indices(n, basis_size)]
    max_deg = max(degrees)
    half = math.sqrt(2.0 * max_deg + 1.0) + 5.0
    if points is None:
        per_unit = max(12.0, oscillation if oscillation > 0 else 12.0)
        points = int(math.ceil(2 * half * per_unit))
        points = max(points, 48)
    nodes = np.linspace(-half, half, points)
    w = np.full(points, nodes[1] - nodes[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return nodes, w, max_deg


def group_fourier(f: GridFunction, lam: float, basis_size: int,
                  u_points: int | None = None) -> np.ndarray:
    """Matrix of the operator-valued Fourier transform at lambda.

    Entry [i, j] is the transform sandwiched between the i-th and j-th
    product Hermite functions (shell-then-lex order), computed by tensorized
    trapezoid quadrature of the defining integral.
    """
    n = _grid_dim(f)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    alphas = first_multi_indices(n, basis_size)
    root = sqrt_lambda(lam)
    shift = math.sqrt(abs(lam))

    t_axis = f.axis_index("t")
    wt = f.trapezoid_weights(t_axis)
    phase_t = np.exp(-1j * lam * f.coords(t_axis)) * wt
    f1 = np.tensordot(f.values, phase_t, axes=([t_axis], [0]))

    # multiply the e^{-i lam x.y/2} phase on the (x..., y...) box
    xs = [f.coords(f.axis_index(f"x{j}")) for j in range(1, n + 1)]
    ys = [f.coords(f.axis_index(f"y{j}")) for j in range(1, n + 1)]
    xy = 0.0
    for j in range(n):
        sx = [1] * (2 * n)
        sx[j] = -1
        sy = [1] * (2 * n)
        sy[n + j] = -1
        xy = xy + xs[j].reshape(sx) * ys[j].reshape(sy)
    f1 = f1 * np.exp(-0.5j * lam * xy)

    osc = abs(root) * max(float(np.max(np.abs(c))) for c in ys) if ys else 0.0
    nodes, wu, max_deg = _hermite_u_grid(basis_size, n, osc, u_points)
    htab = hermite_values(max_deg, nodes)  # (deg+1, Nu)

    if n == 1:
        wx = f.trapezoid_weights(f.axis_index("x1"))
        wy = f.trapezoid_weights(f.axis_index("y1"))
        # G[x, u] = sum_y w_y f1[x, y] e^{-i sqrt(lam) y u}
        eyu = np.exp(-1j * root * np.outer(ys[0], nodes))
        g_xu = (f1 * wy[None, :]) @ eyu
        # T[a, u] = sum_x w_x h_a(u + shift x) G[x, u]
        shifted_pts = nodes[None, :] + shift * xs[0][:, None]  # (Nx, Nu)
        a_table = hermite_values(max_deg, shifted_pts.ravel()).reshape(
            max_deg + 1, len(xs[0]), len(nodes))
        t_au = np.einsum("axu,xu->au", a_table, g_xu * wx[:, None])
        m_box = np.einsum("au,bu->ab", t_au, htab * wu[None, :])
        deg_idx = [a[0] for a in alphas]
        return m_box[np.ix_(deg_idx, deg_idx)]

    # general n: per-dimension kernels contracted against the (x, y) box
    kernels = []
    for j in range(n):
        eyu = np.exp(-1j * root * np.outer(ys[j], nodes))  # (Ny_j, Nu)
        shifted_pts = nodes[None, :] + shift * xs[j][:, None]
        a_table = hermite_values(max_deg, shifted_pts.ravel()).reshape(
            max_deg + 1, len(xs[j]), len(nodes))
        kern = np.einsum("axu,yu,bu->abxy", a_table, eyu, htab * wu[None, :])
        kernels.append(kern)
    for j in range(n):
        wx = f.trapezoid_weights(f.axis_index(f"x{j+1}"))
        sh = [1] * (2 * n)
        sh[j] = -1
        f1 = f1 * wx.reshape(sh)
        wy = f.trapezoid_weights(f.axis_index(f"y{j+1}"))
        sh = [1] * (2 * n)
        sh[n + j] = -1
        f1 = f1 * wy.reshape(sh)
    if n != 2:
        raise NotImplementedError("group_fourier is implemented for n = 1 and 2")
    box = np.einsum("pqrs,acpr,bdqs->abcd", f1, kernels[0], kernels[1])
    size = len(alphas)
    out = np.empty((size, size), dtype=complex)
    for i, al in enumerate(alphas):
        for k, be in enumerate(alphas):
            out[i, k] = box[al[0], al[1], be[0], be[1]]
    return out


def symmetric_lambda_grid(lam_min: float, lam_max: float, per_side: int):
    """Quadrature nodes/weights on [-max,-min] U [min,max], trapezoid per side."""
    if not (0 < lam_min < lam_max):
        raise ValueError("need 0 < lam_min < lam_max")
    if per_side < 2:
        raise ValueError("need at least two nodes per side")
    pos = np.linspace(lam_min, lam_max, per_side)
    w = np.full(per_side, pos[1] - pos[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    nodes = np.concatenate([-pos[::-1], pos])
    weights = np.concatenate([w[::-1], w])
    return nodes, weights


def plancherel_check(f: GridFunction, lambda_nodes, lambda_weights,
                     basis_size: int, c_n: float | None = None,
                     u_points: int | None = None) -> dict:
    """Ratio of the spectral-side squared norm to ||f||^2 (should be ~ 1).

    Integrates ||fhat(lambda)||_HS^2 against c_n |lambda|^n d lambda by
    quadrature over the supplied symmetric lambda grid.
    """
    n = _grid_dim(f)
    if c_n is None:
        c_n = plancherel_constant(n)
    lambda_nodes = np.asarray(lambda_nodes, dtype=float)
    lambda_weights = np.asarray(lambda_weights, dtype=float)
    if lambda_nodes.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(lambda_nodes == 0.0):
        raise ValueError("lambda grid must exclude 0")
    norm_sq = f.l2_norm() ** 2
    if norm_sq == 0.0:
        raise ZeroDivisionError("degenerate input: ||f|| = 0")
    hs_sq = np.empty(lambda_nodes.size)
    for i, lam in enumerate(lambda_nodes):
        m = group_fourier(f, lam, basis_size, u_points=u_points)
        hs_sq[i] = float(np.sum(np.abs(m) ** 2))
    numerator = float(np.sum(lambda_weights * c_n * np.abs(lambda_nodes) ** n * hs_sq))
    return {
        "ratio": numerator / norm_sq,
        "numerator": numerator,
        "norm_sq": norm_sq,
        "c_n": c_n,
        "lambda_nodes": lambda_nodes,
        "hs_sq": hs_sq,
    }


def calibrate_plancherel_constant(f: GridFunction, lambda_nodes, lambda_weights,
                                  basis_size: int, u_points: int | None = None) -> dict:
    """Fit c_n so the Plancherel ratio is exactly 1 on the reference input.

    Returns both the fitted value and the default (2 pi)^-(n+1) so neither is
    trusted silently.
    """
    n = _grid_dim(f)
    res = plancherel_check(f, lambda_nodes, lambda_weights, basis_size,
                           c_n=1.0, u_points=u_points)
    fitted = res["norm_sq"] / res["numerator"]
    return {
        "fitted_c_n": fitted,
        "default_c_n": plancherel_constant(n),
        "ratio_at_default": res["numerator"] * plancherel_constant(n) / res["norm_sq"],
    }


def band_cutoff(f: GridFunction, lambda_nodes, lambda_weights, r: float,
                basis_size: int, c_n: float | None = None,
                u_points: int | None = None) -> GridFunction:
    """Band-limited inversion: reconstruct f from slices with |lambda| <= r.

    With r covering the whole grid this is the plain inversion formula
    f(g) = int tr(pi_lam(g) fhat(lambda)) dmu(lambda) within the quadrature
    budget.
    """
    if r <= 0:
        raise ValueError("band radius must be positive")
    n = _grid_dim(f)
    if n > 2:
        raise NotImplementedError("band_cutoff is implemented for n = 1 and 2")
    if c_n is None:
        c_n = plancherel_constant(n)
    lambda_nodes = np.asarray(lambda_nodes, dtype=float)
    lambda_weights = np.asarray(lambda_weights, dtype=float)
    keep = np.abs(lambda_nodes) <= r
    out = np.zeros(f.shape, dtype=complex)
    xs = [f.coords(f.axis_index(f"x{j}")) for j in range(1, n + 1)]
    ys = [f.coords(f.axis_index(f"y{j}")) for j in range(1, n + 1)]
    ts = f.coords(f.axis_index("t"))
    alphas = first_multi_indices(n, basis_size)
    for lam, w in zip(lambda_nodes[keep], lambda_weights[keep]):
        m = group_fourier(f, lam, basis_size, u_points=u_points)
        root = sqrt_lambda(lam)
        shift = math.sqrt(abs(lam))
        osc = abs(root) * max(float(np.max(np.abs(c))) for c in ys)
        nodes, wu, max_deg = _hermite_u_grid(basis_size, n, osc, u_points)
        htab = hermite_values(max_deg, nodes)
        if n == 1:
            deg_idx = [a[0] for a in alphas]
            m_box = np.zeros((max_deg + 1, max_deg + 1), dtype=complex)
            m_box[np.ix_(deg_idx, deg_idx)] = m
            # S[x, y] = sum_{ab} J[b, a, x, y] M[a, b] without
            # materializing J; C[a, u] = sum_b M[a, b] h_b(u)
            c_au = m_box @ htab
            shifted_pts = nodes[None, :] + shift * xs[0][:, None]
            a_table = hermite_values(max_deg, shifted_pts.ravel()).reshape(
                max_deg + 1, len(xs[0]), len(nodes))
            d_xu = np.einsum("axu,au->xu", a_table, c_au)
            eyu = np.exp(1j * root * np.outer(ys[0], nodes))
            s_grid = (d_xu * wu[None, :]) @ eyu.T  # (x, y)
            phase_sym = np.exp(0.5j * lam * np.outer(xs[0], ys[0]))
            spatial = s_grid * phase_sym
        else:
            kernels = []
            for j in range(n):
                eyu = np.exp(1j * root * np.outer(ys[j], nodes))
                shifted_pts = nodes[None, :] + shift * xs[j][:, None]
                a_table = hermite_values(max_deg, shifted_pts.ravel()).reshape(
                    max_deg + 1, len(xs[j]), len(nodes))
                kernels.append(np.einsum("axu,yu,bu->baxy", a_table, eyu,
                                         htab * wu[None, :]))
            size = max_deg + 1
            m_box = np.zeros((size, size, size, size), dtype=complex)
            for i, al in enumerate(alphas):
                for k, be in enumerate(alphas):
                    m_box[al[0], al[1], be[0], be[1]] = m[i, k]
            s_grid = np.einsum("abcd,capr,dbqs->pqrs", m_box,
                               kernels[0], kernels[1])
            xy = np.add.outer(np.outer(xs[0], ys[0]),
                              np.outer(xs[1], ys[1]))  # (x1, y1, x2, y2)
            xy = np.transpose(xy, (0, 2, 1, 3))  # -> (x1, x2, y1, y2)
            spatial = s_grid * np.exp(0.5j * lam * xy)
        phase_t = np.exp(1j * lam * ts)
        out += w * c_n * abs(lam) ** n * (
            spatial[..., None] * phase_t[(None,) * spatial.ndim]
        )
    return f.copy_with(out)
