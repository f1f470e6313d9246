"""Grid-based Weyl quantization, the Moyal star expansion, and the
group-adapted composition correction with its remainder experiments.

All derivatives are 2nd-order central differences on the symbol grids, so
every result is valid on a shrinking interior (NaN boundary) and carries an
O(h^2) budget.  The default star truncation order is 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .errors import GridAxisError
from .grids import GridFunction, SampledSymbol, symbol_from_rule
from .linalg import operator_norm


class AliasingError(ValueError):
    """Input bandwidth exceeds the xi-box of the quantization."""

    def __init__(self, message, fraction=None):
        super().__init__(message)
        self.fraction = fraction


@dataclass(frozen=True)
class StarTruncation:
    """Truncation order of the star expansion; term s carries (1/s!)(i/2)^s."""

    order: int = 4

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be >= 0")

    def coefficient(self, s: int) -> complex:
        return (0.5j) ** s / math.factorial(s)


def _phase_axes(sym: SampledSymbol):
    xi = sym.block_axes("xi")
    u = sym.block_axes("u")
    if not xi or not u or len(xi) != len(u):
        raise GridAxisError(f"symbol needs matching xi/u blocks, has {sym.blocks}")
    return xi, u


def _require_same_box(a: SampledSymbol, b: SampledSymbol) -> None:
    if (a.axes != b.axes or a.shape != b.shape
            or not np.allclose(a.origin, b.origin)
            or not np.allclose(a.spacing, b.spacing)):
        raise GridAxisError("symbols must share one sampling box")


def _multi_orders(n: int, total: int):
    """All n-tuples of nonnegative ints summing to ``total``."""
    if n == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _multi_orders(n - 1, total - head):
            yield (head,) + rest


def _block_derivative(sym: SampledSymbol, axes, multi) -> SampledSymbol:
    out = sym
    for name, order in zip(axes, multi):
        for _ in range(order):
            out = out.derivative(name)
    return out


def moyal_star(a: SampledSymbol, b: SampledSymbol,
               trunc: StarTruncation = StarTruncation()) -> SampledSymbol:
    """Truncated star product sum_s (1/s!) (i/2)^s a (<-dxi ->du - <-du ->dxi)^s b.

    Term (beta, gamma) contributes
    (i/2)^{|beta|+|gamma|} (-1)^{|gamma|} / (beta! gamma!)
    (dxi^beta du^gamma a)(du^beta dxi^gamma b); s = 0 is the pointwise
    product.  Both symbols must share the sampling box and be smooth to the
    truncation order.
    """
    _require_same_box(a, b)
    xi_axes, u_axes = _phase_axes(a)
    n = len(xi_axes)
    order = trunc.order
    if order > min(a.smooth_order, b.smooth_order):
        raise ValueError(
            f"truncation order {order} exceeds declared smoothness "
            f"({a.smooth_order}, {b.smooth_order})"
        )
    total = np.zeros(a.shape, dtype=complex)
    for s in range(order + 1):
        for split in range(s + 1):
            for beta in _multi_orders(n, split):
                for gamma in _multi_orders(n, s - split):
                    coef = (0.5j) ** s * (-1.0) ** (s - split)
                    coef /= np.prod([math.factorial(k) for k in beta + gamma])
                    da = _block_derivative(_block_derivative(a, xi_axes, beta),
                                           u_axes, gamma)
                    db = _block_derivative(_block_derivative(b, u_axes, beta),
                                           xi_axes, gamma)
                    total = total + coef * da.values * db.values
    return a.copy_with(total)


def _g_field(sym: SampledSymbol, which: str) -> SampledSymbol:
    """Left-invariant field on the symbol's g-block (X_j, Y_j, or T)."""
    g_axes = sym.block_axes("g")
    if not g_axes:
        raise GridAxisError("symbol has no g-block")
    from .grids import _central_difference

    which = which.upper()
    t_axis = sym.axis_index("t")
    if which == "T":
        return sym.copy_with(_central_difference(sym.values, t_axis, sym.spacing[t_axis]))
    kind, j = which[0], int(which[1:])
    main = sym.axis_index(f"x{j}" if kind == "X" else f"y{j}")
    partner = sym.axis_index(f"y{j}" if kind == "X" else f"x{j}")
    sign = -0.5 if kind == "X" else 0.5
    d_main = _central_difference(sym.values, main, sym.spacing[main])
    d_t = _central_difference(sym.values, t_axis, sym.spacing[t_axis])
    coord = sym.coords(partner)
    shape = [1] * sym.values.ndim
    shape[partner] = -1
    return sym.copy_with(d_main + sign * coord.reshape(shape) * d_t)


def _t_op(sym: SampledSymbol, j: int) -> SampledSymbol:
    """T_j a = -d a / d u_j."""
    u_axes = sym.block_axes("u")
    out = sym.derivative(u_axes[j])
    return out.copy_with(-out.values)


def _tprime_op(sym: SampledSymbol, j: int) -> SampledSymbol:
    """T'_j a = d a / d xi_j."""
    xi_axes = sym.block_axes("xi")
    return sym.derivative(xi_axes[j])


def heisenberg_compose(a: SampledSymbol, b: SampledSymbol, lam: float,
                       trunc: StarTruncation = StarTruncation()):
    """Composition b#a plus the first- and second-order group corrections.

    Implements

        b # a + (2 sqrt(lam))^-1 sum_j (X_j b # T_j a + Y_j b # T'_j a)
              + (8 |lam|)^-1 sum_{j,k} (X_j X_k b # T_j T_k a
                                        + Y_j Y_k b # T'_j T'_k a
                                        + X_j Y_k b # T_j T'_k a
                                        + Y_j X_k b # T'_j T_k a)

    with sqrt(lam) = sgn(lam) sqrt(|lam|); the higher remainder is dropped
    and its scale is estimated by the magnitude of the second-order block.
    Returns ``(symbol, diagnostics)``.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    _require_same_box(a, b)
    if not a.block_axes("g"):
        raise GridAxisError("composition needs symbols sampled over a g-block")
    n = len(_phase_axes(a)[0])
    root = math.copysign(math.sqrt(abs(lam)), lam)

    base = moyal_star(b, a, trunc)
    first = np.zeros(a.shape, dtype=complex)
    for j in range(1, n + 1):
        first = first + moyal_star(_g_field(b, f"X{j}"), _t_op(a, j - 1), trunc).values
        first = first + moyal_star(_g_field(b, f"Y{j}"), _tprime_op(a, j - 1), trunc).values
    second = np.zeros(a.shape, dtype=complex)
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            xjxk_b = _g_field(_g_field(b, f"X{k}"), f"X{j}")
            yjyk_b = _g_field(_g_field(b, f"Y{k}"), f"Y{j}")
            xjyk_b = _g_field(_g_field(b, f"Y{k}"), f"X{j}")
            yjxk_b = _g_field(_g_field(b, f"X{k}"), f"Y{j}")
            second = second + moyal_star(xjxk_b, _t_op(_t_op(a, k - 1), j - 1), trunc).values
            second = second + moyal_star(yjyk_b, _tprime_op(_tprime_op(a, k - 1), j - 1), trunc).values
            second = second + moyal_star(xjyk_b, _tprime_op(_t_op(a, j - 1), k - 1), trunc).values
            second = second + moyal_star(yjxk_b, _t_op(_tprime_op(a, j - 1), k - 1), trunc).values
    first_block = first / (2.0 * root)
    second_block = second / (8.0 * abs(lam))
    out = a.copy_with(base.values + first_block + second_block)
    diagnostics = {
        "first_order_sup": float(np.nanmax(np.abs(first_block))) if first_block.size else 0.0,
        "second_order_sup": float(np.nanmax(np.abs(second_block))),
        "r2_scale_estimate": float(np.nanmax(np.abs(second_block))),
        "lambda_sign_convention": "sqrt(lam) = sgn(lam) sqrt(|lam|)",
    }
    return out, diagnostics


# -- quantization -------------------------------------------------------------

def _interp_rows(values: np.ndarray, src_origin: float, src_spacing: float,
                 targets: np.ndarray) -> np.ndarray:
    """Linear interpolation of each row of ``values`` at target coordinates."""
    pos = (targets - src_origin) / src_spacing
    k = np.clip(np.floor(pos).astype(int), 0, values.shape[1] - 2)
    frac = pos - k
    return values[:, k] * (1.0 - frac) + values[:, k + 1] * frac


def matched_xi_nodes(u_nodes: np.ndarray) -> np.ndarray:
    """Brillouin-zone xi grid matched to a uniform u grid.

    With these m symmetric nodes of spacing 2 pi / (m h_u) and uniform
    weights, the quantization of the constant symbol 1 is exactly the
    identity matrix; mismatched boxes instead produce folding and
    transition-band artifacts at the operator level.
    """
    u_nodes = np.asarray(u_nodes, dtype=float)
    m = len(u_nodes)
    h_u = u_nodes[1] - u_nodes[0]
    h_xi = 2.0 * np.pi / (m * h_u)
    return h_xi * (np.arange(m) - (m - 1) / 2.0)


def weyl_matrix(symbol: SampledSymbol, u_nodes: np.ndarray,
                matched: bool = False) -> np.ndarray:
    """Discretized midpoint quantization on the given 1-d u grid.

    Returns the matrix acting on sample vectors: the kernel
    (2 pi)^-1 int e^{i(u-v)xi} a(xi, (u+v)/2) dxi times the uniform
    v-weight h_v.  With ``matched=False`` the xi quadrature runs over the
    symbol's own xi grid, which must satisfy the anti-wraparound condition
    h_xi <= pi / (u-range); with ``matched=True`` it runs over
    :func:`matched_xi_nodes` and symbol values are interpolated there
    (exact identity for constant symbols).
    """
    xi_axes, u_axes = _phase_axes(symbol)
    if len(xi_axes) != 1:
        raise NotImplementedError("quantization is implemented for n = 1")
    xi_axis = symbol.axis_index(xi_axes[0])
    u_axis = symbol.axis_index(u_axes[0])
    if symbol.values.ndim != 2:
        raise GridAxisError("quantization needs a pure (xi, u) symbol")
    vals = symbol.values if xi_axis < u_axis else symbol.values.T
    u_nodes = np.asarray(u_nodes, dtype=float)
    m = len(u_nodes)
    h_u = u_nodes[1] - u_nodes[0]
    # midpoints (u_i + u_j)/2 on a uniform grid sit at u_0 + (i+j) h/2
    mid_flat = u_nodes[0] + 0.5 * h_u * np.arange(2 * m - 1)
    if matched:
        xi_nodes = matched_xi_nodes(u_nodes)
        sym_origin = (symbol.origin[xi_axis], symbol.origin[u_axis])
        sym_spacing = (symbol.spacing[xi_axis], symbol.spacing[u_axis])
        pts = np.stack(np.meshgrid(xi_nodes, mid_flat, indexing="ij"),
                       axis=-1).reshape(-1, 2)
        from .grids import interp_multilinear

        sym_mid = interp_multilinear(vals, sym_origin, sym_spacing, pts).reshape(
            len(xi_nodes), len(mid_flat))
    else:
        xi_nodes = symbol.coords(xi_axis)
        h_xi = symbol.spacing[xi_axis]
        u_range = u_nodes[-1] - u_nodes[0]
        if h_xi > np.pi / max(u_range, 1e-300) + 1e-12:
            raise GridAxisError(
                f"xi spacing {h_xi:.4g} too coarse for u-range {u_range:.4g}: "
                "the discretized kernel would wrap around"
            )
        sym_mid = _interp_rows(vals, symbol.origin[u_axis], symbol.spacing[u_axis],
                               mid_flat)
    w_xi = xi_nodes[1] - xi_nodes[0]
    idx = np.arange(m)[:, None] + np.arange(m)[None, :]
    kernel = np.zeros((m, m), dtype=complex)
    for k, xi in enumerate(xi_nodes):
        phase = np.exp(1j * xi * u_nodes)
        kernel += (w_xi / (2.0 * np.pi)) * np.outer(phase, phase.conj()) \
            * sym_mid[k][idx]
    return kernel * h_u


def weyl_quantize(symbol: SampledSymbol, f: GridFunction,
                  max_aliasing: float = 1e-3) -> GridFunction:
    """Apply the midpoint quantization of ``symbol`` to a grid function.

    Raises :class:`AliasingError` when more than ``max_aliasing`` of the
    input's squared spectral mass lies beyond the symbol's xi-box.
    """
    if len(f.axes) != 1:
        raise NotImplementedError("quantization is implemented for n = 1")
    xi_axes, _ = _phase_axes(symbol)
    xi_axis = symbol.axis_index(xi_axes[0])
    xi_max = float(np.max(np.abs(symbol.coords(xi_axis))))
    freqs = 2.0 * np.pi * np.fft.fftfreq(f.shape[0], d=f.spacing[0])
    spectrum = np.abs(np.fft.fft(f.values)) ** 2
    total = float(np.sum(spectrum))
    if total > 0:
        outside = float(np.sum(spectrum[np.abs(freqs) > xi_max]))
        if outside / total > max_aliasing:
            raise AliasingError(
                f"{outside / total:.3e} of the spectral mass lies beyond the "
                f"xi-box (|xi| <= {xi_max:.3g})",
                fraction=outside / total,
            )
    mat = weyl_matrix(symbol, f.coords(0))
    return f.copy_with(mat @ f.values)


def quantization_symbol(rule, xi_half: float, u_half: float, xi_points: int,
                        u_points: int, smooth_order: int = 4) -> SampledSymbol:
    """Sample a (xi, u) symbol rule on a centered quantization box."""
    return symbol_from_rule(rule, {"xi": ("xi1",), "u": ("u1",)},
                            [xi_half, u_half], [xi_points, u_points],
                            smooth_order=smooth_order)


# -- experiments ---------------------------------------------------------------

def remainder_decay(a: SampledSymbol, r_values, lam: float, v0: float = 0.0,
                    trunc: StarTruncation = StarTruncation()) -> dict:
    """Star-vs-product gap against the resolvent-type symbol family.

    For each r builds b_r(xi, u) = (lam (|xi|^2 + |u|^2) + v0 + r)^(-1) on
    a's box and tabulates sup |a # b_r - a b_r|, the scaled column
    r * sup, and the size-normalized column r * sup / max b_r.  The scaled
    column must stay bounded (it decays like 1/r on a fixed box); the
    normalized column is the scale-free flatness diagnostic.
    """
    r_values = list(r_values)
    if not r_values:
        raise ValueError("empty r_values")
    if sorted(r_values) != r_values:
        raise ValueError("r_values must be ascending")
    if lam <= 0:
        raise ValueError("this experiment uses lam > 0")
    xi_axes, u_axes = _phase_axes(a)
    mesh = a.meshgrid()
    sq = np.zeros(a.shape)
    for name in xi_axes + u_axes:
        sq = sq + np.abs(mesh[a.axis_index(name)]) ** 2
    rows = {"r": [], "sup": [], "r_times_sup": [], "sup_b": [], "r_scaled_rel": []}
    for r in r_values:
        b_vals = 1.0 / (lam * sq + v0 + r)
        b = a.copy_with(b_vals)
        gap = moyal_star(a, b, trunc).values - a.values * b_vals
        sup = float(np.nanmax(np.abs(gap)))
        sup_b = float(np.max(b_vals))
        rows["r"].append(float(r))
        rows["sup"].append(sup)
        rows["r_times_sup"].append(r * sup)
        rows["sup_b"].append(sup_b)
        rows["r_scaled_rel"].append(r * sup / sup_b)
    return rows


def symbol_estimate_check(a: SampledSymbol, m: float, kappa: float, orders,
                          lam: float) -> list:
    """Sampled-point growth certificates for symbol-class membership.

    For each order spec ``{"xi": multi, "u": multi, "g": [field names]}``
    the empirical ratio

        |d^ord a| / ( |lam|^{(|al|+|be|)/2}
                      (1 + Phi (1 + |xi|^2 + |u|^2))^{(m - |al| - |be|)/2} )

    is maximized over valid samples, with Phi(g, lam) = |lam| + |g|^kappa.
    This is a finite certificate at sample points, not a proof.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    xi_axes, u_axes = _phase_axes(a)
    n = len(xi_axes)
    mesh = a.meshgrid()
    sq_phase = np.zeros(a.shape)
    for name in xi_axes + u_axes:
        sq_phase = sq_phase + np.abs(mesh[a.axis_index(name)]) ** 2
    g_axes = a.block_axes("g")
    if g_axes:
        r2 = np.zeros(a.shape)
        for name in g_axes:
            if name == "t":
                continue
            r2 = r2 + mesh[a.axis_index(name)] ** 2
        t_vals = mesh[a.axis_index("t")] if "t" in g_axes else 0.0
        gnorm = (r2 ** 2 + np.abs(t_vals) ** 2) ** 0.25
        phi = abs(lam) + gnorm ** kappa
    else:
        phi = abs(lam) + np.zeros(a.shape)
    reports = []
    for spec in orders:
        alpha = tuple(spec.get("xi", (0,) * n))
        beta = tuple(spec.get("u", (0,) * n))
        deriv = _block_derivative(_block_derivative(a, xi_axes, alpha), u_axes, beta)
        for field in spec.get("g", ()):
            deriv = _g_field(deriv, field)
        k = sum(alpha) + sum(beta)
        weight = abs(lam) ** (k / 2.0) * (1.0 + phi * (1.0 + sq_phase)) ** ((m - k) / 2.0)
        ratio = np.abs(deriv.values) / weight
        finite = np.isfinite(ratio)
        reports.append({
            "order": {"xi": alpha, "u": beta, "g": tuple(spec.get("g", ()))},
            "max_ratio": float(np.max(ratio[finite])) if np.any(finite) else float("nan"),
            "samples": int(np.sum(finite)),
        })
    return reports


def power_symbol_check(a: SampledSymbol, ell: int, u_sizes) -> dict:
    """Operator-power versus symbol-power gap across grid refinements.

    Builds the symmetrized quantization of ``a`` on each u grid, compares
    Op(a)^ell against Op(a^ell) in operator norm, and reports the column;
    the run is the certificate that the column stays bounded.
    """
    if ell < 1:
        raise ValueError("power must be >= 1")
    xi_axes, u_axes = _phase_axes(a)
    u_axis = a.axis_index(u_axes[0])
    u_half = float(np.max(np.abs(a.coords(u_axis))))
    rows = {"size": [], "norm_gap": [], "asymmetry": []}
    powered = a.copy_with(a.values ** ell)
    for size in u_sizes:
        u_nodes = np.linspace(-u_half, u_half, int(size))
        mat = weyl_matrix(a, u_nodes, matched=True)
        asym = float(np.max(np.abs(mat - mat.conj().T)))
        mat = 0.5 * (mat + mat.conj().T)
        mat_pow = np.linalg.matrix_power(mat, ell)
        mat_of_power = weyl_matrix(powered, u_nodes, matched=True)
        mat_of_power = 0.5 * (mat_of_power + mat_of_power.conj().T)
        rows["size"].append(int(size))
        rows["norm_gap"].append(operator_norm(mat_pow - mat_of_power))
        rows["asymmetry"].append(asym)
    return rows
