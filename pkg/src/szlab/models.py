"""Finite-dimensional models for spectral-projection trace ratios.

Three model kinds share one interface: ``multiplication`` (both the
Hamiltonian and the observable are diagonal in the site basis, stored as
diagonals), ``lattice_schrodinger`` (nearest-neighbor lattice Laplacian plus
a power potential), and ``heisenberg_grid`` (the group sublaplacian stencil
plus the homogeneous-norm potential, assembled dense over an (x, y, t) box).
On top sit the Szego ratio, resolvent trace ratios, the projection-counting
machinery, the trace-smoothing inequality check, commutator sweeps, and
compact perturbations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    SpectralDecomposition,
    eig_self_adjoint,
    matrix_function,
    operator_norm,
)

MAX_SITES = 4000


@dataclass
class FiniteModel:
    """Sites, Hamiltonian, and observable of one finite model."""

    kind: str
    coords: np.ndarray          # (d, space_dim)
    cell_volume: float
    h_diag: np.ndarray = None   # diagonal storage (multiplication kind)
    a_diag: np.ndarray = None
    h_mat: np.ndarray = None    # dense storage (other kinds)
    a_mat: np.ndarray = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.h_diag is not None

    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.h_diag) if self.diagonal else self.h_mat

    def observable(self) -> np.ndarray:
        return np.diag(self.a_diag) if self.diagonal else self.a_mat

    def h_spectrum(self) -> np.ndarray:
        """Eigenvalues of the Hamiltonian, ascending."""
        if self.diagonal:
            return np.sort(self.h_diag)
        return eig_self_adjoint(self.h_mat).eigenvalues


def _guard(d: int) -> None:
    if d > MAX_SITES:
        raise MemoryError(f"model would have {d} sites; the guard is {MAX_SITES}")


def _centered_cells(half: float, points: int) -> np.ndarray:
    h = 2.0 * half / points
    return -half + (np.arange(points) + 0.5) * h


def homogeneous_norm_sites(coords: np.ndarray, n: int) -> np.ndarray:
    """(|x|^4 + t^2)^(1/4) with the last column as t, the rest as (x, y)."""
    r2 = np.sum(coords[:, :-1] ** 2, axis=1)
    return (r2 * r2 + coords[:, -1] ** 2) ** 0.25


def build_model(kind: str, **params) -> FiniteModel:
    """Assemble one of the three model kinds; see the module docstring.

    multiplication:      n, kappa, half_widths (2n+1 floats), points
                         (2n+1 ints), b (site rule on coordinate columns)
    lattice_schrodinger: size (odd), spacing, kappa, potential
                         ("power" | "paper" | "zero"), observable
                         ("multiplication" with b, or "weyl" with symbol)
    heisenberg_grid:     kappa in (0, 1), half_widths (3), points (3), b
    """
    if kind == "multiplication":
        return _build_multiplication(**params)
    if kind == "lattice_schrodinger":
        return _build_lattice(**params)
    if kind == "heisenberg_grid":
        return _build_heisenberg(**params)
    raise ValueError(f"unknown model kind {kind!r}")


def _build_multiplication(n: int, kappa: float, half_widths, points, b=None):
    half_widths = list(half_widths)
    points = [int(p) for p in points]
    if len(half_widths) != 2 * n + 1 or len(points) != 2 * n + 1:
        raise ValueError(f"need {2 * n + 1} axes for n={n}")
    d = int(np.prod(points))
    _guard(d)
    axes = [_centered_cells(h, p) for h, p in zip(half_widths, points)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.column_stack([m.ravel() for m in mesh])
    cell = float(np.prod([2.0 * h / p for h, p in zip(half_widths, points)]))
    v = homogeneous_norm_sites(coords, n) ** kappa
    a = np.zeros(d) if b is None else np.asarray(
        b(*[coords[:, j] for j in range(coords.shape[1])]), dtype=float)
    return FiniteModel(kind="multiplication", coords=coords, cell_volume=cell,
                       h_diag=v, a_diag=a,
                       params={"n": n, "kappa": kappa, "points": points,
                               "half_widths": half_widths})


def _lattice_laplacian(size: int, lattice_dim: int = 1) -> np.ndarray:
    # (Delta u)(k) = sum_{|k-j|=1} u(j) + 2 n u(k), Dirichlet truncation
    lap = 2.0 * lattice_dim * np.eye(size)
    idx = np.arange(size - 1)
    lap[idx, idx + 1] = 1.0
    lap[idx + 1, idx] = 1.0
    return lap


def _build_lattice(size: int, kappa: float = 0.5, spacing: float = 1.0,
                   potential: str = "power", observable: str = "none",
                   b=None, symbol=None):
    _guard(size)
    if size % 2 == 0:
        raise ValueError("use an odd size so the lattice is symmetric around 0")
    k = np.arange(size) - size // 2
    coords = (k * spacing).reshape(-1, 1)
    lap = _lattice_laplacian(size)
    if potential == "zero":
        v = np.zeros(size)
    elif potential == "power":
        v = np.abs(coords[:, 0]) ** kappa
    elif potential == "paper":
        v = np.where(k == 0, 1.0, np.abs(k, dtype=float) ** kappa)
    else:
        raise ValueError(f"unknown potential {potential!r}")
    h = lap + np.diag(v)
    if observable == "none":
        a = np.zeros((size, size))
    elif observable == "multiplication":
        a = np.diag(np.asarray(b(coords[:, 0]), dtype=float))
    elif observable == "weyl":
        a = _weyl_observable(coords[:, 0], symbol)
    else:
        raise ValueError(f"unknown observable {observable!r}")
    model = FiniteModel(kind="lattice_schrodinger", coords=coords,
                        cell_volume=spacing, h_mat=h, a_mat=a,
                        params={"size": size, "kappa": kappa,
                                "spacing": spacing, "potential": potential})
    model.params["v_diag"] = v
    return model


def _weyl_observable(sites: np.ndarray, symbol=None) -> np.ndarray:
    """Symmetrized quantization of a smooth decaying symbol on the sites."""
    from .grids import symbol_from_rule
    from .weyl import weyl_matrix

    if symbol is None:
        def symbol(xi, u):
            return np.exp(-(xi ** 2 + u ** 2) / 2.0)
    half_u = float(np.max(np.abs(sites)))
    h_u = sites[1] - sites[0]
    half_xi = np.pi / h_u
    sampled = symbol_from_rule(symbol, {"xi": ("xi1",), "u": ("u1",)},
                               [half_xi * 1.05, half_u],
                               [4 * len(sites) + 1, 2 * len(sites) + 1])
    mat = weyl_matrix(sampled, sites, matched=True)
    return 0.5 * (mat + mat.conj().T).real


def _first_derivative(size: int, h: float) -> np.ndarray:
    d = np.zeros((size, size))
    idx = np.arange(size - 1)
    d[idx, idx + 1] = 0.5 / h
    d[idx + 1, idx] = -0.5 / h
    return d


def _build_heisenberg(kappa: float, half_widths, points, b=None):
    if not (0.0 < kappa < 1.0):
        raise ValueError("heisenberg_grid requires kappa in (0, 1)")
    points = [int(p) for p in points]
    d = int(np.prod(points))
    _guard(d)
    axes = [_centered_cells(h, p) for h, p in zip(half_widths, points)]
    nx, ny, nt = points
    hx, hy, ht = (2.0 * h / p for h, p in zip(half_widths, points))
    ix, iy, it = np.eye(nx), np.eye(ny), np.eye(nt)
    dx, dy, dt = _first_derivative(nx, hx), _first_derivative(ny, hy), \
        _first_derivative(nt, ht)
    kron = np.kron
    x_field = kron(dx, kron(iy, it)) \
        - 0.5 * kron(ix, kron(np.diag(axes[1]), dt))
    y_field = kron(ix, kron(dy, it)) \
        + 0.5 * kron(np.diag(axes[0]), kron(iy, dt))
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.column_stack([m.ravel() for m in mesh])
    v = homogeneous_norm_sites(coords, 1) ** kappa
    h_mat = -(x_field @ x_field + y_field @ y_field) + np.diag(v)
    h_mat = 0.5 * (h_mat + h_mat.T)
    a = np.zeros((d, d)) if b is None else np.diag(np.asarray(
        b(*[coords[:, j] for j in range(3)]), dtype=float))
    cell = hx * hy * ht
    model = FiniteModel(kind="heisenberg_grid", coords=coords, cell_volume=cell,
                        h_mat=h_mat, a_mat=a,
                        params={"kappa": kappa, "points": points,
                                "half_widths": list(half_widths)})
    model.params["v_diag"] = v
    return model


def sublaplacian_stencil_matrices(half_widths, points):
    """The negated sublaplacian and field matrices used by heisenberg_grid."""
    model = _build_heisenberg(0.5, half_widths, points)
    return model


# -- spectral projections ------------------------------------------------------

def counting_function(eigenvalues: np.ndarray, r: float) -> int:
    """tr pi_r = #{eigenvalues <= r}."""
    return int(np.searchsorted(np.sort(eigenvalues), r, side="right"))


def counting_increment(eigenvalues: np.ndarray, r: float, r1: float) -> int:
    """N_r(r1) = sup over mu <= r1 of the count in the window (mu, mu + r].

    The supremum is attained with the window's right edge at an eigenvalue,
    so it reduces to a scan over eigenvalues up to r1 + r.  r = 0 returns
    the largest machine-equal multiplicity below r1.
    """
    lam = np.sort(eigenvalues)
    best = 0
    for m, val in enumerate(lam):
        if val - r > r1:
            break
        lo = np.searchsorted(lam, val - r, side="left")
        best = max(best, m + 1 - lo)
    return int(best)


def midpoint_thresholds(eigenvalues: np.ndarray, count: int) -> np.ndarray:
    """Thresholds at midpoints between consecutive distinct eigenvalues."""
    distinct = np.unique(np.sort(eigenvalues))
    mids = 0.5 * (distinct[:-1] + distinct[1:])
    if len(mids) <= count:
        return mids
    pick = np.linspace(0, len(mids) - 1, count).astype(int)
    return mids[pick]


def thresholds_for_counts(eigenvalues: np.ndarray, counts) -> list:
    """Midpoint thresholds that make tr pi_r hit the requested counts."""
    lam = np.sort(eigenvalues)
    out = []
    for c in counts:
        c = int(min(max(c, 1), len(lam)))
        if c == len(lam):
            out.append(float(lam[-1] + 1.0))
        else:
            out.append(float(0.5 * (lam[c - 1] + lam[c])))
    return out


def szego_ratio(model: FiniteModel, f, r: float) -> float:
    """tr f(pi_r A pi_r restricted to range pi_r) / tr pi_r.

    ``f`` acts on the compression of the observable to the span of
    Hamiltonian eigenvectors with eigenvalue <= r.  For the diagonal
    (multiplication) kind this is exactly the average of f(b) over sites
    with potential <= r.
    """
    if model.diagonal:
        keep = model.h_diag <= r
        k = int(np.count_nonzero(keep))
        if k == 0:
            raise ValueError(f"projection at r={r} is empty")
        vals = np.asarray(f(model.a_diag[keep]), dtype=float)
        return float(np.sum(vals) / k)
    decomp = eig_self_adjoint(model.h_mat)
    cols = decomp.eigenvectors[:, decomp.eigenvalues <= r]
    k = cols.shape[1]
    if k == 0:
        raise ValueError(f"projection at r={r} is empty")
    compressed = cols.conj().T @ model.a_mat @ cols
    compressed = 0.5 * (compressed + compressed.conj().T)
    w = eig_self_adjoint(compressed).eigenvalues
    return float(np.sum(np.asarray(f(w), dtype=float)) / k)


def scaled_szego_sum(model: FiniteModel, f, r: float) -> float:
    """cell_volume * tr pi_r * szego_ratio = cell_volume * sum f(b) over
    sites with potential <= r (the lattice Riemann sum of int f(b) dg)."""
    if not model.diagonal:
        raise ValueError("scaled sum is defined for the multiplication kind")
    keep = model.h_diag <= r
    vals = np.asarray(f(model.a_diag[keep]), dtype=float)
    return float(model.cell_volume * np.sum(vals))


# -- resolvent trace ratios ------------------------------------------------------

def resolvent_trace_ratio(v_diag: np.ndarray, bounded: np.ndarray, m: int,
                          r_values, weight: np.ndarray = None) -> dict:
    """Rows (r, |ratio - 1|, bound m ||B|| ||(V+r)^-1||) for H = V + B.

    ``weight`` switches to the weighted traces tr(W (H+r)^-m) /
    tr(W (V+r)^-m) with a fixed positive W (same bound).
    """
    if m < 1:
        raise ValueError("need a positive integer power m")
    v_diag = np.asarray(v_diag, dtype=float)
    h1 = np.diag(v_diag) + bounded
    decomp = eig_self_adjoint(h1)
    norm_b = operator_norm(bounded)
    rows = {"r": [], "ratio_minus_1": [], "bound": []}
    if weight is not None:
        wdec = weight
    for r in r_values:
        if np.min(v_diag) + r <= 0:
            raise ValueError("shift must keep V + r positive")
        if weight is None:
            num = float(np.sum((decomp.eigenvalues + r) ** (-m)))
            den = float(np.sum((v_diag + r) ** (-m)))
        else:
            fw = (decomp.eigenvalues + r) ** (-m)
            num = float(np.real(np.trace((decomp.eigenvectors * fw)
                                         @ decomp.eigenvectors.conj().T @ wdec)))
            den = float(np.real(np.trace(np.diag((v_diag + r) ** (-m)) @ wdec)))
        bound = m * norm_b / (np.min(v_diag) + r)
        rows["r"].append(float(r))
        rows["ratio_minus_1"].append(abs(num / den - 1.0))
        rows["bound"].append(bound)
    return rows


# -- trace smoothing inequality ---------------------------------------------------

def laptev_safarov_check(h_mat: np.ndarray, a_mat: np.ndarray, f,
                         f_second_sup: float, r1: float, r: float) -> dict:
    """Both sides of the projection-smoothing trace inequality.

    left  = |tr(pi f(A) pi - pi f(pi A pi) pi)| with pi the spectral
    projection of H at r1; right = (1/2) sup|f''| N_r(r1)
    (||pi A||^2 + pi^2/(6 r^2) ||pi_{r1-r} [A, H]||^2).
    """
    if not 0.0 < r < r1:
        raise ValueError("need 0 < r < r1")
    dh = eig_self_adjoint(h_mat)
    cols = dh.eigenvectors[:, dh.eigenvalues <= r1]
    k = cols.shape[1]
    da = eig_self_adjoint(a_mat)
    f_a = matrix_function(da, f)
    term1 = float(np.real(np.trace(cols.conj().T @ f_a @ cols)))
    compressed = cols.conj().T @ a_mat @ cols
    compressed = 0.5 * (compressed + compressed.conj().T)
    w = eig_self_adjoint(compressed).eigenvalues
    term2 = float(np.sum(np.asarray(f(w), dtype=float)))
    left = abs(term1 - term2)
    n_incr = counting_increment(dh.eigenvalues, r, r1)
    pi_a = cols @ (cols.conj().T @ a_mat)
    comm = a_mat @ h_mat - h_mat @ a_mat
    cols_lo = dh.eigenvectors[:, dh.eigenvalues <= r1 - r]
    pi_comm = cols_lo @ (cols_lo.conj().T @ comm)
    right = 0.5 * f_second_sup * n_incr * (
        operator_norm(pi_a) ** 2
        + np.pi ** 2 / (6.0 * r ** 2) * operator_norm(pi_comm) ** 2)
    return {"left": left, "right": right, "holds": left <= right * (1 + 1e-10),
            "rank": k, "counting_increment": n_incr}


def counting_increment_bound(eigenvalues: np.ndarray, r: float, r1: float,
                             growth_exponent: float, slack: float = 0.5) -> dict:
    """Compare N_r(r1) with tr(pi_r1) (growth_exponent r / r1 + slack)."""
    n_incr = counting_increment(eigenvalues, r, r1)
    total = counting_function(eigenvalues, r1)
    bound = total * (growth_exponent * r / r1 + slack)
    return {"increment": n_incr, "count": total, "bound": bound,
            "holds": n_incr <= bound, "ratio": n_incr / max(total, 1)}


# -- sweeps and perturbations -----------------------------------------------------

def commutator_sweep(kappa_values, sizes, spacing: float = 0.1) -> list:
    """Norms of [V, A] and [H, A] per (kappa, size) on the 1-d lattice.

    A is the symmetrized Gaussian-symbol quantization (smooth, order 0,
    rapidly decaying kernel).  For kappa < 1 the columns plateau as the
    lattice grows; kappa >= 1 rows are reported without any assertion.
    """
    rows = []
    for kappa in kappa_values:
        for size in sizes:
            model = _build_lattice(size=size, kappa=kappa, spacing=spacing,
                                   potential="power", observable="weyl")
            v = np.diag(model.params["v_diag"])
            a = model.a_mat
            h = model.h_mat
            comm_v = v @ a - a @ v
            comm_h = h @ a - a @ h
            rows.append({"kappa": float(kappa), "size": int(size),
                         "norm_comm_v": operator_norm(comm_v),
                         "norm_comm_h": operator_norm(comm_h)})
    return rows


def random_low_rank(dim: int, rank: int, norm: float, seed: int,
                    support: np.ndarray = None) -> np.ndarray:
    """Random self-adjoint perturbation of the given rank and operator norm.

    ``support`` restricts the range to the given site indices; a localized
    perturbation is the finite-model analogue of a fixed compact operator
    against an exhausting projection family (the projections capture all of
    it once they cover the support, after which trace effects decay like
    1 / tr pi_r).
    """
    rng = np.random.default_rng(seed)
    if support is None:
        vecs = rng.standard_normal((dim, rank))
    else:
        support = np.asarray(support, dtype=int)
        vecs = np.zeros((dim, rank))
        vecs[support, :] = rng.standard_normal((len(support), rank))
    q, _ = np.linalg.qr(vecs)
    q = q[:, :rank]
    mu = rng.uniform(0.5, 1.0, size=rank) * np.sign(rng.standard_normal(rank))
    k = (q * mu) @ q.T
    return k * (norm / operator_norm(k))


def compact_perturbation_check(model: FiniteModel, k_mat: np.ndarray, f,
                               r_values, f_lip: float = None) -> dict:
    """Rows (r, |ratio(A+K) - ratio(A)|, rank ||K|| Lip(f) / tr pi_r)."""
    if model.diagonal:
        base_h = np.diag(model.h_diag)
        base_a = np.diag(model.a_diag)
    else:
        base_h = model.h_mat
        base_a = model.a_mat
    rank = int(np.linalg.matrix_rank(k_mat, tol=1e-10))
    norm_k = operator_norm(k_mat)
    perturbed = FiniteModel(kind=model.kind + "+K", coords=model.coords,
                            cell_volume=model.cell_volume, h_mat=base_h,
                            a_mat=base_a + k_mat, params=dict(model.params))
    base = FiniteModel(kind=model.kind, coords=model.coords,
                       cell_volume=model.cell_volume, h_mat=base_h,
                       a_mat=base_a, params=dict(model.params))
    if f_lip is None:
        hull = np.linspace(-(operator_norm(base_a) + norm_k),
                           operator_norm(base_a) + norm_k, 201)
        f_lip = float(np.max(np.abs(np.gradient(np.asarray(f(hull), dtype=float),
                                                hull))))
    eigs = eig_self_adjoint(base_h).eigenvalues
    rows = {"r": [], "delta_ratio": [], "bound": [], "count": []}
    for r in r_values:
        count = counting_function(eigs, r)
        delta = abs(szego_ratio(perturbed, f, r) - szego_ratio(base, f, r))
        rows["r"].append(float(r))
        rows["delta_ratio"].append(delta)
        rows["bound"].append(rank * norm_k * f_lip / max(count, 1))
        rows["count"].append(count)
    return rows
