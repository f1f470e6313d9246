"""Classical circle Szego limits: Toeplitz truncations and their trace means.

``CircleSymbol`` wraps an evaluation rule f(theta) on [0, 2pi); truncations
``A[j][k] = c_{j-k}`` of the multiplication operator are built from Fourier
coefficients computed by periodic trapezoid quadrature (spectrally accurate
for smooth symbols).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DefinitenessError
from .linalg import eig_self_adjoint, SpectralDecomposition

POSITIVITY_GRID = 4096


@dataclass
class CircleSymbol:
    """A symbol f on the circle with a Fourier-coefficient cache."""

    rule: object  # callable theta -> value, vectorized over arrays
    positive: bool = False
    quad_points: int = POSITIVITY_GRID
    _coeffs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        theta = np.linspace(0.0, 2.0 * np.pi, self.quad_points, endpoint=False)
        samples = np.asarray(self.rule(theta), dtype=complex)
        if samples.shape != theta.shape:
            raise ValueError("symbol rule must be vectorized over theta")
        self._samples = samples
        self._theta = theta
        if self.positive and np.min(samples.real) <= 0.0:
            raise DefinitenessError(
                "symbol flagged positive but its minimum on the check grid is "
                f"{np.min(samples.real):.6g}",
                offending_eigenvalue=float(np.min(samples.real)),
            )

    def __call__(self, theta):
        return self.rule(theta)

    def fourier_coeff(self, k: int) -> complex:
        """c_k = (1/2pi) int f(theta) e^{-ik theta} dtheta, trapezoid rule."""
        if k not in self._coeffs:
            phase = np.exp(-1j * k * self._theta)
            self._coeffs[k] = complex(np.mean(self._samples * phase))
        return self._coeffs[k]

    def fourier_coeffs(self, kmax: int) -> np.ndarray:
        """c_{-kmax}..c_{kmax} as one array (index k + kmax)."""
        return np.array([self.fourier_coeff(k) for k in range(-kmax, kmax + 1)])

    def is_real(self) -> bool:
        return bool(np.max(np.abs(self._samples.imag)) < 1e-13 * max(1.0, np.max(np.abs(self._samples))))

    def mean_of(self, func) -> float:
        """(1/2pi) int func(f(theta)) dtheta on the cached grid."""
        return float(np.mean(func(self._samples.real)))


def fourier_coeff(symbol: CircleSymbol, k: int) -> complex:
    return symbol.fourier_coeff(k)


@dataclass(frozen=True)
class ToeplitzTruncation:
    """The (n+1) x (n+1) section A[j][k] = c_{j-k} of the symbol's Toeplitz form."""

    order: int
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.order + 1


def toeplitz_truncation(symbol: CircleSymbol, n: int) -> ToeplitzTruncation:
    coeffs = symbol.fourier_coeffs(n)
    idx = np.arange(n + 1)
    mat = coeffs[idx[:, None] - idx[None, :] + n]
    if symbol.is_real():
        # real symbol -> Hermitian section; even symbols are purely real
        if np.max(np.abs(mat.imag)) < 1e-14 * max(1.0, np.max(np.abs(mat))):
            mat = mat.real.copy()
    return ToeplitzTruncation(order=n, matrix=mat)


def _eigenvalues(symbol: CircleSymbol, n: int) -> np.ndarray:
    trunc = toeplitz_truncation(symbol, n)
    return eig_self_adjoint(trunc.matrix).eigenvalues


def szego_logdet(symbol: CircleSymbol, n: int) -> float:
    """(n+1)^(-1) log det of the order-n truncation via its eigenvalues.

    Requires a positive-definite truncation; the offending eigenvalue is
    reported otherwise.
    """
    lam = _eigenvalues(symbol, n)
    if lam[0] <= 0.0:
        raise DefinitenessError(
            f"truncation of order {n} is not positive definite "
            f"(smallest eigenvalue {lam[0]:.6g})",
            offending_eigenvalue=float(lam[0]),
        )
    return float(np.sum(np.log(lam)) / (n + 1))


def szego_functional(symbol: CircleSymbol, func, n: int) -> float:
    """(n+1)^(-1) sum of func over the truncation's eigenvalues."""
    lam = _eigenvalues(symbol, n)
    vals = np.asarray(func(lam), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DefinitenessError("functional is non-finite on the spectrum")
    return float(np.sum(vals) / (n + 1))


def logdet_limit(symbol: CircleSymbol) -> float:
    """Quadrature value of (1/2pi) int log f, the log-det limit."""
    return symbol.mean_of(np.log)


def functional_limit(symbol: CircleSymbol, func) -> float:
    """Quadrature value of (1/2pi) int func(f), the trace-mean limit."""
    return symbol.mean_of(func)


def convergence_table(symbol: CircleSymbol, n_values, mode: str = "logdet",
                      func=None) -> dict:
    """Rows (n, value, limit, gap) for the log-det mean or an F-functional.

    ``mode`` is "logdet" or "functional" (the latter needs ``func``).  The
    limit column is the quadrature value of the corresponding circle average.
    """
    from .parallel import map_indexed

    n_values = list(n_values)
    if sorted(n_values) != n_values:
        raise ValueError("n_values must be ascending")
    if mode == "logdet":
        limit = logdet_limit(symbol)
        values = map_indexed(lambda n: szego_logdet(symbol, n), n_values)
    elif mode == "functional":
        if func is None:
            raise ValueError("functional mode needs func")
        limit = functional_limit(symbol, func)
        values = map_indexed(lambda n: szego_functional(symbol, func, n), n_values)
    else:
        raise ValueError(f"unknown mode: {mode!r}")
    gaps = [abs(v - limit) for v in values]
    return {
        "n": n_values,
        "value": values,
        "limit": [limit] * len(n_values),
        "gap": gaps,
    }


def named_symbol(spec: str) -> CircleSymbol:
    """Build a symbol from a small textual grammar used by the CLI.

    Supported: ``"2+cos"`` style affine-in-cosine strings ``a+b*cos`` /
    ``a+b cos``, ``"exp(cos)"``, and ``"const:<value>"``.
    """
    text = spec.strip().lower().replace(" ", "")
    if text.startswith("const:"):
        c = float(text.split(":", 1)[1])
        return CircleSymbol(rule=lambda th, c=c: np.full_like(th, c, dtype=float),
                            positive=c > 0)
    if text == "exp(cos)":
        return CircleSymbol(rule=lambda th: np.exp(np.cos(th)), positive=True)
    if text.endswith("cos"):
        body = text[:-3].rstrip("*")
        if body in ("", "+"):
            a, b = 0.0, 1.0
        elif body.endswith("+"):
            a, b = float(body[:-1]), 1.0
        else:
            parts = body.rsplit("+", 1)
            if len(parts) == 2:
                a = float(parts[0]) if parts[0] else 0.0
                b = float(parts[1]) if parts[1] else 1.0
            else:
                a, b = 0.0, float(parts[0])
        return CircleSymbol(rule=lambda th, a=a, b=b: a + b * np.cos(th),
                            positive=a > abs(b))
    raise ValueError(f"unrecognized symbol spec: {spec!r}")
