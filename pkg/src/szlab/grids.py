"""Uniform-grid sampled functions, sampled symbols, and their binary container.

Container byte layout (documented external interface):

    bytes 0..7    magic ``b"SZGF0001"``
    bytes 8..11   header length ``L`` as little-endian uint32
    bytes 12..    UTF-8 JSON header of length ``L`` with keys
                  ``kind`` ("grid" or "symbol"), ``axes``, ``origin``,
                  ``spacing``, ``shape``, ``dtype`` (always "complex64"),
                  and for symbols ``blocks`` (axis-name lists per variable
                  block) plus ``smooth_order``
    then          C-order little-endian complex64 samples

Values are held as complex128 in memory and stored as complex64 on disk.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GridAxisError

_MAGIC = b"SZGF0001"


@dataclass
class GridFunction:
    """Complex samples on a uniform rectangular grid with spacing metadata."""

    values: np.ndarray
    origin: np.ndarray
    spacing: np.ndarray
    axes: tuple

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = np.asarray(self.spacing, dtype=float)
        self.axes = tuple(self.axes)
        if self.values.ndim != len(self.axes):
            raise GridAxisError(
                f"{self.values.ndim}-d values with {len(self.axes)} axis labels"
            )
        if len(self.origin) != self.values.ndim or len(self.spacing) != self.values.ndim:
            raise GridAxisError("origin/spacing length must match dimensionality")
        if np.any(self.spacing <= 0):
            raise GridAxisError("grid spacing must be strictly positive on every axis")

    # -- geometry -----------------------------------------------------------
    @property
    def shape(self):
        return self.values.shape

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise GridAxisError(f"axis {name!r} not on grid with axes {self.axes}") from None

    def coords(self, axis) -> np.ndarray:
        i = axis if isinstance(axis, int) else self.axis_index(axis)
        return self.origin[i] + self.spacing[i] * np.arange(self.shape[i])

    def meshgrid(self):
        return np.meshgrid(*(self.coords(i) for i in range(self.values.ndim)),
                           indexing="ij")

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    # -- integration --------------------------------------------------------
    def l2_norm(self) -> float:
        """(sum |f|^2 * prod spacing)^(1/2)."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_volume))

    def trapezoid_weights(self, axis: int) -> np.ndarray:
        w = np.full(self.shape[axis], self.spacing[axis])
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def integrate(self) -> complex:
        """Tensorized trapezoid integral over the whole box."""
        acc = self.values
        for axis in range(self.values.ndim - 1, -1, -1):
            w = self.trapezoid_weights(axis)
            acc = np.tensordot(acc, w, axes=([axis], [0]))
        return complex(acc)

    def inner(self, other: "GridFunction") -> complex:
        """<self, other> = sum self * conj(other) * cell volume."""
        self._require_same_grid(other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.cell_volume)

    def _require_same_grid(self, other: "GridFunction") -> None:
        if (self.axes != other.axes or self.shape != other.shape
                or not np.allclose(self.origin, other.origin)
                or not np.allclose(self.spacing, other.spacing)):
            raise GridAxisError("grids are incompatible")

    # -- manipulation -------------------------------------------------------
    def copy_with(self, values: np.ndarray) -> "GridFunction":
        return replace(self, values=np.asarray(values, dtype=complex))

    def interior(self, width: int) -> np.ndarray:
        """View of the samples with a boundary layer of ``width`` cells removed."""
        sl = tuple(slice(width, s - width if width else None) for s in self.shape)
        return self.values[sl]

    def shifted(self, shifts: dict) -> "GridFunction":
        """Evaluate f at (coord + shift) per named axis by linear interpolation.

        Points falling outside the box read as zero; the caller is
        responsible for judging the lost mass (see
        :func:`off_grid_mass_fraction`).
        """
        out = self.values
        for name, s in shifts.items():
            axis = self.axis_index(name)
            out = _shift_axis(out, axis, s / self.spacing[axis])
        return self.copy_with(out)

    def off_grid_mass_fraction(self, shifts: dict) -> float:
        """Fraction of squared mass whose source coordinates leave the box.

        After the shift, output index j reads from coordinate c_j + s, so the
        readable source window is [c_first + s, c_last + s]; samples outside
        it are dropped.
        """
        total = np.sum(np.abs(self.values) ** 2)
        if total == 0.0:
            return 0.0
        kept = np.ones(self.shape, dtype=bool)
        for name, s in shifts.items():
            axis = self.axis_index(name)
            c = self.coords(axis)
            mask = (c >= c[0] + s - 1e-12) & (c <= c[-1] + s + 1e-12)
            shape = [1] * self.values.ndim
            shape[axis] = -1
            kept &= mask.reshape(shape)
        inside = np.sum(np.abs(self.values[kept]) ** 2)
        return float(max(0.0, 1.0 - inside / total))


def _shift_axis(values: np.ndarray, axis: int, delta: float) -> np.ndarray:
    # sample index j reads from fractional index j + delta; linear interpolation
    n = values.shape[axis]
    base = np.arange(n) + delta
    k = np.floor(base).astype(int)
    frac = base - k
    lead = np.zeros(values.shape, dtype=values.dtype)
    trail = np.zeros(values.shape, dtype=values.dtype)
    valid_lead = (k >= 0) & (k <= n - 1)
    valid_trail = (k + 1 >= 0) & (k + 1 <= n - 1)
    vals = np.moveaxis(values, axis, 0)
    out_lead = np.moveaxis(lead, axis, 0)
    out_trail = np.moveaxis(trail, axis, 0)
    out_lead[valid_lead] = vals[np.clip(k, 0, n - 1)][valid_lead]
    out_trail[valid_trail] = vals[np.clip(k + 1, 0, n - 1)][valid_trail]
    shifted = (1.0 - frac)[(slice(None),) + (None,) * (values.ndim - 1)] * out_lead \
        + frac[(slice(None),) + (None,) * (values.ndim - 1)] * out_trail
    return np.moveaxis(shifted, 0, axis)


def grid_from_rule(rule, axes, origin, spacing, shape) -> GridFunction:
    """Sample ``rule(*coordinate_arrays)`` on the uniform grid."""
    gf = GridFunction(values=np.zeros(tuple(shape)), origin=origin,
                      spacing=spacing, axes=axes)
    mesh = gf.meshgrid()
    return gf.copy_with(np.asarray(rule(*mesh), dtype=complex))


def centered_grid(rule, axes, half_widths, points) -> GridFunction:
    """Uniform grid symmetric about the origin with the given half widths."""
    half_widths = np.asarray(half_widths, dtype=float)
    points = np.asarray(points, dtype=int)
    spacing = 2.0 * half_widths / (points - 1)
    return grid_from_rule(rule, axes, origin=-half_widths, spacing=spacing,
                          shape=tuple(points))


# -- sampled symbols --------------------------------------------------------

@dataclass
class SampledSymbol(GridFunction):
    """Symbol samples over grouped variable blocks (g / lambda / xi / u).

    ``blocks`` maps a block name to the tuple of axis labels it owns; every
    axis label must appear in exactly one block.  ``smooth_order`` declares
    how many derivatives the sampled data supports; star products check it.
    """

    blocks: dict = field(default_factory=dict)
    smooth_order: int = 4

    def __post_init__(self):
        super().__post_init__()
        owned = [name for blk in self.blocks.values() for name in blk]
        if sorted(owned) != sorted(self.axes):
            raise GridAxisError(
                f"blocks {self.blocks} do not partition axes {self.axes}"
            )
        self.blocks = {k: tuple(v) for k, v in self.blocks.items()}

    def block_axes(self, block: str) -> tuple:
        if block not in self.blocks:
            return ()
        return self.blocks[block]

    def derivative(self, axis_name: str, order: int = 1) -> "SampledSymbol":
        """Central-difference derivative along one axis; boundary cells go NaN."""
        if order > self.smooth_order:
            raise ValueError(
                f"requested order {order} exceeds declared smoothness {self.smooth_order}"
            )
        axis = self.axis_index(axis_name)
        vals = self.values
        for _ in range(order):
            vals = _central_difference(vals, axis, self.spacing[axis])
        out = replace(self, values=vals)
        return out

    def copy_with(self, values: np.ndarray) -> "SampledSymbol":
        return replace(self, values=np.asarray(values, dtype=complex))


def _central_difference(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full(values.shape, np.nan + 0j, dtype=complex)
    mid = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo = [slice(None)] * values.ndim
    mid[axis] = slice(1, -1)
    hi[axis] = slice(2, None)
    lo[axis] = slice(0, -2)
    out[tuple(mid)] = (values[tuple(hi)] - values[tuple(lo)]) / (2.0 * h)
    return out


def symbol_from_rule(rule, blocks, half_widths, points, smooth_order=4) -> SampledSymbol:
    """Sample a symbol rule on a centered box; ``blocks`` fixes the axis order."""
    axes = tuple(name for blk in blocks.values() for name in blk)
    half_widths = np.asarray(half_widths, dtype=float)
    points = np.asarray(points, dtype=int)
    spacing = 2.0 * half_widths / (points - 1)
    origin = -half_widths
    base = SampledSymbol(values=np.zeros(tuple(points)), origin=origin,
                         spacing=spacing, axes=axes, blocks=blocks,
                         smooth_order=smooth_order)
    mesh = base.meshgrid()
    return base.copy_with(np.asarray(rule(*mesh), dtype=complex))


# -- container io -----------------------------------------------------------

def write_container(path, obj) -> None:
    """Serialize a GridFunction or SampledSymbol to the binary container."""
    header = {
        "kind": "symbol" if isinstance(obj, SampledSymbol) else "grid",
        "axes": list(obj.axes),
        "origin": [float(v) for v in obj.origin],
        "spacing": [float(v) for v in obj.spacing],
        "shape": [int(s) for s in obj.shape],
        "dtype": "complex64",
    }
    if isinstance(obj, SampledSymbol):
        header["blocks"] = {k: list(v) for k, v in obj.blocks.items()}
        header["smooth_order"] = int(obj.smooth_order)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(obj.values, dtype="<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)


def read_container(path):
    """Read the binary container back into a GridFunction or SampledSymbol."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a szlab grid container")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        raw = fh.read()
    shape = tuple(header["shape"])
    count = int(np.prod(shape)) if shape else 1
    values = np.frombuffer(raw, dtype="<c8", count=count).reshape(shape).astype(complex)
    common = dict(values=values, origin=np.array(header["origin"]),
                  spacing=np.array(header["spacing"]), axes=tuple(header["axes"]))
    if header["kind"] == "symbol":
        return SampledSymbol(blocks={k: tuple(v) for k, v in header["blocks"].items()},
                             smooth_order=int(header.get("smooth_order", 4)),
                             **common)
    return GridFunction(**common)


def interp_multilinear(values, origin, spacing, points):
    """Multilinear interpolation of gridded data at arbitrary points.

    ``points`` has shape (m, ndim); coordinates outside the box read 0.
    """
    values = np.asarray(values)
    origin = np.asarray(origin, dtype=float)
    spacing = np.asarray(spacing, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, ndim = pts.shape
    frac_idx = (pts - origin) / spacing
    base = np.floor(frac_idx).astype(int)
    frac = frac_idx - base
    out = np.zeros(m, dtype=values.dtype)
    inside = np.all((frac_idx >= 0) & (frac_idx <= np.array(values.shape) - 1), axis=1)
    if not np.any(inside):
        return out
    base_in = base[inside]
    frac_in = frac[inside]
    acc = np.zeros(base_in.shape[0], dtype=values.dtype if np.iscomplexobj(values) else float)
    for corner in range(1 << ndim):
        bits = np.array([(corner >> k) & 1 for k in range(ndim)])
        idx = np.clip(base_in + bits, 0, np.array(values.shape) - 1)
        weight = np.prod(np.where(bits, frac_in, 1.0 - frac_in), axis=1)
        acc += weight * values[tuple(idx.T)]
    out[inside] = acc
    return out
