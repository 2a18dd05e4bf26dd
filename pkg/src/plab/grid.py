"""Uniform grids on a box, dyadic cubes, and basic quadrature.

Functions are sampled on x = -L + h*i, i in [0, N)^n.  Outside the box they
are taken to be zero for spatial work and periodic for Fourier work.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ResolutionError, ParameterError, DegenerateBallError

MAGIC = b"PLAB"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class BoxDomain:
    dim: int
    half_width: float
    samples_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError("only dimensions 1 and 2 are supported")
        n = int(self.samples_per_axis)
        if n < 2 or n & (n - 1):
            raise ParameterError(f"samples_per_axis must be a power of two, got {n}")
        if not self.half_width > 0:
            raise ParameterError("half_width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.samples_per_axis

    @property
    def shape(self) -> tuple:
        return (self.samples_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim

    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.samples_per_axis)

    def coords(self) -> list:
        """Per-axis coordinate arrays broadcast to the full grid (ij indexing)."""
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def freq_axis(self) -> np.ndarray:
        # angular frequencies matching f^(xi) = int f(x) exp(-i x.xi) dx
        return 2.0 * np.pi * np.fft.fftfreq(self.samples_per_axis, d=self.h)

    def freqs(self) -> list:
        fx = self.freq_axis()
        return list(np.meshgrid(*([fx] * self.dim), indexing="ij"))

    def freq_radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.freqs()))

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    def finest_level(self) -> int:
        """Largest j with at least two grid points per dyadic cell of side 2^-j."""
        return int(math.floor(math.log2(1.0 / self.h) + 1e-12)) - 1

    def covering_level(self) -> int:
        """Level whose cubes are large enough to contain the box part of an orthant."""
        return -int(math.ceil(math.log2(self.half_width) - 1e-12))

    def refine(self, factor: int = 2) -> "BoxDomain":
        return BoxDomain(self.dim, self.half_width, self.samples_per_axis * factor)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "half_width": self.half_width,
                "samples_per_axis": self.samples_per_axis}


@dataclass(frozen=True)
class ScaleWindow:
    j_min: int
    j_max: int

    def __post_init__(self):
        if self.j_min > self.j_max:
            raise ParameterError("scale window needs j_min <= j_max")

    @property
    def levels(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def homogeneous(self) -> bool:
        return self.j_min < 0

    def check(self, box: BoxDomain) -> None:
        if self.j_max > box.finest_level():
            raise ResolutionError(
                f"window j_max={self.j_max} exceeds resolution (max {box.finest_level()} "
                f"for h={box.h})")

    def __contains__(self, j) -> bool:
        return self.j_min <= j <= self.j_max


@dataclass(frozen=True)
class DyadicCube:
    level: int
    index: tuple

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def corner(self) -> np.ndarray:
        return self.side * np.asarray(self.index, dtype=float)

    @property
    def center(self) -> np.ndarray:
        return self.side * (np.asarray(self.index, dtype=float) + 0.5)

    @property
    def volume(self) -> float:
        return self.side ** len(self.index)

    @classmethod
    def from_corner(cls, corner, side) -> "DyadicCube":
        j = -int(round(math.log2(side)))
        k = tuple(int(round(c / side)) for c in np.atleast_1d(corner))
        return cls(j, k)


def cube_geometry(Q: DyadicCube):
    """(corner, side, center) of Q_{jk} = 2^-j([0,1)^n + k)."""
    return Q.corner, Q.side, Q.center


def _axis_index_range(box: BoxDomain, j: int):
    s = 2.0 ** j
    lo = math.floor(-box.half_width * s + 1e-12)
    hi = math.ceil(box.half_width * s - 1e-12)
    return lo, hi


def enumerate_cubes(box: BoxDomain, window: ScaleWindow, check: bool = True) -> list:
    """Dyadic cubes with level in the window that meet the box in positive volume."""
    if check:
        window.check(box)
    out = []
    for j in window.levels:
        lo, hi = _axis_index_range(box, j)
        rng = range(lo, hi)
        if box.dim == 1:
            out.extend(DyadicCube(j, (k,)) for k in rng)
        else:
            out.extend(DyadicCube(j, (k1, k2)) for k1 in rng for k2 in rng)
    return out


def cube_labels(box: BoxDomain, j: int):
    """Label every grid point by the dyadic cube of level j containing it.

    Returns (labels, ks) where labels has the grid shape with values in
    [0, len(ks)) and ks is the (m, n) integer array of cube indices in
    lexicographic order.
    """
    ax = box.axis()
    k_axis = np.floor(ax * 2.0 ** j + 1e-9).astype(np.int64)
    lo = int(k_axis.min())
    m = int(k_axis.max()) - lo + 1
    local = k_axis - lo
    if box.dim == 1:
        labels = local
        ks = (np.arange(m) + lo)[:, None]
    else:
        labels = local[:, None] * m + local[None, :]
        g1, g2 = np.meshgrid(np.arange(m) + lo, np.arange(m) + lo, indexing="ij")
        ks = np.stack([g1.ravel(), g2.ravel()], axis=1)
    return labels, ks


def cube_slices(box: BoxDomain, Q: DyadicCube) -> tuple:
    """Index slices of grid points lying in Q (half-open)."""
    sl = []
    for c in Q.corner:
        i0 = math.ceil((c + box.half_width) / box.h - 1e-9)
        i1 = math.ceil((c + Q.side + box.half_width) / box.h - 1e-9)
        i0 = min(max(i0, 0), box.samples_per_axis)
        i1 = min(max(i1, 0), box.samples_per_axis)
        sl.append(slice(i0, i1))
    return tuple(sl)


@dataclass
class GridFunction:
    domain: BoxDomain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size != self.domain.samples_per_axis ** self.domain.dim:
            raise ParameterError("value count does not match the grid")
        v = v.reshape(self.domain.shape)
        if not np.all(np.isfinite(v)):
            raise ParameterError("grid values must be finite")
        self.values = v.astype(complex) if not np.iscomplexobj(v) else v

    @classmethod
    def from_callable(cls, box: BoxDomain, fn) -> "GridFunction":
        return cls(box, fn(*box.coords()))

    @classmethod
    def zeros(cls, box: BoxDomain) -> "GridFunction":
        return cls(box, np.zeros(box.shape, dtype=complex))

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def __add__(self, other):
        return GridFunction(self.domain, self.values + _vals(other))

    def __sub__(self, other):
        return GridFunction(self.domain, self.values - _vals(other))

    def __mul__(self, c):
        return GridFunction(self.domain, self.values * _vals(c))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.domain, -self.values)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.domain.cell_volume))

    def fft(self) -> np.ndarray:
        return np.fft.fftn(self.values)

    def save(self, path) -> None:
        save_grid(path, self)

    def to_csv(self, path) -> None:
        export_csv(path, self)


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


def ball_mask_offsets(box: BoxDomain, r: float) -> np.ndarray:
    """Integer offsets (m, n) of grid points within distance r of a grid point."""
    m = int(math.floor(r / box.h + 1e-9))
    rng = np.arange(-m, m + 1)
    if box.dim == 1:
        offs = rng[:, None]
    else:
        a, b = np.meshgrid(rng, rng, indexing="ij")
        offs = np.stack([a.ravel(), b.ravel()], axis=1)
    d = np.sqrt((offs.astype(float) ** 2).sum(axis=1)) * box.h
    return offs[d <= r * (1 + 1e-12)]


def ball_average(f: GridFunction, x, r: float, u: float = 1.0) -> float:
    """(mean over grid points of B(x, r) of |f|^u)^(1/u); u = inf gives the max."""
    box = f.domain
    if r < box.h * (1 - 1e-12):
        raise DegenerateBallError(f"radius {r} below grid spacing {box.h}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coords = box.coords()
    d2 = sum((c - xi) ** 2 for c, xi in zip(coords, x))
    mask = d2 <= (r * (1 + 1e-12)) ** 2
    vals = np.abs(f.values[mask])
    if vals.size == 0:
        raise DegenerateBallError("ball contains no grid points")
    if np.isinf(u):
        return float(vals.max())
    return float(np.mean(vals ** u) ** (1.0 / u))


# file formats

def save_grid(path, f: GridFunction) -> None:
    box = f.domain
    header = MAGIC + struct.pack("<IIId", FORMAT_VERSION, box.dim,
                                 box.samples_per_axis, box.half_width)
    data = np.empty(f.values.size * 2, dtype="<f8")
    flat = f.values.ravel(order="C")
    data[0::2] = flat.real
    data[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_grid(path) -> GridFunction:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ParameterError("not a grid file (bad magic)")
    version, dim, ns, L = struct.unpack("<IIId", raw[4:24])
    if version != FORMAT_VERSION:
        raise ParameterError(f"unsupported grid file version {version}")
    box = BoxDomain(dim, L, ns)
    data = np.frombuffer(raw[24:], dtype="<f8")
    if data.size != 2 * ns ** dim:
        raise ParameterError("truncated grid file")
    vals = (data[0::2] + 1j * data[1::2]).reshape(box.shape)
    return GridFunction(box, vals)


def export_csv(path, f: GridFunction) -> None:
    box = f.domain
    cols = [c.ravel() for c in box.coords()]
    flat = f.values.ravel()
    header = ",".join([f"x_{i + 1}" for i in range(box.dim)] + ["re", "im"])
    arr = np.column_stack(cols + [flat.real, flat.imag])
    np.savetxt(path, arr, delimiter=",", header=header, comments="", fmt="%.17g")
