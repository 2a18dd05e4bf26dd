"""Littlewood-Paley systems, band convolutions and maximal functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
from scipy import special
from scipy.ndimage import maximum_filter1d

from .errors import ParameterError, ResolutionError
from .grid import BoxDomain, GridFunction, ScaleWindow


# ---------------------------------------------------------------------------
# smooth profiles

def _expneg(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    a = _expneg(u)
    b = _expneg(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def plateau(t):
    """Radial plateau: 1 on [0, 1], 0 on [2, inf), smooth in between."""
    return smooth_step(2.0 - np.abs(t))


def phi_hat_profile(t):
    return plateau(t) - plateau(2.0 * np.asarray(t))


# ---------------------------------------------------------------------------
# systems

@dataclass
class LPSystem:
    box: BoxDomain
    window: ScaleWindow
    partition_of_unity: bool = True
    homogeneous: bool = False

    def multiplier(self, j: int) -> np.ndarray:
        if j not in self.window:
            raise ParameterError(f"level {j} outside window {self.window}")
        r = self.box.freq_radius()
        if j == 0 and not self.homogeneous:
            return plateau(r)
        return phi_hat_profile(r * 2.0 ** (-j))

    def _kernel(self, mult) -> GridFunction:
        vals = np.fft.ifftn(mult) / self.box.cell_volume
        return GridFunction(self.box, np.fft.fftshift(vals))

    @property
    def Phi(self) -> GridFunction:
        return self._kernel(plateau(self.box.freq_radius()))

    @property
    def phi(self) -> GridFunction:
        return self._kernel(phi_hat_profile(self.box.freq_radius()))


@dataclass
class AltSystem:
    """A generic (Psi, psi) pair given by Fourier profiles.

    psi_hat_fn / Psi_hat_fn take the frequency radius array.
    """
    box: BoxDomain
    window: ScaleWindow
    Psi_hat_fn: object = field(repr=False)
    psi_hat_fn: object = field(repr=False)
    moment_order: int = 0
    epsilon: float = 1.0
    name: str = "alt"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def multiplier(self, j: int) -> np.ndarray:
        if j not in self.window:
            raise ParameterError(f"level {j} outside window {self.window}")
        if j not in self._cache:
            r = self.box.freq_radius()
            if j == 0 and not self.window.homogeneous:
                self._cache[j] = self.Psi_hat_fn(r)
            else:
                self._cache[j] = self.psi_hat_fn(r * 2.0 ** (-j))
        return self._cache[j]

    @property
    def Psi(self) -> GridFunction:
        vals = np.fft.ifftn(self.Psi_hat_fn(self.box.freq_radius())) / self.box.cell_volume
        return GridFunction(self.box, np.fft.fftshift(vals))

    @property
    def psi(self) -> GridFunction:
        vals = np.fft.ifftn(self.psi_hat_fn(self.box.freq_radius())) / self.box.cell_volume
        return GridFunction(self.box, np.fft.fftshift(vals))

    def moments(self, max_order: int) -> dict:
        """Discrete moments sum psi(x) x^beta h^n, relative to sum |psi||x|^|beta| h^n."""
        psi = self.psi.values
        xs = self.box.coords()
        out = {}
        for beta in _multi_indices(self.box.dim, max_order):
            mono = np.ones(self.box.shape)
            for c, b in zip(xs, beta):
                mono = mono * c ** b
            num = abs(np.sum(psi * mono))
            den = np.sum(np.abs(psi) * np.abs(mono)) + 1e-300
            out[beta] = num / den
        return out


def _multi_indices(n: int, max_order: int):
    out = []
    for total in range(max_order + 1):
        if n == 1:
            out.append((total,))
        else:
            out.extend((a, total - a) for a in range(total, -1, -1))
    return out


def build_lp_system(box: BoxDomain, window: ScaleWindow) -> LPSystem:
    if box.nyquist < 2.0:
        raise ResolutionError("grid too coarse to carry the low-pass support |xi| <= 2")
    window.check(box)
    return LPSystem(box, window, True, window.homogeneous)


def build_gaussian_system(box: BoxDomain, window: ScaleWindow, m: int,
                          sigma: float | None = None) -> AltSystem:
    """Psi = Gaussian, psi = (-Laplacian)^m Gaussian; moments vanish through 2m - 1."""
    if m < 1:
        raise ParameterError("need m >= 1")
    window.check(box)
    if sigma is None:
        sigma = math.sqrt(2.0 * m)  # puts the peak of psi_hat at |xi| = 1
    peak = (2.0 * m / sigma ** 2) ** m * math.exp(-m)

    def Psi_hat(r):
        return np.exp(-0.5 * (sigma * r) ** 2)

    def psi_hat(r):
        return r ** (2 * m) * np.exp(-0.5 * (sigma * r) ** 2) / peak

    return AltSystem(box, window, Psi_hat, psi_hat, 2 * m - 1, 1.0, f"gauss_lap{m}")


def _plateau_slope(t):
    """d/dt plateau(t) for t in (1, 2), written out to avoid differencing."""
    u = 2.0 - np.asarray(t, dtype=float)
    a, b = _expneg(u), _expneg(1.0 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = a * b * (1.0 / np.where(u > 0, u, 1) ** 2 + 1.0 / np.where(u < 1, 1 - u, 1) ** 2)
        ds = np.where((u > 0) & (u < 1), num / (a + b) ** 2, 0.0)
    return -ds


@lru_cache(maxsize=8)
def _bump_hat_table(dim: int, rmax: float, npts: int = 4000):
    """Fourier transform of the radial bump plateau(|x|) tabulated on [0, rmax].

    Integrated by parts once so only the transition band [1, 2] is integrated;
    this keeps the absolute error near machine precision times 1/rho.
    """
    rho = np.linspace(0.0, rmax, npts)
    nodes, weights = np.polynomial.legendre.leggauss(max(400, int(rmax * 1.2) + 200))
    t = 1.5 + 0.5 * nodes  # [1, 2]
    wt = 0.5 * weights * _plateau_slope(t)
    safe = np.where(rho > 0, rho, 1.0)
    tab = np.empty(npts)
    step = max(1, 2 ** 22 // len(t))  # bounded memory per block
    for s in range(0, npts, step):
        arg = np.outer(rho[s:s + step], t)
        if dim == 1:
            tab[s:s + step] = -2.0 * (np.sin(arg) @ wt) / safe[s:s + step]
        else:
            tab[s:s + step] = -2.0 * np.pi * (special.j1(arg) @ (wt * t)) / safe[s:s + step]
    if dim == 1:
        tab[0] = 2.0 * (1.0 + float(np.sum(0.5 * weights * plateau(t))))
    else:
        tab[0] = 2.0 * np.pi * (0.5 + float(np.sum(0.5 * weights * plateau(t) * t)))
    return rho, tab


# the bump transform is below 1e-16 of its peak past this radius (quadrature noise beyond)
BUMP_HAT_CUTOFF = 1024.0


def bump_hat(dim: int, r: np.ndarray) -> np.ndarray:
    """Transform of plateau(|x|), set to zero past BUMP_HAT_CUTOFF."""
    rho, tab = _bump_hat_table(dim, BUMP_HAT_CUTOFF, 2 ** 16)
    return np.interp(r, rho, tab, right=0.0)


@lru_cache(maxsize=8)
def _local_mean_peak(dim: int, p: int):
    """(argmax, max) of r^(2p) |bump_hat(r)|."""
    r = np.linspace(0.0, BUMP_HAT_CUTOFF, 2 ** 18)
    m = np.abs(r ** (2 * p) * bump_hat(dim, r))
    i = int(np.argmax(m))
    return float(r[i]), float(m[i])


def build_local_mean_system(box: BoxDomain, l0: int, window: ScaleWindow | None = None) -> AltSystem:
    """Local means: Psi a dilated smooth radial bump, psi = Laplacian^(l0+1) Psi (spectrally).

    Psi(x) = plateau(|x| / rho) with rho chosen so that psi_hat peaks at |xi| = 1,
    matching the band of the LP system; psi is scaled to unit peak.
    """
    if l0 < 0:
        raise ParameterError("l0 must be >= 0")
    if window is None:
        window = ScaleWindow(0, box.finest_level())
    window.check(box)
    n = box.dim
    p = l0 + 1
    rho, peak = _local_mean_peak(n, p)

    def Psi_hat(r):
        return bump_hat(n, rho * r)

    def psi_hat(r):
        t = rho * r
        return (-(t ** 2)) ** p * bump_hat(n, t) / peak

    sys = AltSystem(box, window, Psi_hat, psi_hat, 2 * l0 + 1, 1.0, f"local_means{l0}")
    sys.support_radius = 2.0 * rho
    return sys


# ---------------------------------------------------------------------------
# convolutions

def band_convolve(f: GridFunction, sys, j: int, fhat: np.ndarray | None = None) -> GridFunction:
    if fhat is None:
        fhat = np.fft.fftn(f.values)
    return GridFunction(f.domain, np.fft.ifftn(fhat * sys.multiplier(j)))


def band_convolve_all(f: GridFunction, sys, levels=None) -> dict:
    fhat = np.fft.fftn(f.values)
    levels = sys.window.levels if levels is None else levels
    return {j: band_convolve(f, sys, j, fhat) for j in levels}


@numba.njit(cache=True)
def _peetre_1d(g, wts, offs, gmax):
    n = g.shape[0]
    out = np.empty(n)
    m = wts.shape[0]
    for i in range(n):
        best = g[i]
        for t in range(1, m):
            w = wts[t]
            if gmax * w <= best:
                break
            v = g[(i + offs[t]) % n] * w
            if v > best:
                best = v
        out[i] = best
    return out


@numba.njit(cache=True)
def _peetre_2d(g, wts, o1, o2, gmax):
    n1, n2 = g.shape
    out = np.empty((n1, n2))
    m = wts.shape[0]
    for i in range(n1):
        for k in range(n2):
            best = g[i, k]
            for t in range(1, m):
                w = wts[t]
                if gmax * w <= best:
                    break
                v = g[(i + o1[t]) % n1, (k + o2[t]) % n2] * w
                if v > best:
                    best = v
            out[i, k] = best
    return out


@lru_cache(maxsize=64)
def _peetre_offsets(dim: int, N: int, h: float, scale: float, a: float):
    half = N // 2
    rng = np.arange(-half, half)
    if dim == 1:
        d = np.abs(rng) * h
        order = np.argsort(d, kind="stable")
        w = (1.0 + scale * d[order]) ** (-a)
        return w, rng[order].astype(np.int64), None
    a1, a2 = np.meshgrid(rng, rng, indexing="ij")
    a1 = a1.ravel()
    a2 = a2.ravel()
    d = np.sqrt(a1.astype(float) ** 2 + a2.astype(float) ** 2) * h
    order = np.argsort(d, kind="stable")
    w = (1.0 + scale * d[order]) ** (-a)
    return w, a1[order].astype(np.int64), a2[order].astype(np.int64)


def peetre_sup(values: np.ndarray, box: BoxDomain, j: int, a: float) -> np.ndarray:
    """x -> max_y |g(x+y)| / (1 + 2^j |y|)^a over periodic grid offsets y."""
    if a <= 0:
        raise ParameterError("Peetre exponent a must be positive")
    g = np.ascontiguousarray(np.abs(values), dtype=float)
    w, o1, o2 = _peetre_offsets(box.dim, box.samples_per_axis, box.h, 2.0 ** j, float(a))
    gmax = float(g.max()) if g.size else 0.0
    if gmax == 0.0:
        return np.zeros_like(g)
    if box.dim == 1:
        return _peetre_1d(g, w, o1, gmax)
    return _peetre_2d(g, w, o1, o2, gmax)


def peetre_maximal(f: GridFunction, sys, j: int, a: float, fhat=None) -> GridFunction:
    g = band_convolve(f, sys, j, fhat)
    return GridFunction(f.domain, peetre_sup(g.values, f.domain, j, a))


# ---------------------------------------------------------------------------
# maximal operators

def _window_max_1d(A, w):
    # max over starts t in [x - w + 1, x]
    return maximum_filter1d(A, size=w, origin=(w - 1) // 2, mode="constant", cval=0.0)


def hardy_littlewood(values: np.ndarray, box: BoxDomain, widths=None) -> np.ndarray:
    """Uncentred cube maximal function over all cube sides w*h, w = 1..N.

    The function is zero outside the box; cubes may stick out of it.
    """
    f = np.abs(values).astype(float)
    N = box.samples_per_axis
    if widths is None:
        widths = range(1, N + 1)
    out = f.copy()
    if box.dim == 1:
        P = np.zeros(3 * N)
        P[N:2 * N] = f
        S = np.concatenate([[0.0], np.cumsum(P)])
        for w in widths:
            A = np.zeros(3 * N)
            A[: 3 * N - w + 1] = (S[w:] - S[:-w]) / w
            Mw = _window_max_1d(A, w)[N:2 * N]
            np.maximum(out, Mw, out=out)
        return out
    P = np.zeros((3 * N, 3 * N))
    P[N:2 * N, N:2 * N] = f
    S = np.zeros((3 * N + 1, 3 * N + 1))
    S[1:, 1:] = P.cumsum(0).cumsum(1)
    for w in widths:
        A = np.zeros((3 * N, 3 * N))
        m = 3 * N - w + 1
        A[:m, :m] = (S[w:, w:] - S[:-w, w:] - S[w:, :-w] + S[:-w, :-w]) / (w * w)
        B = maximum_filter1d(A, size=w, axis=0, origin=(w - 1) // 2, mode="constant")
        B = maximum_filter1d(B, size=w, axis=1, origin=(w - 1) // 2, mode="constant")
        np.maximum(out, B[N:2 * N, N:2 * N], out=out)
    return out


def _dyadic_radii(box: BoxDomain):
    r = box.h
    out = []
    while r <= 2 * box.half_width * (1 + 1e-12):
        out.append(r)
        r *= 2.0
    return out


def windowed_maximal(values: np.ndarray, box: BoxDomain, r: float, lam: float,
                     radii=None) -> np.ndarray:
    """sup_R { R^-n int_{|y|<R} |f(x+y)|^r (1+|y|)^(-r lam) dy }^(1/r), f = 0 off the box."""
    N = box.samples_per_axis
    n = box.dim
    fr = np.abs(values).astype(float) ** r
    shape = (2 * N,) * n
    pad = np.zeros(shape)
    pad[(slice(0, N),) * n] = fr
    axes = tuple(range(n))
    F = np.fft.rfftn(pad, axes=axes)
    rng = np.concatenate([np.arange(0, N), np.arange(-N, 0)]) * box.h
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    dist = np.sqrt(sum(g * g for g in grids))
    damp = (1.0 + dist) ** (-r * lam)
    best = np.zeros((N,) * n)
    for R in (radii if radii is not None else _dyadic_radii(box)):
        K = np.where(dist < R, damp, 0.0)
        # correlation: int f(x+y) K(y) dy, K is even
        conv = np.fft.irfftn(F * np.fft.rfftn(K, axes=axes), s=shape, axes=axes)[(slice(0, N),) * n]
        val = np.maximum(conv, 0.0) * box.cell_volume / R ** n
        np.maximum(best, val, out=best)
    return best ** (1.0 / r)


def maximal_operator(f: GridFunction, kind: str = "hardy_littlewood", r: float = 1.0,
                     lam: float = 1.0, **kw) -> GridFunction:
    if kind == "hardy_littlewood":
        vals = hardy_littlewood(f.values, f.domain, **kw)
    elif kind == "windowed":
        vals = windowed_maximal(f.values, f.domain, r, lam, **kw)
    else:
        raise ParameterError(f"unknown maximal operator kind {kind!r}")
    return GridFunction(f.domain, vals)


# ---------------------------------------------------------------------------
# multipliers

def bessel_lift(f: GridFunction, s: float) -> GridFunction:
    if s == 0:
        return GridFunction(f.domain, f.values.copy())
    m = (1.0 + f.domain.freq_radius() ** 2) ** (s / 2.0)
    return GridFunction(f.domain, np.fft.ifftn(np.fft.fftn(f.values) * m))


def fourier_multiplier(f: GridFunction, m) -> GridFunction:
    """(m f^)^v with m a GridFunction on the frequency grid (FFT order) or a callable of xi."""
    if callable(m):
        mv = m(*f.domain.freqs())
    elif isinstance(m, GridFunction):
        mv = m.values
    else:
        mv = np.asarray(m)
    if not np.all(np.isfinite(mv)):
        raise ParameterError("multiplier must be finite")
    return GridFunction(f.domain, np.fft.ifftn(np.fft.fftn(f.values) * mv))


# ---------------------------------------------------------------------------
# pairing bound

@dataclass
class KernelData:
    """A sampled kernel with its scale, centre and decay exponent."""
    values: GridFunction
    level: int
    center: np.ndarray
    decay: float


def _spectral_derivative(f: GridFunction, alpha) -> np.ndarray:
    mult = np.ones(f.domain.shape, dtype=complex)
    for xi, a in zip(f.domain.freqs(), alpha):
        if a:
            mult = mult * (1j * xi) ** a
    return np.fft.ifftn(np.fft.fftn(f.values) * mult)


def measured_derivative_constants(k: KernelData, L: int) -> dict:
    box = k.values.domain
    n = box.dim
    dist = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(box.coords(), np.atleast_1d(k.center))))
    damp = (1.0 + 2.0 ** k.level * dist) ** k.decay / 2.0 ** (k.level * (n + L))
    out = {}
    for alpha in _multi_indices(n, L):
        if sum(alpha) != L:
            continue
        d = np.abs(_spectral_derivative(k.values, alpha))
        out[alpha] = float(np.max(d * damp))
    return out


def measured_size_constant(k: KernelData) -> float:
    box = k.values.domain
    n = box.dim
    dist = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(box.coords(), np.atleast_1d(k.center))))
    damp = (1.0 + 2.0 ** k.level * dist) ** k.decay / 2.0 ** (k.level * n)
    return float(np.max(np.abs(k.values.values) * damp))


def unit_sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def bump_pairing_bound(phi_j: KernelData, phi_nu: KernelData, L: int,
                       A: dict | None = None, B: float | None = None,
                       moment_tol: float = 1e-8):
    """Return (lhs, rhs) of the pairing estimate |int phi_j phi_nu| <= rhs."""
    box = phi_j.values.domain
    n = box.dim
    j, nu = phi_j.level, phi_nu.level
    M, N = phi_j.decay, phi_nu.decay
    if nu < j:
        raise ParameterError("need nu >= j")
    if not N > M + L + n:
        raise ParameterError(f"need N > M + L + n (N={N}, M={M}, L={L}, n={n})")
    if L > 0:
        xs = box.coords()
        v = phi_nu.values.values
        for beta in _multi_indices(n, L - 1):
            mono = np.ones(box.shape)
            for c, b, x0 in zip(xs, beta, np.atleast_1d(phi_nu.center)):
                mono = mono * (c - x0) ** b
            num = abs(np.sum(v * mono))
            den = np.sum(np.abs(v * mono)) + 1e-300
            if num / den > moment_tol:
                raise ParameterError(f"phi_nu moment {beta} does not vanish ({num / den:.2e})")
    A_meas = measured_derivative_constants(phi_j, L)
    B_meas = measured_size_constant(phi_nu)
    if A is None:
        A = A_meas
    else:
        for key, val in A_meas.items():
            if A.get(key, 0.0) < val * (1 - 1e-9):
                raise ParameterError(f"supplied A{key} below measured {val:.3e}")
    if B is None:
        B = B_meas
    elif B < B_meas * (1 - 1e-9):
        raise ParameterError(f"supplied B below measured {B_meas:.3e}")
    lhs = abs(np.sum(phi_j.values.values * phi_nu.values.values)) * box.cell_volume
    coef = sum(A[a] / math.prod(math.factorial(t) for t in a) for a in A)
    K = N - M - L
    dist = float(np.linalg.norm(np.atleast_1d(phi_j.center) - np.atleast_1d(phi_nu.center)))
    rhs = (coef * K / (K - n) * B * unit_sphere_area(n)
           * 2.0 ** (j * n - (nu - j) * L) * (1.0 + 2.0 ** j * dist) ** (-M))
    return float(lhs), float(rhs)
