"""Atomic/molecular analysis and synthesis, block condition checks, coefficient norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, ParameterError, ResolutionError
from .grid import BoxDomain, DyadicCube, GridFunction, ScaleWindow, cube_geometry, cube_labels
from .kernels import AltSystem, _multi_indices, peetre_sup, phi_hat_profile, plateau
from .sequences import CoefficientField, coeff_sequence_norm

MOMENT_TOL = 1e-8
BAND_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class BlockSpec:
    kind: str = "atom"
    K: int = 1
    L: int = -1
    N: float = math.inf

    def __post_init__(self):
        if self.kind not in ("atom", "molecule"):
            raise ParameterError("block kind must be 'atom' or 'molecule'")
        if self.K < 0 or self.L < -1:
            raise ParameterError("need K >= 0 and L >= -1")

    def check_shape(self, n: int) -> None:
        if self.kind == "molecule" and not self.N > self.L + n:
            raise ParameterError(f"molecules need N > L + n ({self.N} <= {self.L + n})")


def block_admissibility(bs: BlockSpec, spec) -> dict:
    """Conditions linking the block budgets (K, L, N) to the space parameters."""
    sp, w, n, tau = spec.space, spec.w, spec.dim, spec.tau
    a1, a2, a3, g, d = w.alpha1, w.alpha2, w.alpha3, sp.gamma, sp.delta
    out = {
        "moment_order": bs.L > a3 + d + n - 1 + g - n * tau + a1,
        "decay_order": bs.kind == "atom" or bs.N > bs.L + a3 + d + 2 * n,
        "smoothness": bs.K + 1 > a2 + n * tau,
        "moment_vs_alpha1": bs.L + 1 > a1,
    }
    regular = (bs.L == -1 and w.star and 0 > a3 + d + n + g - n * tau - a1
               and a1 > n * tau and bs.K + 1 > a2 + n * tau
               and (bs.kind == "atom" or bs.N > bs.L + a3 + d + 2 * n))
    out["regular_case"] = bool(regular)
    out["admissible"] = bool(all(out[k] for k in ("moment_order", "decay_order", "smoothness",
                                                   "moment_vs_alpha1")) or regular)
    return out


def coeff_norm(lam: CoefficientField, spec) -> float:
    return coeff_sequence_norm(lam, spec.scale, spec.space, spec.w, spec.tau, spec.q, spec.a)


# ---------------------------------------------------------------------------
# analysis

def build_calderon_pair(box: BoxDomain, window: ScaleWindow) -> AltSystem:
    """Band-limited pair with Psi^2 + sum_j psi_j^2 = 1 on the window's band."""
    if window.homogeneous:
        raise ParameterError("analysis uses an inhomogeneous window")
    window.check(box)
    return AltSystem(box, window, lambda r: np.sqrt(plateau(r)),
                     lambda r: np.sqrt(np.maximum(phi_hat_profile(r), 0.0)),
                     moment_order=10 ** 6, epsilon=1.0, name="calderon_sqrt")


@dataclass
class LazyBlocks:
    """Blocks A_jk = (1/lambda_jk) psi_j * (chi_Q psi_j * f), built on access."""
    box: BoxDomain
    sys: AltSystem
    bands: dict = field(repr=False)
    lam: CoefficientField = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __getitem__(self, key) -> GridFunction:
        j, k = key
        k = tuple(int(t) for t in np.atleast_1d(k))
        if (j, k) in self._cache:
            return self._cache[(j, k)]
        idx = self.lam.index_of(j, k)
        lv = self.lam.coeffs[j][idx]
        if lv == 0:
            out = GridFunction.zeros(self.box)
        else:
            labels, _ = cube_labels(self.box, j)
            piece = np.where(labels == idx, self.bands[j], 0.0)
            out = GridFunction(self.box, np.fft.ifftn(np.fft.fftn(piece) * self.sys.multiplier(j)) / lv)
        if len(self._cache) < 256:
            self._cache[(j, k)] = out
        return out

    def keys(self):
        for j, k, _ in self.lam.nonzero():
            yield j, k

    def level_sum(self, j: int) -> np.ndarray:
        """sum_k lambda_jk A_jk = psi_j * psi_j * f."""
        return np.fft.ifftn(np.fft.fftn(self.bands[j]) * self.sys.multiplier(j))


def band_tail(f: GridFunction, window: ScaleWindow) -> float:
    """Relative L^2 mass of f^ outside |xi| <= 2^J."""
    F = np.fft.fftn(f.values)
    tot = float(np.sum(np.abs(F) ** 2))
    if tot == 0:
        return 0.0
    out = f.domain.freq_radius() > 2.0 ** window.j_max * (1 + 1e-12)
    return math.sqrt(float(np.sum(np.abs(F[out]) ** 2)) / tot)


def analyze(f: GridFunction, spec, L: int | None = None):
    """lambda_jk = mean over Q_jk of |psi_j * f| and the matching blocks."""
    box = f.domain
    win = spec.window
    tail = band_tail(f, win)
    if tail > BAND_TAIL_TOL:
        raise ResolutionError(f"f has relative spectral mass {tail:.2e} beyond 2^{win.j_max}; "
                              f"widen the window or refine the grid")
    sys = build_calderon_pair(box, win)
    F = np.fft.fftn(f.values)
    lam = CoefficientField.zeros(box, win)
    bands = {}
    for j in win.levels:
        g = np.fft.ifftn(F * sys.multiplier(j))
        bands[j] = g
        labels, ks = cube_labels(box, j)
        m = len(ks)
        s = np.bincount(labels.ravel(), weights=np.abs(g).ravel(), minlength=m)
        c = np.bincount(labels.ravel(), minlength=m)
        lam.coeffs[j] = (s / np.maximum(c, 1)).astype(complex)
    return lam, LazyBlocks(box, sys, bands, lam)


def domination_constant(f: GridFunction, lam: CoefficientField, blocks: LazyBlocks, a: float) -> float:
    """Smallest C with sup_z (1+2^j|z|)^-a Lambda(x+z) <= C (psi_j^* f)_a(x) on the grid."""
    C = 0.0
    for j in lam.window.levels:
        lhs = peetre_sup(lam.Lambda(j), f.domain, j, a)
        rhs = peetre_sup(blocks.bands[j], f.domain, j, a)
        pos = rhs > 1e-300 * max(1.0, float(rhs.max()))
        if np.any(lhs[~pos] > 0):
            return math.inf
        if np.any(pos):
            C = max(C, float(np.max(lhs[pos] / rhs[pos])))
    return C


# ---------------------------------------------------------------------------
# block checks

def _spectral_derivative(b: GridFunction, alpha) -> np.ndarray:
    F = np.fft.fftn(b.values)
    for xi, a in zip(b.domain.freqs(), alpha):
        if a:
            F = F * (1j * xi) ** a
    return np.fft.ifftn(F)


@dataclass
class BlockReport:
    kind: str
    support_ok: bool
    size_constant: float
    moment_max: float
    moments_required: bool
    decay_constant: float
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def _moments(b: GridFunction, L: int, center) -> float:
    box = b.domain
    xs = [c - cc for c, cc in zip(box.coords(), center)]
    worst = 0.0
    for beta in _multi_indices(box.dim, L):
        mono = np.ones(box.shape)
        for c, e in zip(xs, beta):
            mono = mono * c ** e
        num = abs(np.sum(b.values * mono))
        den = float(np.sum(np.abs(b.values) * np.abs(mono))) + 1e-300
        worst = max(worst, num / den)
    return worst


def _spectral_moment_ratio(b: GridFunction, side: float) -> float:
    """sup of |b^| near the origin relative to sup |b^|; zero means all moments vanish.

    Used for molecules, whose tails wrap around the periodic box so that spatial
    quadrature of x^beta b(x) is not meaningful.
    """
    B = np.abs(np.fft.fftn(b.values))
    top = float(B.max())
    if top == 0:
        return 0.0
    near = b.domain.freq_radius() <= 0.25 / side
    return float(B[near].max()) / top


def check_block(b: GridFunction, Q: DyadicCube, bs: BlockSpec) -> BlockReport:
    box = b.domain
    bs.check_shape(box.dim)
    corner, side, center = cube_geometry(Q)
    fails = []
    # support inside 3Q
    support_ok = True
    if bs.kind == "atom":
        inside = np.ones(box.shape, dtype=bool)
        for c, lo in zip(box.coords(), corner):
            inside &= (c >= lo - side - 1e-12) & (c <= lo + 2 * side + 1e-12)
        support_ok = bool(np.all(b.values[~inside] == 0))
        if not support_ok:
            fails.append("support")
    # size / decay with derivatives up to K
    dist = np.sqrt(sum((c - cc) ** 2 for c, cc in zip(box.coords(), center)))
    decay_w = (1.0 + dist / side) ** (bs.N if np.isfinite(bs.N) else 0.0)
    size_c, decay_c = 0.0, 0.0
    for alpha in _multi_indices(box.dim, bs.K):
        d = np.abs(_spectral_derivative(b, alpha) if sum(alpha) else b.values)
        scale = side ** sum(alpha)  # |Q|^{-|alpha|/n} normalisation
        size_c = max(size_c, float(d.max()) * scale)
        decay_c = max(decay_c, float(np.max(d * decay_w)) * scale)
    need_moments = side < 1 and bs.L >= 0
    if not need_moments:
        mom = 0.0
    elif bs.kind == "molecule":
        mom = _spectral_moment_ratio(b, side)
    else:
        mom = _moments(b, bs.L, center)
    if need_moments and mom > MOMENT_TOL:
        fails.append("moments")
    if not np.isfinite(size_c) or not np.isfinite(decay_c):
        fails.append("size")
    return BlockReport(bs.kind, support_ok, size_c, mom, need_moments, decay_c, fails)


def spline_atom(box: BoxDomain, Q: DyadicCube, L: int, order: int = 4) -> GridFunction:
    """L^inf-normalised tensor atom Delta_s^{L+1} B on 3Q, B a cardinal B-spline of the given order."""
    from .norms import _bspline
    corner, side, _ = cube_geometry(Q)
    taps = order + L + 1
    r = math.ceil(math.log2(taps / 3.0)) if taps > 3 else 0
    s = side / 2 ** r
    if s < box.h * (1 - 1e-12) or abs(s / box.h - round(s / box.h)) > 1e-9:
        raise ResolutionError(f"atom step {s} is not a multiple of the grid spacing {box.h}")
    out = np.ones(box.shape)
    for c, lo in zip(box.coords(), corner):
        x0 = lo - side
        fac = np.zeros(box.shape)
        for k in range(L + 2):
            fac += (-1) ** k * math.comb(L + 1, k) * _bspline((c - x0 - k * s) / s - order / 2.0, order)
        out = out * fac
    m = np.abs(out).max()
    return GridFunction(box, out / m if m > 0 else out)


# ---------------------------------------------------------------------------
# synthesis

def synthesize(lam: CoefficientField, blocks, spec, block_spec: BlockSpec | None = None,
               cap: float = 1e3):
    """f = sum lambda_jk block_jk and the ratio ||f|| / ||lambda||."""
    from .norms import space_norm
    if block_spec is not None:
        adm = block_admissibility(block_spec, spec)
        if not adm["admissible"]:
            bad = [k for k, v in adm.items() if v is False and k not in ("regular_case", "admissible")]
            raise HypothesisError(f"block budgets not admissible for this space: {', '.join(bad)}")
    box = lam.box
    if isinstance(blocks, LazyBlocks) and blocks.lam is lam:
        vals = sum(blocks.level_sum(j) for j in lam.window.levels)
    else:
        vals = np.zeros(box.shape, dtype=complex)
        for j, k, v in lam.nonzero():
            vals = vals + v * blocks[(j, k)].values
    f = GridFunction(box, vals)
    cn = coeff_norm(lam, spec)
    ratio = space_norm(f, spec) / cn if cn > 0 else 0.0
    if ratio > cap:
        raise HypothesisError(f"synthesis ratio {ratio:.3g} exceeds the cap {cap:g}")
    return f, ratio


def molecule_spec_for(spec, L: int) -> BlockSpec:
    """Budgets of the analysed blocks: band-limited, so any moment order and decay."""
    sp, w, n = spec.space, spec.w, spec.dim
    N = L + w.alpha3 + sp.delta + 2 * n + 1
    K = max(0, math.ceil(w.alpha2 + n * spec.tau))
    return BlockSpec("molecule", K, L, N)
