"""Tensor biorthogonal wavelet transforms on the periodic grid and the wavelet norm."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import pywt

from .errors import HypothesisError, ParameterError
from .grid import BoxDomain, GridFunction, ScaleWindow
from .kernels import peetre_sup
from .sequences import SequenceField, mixed_norm

FAMILIES = {
    "bior": ["bior2.2", "bior2.4", "bior2.6", "bior2.8", "bior3.3", "bior3.5", "bior3.7", "bior3.9",
             "bior4.4", "bior5.5", "bior6.8"],
    "db": [f"db{k}" for k in range(2, 39)],
}


def _moment_count(g, tol=1e-10) -> int:
    """Number of leading vanishing discrete moments sum_k k^b g[k]."""
    g = np.asarray(g, float)
    k = np.arange(len(g), dtype=float) - (len(g) - 1) / 2.0
    count = 0
    for b in range(len(g)):
        mono = k ** b
        if abs(np.sum(mono * g)) <= tol * np.sum(np.abs(mono * g)):
            count += 1
        else:
            break
    return count


def _zeros_at_pi(h, tol=1e-7) -> tuple:
    """Split the symbol of a low-pass filter into ((1+z)/2)^N times a remainder polynomial."""
    p = np.asarray(h, float) / np.sum(h)
    N = 0
    while len(p) > 1:
        q, r = np.polydiv(p, [0.5, 0.5])
        if np.max(np.abs(r)) > tol * np.max(np.abs(p)):
            break
        p, N = q, N + 1
    return N, p


def _daubechies_remainder(N: int):
    """|L(xi)| for the order-N Daubechies filter, from |L|^2 = sum_k C(N-1+k, k) sin^(2k)(xi/2)."""
    def fn(xi):
        y = np.sin(xi / 2.0) ** 2
        return np.sqrt(sum(math.comb(N - 1 + k, k) * y ** k for k in range(N)))
    return fn


def holder_lower_bound(h, kmax: int = 10, npts: int = 4096, daubechies_order: int | None = None) -> float:
    """Lower bound for the Holder exponent of the refinable function of a low-pass filter."""
    if daubechies_order:
        N, rem_abs = daubechies_order, _daubechies_remainder(daubechies_order)
    else:
        N, rem = _zeros_at_pi(h)
        rem_abs = lambda x: np.abs(np.polyval(rem, np.exp(-1j * x)))
    xi = np.linspace(0.0, math.pi, npts)
    best = -np.inf
    prod = np.ones_like(xi)
    for k in range(1, kmax + 1):
        prod = prod * rem_abs(2.0 ** (k - 1) * xi)
        best = max(best, N - 1 - math.log2(max(float(prod.max()), 1e-300)) / k)
    return best


def _smoothness_budget(h, daubechies_order: int | None = None) -> int:
    """Largest K with the generator in C^K according to the Holder bound (-1 if not continuous)."""
    a = holder_lower_bound(h, daubechies_order=daubechies_order)
    return int(math.ceil(a) - 1) if a > 0 else -1


@dataclass
class FilterQuadruple:
    name: str
    dec_lo: np.ndarray = field(repr=False)
    dec_hi: np.ndarray = field(repr=False)
    rec_lo: np.ndarray = field(repr=False)
    rec_hi: np.ndarray = field(repr=False)
    K: int = 0
    L: int = 0
    K_dual: int = 0
    L_dual: int = 0

    @property
    def pywt(self):
        return pywt.Wavelet(self.name)

    def pr_residual(self) -> float:
        """Perfect-reconstruction and alias-cancellation residual of the two-channel bank."""
        alt = (-1.0) ** np.arange(len(self.dec_lo))
        dist = np.convolve(self.dec_lo, self.rec_lo) + np.convolve(self.dec_hi, self.rec_hi)
        alias = (np.convolve(self.dec_lo * alt, self.rec_lo)
                 + np.convolve(self.dec_hi * alt, self.rec_hi))
        target = np.zeros_like(dist)
        target[int(np.argmax(np.abs(dist)))] = 2.0
        return float(max(np.abs(dist - target).max(), np.abs(alias).max()))

    def budgets(self) -> dict:
        return {"K": self.K, "L": self.L, "K_dual": self.K_dual, "L_dual": self.L_dual}

    def admissibility(self, spec) -> dict:
        """Budget inequalities against a space spec; decay budgets hold by compact support."""
        sp, w, n, tau, a = spec.space, spec.w, spec.dim, spec.tau, spec.a
        a1, a2, a3, g, d = w.alpha1, w.alpha2, w.alpha3, sp.gamma, sp.delta
        L, K, Lt, Kt = self.L, self.K, self.L_dual, self.K_dual
        # L and L_dual are usable moment orders: any smaller order may be declared
        need_L = max(math.floor(a3 + d + n - 1 + g - n * tau + a1) + 1, math.ceil(a1 - 1 + 1e-12))
        need_Lt_lo = max(math.floor(a3 + 2 * d + n - 1 + g + max(n / 2, max(a2 - g, 0))) + 1,
                         math.floor(2 * a + n * tau) + 1, math.ceil(max(n / 2, max(a2 - g, 0)) - 1 + 1e-12))
        checks = {
            "synthesis_moments": (L >= need_L, f"L = {L} >= {need_L}"),
            "synthesis_smoothness": (K + 1 > a2 + n * tau, f"K + 1 = {K + 1} > {a2 + n * tau:g}"),
            "analysis_moments": (Lt >= need_Lt_lo, f"L_dual = {Lt} >= {need_Lt_lo}"),
            "analysis_smoothness": (Kt + 1 > a1 + g and Kt + 1 >= need_Lt_lo,
                                    f"K_dual + 1 = {Kt + 1} > {a1 + g:g} and >= {need_Lt_lo}"),
            "decay": (True, "compact support meets every polynomial decay bound"),
        }
        return {k: {"pass": bool(v[0]), "detail": v[1]} for k, v in checks.items()}

    def admissible(self, spec) -> bool:
        return all(c["pass"] for c in self.admissibility(spec).values())


def build_filters(name: str = "bior2.2", spec=None, family: str | None = None) -> FilterQuadruple:
    """Filters for a named preset, or the first admissible member of a family when spec is given."""
    if family is not None:
        if family not in FAMILIES:
            raise ParameterError(f"unknown wavelet family {family!r}")
        for nm in FAMILIES[family]:
            fq = build_filters(nm)
            if spec is None or fq.admissible(spec):
                return fq
        raise HypothesisError(f"no member of family {family!r} meets the moment/smoothness budgets")
    if name not in pywt.wavelist(kind="discrete"):
        raise ParameterError(f"unknown wavelet preset {name!r}")
    w = pywt.Wavelet(name)
    arr = [np.asarray(v, float) for v in (w.dec_lo, w.dec_hi, w.rec_lo, w.rec_hi)]
    if name.startswith("db"):
        # long orthogonal filters: tap sums lose the moments to rounding, use the known order
        N = int(name[2:])
        K = _smoothness_budget(arr[2], daubechies_order=N)
        fq = FilterQuadruple(name, *arr, K=K, L=N - 1, K_dual=K, L_dual=N - 1)
    else:
        fq = FilterQuadruple(name, *arr,
                             K=_smoothness_budget(arr[2]), L=_moment_count(arr[3]) - 1,
                             K_dual=_smoothness_budget(arr[0]), L_dual=_moment_count(arr[1]) - 1)
    if spec is not None and not fq.admissible(spec):
        bad = [k for k, v in fq.admissibility(spec).items() if not v["pass"]]
        raise HypothesisError(f"wavelet {name} fails budget conditions: {', '.join(bad)}")
    return fq


def filter_moment_residual(quad: FilterQuadruple) -> float:
    """Worst |sum_k t_k^m g_k| over both highpass filters and their declared moment orders.

    Positions t_k are centred and scaled to [-1, 1] so long filters stay well conditioned.
    """
    worst = 0.0
    for g, order in ((quad.rec_hi, quad.L), (quad.dec_hi, quad.L_dual)):
        g = np.asarray(g, float)
        nz = np.nonzero(g)[0]
        lo, hi = nz.min(), nz.max()
        t = (np.arange(len(g)) - 0.5 * (lo + hi)) / max(0.5 * (hi - lo), 1.0)
        for m in range(order + 1):
            worst = max(worst, abs(float(np.sum(t ** m * g))))
    return worst


# ---------------------------------------------------------------------------
# transforms

def _orientations(n: int) -> list:
    return ["".join(c) for c in itertools.product("ad", repeat=n)]


@dataclass
class WaveletCoefficients:
    """pywt-style coefficients: scaling array at the coarsest level plus detail dicts.

    details[i] holds orientation -> array for dyadic level j = j0 + i.
    """
    box: BoxDomain
    name: str
    j0: int
    scaling: np.ndarray
    details: list

    @property
    def levels(self) -> range:
        return range(self.j0, self.j0 + len(self.details))

    def orientations(self) -> list:
        return [c for c in _orientations(self.box.dim) if "d" in c]

    def to_pywt(self) -> list:
        if self.box.dim == 1:
            return [self.scaling] + [d["d"] for d in self.details]
        return [self.scaling] + list(self.details)

    def scaled(self, c) -> "WaveletCoefficients":
        return WaveletCoefficients(self.box, self.name, self.j0, c * self.scaling,
                                   [{k: c * v for k, v in d.items()} for d in self.details])

    def combine(self, other, c1=1.0, c2=1.0) -> "WaveletCoefficients":
        return WaveletCoefficients(self.box, self.name, self.j0, c1 * self.scaling + c2 * other.scaling,
                                   [{k: c1 * d[k] + c2 * e[k] for k in d}
                                    for d, e in zip(self.details, other.details)])

    def zeros_like(self) -> "WaveletCoefficients":
        return self.scaled(0.0)


def _fine_level(box: BoxDomain) -> int:
    jf = math.log2(1.0 / box.h)
    if abs(jf - round(jf)) > 1e-9:
        raise ParameterError("grid spacing must be a power of two")
    return int(round(jf))


def forward_transform(f: GridFunction, quad: FilterQuadruple, J: int | None = None) -> WaveletCoefficients:
    """Periodic separable analysis down to level j0 = j_f - J (default j0 = 0)."""
    box = f.domain
    jf = _fine_level(box)
    if J is None:
        J = jf
    if J < 1 or box.samples_per_axis % (2 ** J):
        raise ParameterError(f"samples per axis must be divisible by 2^{J}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        c = pywt.wavedecn(f.values, quad.name, mode="periodization", level=J)
    scaling = np.asarray(c[0])
    details = [dict(d) for d in c[1:]]
    return WaveletCoefficients(box, quad.name, jf - J, scaling, details)


def inverse_transform(coeffs: WaveletCoefficients, quad: FilterQuadruple) -> GridFunction:
    box = coeffs.box
    if coeffs.name != quad.name:
        raise ParameterError("coefficients were produced with a different filter bank")
    N = box.samples_per_axis
    J = len(coeffs.details)
    if coeffs.scaling.shape != (N // 2 ** J,) * box.dim:
        raise ParameterError("scaling array shape does not match the box and depth")
    for i, d in enumerate(coeffs.details):
        want = (N // 2 ** (J - i),) * box.dim
        for k, v in d.items():
            if np.shape(v) != want:
                raise ParameterError(f"detail array {k} at depth {i} has shape {np.shape(v)}, want {want}")
    vals = pywt.waverecn([coeffs.scaling] + coeffs.details, quad.name, mode="periodization")
    return GridFunction(box, vals)


# ---------------------------------------------------------------------------
# norms

def _level_grid(c: np.ndarray, box: BoxDomain, j: int) -> np.ndarray:
    """Piecewise-constant Lambda on the grid from level-j coefficients (cube k at -L + k 2^-j)."""
    rep = box.samples_per_axis // c.shape[0]
    out = c
    for ax in range(box.dim):
        out = np.repeat(out, rep, axis=ax)
    return out


def coefficient_levels(coeffs: WaveletCoefficients, normalization: str = "amplitude") -> dict:
    """Per orientation, {j: Lambda_j} with the chosen coefficient normalisation.

    "amplitude" rescales pywt values to the L^inf-normalised convention 2^{jn/2} lambda
    (sampling factor included); "literal" uses the L^2-normalised lambda.
    """
    box = coeffs.box
    n = box.dim
    jf = _fine_level(box)
    out = {}

    def norm_factor(j):
        # pywt value ~ h^{-n/2} <f, 2^{jn/2} psi(2^j . - k)>
        lam = box.h ** (n / 2.0)
        return lam * 2.0 ** (j * n / 2.0) if normalization == "amplitude" else lam

    if normalization not in ("amplitude", "literal"):
        raise ParameterError("normalization must be 'amplitude' or 'literal'")
    j0 = coeffs.j0
    out["scaling"] = {j0: _level_grid(np.abs(coeffs.scaling) * norm_factor(j0), box, j0)}
    for c in coeffs.orientations():
        out[c] = {}
        for i, d in enumerate(coeffs.details):
            j = j0 + i
            out[c][j] = _level_grid(np.abs(d[c]) * norm_factor(j), box, j)
    return out


def wavelet_seq_norm(coeffs: WaveletCoefficients, spec, normalization: str = "amplitude") -> float:
    """Scaling part at the coarsest level plus the detail orientations, each as a sequence norm."""
    box = coeffs.box
    levs = coefficient_levels(coeffs, normalization)
    lo, hi = spec.window.j_min, spec.window.j_max
    total = 0.0
    for key, per in levs.items():
        use = {j: v for j, v in per.items() if lo <= j <= hi}
        if not use:
            continue
        win = ScaleWindow(lo, hi)
        fields = {j: (peetre_sup(use[j], box, j, spec.a) if j in use else np.zeros(box.shape))
                  for j in win.levels}
        G = SequenceField(box, win, fields)
        total += mixed_norm(G, spec.kind, spec.space, spec.w, spec.tau, spec.q)
    return total


def wavelet_space_norm(f: GridFunction, spec, family: str = "bior", name: str | None = None,
                       normalization: str = "amplitude", J: int | None = None) -> float:
    quad = build_filters(name, spec) if name else build_filters(spec=spec, family=family)
    if J is None:
        J = _fine_level(f.domain) - spec.window.j_min
    return wavelet_seq_norm(forward_transform(f, quad, J), spec, normalization)
