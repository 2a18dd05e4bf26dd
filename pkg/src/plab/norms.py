"""Function-space quasi-norms, the default test battery, and comparison harnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .errors import HypothesisError, ParameterError
from .grid import BoxDomain, GridFunction, ScaleWindow
from .kernels import (LPSystem, band_convolve, bessel_lift, build_gaussian_system,
                      build_local_mean_system, build_lp_system, peetre_sup, plateau,
                      smooth_step)
from .sequences import SCALE_KIND, SequenceField, mixed_norm
from .spaces import FundamentalSpace, Lebesgue
from .weights import WeightModel, derive_weight, smoothness_weight

SCALES = ("B", "N", "F", "E")


@dataclass(frozen=True)
class SpaceSpec:
    scale: str
    space: FundamentalSpace
    w: WeightModel
    tau: float = 0.0
    q: float = 2.0
    a: float | None = None
    window: ScaleWindow = field(default_factory=lambda: ScaleWindow(0, 8))
    check_peetre: bool = True

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ParameterError(f"scale must be one of {SCALES}")
        if self.tau < 0:
            raise ParameterError("tau must be >= 0")
        if not self.q > 0:
            raise ParameterError("q must be positive")
        if self.a is None:
            object.__setattr__(self, "a", self.default_a())
        if not self.a > 0:
            raise ParameterError("a must be positive")
        if self.check_peetre and not self.a > self.space.N0 + self.w.alpha3:
            raise HypothesisError(
                f"Peetre exponent too small: need a > N0 + alpha3 = "
                f"{self.space.N0 + self.w.alpha3:g}, got a = {self.a:g}")

    @property
    def dim(self) -> int:
        return self.space.dim

    def default_a(self) -> float:
        return self.space.N0 + self.w.alpha3 + self.dim + 1.0

    def with_(self, **kw) -> "SpaceSpec":
        return replace(self, **kw)

    @property
    def kind(self):
        return SCALE_KIND[self.scale]

    def to_dict(self) -> dict:
        return {"scale": self.scale, "space": self.space.to_dict(), "w": self.w.to_dict(),
                "tau": self.tau, "q": self.q, "a": self.a,
                "window": [self.window.j_min, self.window.j_max]}


def peetre_field(f: GridFunction, sys, a: float, window: ScaleWindow | None = None) -> SequenceField:
    """{(phi_j^* f)_a}_j; a = inf gives the plain moduli |phi_j * f|."""
    window = sys.window if window is None else window
    fhat = np.fft.fftn(f.values)
    levels = {}
    for j in window.levels:
        g = band_convolve(f, sys, j, fhat).values
        levels[j] = np.abs(g) if np.isinf(a) else peetre_sup(g, f.domain, j, a)
    return SequenceField(f.domain, window, levels)


def space_norm(f: GridFunction, spec: SpaceSpec, sys=None, a: float | None = None) -> float:
    if sys is None:
        sys = build_lp_system(f.domain, spec.window)
    if spec.window.j_min < sys.window.j_min or spec.window.j_max > sys.window.j_max:
        raise ParameterError("system window must contain the spec window")
    a = spec.a if a is None else a
    G = peetre_field(f, sys, a, spec.window)
    return mixed_norm(G, spec.kind, spec.space, spec.w, spec.tau, spec.q)


def direct_besov(f: GridFunction, s: float, p: float, q: float, sys: LPSystem) -> float:
    """(sum_j 2^(jsq) ||phi_j * f||_p^q)^(1/q), coded without the sequence machinery."""
    box = f.domain
    fhat = np.fft.fftn(f.values)
    terms = []
    for j in sys.window.levels:
        g = np.abs(np.fft.ifftn(fhat * sys.multiplier(j)))
        terms.append(2.0 ** (j * s) * (np.sum(g ** p) * box.cell_volume) ** (1.0 / p))
    terms = np.array(terms)
    return float(terms.max() if np.isinf(q) else np.sum(terms ** q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# battery

def _bspline(t, order):
    """Centred cardinal B-spline of the given order (support width = order)."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    for k in range(order + 1):
        u = t + order / 2.0 - k
        if order == 1:
            piece = np.where(u > 0, 1.0, np.where(u == 0, 0.5, 0.0))
        else:
            piece = np.where(u > 0, u, 0.0) ** (order - 1)
        out += (-1) ** k * math.comb(order, k) * piece
    return out / math.factorial(order - 1)


def snap_frequency(box: BoxDomain, c: float) -> float:
    """Nearest multiple of the frequency spacing pi/L (so f_m is exactly periodic)."""
    step = math.pi / box.half_width
    return max(1, round(c / step)) * step


def fm_function(box: BoxDomain, m: int, c: float | None = None) -> GridFunction:
    """Periodised (2 sin(c t) / t)^m, built from its B-spline spectrum.

    The default c is the largest grid-compatible value with m c <= 1/2.
    """
    if box.dim != 1:
        raise ParameterError("f_m is one-dimensional")
    if m < 1:
        raise ParameterError("m must be >= 1")
    step = math.pi / box.half_width
    if c is None:
        k = math.floor(0.5 / (m * step) + 1e-12)
        if k < 1:
            raise ParameterError("box too small for a band limit of 1/2")
        c = k * step
    xi = box.freq_axis()
    g = (2 * c) ** (m - 1) * _bspline(xi / (2 * c), m)
    N = box.samples_per_axis
    sign = (-1.0) ** np.round(xi * box.half_width / math.pi)  # shift to the x = -L origin
    vals = (math.pi / box.half_width) * N * np.fft.ifft(g * sign)
    return GridFunction(box, vals.real)


def plateau_bump(t):
    """Smooth f_0 with chi_(3,4) <= f_0 <= chi_(2,5)."""
    t = np.asarray(t, float)
    return smooth_step(t - 2.0) * smooth_step(5.0 - t)


def fa_translate(box: BoxDomain, a: float = 1.0) -> GridFunction:
    def fn(*xs):
        v = np.ones(box.shape)
        for x in xs:
            v = v * plateau_bump(2.0 * (x - a) + 3.5)
        return v
    return GridFunction.from_callable(box, fn)


def _radial(box, fn):
    return GridFunction(box, fn(box.radius()))


def _band_limit(box, vals, cutoff):
    V = np.fft.fftn(vals)
    V[box.freq_radius() > cutoff] = 0.0
    return np.fft.ifftn(V).real


BATTERY_IDS = ("gauss_0.15", "gauss_0.3", "gauss_0.5", "gauss_shift", "bspline_2", "bspline_4",
               "chirp", "fm_1", "fm_3", "random_band", "smooth_chi", "fa_translate")


def make_battery(box: BoxDomain, seed: int = 0) -> list:
    """The default 12-member battery as (id, GridFunction) pairs."""
    n = box.dim
    xs = box.coords()
    out = []
    for s in (0.15, 0.3, 0.5):
        out.append((f"gauss_{s}", _radial(box, lambda r, s=s: np.exp(-r ** 2 / (2 * s * s)))))
    shift = 0.7
    r2 = (xs[0] - shift) ** 2 + sum(c ** 2 for c in xs[1:])
    out.append(("gauss_shift", GridFunction(box, np.exp(-r2 / (2 * 0.09)))))
    for order in (2, 4):
        v = np.ones(box.shape)
        for c in xs:
            v = v * _bspline(c * order / 2.0, order)
        out.append((f"bspline_{order}", GridFunction(box, v)))
    chirp = np.cos(6.0 * xs[0] ** 2) * np.exp(-sum(c ** 2 for c in xs) / (2 * 0.6 ** 2))
    out.append(("chirp", GridFunction(box, _band_limit(box, chirp, 2.0 ** 5))))
    for m in (1, 3):
        if n == 1:
            out.append((f"fm_{m}", fm_function(box, m, c=math.pi / box.half_width)))
        else:
            b = BoxDomain(1, box.half_width, box.samples_per_axis)
            g = fm_function(b, m, c=math.pi / box.half_width).values.real
            v = np.ones(box.shape)
            for c in np.meshgrid(*([g] * n), indexing="ij"):
                v = v * c
            out.append((f"fm_{m}", GridFunction(box, v)))
    rng = np.random.default_rng(seed)
    spec = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
    spec[box.freq_radius() > 2.0 ** 4] = 0.0
    field_ = np.fft.ifftn(spec).real
    field_ /= np.abs(field_).max()
    out.append(("random_band", GridFunction(box, field_)))
    eps = 0.05
    v = np.ones(box.shape)
    for c in xs:
        v = v * 0.5 * (special.erf((c + 1) / (eps * math.sqrt(2))) - special.erf((c - 1) / (eps * math.sqrt(2))))
    out.append(("smooth_chi", GridFunction(box, v)))
    out.append(("fa_translate", fa_translate(box, 1.0)))
    return out


PINNED_BOXES = {1: BoxDomain(1, 4.0, 4096), 2: BoxDomain(2, 4.0, 256)}


# ---------------------------------------------------------------------------
# characterizations

CHARACTERIZATIONS = ("default", "alt_system", "local_means", "no_peetre", "wavelet",
                     "difference", "oscillation")


def _required_moment(spec: SpaceSpec) -> float:
    """Right side of L + 1 > alpha1 v (a + n tau + alpha2)."""
    return max(spec.w.alpha1, spec.a + spec.dim * spec.tau + spec.w.alpha2)


def alt_system_for(box: BoxDomain, spec: SpaceSpec, m: int | None = None):
    need = _required_moment(spec)
    if m is None:
        m = max(1, math.ceil((need + 1e-9) / 2.0))  # L = 2m - 1, need L + 1 > need
    sys = build_gaussian_system(box, spec.window, m)
    if not sys.moment_order + 1 > need:
        raise HypothesisError(f"moment condition fails: L + 1 = {sys.moment_order + 1} <= {need:g}")
    return sys


def local_means_for(box: BoxDomain, spec: SpaceSpec, l0: int | None = None):
    need = _required_moment(spec)
    if l0 is None:
        l0 = max(0, math.ceil((need - 1 + 1e-9) / 2.0))
    if not 2 * l0 + 1 > need:
        raise HypothesisError(f"local means need 2 l0 + 1 > {need:g}, got l0 = {l0}")
    return build_local_mean_system(box, l0, spec.window)


@dataclass
class CharConfig:
    """Per-characterization parameter overrides."""
    spec_overrides: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def default_char_configs(spec: SpaceSpec) -> dict:
    return {
        "default": CharConfig(),
        "alt_system": CharConfig(),
        "local_means": CharConfig(),
        "no_peetre": CharConfig(),
        "wavelet": CharConfig(options={"family": "db"}),
        "difference": CharConfig(spec_overrides={"a": 0.75, "check_peetre": False},
                                 options={"M": 2, "u": 2.0, "C": 1.0}),
        "oscillation": CharConfig(spec_overrides={"a": 0.75, "check_peetre": False},
                                  options={"M": 2, "u": 2.0, "C": 1.0}),
    }


def characterization_norm(name: str, f: GridFunction, spec: SpaceSpec, opts: dict,
                          cache: dict | None = None) -> float:
    box = f.domain
    cache = {} if cache is None else cache
    if name == "default":
        key = ("lp", box)
        if key not in cache:
            cache[key] = build_lp_system(box, spec.window)
        return space_norm(f, spec, cache[key])
    if name == "alt_system":
        key = ("alt", box, spec.a, opts.get("m"))
        if key not in cache:
            cache[key] = alt_system_for(box, spec, opts.get("m"))
        return space_norm(f, spec, cache[key])
    if name == "local_means":
        key = ("lm", box, spec.a, opts.get("l0"))
        if key not in cache:
            cache[key] = local_means_for(box, spec, opts.get("l0"))
        return space_norm(f, spec, cache[key])
    if name == "no_peetre":
        key = ("lp", box)
        if key not in cache:
            cache[key] = build_lp_system(box, spec.window)
        return space_norm(f, spec, cache[key], a=np.inf)
    if name == "wavelet":
        from .wavelets import wavelet_space_norm
        return wavelet_space_norm(f, spec, **opts)
    if name in ("difference", "oscillation"):
        from .diffosc import DiffOscConfig, difference_norm, oscillation_norm
        cfg = DiffOscConfig(M=opts.get("M", 2), u=opts.get("u", 2.0), C=opts.get("C", 1.0), a=spec.a)
        fn = difference_norm if name == "difference" else oscillation_norm
        return fn(f, spec, cfg)
    raise ParameterError(f"unknown characterization {name!r}")


@dataclass
class EquivalenceReport:
    rows: list
    spreads: dict
    errors: dict

    def to_tsv(self) -> str:
        lines = ["function_id\tcharacterization\tvalue\tratio"]
        for r in self.rows:
            lines.append(f"{r['function_id']}\t{r['characterization']}\t{r['value']:.17g}\t{r['ratio']:.17g}")
        return "\n".join(lines) + "\n"


def equivalence_report(battery, spec: SpaceSpec, characterizations=CHARACTERIZATIONS,
                       configs: dict | None = None) -> EquivalenceReport:
    """Ratios of each characterization to the default norm (at matching a)."""
    configs = dict(default_char_configs(spec), **(configs or {}))
    rows, spreads, errors = [], {}, {}
    cache = {}
    base_cache = {}
    for name in characterizations:
        cc = configs.get(name, CharConfig())
        try:
            cspec = spec.with_(**cc.spec_overrides) if cc.spec_overrides else spec
            _check_hypotheses(name, cspec, cc.options)
        except (HypothesisError, ParameterError) as exc:
            errors[name] = str(exc)
            continue
        ratios = []
        for fid, f in battery:
            bkey = (fid, cspec.a)
            if bkey not in base_cache:
                base_cache[bkey] = characterization_norm("default", f, cspec, {}, cache)
            base = base_cache[bkey]
            val = base if name == "default" else characterization_norm(name, f, cspec, cc.options, cache)
            ratio = val / base if base > 0 else float("nan")
            rows.append({"function_id": fid, "characterization": name, "value": val, "ratio": ratio})
            ratios.append(ratio)
        r = np.array(ratios)
        spreads[name] = float(r.max() / r.min()) if np.all(r > 0) else float("inf")
    return EquivalenceReport(rows, spreads, errors)


def _check_hypotheses(name: str, spec: SpaceSpec, opts: dict) -> None:
    need = _required_moment(spec)
    if name == "alt_system" and opts.get("m") is not None:
        if not 2 * opts["m"] > need:
            raise HypothesisError(f"moment condition fails: L + 1 = {2 * opts['m']} <= {need:g}")
    if name == "local_means" and opts.get("l0") is not None:
        if not 2 * opts["l0"] + 1 > need:
            raise HypothesisError(f"local means need 2 l0 + 1 > {need:g}")
    if name in ("difference", "oscillation"):
        from .diffosc import DiffOscConfig, check_admissible
        check_admissible(spec, DiffOscConfig(M=opts.get("M", 2), u=opts.get("u", 2.0),
                                             C=opts.get("C", 1.0), a=spec.a))


# ---------------------------------------------------------------------------
# embeddings

@dataclass
class EmbeddingReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)


def embedding_check(f: GridFunction, spec: SpaceSpec, sys=None, q_pairs=((1.0, 2.0), (2.0, np.inf)),
                    rel_slack: float = 1e-12) -> EmbeddingReport:
    """q-monotonicity per scale, N(q=inf) below every scale, and B(q=inf) <= E(q)."""
    if sys is None:
        sys = build_lp_system(f.domain, spec.window)
    G = peetre_field(f, sys, spec.a, spec.window)
    sp, w, tau = spec.space, spec.w, spec.tau
    memo = {}

    def val(scale, q):
        key = (scale, q)
        if key not in memo:
            memo[key] = mixed_norm(G, SCALE_KIND[scale], sp, w, tau, q)
        return memo[key]

    def le(x, y):
        return x <= y * (1 + rel_slack) + 1e-300

    checks = []
    for scale in SCALES:
        for q1, q2 in q_pairs:
            v1, v2 = val(scale, q1), val(scale, q2)
            checks.append({"check": "q_monotone", "scale": scale, "q1": q1, "q2": q2,
                           "lhs": v2, "rhs": v1, "slack": v1 - v2, "pass": le(v2, v1)})
    ninf = val("N", np.inf)
    for scale in SCALES:
        v = val(scale, spec.q)
        checks.append({"check": "N_inf_below", "scale": scale, "q": spec.q, "lhs": ninf, "rhs": v,
                       "slack": v - ninf, "pass": le(ninf, v)})
    binf, eq = val("B", np.inf), val("E", spec.q)
    checks.append({"check": "B_inf_below_E", "scale": "E", "q": spec.q, "lhs": binf, "rhs": eq,
                   "slack": eq - binf, "pass": le(binf, eq)})
    return EmbeddingReport(checks)


# ---------------------------------------------------------------------------
# lift and Sobolev-type checks

def lift_ratios(battery, spec: SpaceSpec, s: float, sys=None) -> np.ndarray:
    box = battery[0][1].domain
    sys = build_lp_system(box, spec.window) if sys is None else sys
    lifted = spec.with_(w=derive_weight(spec.w, "lift", s=s), check_peetre=False)
    out = []
    for _, f in battery:
        out.append(space_norm(bessel_lift(f, s), lifted, sys) / space_norm(f, spec, sys))
    return np.array(out)


def sobolev_constant(f: GridFunction, spec: SpaceSpec, sys=None) -> float:
    """sup_{j,x} w*_j(x) (phi_j^* f)_a(x) / ||f||, with w* built from (tau, gamma, delta)."""
    sys = build_lp_system(f.domain, spec.window) if sys is None else sys
    G = peetre_field(f, sys, spec.a, spec.window)
    ws = derive_weight(spec.w, "sobolev", tau=spec.tau * spec.dim, gamma=spec.space.gamma,
                       delta=spec.space.delta)
    top = max(float(np.max(np.abs(ws.on_grid(f.domain, j)) * G.levels[j])) for j in spec.window.levels)
    nrm = mixed_norm(G, spec.kind, spec.space, spec.w, spec.tau, spec.q)
    return top / nrm


# ---------------------------------------------------------------------------
# band-limited counterexample

@dataclass
class WitnessReport:
    m: int
    a: float
    c: float
    exponent: float
    predicted: float
    high_ratio: float
    tail_norms: list
    p: float
    finite_predicted: bool

    @property
    def rel_error(self) -> float:
        return abs(self.exponent - self.predicted) / abs(self.predicted)


def fit_block_decay(x: np.ndarray, y: np.ndarray, x_lo: float, x_hi: float) -> float:
    """Slope of log(block max y) against log(1 + x) over dyadic x blocks."""
    xs, ys = [], []
    t = x_lo
    while t * 2 <= x_hi * (1 + 1e-12):
        sel = (x >= t) & (x < 2 * t)
        if np.any(sel):
            xs.append(t)
            ys.append(y[sel].max())
        t *= 2
    return float(np.polyfit(np.log1p(np.array(xs)), np.log(np.array(ys)), 1)[0])


def fm_witness(m: int, a: float, box: BoxDomain | None = None, p: float = 2.0,
               x_lo: float | None = None, x_hi: float | None = None) -> WitnessReport:
    """Decay of (Phi^* f_m)_a and vanishing of the higher bands for the band-limited f_m.

    The fit runs over [L/64, L/4] by default: the far-field regime where the
    decay rate has settled, well inside the periodic wrap at L.
    """
    if box is None:
        box = BoxDomain(1, 2048.0, 32768)
    fm = fm_function(box, m)
    step = math.pi / box.half_width
    c = math.floor(0.5 / (m * step) + 1e-12) * step
    J = box.finest_level()
    if J < 1:
        raise ParameterError("box resolution does not reach level 1")
    sys = build_lp_system(box, ScaleWindow(0, J))
    fhat = np.fft.fftn(fm.values)
    low = peetre_sup(band_convolve(fm, sys, 0, fhat).values, box, 0, a)
    high = max(float(peetre_sup(band_convolve(fm, sys, j, fhat).values, box, j, a).max())
               for j in range(1, J + 1))
    x = box.axis()
    pos = x > 0
    x_lo = box.half_width / 64 if x_lo is None else x_lo
    x_hi = box.half_width / 4 if x_hi is None else x_hi
    expo = fit_block_decay(x[pos], low[pos], x_lo, x_hi)
    sp = Lebesgue(p)
    tails = []
    for frac in (0.125, 0.25, 0.5, 1.0):
        R = box.half_width * frac
        tails.append(sp.norm(low * (np.abs(x) <= R), box))
    return WitnessReport(m, a, c, expo, max(-a, -m), high / float(low.max()), tails, p,
                         p * min(a, m) > 1)
