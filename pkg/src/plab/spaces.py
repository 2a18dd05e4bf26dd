"""Fundamental quasi-normed lattices L(R^n) and their axiom checks.

Every space evaluates norms of chi_P * F for all dyadic cubes P of one level
at once (``cube_norms``), which is what the mixed sequence norms need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OverflowModularError, ParameterError
from .grid import BoxDomain, cube_labels

LUX_LO = 1e-12
LUX_HI = 1e12
# geometric bisection steps so that hi/lo - 1 < 1e-12
LUX_STEPS = int(math.ceil(math.log2(math.log(LUX_HI / LUX_LO) / math.log1p(1e-12)))) + 1


# ---------------------------------------------------------------------------
# named presets (no code in configs)

YOUNG_PRESETS = {
    "power": lambda t, p: t ** p,
    "power_log": lambda t, p: t ** p * np.log(np.e + t),
}

GROWTH_PRESETS = {
    # phi(t) = t^(n/p0): plain Morrey
    "power": lambda t, n, p0: t ** (n / p0),
    # phi(t) = t^(n/p0) * log(e + t); nondecreasing, phi^p t^-n nonincreasing when p0 > p
    "power_log": lambda t, n, p0: t ** (n / p0) * np.log(np.e + t),
}


def _bincount(labels, weights, m):
    return np.bincount(labels.ravel(), weights=weights.ravel(), minlength=m)


def _group_max(labels, vals, m):
    out = np.zeros(m)
    np.maximum.at(out, labels.ravel(), vals.ravel())
    return out


def _lq(vals, q, axis=-1):
    if np.isinf(q):
        return np.max(vals, axis=axis)
    return np.sum(vals ** q, axis=axis) ** (1.0 / q)


def _labels_for(box: BoxDomain, level):
    if level is None:
        return np.zeros(box.shape, dtype=np.int64), np.zeros((1, box.dim), dtype=np.int64)
    return cube_labels(box, level)


@dataclass
class FundamentalSpace:
    """Base class: subclasses implement ``_grouped``."""
    theta: float = field(init=False)
    N0: float = field(init=False)
    gamma: float = field(init=False)
    delta: float = field(init=False)
    # whether the declared gamma / delta are expected to be recovered by a fit
    sharp_gamma: bool = field(init=False, default=False)
    sharp_delta: bool = field(init=False, default=False)
    kind: str = field(init=False, default="")

    def cube_norms(self, F: np.ndarray, box: BoxDomain, level=None):
        """Norms of chi_P |F| for the level-`level` dyadic cubes P (or of |F| itself)."""
        F = np.abs(np.asarray(F)).reshape(box.shape).astype(float)
        labels, ks = _labels_for(box, level)
        return self._grouped(F, box, labels, len(ks), level), ks

    def norm(self, F, box: BoxDomain) -> float:
        return float(self.cube_norms(F, box, None)[0][0])

    def declared(self) -> dict:
        return {"theta": self.theta, "N0": self.N0, "gamma": self.gamma, "delta": self.delta}

    def fit_hint(self, box: BoxDomain):
        """(levels, shifts) used by the (L6) exponent fit."""
        top = box.finest_level()
        levels = list(range(0, max(top - 1, 3)))
        kmax = int(box.half_width) - 1
        shifts = list(range(0, max(kmax, 1) + 1))
        return levels, shifts

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        d.update({k: v for k, v in self.__dict__.items()
                  if k not in ("theta", "N0", "gamma", "delta", "sharp_gamma", "sharp_delta", "kind")
                  and not callable(v)})
        return d


# ---------------------------------------------------------------------------
# Luxemburg machinery

def luxemburg_grouped(modular, labels, m, box: BoxDomain, active=None) -> np.ndarray:
    """inf{lam : modular(lam[labels]) <= 1} per group by geometric bisection.

    ``modular(lam_grid)`` returns the pointwise modular density; groups with
    zero data get norm 0.  A fixed step count keeps the bisection tree the
    same for every input, which makes the result exactly lattice monotone.
    """
    dv = box.cell_volume
    lo = np.full(m, LUX_LO)
    hi = np.full(m, LUX_HI)
    if active is None:
        active = np.ones(m, dtype=bool)
    top = _bincount(labels, modular(hi[labels]), m) * dv
    if np.any(top[active] > 1.0):
        raise OverflowModularError("modular exceeds 1 at the bracket cap; norm too large")
    for _ in range(LUX_STEPS):
        mid = np.sqrt(lo * hi)
        val = _bincount(labels, modular(mid[labels]), m) * dv
        ok = val <= 1.0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(active, hi, 0.0)


# ---------------------------------------------------------------------------
# concrete spaces

class Lebesgue(FundamentalSpace):
    def __init__(self, p: float, dim: int = 1):
        if not p > 0:
            raise ParameterError("p must be positive")
        self.p = float(p)
        self.dim = dim
        self.kind = "lebesgue"
        self.theta = min(1.0, p)
        self.N0 = dim / p + 1.0 if np.isfinite(p) else 0.0
        self.gamma = dim / p if np.isfinite(p) else 0.0
        self.delta = 0.0
        self.sharp_gamma = self.sharp_delta = True

    def _grouped(self, F, box, labels, m, level):
        if np.isinf(self.p):
            return _group_max(labels, F, m)
        return (_bincount(labels, F ** self.p, m) * box.cell_volume) ** (1.0 / self.p)


class WeightedLebesgue(FundamentalSpace):
    """L^p((1+|x|)^beta dx)."""

    def __init__(self, p: float, beta: float, dim: int = 1):
        if not (p > 0 and np.isfinite(p)):
            raise ParameterError("p must be positive and finite")
        self.p, self.beta, self.dim = float(p), float(beta), dim
        self.kind = "weighted_lebesgue"
        self.theta = min(1.0, p)
        self.N0 = (dim + max(beta, 0.0)) / p + 1.0
        self.gamma = dim / p
        self.delta = max(-beta, 0.0) / p
        self.sharp_gamma = True
        self.sharp_delta = beta < 0

    def fit_hint(self, box: BoxDomain):
        # small cubes see a flat weight; far shifts see the power law (1 + k)^beta
        top = box.finest_level()
        levels = list(range(2, max(top - 1, 5)))
        shifts, k = [], 2
        while k <= box.half_width - 1:
            shifts.append(k)
            k *= 2
        return levels, shifts or [0, 1]

    def _grouped(self, F, box, labels, m, level):
        w = (1.0 + box.radius()) ** self.beta
        return (_bincount(labels, F ** self.p * w, m) * box.cell_volume) ** (1.0 / self.p)


def _dyadic_tree_max(F, box, level, value_fn):
    """max over dyadic Q inside each level-`level` group of value_fn(l, int_Q F)."""
    cell = int(round(math.log2(1.0 / box.h)))
    start = box.covering_level() if level is None else level
    labels_g, ks_g = _labels_for(box, level)
    m = len(ks_g)
    out = np.zeros(m)
    for l in range(start, cell + 1):
        lab, ks = cube_labels(box, l)
        S = _bincount(lab, F, len(ks)) * box.cell_volume
        vals = value_fn(l, S)
        if level is None:
            parent = np.zeros(len(ks), dtype=np.int64)
        else:
            # ancestor index at the group level, mapped into the group enumeration
            anc = np.floor_divide(ks, 2 ** (l - level))
            lo = ks_g.min(axis=0)
            side = ks_g.max(axis=0) - lo + 1
            loc = anc - lo
            parent = loc[:, 0] if box.dim == 1 else loc[:, 0] * side[1] + loc[:, 1]
        np.maximum.at(out, parent, vals)
    return out


class Morrey(FundamentalSpace):
    """sup_Q |Q|^(1/p - 1/u) (int_Q |f|^u)^(1/u), 0 < u <= p, dyadic Q."""

    def __init__(self, p: float, u: float, dim: int = 1):
        if not (0 < u <= p < np.inf):
            raise ParameterError("need 0 < u <= p < inf")
        self.p, self.u, self.dim = float(p), float(u), dim
        self.kind = "morrey"
        self.theta = min(1.0, u)
        self.N0 = dim / p + 1.0
        self.gamma = dim / p
        self.delta = 0.0
        self.sharp_gamma = self.sharp_delta = True

    def _grouped(self, F, box, labels, m, level):
        n, p, u = box.dim, self.p, self.u
        Fu = F ** u

        def val(l, S):
            vol = 2.0 ** (-l * n)
            return vol ** (1.0 / p - 1.0 / u) * S ** (1.0 / u)

        return _dyadic_tree_max(Fu, box, level, val)


class GeneralizedMorrey(FundamentalSpace):
    """sup_Q phi(l(Q)) (|Q|^-1 int_Q |f|^p)^(1/p) with a preset growth function."""

    def __init__(self, p: float, phi: str = "power", p0: float | None = None, dim: int = 1):
        if phi not in GROWTH_PRESETS:
            raise ParameterError(f"unknown growth preset {phi!r}")
        p0 = p if p0 is None else p0
        if not (0 < p <= p0):
            raise ParameterError("need 0 < p <= p0")
        self.p, self.p0, self.phi, self.dim = float(p), float(p0), phi, dim
        self.kind = "generalized_morrey"
        self.theta = 1.0
        self.N0 = dim / p + 1.0
        self.gamma = dim / p
        self.delta = 0.0
        self.sharp_gamma = False
        self.sharp_delta = True

    def growth(self, t):
        return GROWTH_PRESETS[self.phi](np.asarray(t, dtype=float), self.dim, self.p0)

    def _grouped(self, F, box, labels, m, level):
        n, p = box.dim, self.p
        Fp = F ** p

        def val(l, S):
            side = 2.0 ** (-l)
            return self.growth(side) * (S / side ** n) ** (1.0 / p)

        return _dyadic_tree_max(Fp, box, level, val)


class Orlicz(FundamentalSpace):
    def __init__(self, young: str = "power", p: float = 2.0, dim: int = 1):
        if young not in YOUNG_PRESETS:
            raise ParameterError(f"unknown Young preset {young!r}")
        if p < 1:
            raise ParameterError("Young presets need p >= 1")
        self.young, self.p, self.dim = young, float(p), dim
        self.kind = "orlicz"
        self.theta = 1.0
        self.N0 = dim + 1.0
        self.gamma = float(dim)
        self.delta = 0.0
        self.sharp_gamma = False
        self.sharp_delta = True

    def Phi(self, t):
        return YOUNG_PRESETS[self.young](t, self.p)

    def _grouped(self, F, box, labels, m, level):
        active = _bincount(labels, F, m) > 0
        return luxemburg_grouped(lambda lam: self.Phi(F / lam), labels, m, box, active)


class VariableLebesgue(FundamentalSpace):
    """L^p(.) with the log-Hoelder profile p(x) = p_inf + c / log(e + |x|)."""

    def __init__(self, p_inf: float = 2.0, c: float = 1.0, dim: int = 1):
        if not p_inf > 0 or c < 0:
            raise ParameterError("need p_inf > 0 and c >= 0")
        self.p_inf, self.c, self.dim = float(p_inf), float(c), dim
        self.kind = "variable_lebesgue"
        pm = self.p_inf
        self.theta = min(1.0, pm)
        self.N0 = dim / pm + 1.0
        self.gamma = dim / pm
        self.delta = 0.0
        self.sharp_gamma = False
        self.sharp_delta = True

    def exponent(self, box: BoxDomain) -> np.ndarray:
        return self.p_inf + self.c / np.log(np.e + box.radius())

    def _grouped(self, F, box, labels, m, level):
        px = self.exponent(box)
        active = _bincount(labels, F, m) > 0
        return luxemburg_grouped(lambda lam: (F / lam) ** px, labels, m, box, active)


class PathologicalSplit(FundamentalSpace):
    """L^(1 + chi_{x_n > 0}): exponent 1 on the lower half space, 2 on the upper."""

    def __init__(self, dim: int = 1):
        self.dim = dim
        self.kind = "pathological_split"
        self.theta = 1.0
        self.N0 = dim + 1.0
        self.gamma = float(dim)
        self.delta = 0.0
        self.sharp_gamma = False
        self.sharp_delta = True

    def exponent(self, box: BoxDomain) -> np.ndarray:
        return 1.0 + (box.coords()[-1] > 0)

    def _grouped(self, F, box, labels, m, level):
        px = self.exponent(box)
        active = _bincount(labels, F, m) > 0
        return luxemburg_grouped(lambda lam: (F / lam) ** px, labels, m, box, active)


def _subgroup_reduce(F, box, labels, m, sub, nsub, p):
    """L^p norms of F over (group, subgroup) pairs; returns an (m, nsub) array."""
    lab = labels * nsub + sub
    if np.isinf(p):
        return _group_max(lab, F, m * nsub).reshape(m, nsub)
    S = _bincount(lab, F ** p, m * nsub) * box.cell_volume
    return (S ** (1.0 / p)).reshape(m, nsub)


class Herz(FundamentalSpace):
    """||chi_Q0 f||_p + (sum_j 2^(j q alpha) ||chi_Cj f||_p^q)^(1/q), sup-norm annuli."""

    def __init__(self, p: float, q: float, alpha: float, dim: int = 1):
        if not (p > 0 and q > 0):
            raise ParameterError("need p, q > 0")
        self.p, self.q, self.alpha, self.dim = float(p), float(q), float(alpha), dim
        self.kind = "herz"
        self.theta = min(1.0, p, q)
        self.N0 = dim / q + 1.0 + max(alpha, 0.0) if np.isfinite(q) else 1.0 + max(alpha, 0.0)
        self.gamma = (dim / p if np.isfinite(p) else 0.0) + alpha
        self.delta = 0.0
        self.sharp_gamma = True
        self.sharp_delta = alpha == 0

    @staticmethod
    def annulus_index(box: BoxDomain) -> np.ndarray:
        r = np.max(np.abs(np.stack(box.coords())), axis=0)
        idx = np.zeros(box.shape, dtype=np.int64)
        out = r > 1.0
        idx[out] = np.ceil(np.log2(r[out]) - 1e-12).astype(np.int64)
        return idx

    def _grouped(self, F, box, labels, m, level):
        ann = self.annulus_index(box)
        nsub = int(ann.max()) + 1
        parts = _subgroup_reduce(F, box, labels, m, ann, nsub, self.p)
        head = parts[:, 0]
        if nsub == 1:
            return head
        j = np.arange(1, nsub)
        tail = parts[:, 1:] * 2.0 ** (j * self.alpha)
        return head + _lq(tail, self.q, axis=1)

    def fit_hint(self, box: BoxDomain):
        # the declared gamma = n/p + alpha describes large cubes around the origin
        c = box.covering_level()
        if c <= -6:
            levels = list(range(c, -3))
        elif c <= -3:
            levels = list(range(c, -1))
        else:
            levels = list(range(0, max(box.finest_level() - 1, 3)))
        return levels, list(range(0, max(int(box.half_width) - 1, 1) + 1))


class Amalgam(FundamentalSpace):
    """|| {(1+|z|)^s ||chi_{z+[0,1]^n} f||_p}_z ||_{l^q}."""

    def __init__(self, p: float, q: float, s: float, dim: int = 1):
        if not (p > 0 and q > 0):
            raise ParameterError("need p, q > 0")
        self.p, self.q, self.s, self.dim = float(p), float(q), float(s), dim
        self.kind = "amalgam"
        self.theta = min(1.0, p, q)
        self.N0 = dim + 1.0 + s
        self.gamma = dim / p if np.isfinite(p) else 0.0
        self.delta = max(-s, 0.0)
        self.sharp_gamma = True
        self.sharp_delta = s <= 0

    def _grouped(self, F, box, labels, m, level):
        tl, tks = cube_labels(box, 0)
        parts = _subgroup_reduce(F, box, labels, m, tl, len(tks), self.p)
        wz = (1.0 + np.linalg.norm(tks.astype(float), axis=1)) ** self.s
        return _lq(parts * wz[None, :], self.q, axis=1)


SPACE_KINDS = {
    "lebesgue": Lebesgue,
    "weighted_lebesgue": WeightedLebesgue,
    "morrey": Morrey,
    "generalized_morrey": GeneralizedMorrey,
    "orlicz": Orlicz,
    "herz": Herz,
    "variable_lebesgue": VariableLebesgue,
    "amalgam": Amalgam,
    "pathological_split": PathologicalSplit,
}


def make_space(cfg: dict, dim: int = 1) -> FundamentalSpace:
    """Build a space from a JSON-style dict {"kind": ..., params...}."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in SPACE_KINDS:
        raise ParameterError(f"unknown space kind {kind!r}")
    cfg.pop("dim", None)
    try:
        return SPACE_KINDS[kind](dim=dim, **cfg)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {kind}: {exc}") from None


def quasi_norm(space: FundamentalSpace, f) -> float:
    return space.norm(f.values, f.domain)


# ---------------------------------------------------------------------------
# axiom checks

def _chi_cube(box: BoxDomain, j: int, k) -> np.ndarray:
    side = 2.0 ** (-j)
    mask = np.ones(box.shape, dtype=bool)
    for c, kk in zip(box.coords(), k):
        mask &= (c >= side * kk - 1e-12) & (c < side * (kk + 1) - 1e-12)
    return mask.astype(float)


def fit_exponents(space: FundamentalSpace, box: BoxDomain, levels=None, shifts=None) -> dict:
    """Least-squares (gamma, delta) from log ||chi_{Q_jk}|| over j (k = 0) and k (j = 0)."""
    hl, hk = space.fit_hint(box)
    levels = hl if levels is None else levels
    shifts = hk if shifts is None else shifts
    n = box.dim
    zero = (0,) * n
    vj = np.array([space.norm(_chi_cube(box, j, zero), box) for j in levels])
    slope_j = np.polyfit(np.asarray(levels, float), np.log2(vj), 1)[0]
    ks = [(k,) + (0,) * (n - 1) for k in shifts]
    vk = np.array([space.norm(_chi_cube(box, 0, k), box) for k in ks])
    if len(shifts) > 1:
        slope_k = np.polyfit(np.log2(1.0 + np.asarray(shifts, float)), np.log2(vk), 1)[0]
    else:
        slope_k = 0.0
    return {"gamma_hat": float(-slope_j), "delta_hat": float(-slope_k),
            "levels": list(levels), "shifts": list(shifts)}


@dataclass
class AxiomReport:
    space: str
    checks: dict
    fit: dict

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.checks.values())


def verify_axioms(space: FundamentalSpace, battery, rel_tol: float = 0.05,
                  fit_box: BoxDomain | None = None) -> AxiomReport:
    if not battery:
        raise ParameterError("battery must be nonempty")
    box = battery[0].domain
    norms = [space.norm(g.values, box) for g in battery]
    checks = {}

    worst = 0.0
    ok = True
    for g, v in zip(battery, norms):
        nz = np.any(np.abs(g.values) > 0)
        ok &= (v > 0) == bool(nz) and v >= 0
    checks["L1"] = {"pass": bool(ok and space.norm(np.zeros(box.shape), box) == 0.0)}

    ok = True
    for g, v in zip(battery, norms):
        for c in (-2.0, 0.5, 1j):
            vc = space.norm(c * g.values, box)
            err = abs(vc - abs(c) * v) / max(abs(c) * v, 1e-300)
            worst = max(worst, err)
            ok &= err <= 1e-10
    checks["L2"] = {"pass": bool(ok), "worst_rel": worst}

    th = space.theta
    worst = -np.inf
    for i, f in enumerate(battery):
        for k in range(i, len(battery)):
            s = space.norm(f.values + battery[k].values, box)
            excess = s ** th - norms[i] ** th - norms[k] ** th
            worst = max(worst, excess)
    checks["L3"] = {"pass": bool(worst <= 1e-10), "worst_excess": float(worst), "theta": th}

    worst = -np.inf
    rng = np.random.default_rng(0)
    for f, v in zip(battery, norms):
        for _ in range(3):
            mask = rng.random(box.shape) < 0.5
            gv = space.norm(f.values * mask, box)
            worst = max(worst, gv - v)
        gv = space.norm(0.5 * np.abs(f.values), box)
        worst = max(worst, gv - v)
    checks["L4"] = {"pass": bool(worst <= 1e-12), "worst_excess": float(worst)}

    worst = -np.inf
    for f, v in zip(battery, norms):
        a = np.abs(f.values)
        top = a.max()
        seq = []
        for t in (0.25, 0.5, 0.75, 1.0):
            R = box.half_width * t
            trunc = np.minimum(a, t * top) * (box.radius() <= R + 1e-12)
            if t == 1.0:
                trunc = a
            seq.append(space.norm(trunc, box))
        mono = all(seq[i] <= seq[i + 1] + 1e-12 for i in range(len(seq) - 1))
        worst = max(worst, v - max(seq))
        if not mono:
            worst = np.inf
    checks["L5"] = {"pass": bool(worst <= 1e-10), "worst_gap": float(worst)}

    fit = fit_exponents(space, fit_box or box)
    g_hat, d_hat = fit["gamma_hat"], fit["delta_hat"]
    if space.sharp_gamma:
        g_ok = abs(g_hat - space.gamma) <= rel_tol * max(space.gamma, 1e-12) + (1e-9 if space.gamma == 0 else 0)
    else:
        g_ok = g_hat <= space.gamma * (1 + rel_tol) + 1e-9
    if space.sharp_delta:
        d_ok = abs(d_hat - space.delta) <= rel_tol * max(space.delta, 1.0)
    else:
        d_ok = d_hat <= space.delta + rel_tol * max(space.delta, 1.0)
    fit.update(gamma=space.gamma, delta=space.delta, sharp_gamma=space.sharp_gamma,
               sharp_delta=space.sharp_delta)
    checks["L6"] = {"pass": bool(g_ok and d_ok), "gamma_hat": g_hat, "delta_hat": d_hat}
    return AxiomReport(space.kind, checks, fit)


# ---------------------------------------------------------------------------
# Peetre-type compatibility of L: boundedness of (eta_{j,R} * |f|^r)^(1/r)

def eta_smooth(values: np.ndarray, box: BoxDomain, j: int, R: float, r: float) -> np.ndarray:
    """(eta_{j,R} * |f|^r)^(1/r) with eta_{j,R}(x) = 2^(jn) (1 + 2^j |x|)^-R; f = 0 off the box."""
    N, n = box.samples_per_axis, box.dim
    shape = (2 * N,) * n
    pad = np.zeros(shape)
    pad[(slice(0, N),) * n] = np.abs(values) ** r
    rng = np.concatenate([np.arange(0, N), np.arange(-N, 0)]) * box.h
    dist = np.sqrt(sum(g * g for g in np.meshgrid(*([rng] * n), indexing="ij")))
    eta = 2.0 ** (j * n) * (1.0 + 2.0 ** j * dist) ** (-R)
    axes = tuple(range(n))
    F = np.fft.rfftn(pad, axes=axes) * np.fft.rfftn(eta, axes=axes)
    conv = np.fft.irfftn(F, s=shape, axes=axes)[(slice(0, N),) * n]
    return (np.maximum(conv, 0.0) * box.cell_volume) ** (1.0 / r)


@dataclass
class CompatReport:
    space: str
    r: float
    R: float
    q: float
    cap: float
    worst_single: float
    worst_vector: float
    by_level: dict

    @property
    def worst(self) -> float:
        return max(self.worst_single, self.worst_vector)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.worst) and self.worst <= self.cap)


def verify_peetre_compat(space: FundamentalSpace, r: float, R: float, w, q: float, battery,
                         levels=range(0, 6), cap: float = 20.0, n_fields: int = 5,
                         seed: int = 0) -> CompatReport:
    """Worst ratios ||w_j eta-smoothing of f|| / ||w_j f|| (single) and the l^q-valued analogue."""
    if not battery:
        raise ParameterError("battery must be nonempty")
    box = battery[0].domain
    n = box.dim
    if not R > n + 1:
        raise ParameterError(f"need R > n + 1 = {n + 1}, got R = {R}")
    if not r > 0:
        raise ParameterError("r must be positive")
    levels = list(levels)
    by_level = {}
    for j in levels:
        wj = np.abs(w.on_grid(box, j))
        worst = 0.0
        for f in battery:
            den = space.norm(wj * np.abs(f.values), box)
            if den > 0:
                worst = max(worst, space.norm(wj * eta_smooth(f.values, box, j, R, r), box) / den)
        by_level[j] = worst
    rng = np.random.default_rng(seed)
    worst_vec = 0.0
    for _ in range(n_fields):
        num = np.zeros(box.shape)
        den = np.zeros(box.shape)
        for j in levels:
            wj = np.abs(w.on_grid(box, j))
            fj = rng.random(box.shape) * (rng.random(box.shape) < 0.05) * (box.radius() < box.half_width / 2)
            a, b = wj * eta_smooth(fj, box, j, R, r), wj * fj
            if np.isinf(q):
                num, den = np.maximum(num, a), np.maximum(den, b)
            else:
                num, den = num + a ** q, den + b ** q
        if not np.isinf(q):
            num, den = num ** (1 / q), den ** (1 / q)
        worst_vec = max(worst_vec, space.norm(num, box) / space.norm(den, box))
    return CompatReport(space.kind, r, R, q, cap, max(by_level.values()), worst_vec, by_level)


def split_indicator(box: BoxDomain, r: float) -> np.ndarray:
    """chi_{[-r, 0]}(x_n) chi_{[-1, 1]^(n-1)}."""
    c = box.coords()
    out = (c[-1] >= -r - 1e-12) & (c[-1] <= 1e-12)
    for x in c[:-1]:
        out &= np.abs(x) <= 1.0
    return out.astype(float)


def split_maximal_sweep(box: BoxDomain | None = None, exps=range(2, 9), kind: str = "hardy_littlewood",
                        power: float = 0.5, lam: float = 1.0) -> dict:
    """||M f_r|| / ||f_r|| on the split-exponent space for r = 2^-k, with the log2 slope in r.

    The limiting slope is -1/2, but the exponent-1 half contributes an
    r log(1/r) term, so on r in [2^-8, 2^-2] the slope sits near -0.38.
    ``model_slope`` is the slope of the closed-form Luxemburg model
    lam = (A + sqrt(A^2 + 4B)) / 2 with A = r(1 + log(L/r)), B = r^2 (1/r - 1/(L+r)).
    """
    from .kernels import hardy_littlewood, windowed_maximal
    if kind == "windowed":
        op = lambda v, b: windowed_maximal(v, b, power, lam)
    elif kind == "hardy_littlewood":
        op = hardy_littlewood
    else:
        raise ParameterError(f"unknown maximal operator kind {kind!r}")
    if box is None:
        box = BoxDomain(1, 2.0, 2 ** 14)
    space = PathologicalSplit(box.dim)
    rs, fn, mn, ratio = [], [], [], []
    for k in exps:
        r = 2.0 ** (-k)
        f = split_indicator(box, r)
        if f.sum() < 4:
            raise ParameterError(f"r = {r} is below the grid resolution {box.h}")
        a, b = space.norm(f, box), space.norm(op(f, box), box)
        rs.append(r)
        fn.append(a)
        mn.append(b)
        ratio.append(b / a)
    lr = np.log2(rs)
    slope = lambda y: float(np.polyfit(lr, np.log2(y), 1)[0])
    L = box.half_width
    model = []
    for r in rs:
        A, B = r * (1 + math.log(L / r)), r * r * (1 / r - 1 / (L + r))
        model.append((A + math.sqrt(A * A + 4 * B)) / (2 * r))
    return {"model_slope": slope(model), "kind": kind, "r": rs, "f_norm": fn, "mf_norm": mn, "norm_ratio": ratio,
            "slope": slope(ratio), "f_slope": slope(fn), "mf_slope": slope(mn),
            "increasing": bool(all(ratio[i + 1] > ratio[i] for i in range(len(ratio) - 1)))}
