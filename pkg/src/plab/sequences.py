"""Mixed sequence quasi-norms over scales, space and dyadic cubes.

Also holds coefficient fields lambda_{jk}, their Peetre-type envelopes, and
the two sequence-level witnesses (tau collapse, proper subspace).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import HypothesisError, ParameterError
from .grid import BoxDomain, GridFunction, ScaleWindow, cube_labels, save_grid, load_grid
from .kernels import peetre_sup
from .spaces import FundamentalSpace, _lq
from .weights import WeightModel, derive_weight


class MixKind(enum.Enum):
    Lw_lq = "Lw_lq"
    lq_Lw = "lq_Lw"
    Lw_tau_lq = "Lw_tau_lq"
    ELw_tau_lq = "ELw_tau_lq"
    lq_Lw_tau = "lq_Lw_tau"
    lq_NLw_tau = "lq_NLw_tau"


SCALE_KIND = {"B": MixKind.lq_Lw_tau, "N": MixKind.lq_NLw_tau,
              "F": MixKind.Lw_tau_lq, "E": MixKind.ELw_tau_lq}


@dataclass
class SequenceField:
    box: BoxDomain
    window: ScaleWindow
    levels: dict = field(repr=False)

    def __post_init__(self):
        for j in self.window.levels:
            if j not in self.levels:
                raise ParameterError(f"level {j} missing from sequence field")
            v = np.asarray(self.levels[j].values if isinstance(self.levels[j], GridFunction)
                           else self.levels[j]).reshape(self.box.shape)
            if not np.all(np.isfinite(v)):
                raise ParameterError("sequence field values must be finite")
            self.levels[j] = v

    def scaled(self, c) -> "SequenceField":
        return SequenceField(self.box, self.window, {j: c * v for j, v in self.levels.items()})

    def abs(self) -> "SequenceField":
        return SequenceField(self.box, self.window, {j: np.abs(v) for j, v in self.levels.items()})

    def save(self, directory, meta: dict | None = None) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for j, v in self.levels.items():
            save_grid(d / f"level_{j}.grid", GridFunction(self.box, v))
        manifest = {"window": [self.window.j_min, self.window.j_max], "box": self.box.to_dict()}
        manifest.update(meta or {})
        (d / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))

    @classmethod
    def load(cls, directory) -> "SequenceField":
        d = Path(directory)
        man = json.loads((d / "manifest.json").read_text())
        win = ScaleWindow(*man["window"])
        box = BoxDomain(**man["box"])
        levels = {j: load_grid(d / f"level_{j}.grid").values for j in win.levels}
        return cls(box, win, levels)


def cube_levels(box: BoxDomain, window: ScaleWindow, tau: float) -> list:
    """Levels of the cubes P entering the sup.

    Cubes coarser than the covering level add nothing new for tau >= 0, and at
    tau = 0 the coarsest level already dominates every finer one.
    """
    lo = min(box.covering_level(), window.j_min)
    if tau == 0:
        return [lo]
    return list(range(lo, window.j_max + 1))


def weighted_levels(G: SequenceField, w: WeightModel) -> dict:
    return {j: np.abs(w.on_grid(G.box, j) * G.levels[j]) for j in G.window.levels}


def mixed_norm(G: SequenceField, kind: MixKind, space: FundamentalSpace, w: WeightModel,
               tau: float = 0.0, q: float = 2.0) -> float:
    if isinstance(kind, str):
        kind = MixKind(kind)
    if tau < 0:
        raise ParameterError("tau must be >= 0")
    if not q > 0:
        raise ParameterError("q must be positive")
    box, win = G.box, G.window
    W = weighted_levels(G, w)
    js = list(win.levels)
    n = box.dim

    def lq_fn(arrs):
        if not arrs:
            return np.zeros(box.shape)
        st = np.stack(arrs)
        return np.max(st, axis=0) if np.isinf(q) else np.sum(st ** q, axis=0) ** (1.0 / q)

    if kind in (MixKind.Lw_lq, MixKind.lq_Lw):
        if tau != 0:
            raise ParameterError(f"tau > 0 is not defined for kind {kind.value}")
        if kind is MixKind.Lw_lq:
            return space.norm(lq_fn([W[j] for j in js]), box)
        return float(_lq(np.array([space.norm(W[j], box) for j in js]), q))

    levels = cube_levels(box, win, tau)
    best = 0.0
    if kind is MixKind.Lw_tau_lq:
        for l in levels:
            F = lq_fn([W[j] for j in js if j >= max(l, win.j_min)])
            vals, _ = space.cube_norms(F, box, l)
            best = max(best, float(vals.max()) * 2.0 ** (l * n * tau))
        return best
    if kind is MixKind.ELw_tau_lq:
        F = lq_fn([W[j] for j in js])
        for l in levels:
            vals, _ = space.cube_norms(F, box, l)
            best = max(best, float(vals.max()) * 2.0 ** (l * n * tau))
        return best
    if kind is MixKind.lq_Lw_tau:
        for l in levels:
            sel = [j for j in js if j >= max(l, win.j_min)]
            if not sel:
                continue
            parts = np.stack([space.cube_norms(W[j], box, l)[0] for j in sel])
            best = max(best, float(np.max(_lq(parts, q, axis=0))) * 2.0 ** (l * n * tau))
        return best
    if kind is MixKind.lq_NLw_tau:
        per_j = []
        for j in js:
            m = 0.0
            for l in levels:
                m = max(m, float(space.cube_norms(W[j], box, l)[0].max()) * 2.0 ** (l * n * tau))
            per_j.append(m)
        return float(_lq(np.array(per_j), q))
    raise ParameterError(f"unknown kind {kind}")


def geometric_mix(G: SequenceField, D1: float, D2: float) -> SequenceField:
    js = list(G.window.levels)
    out = {}
    for j in js:
        acc = np.zeros(G.box.shape, dtype=np.result_type(*[G.levels[v] for v in js]))
        for nu in js:
            c = 2.0 ** (-(j - nu) * D2) if nu <= j else 2.0 ** (-(nu - j) * D1)
            if c > 0:
                acc = acc + c * G.levels[nu]
        out[j] = acc
    return SequenceField(G.box, G.window, out)


def mixing_admissible(D1, D2, w: WeightModel, tau, n) -> bool:
    return D1 > w.alpha1 and D2 > n * tau + w.alpha2


# ---------------------------------------------------------------------------
# coefficient fields

@dataclass
class CoefficientField:
    """lambda_{jk} stored densely per level in cube_labels order."""
    box: BoxDomain
    window: ScaleWindow
    coeffs: dict = field(repr=False)

    @classmethod
    def zeros(cls, box: BoxDomain, window: ScaleWindow) -> "CoefficientField":
        window.check(box)
        c = {}
        for j in window.levels:
            _, ks = cube_labels(box, j)
            c[j] = np.zeros(len(ks), dtype=complex)
        return cls(box, window, c)

    def index_of(self, j: int, k) -> int:
        _, ks = cube_labels(self.box, j)
        k = np.atleast_1d(np.asarray(k))
        hit = np.nonzero(np.all(ks == k[None, :], axis=1))[0]
        if hit.size == 0:
            raise ParameterError(f"cube ({j}, {tuple(k)}) does not meet the box")
        return int(hit[0])

    def set(self, j: int, k, value) -> None:
        self.coeffs[j][self.index_of(j, k)] = value

    def get(self, j: int, k) -> complex:
        return complex(self.coeffs[j][self.index_of(j, k)])

    def Lambda(self, j: int) -> np.ndarray:
        labels, _ = cube_labels(self.box, j)
        return self.coeffs[j][labels]

    def scaled(self, c) -> "CoefficientField":
        return CoefficientField(self.box, self.window, {j: c * v for j, v in self.coeffs.items()})

    def nonzero(self):
        for j in self.window.levels:
            _, ks = cube_labels(self.box, j)
            for i in np.nonzero(self.coeffs[j])[0]:
                yield j, tuple(int(t) for t in ks[i]), complex(self.coeffs[j][i])

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for j, k, v in self.nonzero():
                fh.write(json.dumps({"j": j, "k": list(k), "re": v.real, "im": v.imag}) + "\n")

    @classmethod
    def from_jsonl(cls, path, box: BoxDomain, window: ScaleWindow) -> "CoefficientField":
        out = cls.zeros(box, window)
        for line in Path(path).read_text().splitlines():
            if line.strip():
                r = json.loads(line)
                out.set(r["j"], r["k"], complex(r["re"], r["im"]))
        return out


def lambda_envelopes(lam: CoefficientField, a: float) -> SequenceField:
    """x -> sup_y |Lambda(y, 2^-j)| / (1 + 2^j |x - y|)^a per level."""
    out = {j: peetre_sup(lam.Lambda(j), lam.box, j, a) for j in lam.window.levels}
    return SequenceField(lam.box, lam.window, out)


def coeff_sequence_norm(lam: CoefficientField, scale: str, space: FundamentalSpace,
                        w: WeightModel, tau: float, q: float, a: float) -> float:
    env = lambda_envelopes(lam, a)
    return mixed_norm(env, SCALE_KIND[scale], space, w, tau, q)


# ---------------------------------------------------------------------------
# tau collapse

def estimate_tau_tilde(space: FundamentalSpace, box: BoxDomain, levels=None) -> float:
    """Slope of max_P log2(1/||chi_P||) against n*j over the given levels."""
    if levels is None:
        levels = list(range(1, box.finest_level()))
    ones = np.ones(box.shape)
    ys = []
    for j in levels:
        vals, _ = space.cube_norms(ones, box, j)
        ys.append(math.log2(1.0 / float(vals[vals > 0].min())))
    x = box.dim * np.asarray(levels, float)
    return float(np.polyfit(x, np.asarray(ys), 1)[0])


def tau_collapse_compare(lam: CoefficientField, space: FundamentalSpace, w: WeightModel,
                         tau: float, q: float, a: float, tau_tilde: float | None = None):
    box = lam.box
    if tau_tilde is None:
        tau_tilde = estimate_tau_tilde(space, box)
    if not tau > tau_tilde:
        raise HypothesisError(f"need tau > tau_tilde ({tau} <= {tau_tilde:.4f})")
    env = lambda_envelopes(lam, a)
    lhs = mixed_norm(env, MixKind.Lw_tau_lq, space, w, tau, q)
    wt = derive_weight(w, "tau_collapse", tau=tau, tau_tilde=tau_tilde, dim=box.dim)
    rhs = 0.0
    for j in lam.window.levels:
        rhs = max(rhs, float(np.max(np.abs(wt.on_grid(box, j) * env.levels[j]))))
    return lhs, rhs


# ---------------------------------------------------------------------------
# proper subspace witness

def witness_cube_index(dim: int) -> tuple:
    return (1,) * dim


def proper_subspace_witness(space: FundamentalSpace, w: WeightModel, tau: float, q: float,
                            J: int, box: BoxDomain, a: float):
    """lambda = ||w_j chi_{R_j}||^-1 |R_j|^tau on R_j = Q_{j,(1,..,1)}, j = 0..J."""
    win = ScaleWindow(0, J)
    win.check(box)
    lam = CoefficientField.zeros(box, win)
    n = box.dim
    k = witness_cube_index(n)
    for j in win.levels:
        idx = lam.index_of(j, k)
        labels, _ = cube_labels(box, j)
        chi = (labels == idx).astype(float)
        nrm = space.norm(np.abs(w.on_grid(box, j)) * chi, box)
        lam.coeffs[j][idx] = 2.0 ** (-j * n * tau) / nrm
    env = lambda_envelopes(lam, a)
    b = mixed_norm(env, MixKind.lq_Lw_tau, space, w, tau, q)
    nn = mixed_norm(env, MixKind.lq_NLw_tau, space, w, tau, q)
    return b, nn
