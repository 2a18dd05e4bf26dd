"""Weights w(x, 2^-j) and empirical class certification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .grid import BoxDomain, ScaleWindow


@dataclass(frozen=True)
class WeightModel:
    """w_j(x) = 2^(j * scale_exp) * c(j) * (1 + |x|)^spatial_exp.

    ``c(j)`` is an optional named slowly varying factor ("sqrt_log" gives
    sqrt(|j| + 1)).  The declared class (alpha1, alpha2, alpha3) and the star
    flag travel with the model and are updated by ``derive_weight``.
    """
    scale_exp: float = 0.0
    spatial_exp: float = 0.0
    slow: str = ""
    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    star: bool = False
    homogeneous: bool = False
    name: str = "constant"

    def level_factor(self, j: int) -> float:
        v = 2.0 ** (j * self.scale_exp)
        if self.slow == "sqrt_log":
            v *= math.sqrt(abs(j) + 1.0)
        return v

    def at(self, x, j: int):
        """Evaluate at points x (array of shape (..., n) or a list of coordinate arrays)."""
        if isinstance(x, (list, tuple)):
            r = np.sqrt(sum(np.asarray(c, float) ** 2 for c in x))
        else:
            x = np.asarray(x, float)
            r = np.abs(x) if x.ndim <= 1 else np.linalg.norm(x, axis=-1)
        v = self.level_factor(j)
        if self.spatial_exp:
            return v * (1.0 + r) ** self.spatial_exp
        return v * np.ones_like(r)

    def on_grid(self, box: BoxDomain, j: int):
        """Grid values, or a scalar when the weight does not depend on x."""
        if self.spatial_exp == 0.0:
            return self.level_factor(j)
        return self.level_factor(j) * (1.0 + box.radius()) ** self.spatial_exp

    @property
    def x_dependent(self) -> bool:
        return self.spatial_exp != 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def smoothness_weight(s: float, star: bool | None = None) -> WeightModel:
    """w_j = 2^(js); star class when s >= 0 unless told otherwise."""
    if star is None:
        star = s >= 0
    if star:
        if s < 0:
            raise ParameterError("2^(js) is star class only for s >= 0")
        return WeightModel(s, 0.0, "", s, s, 0.0, True, False, f"smoothness({s:g})")
    return WeightModel(s, 0.0, "", max(0.0, -s), max(0.0, s), 0.0, False, False,
                       f"smoothness({s:g})")


def yoneda_weight() -> WeightModel:
    """w_j = 2^-j sqrt(|j| + 1)."""
    return WeightModel(-1.0, 0.0, "sqrt_log", 1.0, 0.0, 0.0, False, False, "yoneda")


def spatial_weight(s: float, eps: float) -> WeightModel:
    """w_j(x) = 2^(js) (1 + |x|)^eps."""
    return WeightModel(s, eps, "", max(0.0, -s), max(0.0, s), abs(eps), False, False,
                       f"spatial({s:g},{eps:g})")


WEIGHT_PRESETS = {
    "smoothness": smoothness_weight,
    "yoneda": yoneda_weight,
    "spatial": spatial_weight,
    "constant": lambda: smoothness_weight(0.0),
}


def make_weight(cfg: dict) -> WeightModel:
    cfg = dict(cfg)
    kind = cfg.pop("kind", "constant")
    if kind not in WEIGHT_PRESETS:
        raise ParameterError(f"unknown weight preset {kind!r}")
    try:
        return WEIGHT_PRESETS[kind](**cfg)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for weight {kind}: {exc}") from None


def _shift_scale(w: WeightModel, t: float, name: str, extra_alpha3: float = 0.0,
                 extra_spatial: float = 0.0) -> WeightModel:
    """Multiply w_j by 2^(jt) and update the declared class."""
    if w.star:
        a1 = w.alpha1 + t
        if a1 >= 0:
            a1, a2, star = a1, w.alpha2 + t, True
        else:
            a1, a2, star = -a1, max(w.alpha2 + t, 0.0), False
    else:
        a1, a2, star = max(w.alpha1 - t, 0.0), max(w.alpha2 + t, 0.0), False
    return replace(w, scale_exp=w.scale_exp + t, spatial_exp=w.spatial_exp + extra_spatial,
                   alpha1=a1, alpha2=a2, alpha3=w.alpha3 + extra_alpha3, star=star, name=name)


def derive_weight(w: WeightModel, kind: str, **p) -> WeightModel:
    if kind == "lift":
        s = float(p["s"])
        if s == 0:
            return w
        return _shift_scale(w, -s, f"lift({s:g})[{w.name}]")
    if kind == "sobolev":
        tau, gam, dl = float(p["tau"]), float(p["gamma"]), float(p["delta"])
        return _shift_scale(w, tau - gam, f"sobolev[{w.name}]", abs(dl), dl)
    if kind == "tau_collapse":
        tau, tt, n = float(p["tau"]), float(p["tau_tilde"]), int(p.get("dim", 1))
        if tau == tt:
            return w
        return _shift_scale(w, n * (tau - tt), f"tau_collapse[{w.name}]")
    raise ParameterError(f"unknown derivation {kind!r}")


@dataclass
class WeightReport:
    C_W1: float
    C_W2: float
    cap: float
    declared: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.C_W1) and np.isfinite(self.C_W2)
                    and self.C_W1 <= self.cap and self.C_W2 <= self.cap)


def check_weight_class(w: WeightModel, window: ScaleWindow, box: BoxDomain,
                       cap: float = 100.0, n_points: int = 33) -> WeightReport:
    """Smallest constants C for (W1)/(W1*) and (W2) over a deterministic sample."""
    n = box.dim
    t = np.linspace(-box.half_width, box.half_width, n_points)
    if n == 1:
        pts = t[:, None]
    else:
        a, b = np.meshgrid(t[::4], t[::4], indexing="ij")
        pts = np.stack([a.ravel(), b.ravel()], axis=1)
    levels = list(window.levels)
    vals = {j: np.atleast_1d(w.at(pts, j)).astype(float) for j in levels}
    c1 = 1.0
    for j in levels:
        for nu in levels:
            if nu > j:
                continue
            d = j - nu
            lower = 2.0 ** (d * w.alpha1) if w.star else 2.0 ** (-d * w.alpha1)
            upper = 2.0 ** (d * w.alpha2)
            r = vals[j] / vals[nu]
            c1 = max(c1, float(np.max(lower / r)), float(np.max(r / upper)))
    c2 = 1.0
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    for j in levels:
        v = vals[j]
        ratio = v[:, None] / (v[None, :] * (1.0 + 2.0 ** j * dist) ** w.alpha3)
        c2 = max(c2, float(np.max(ratio)))
    return WeightReport(c1, c2, cap, (w.alpha1, w.alpha2, w.alpha3, w.star))
