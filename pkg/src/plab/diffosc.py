"""Iterated differences, local polynomial oscillations and the norms built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DegenerateBallError, HypothesisError, ParameterError
from .grid import BoxDomain, GridFunction, ScaleWindow, ball_mask_offsets
from .kernels import peetre_sup
from .sequences import SequenceField, cube_levels, mixed_norm

SOLVER_TOL = 1e-9
SOLVER_MAXITER = 500


@dataclass(frozen=True)
class DiffOscConfig:
    M: int = 2
    u: float = 2.0
    C: float = 1.0
    a: float = 0.75

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError("M must be an integer >= 1")
        if not (self.u >= 1):
            raise ParameterError("u must lie in [1, inf]")
        if not self.C > 0:
            raise ParameterError("ball constant must be positive")
        if not self.a > 0:
            raise ParameterError("a must be positive")


def check_admissible(spec, cfg: DiffOscConfig) -> None:
    w = spec.w
    need = max(w.alpha1, cfg.a + spec.dim * spec.tau + w.alpha2)
    if not w.star:
        raise HypothesisError("difference/oscillation characterizations need a star-class weight")
    if not cfg.M > need:
        raise HypothesisError(f"difference order too small: need M > alpha1 v (a + n tau + alpha2) "
                              f"= {need:g}, got M = {cfg.M}")
    if not cfg.a < w.alpha1 < cfg.M:
        raise HypothesisError(f"need alpha1 in (a, M): alpha1 = {w.alpha1:g}, a = {cfg.a:g}, M = {cfg.M}")


# ---------------------------------------------------------------------------
# differences

def _grid_steps(box: BoxDomain, h) -> tuple:
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != (box.dim,):
        raise ParameterError(f"h must have {box.dim} components")
    steps = h / box.h
    r = np.round(steps)
    if np.any(np.abs(steps - r) > 1e-9):
        raise AlignmentError(f"shift {tuple(h)} is not a multiple of the grid spacing {box.h}")
    return tuple(int(v) for v in r)


def _shift(values, steps):
    """values(x - steps * h) on the periodic grid."""
    return np.roll(values, steps, axis=tuple(range(len(steps))))


def iterated_difference(f: GridFunction, h, M: int) -> GridFunction:
    """Delta_h^M f with Delta_h f = f - f(. - h), applied M times."""
    if M < 1:
        raise ParameterError("M must be >= 1")
    steps = _grid_steps(f.domain, h)
    v = f.values
    for _ in range(M):
        v = v - _shift(v, steps)
    return GridFunction(f.domain, v)


def binomial_difference(f: GridFunction, h, M: int) -> GridFunction:
    steps = _grid_steps(f.domain, h)
    out = np.zeros_like(f.values)
    for k in range(M + 1):
        out = out + (-1) ** k * math.comb(M, k) * _shift(f.values, tuple(k * s for s in steps))
    return GridFunction(f.domain, out)


def _ball_ok(box: BoxDomain, r: float) -> bool:
    return len(ball_mask_offsets(box, r)) >= 3 ** box.dim


def difference_field(f: GridFunction, r: float, M: int, u: float) -> np.ndarray:
    """x -> (mean over grid h with |h| <= r of |Delta_h^M f(x)|^u)^(1/u)."""
    box = f.domain
    offs = ball_mask_offsets(box, r)
    if len(offs) < 3 ** box.dim:
        raise DegenerateBallError(f"ball of radius {r} holds fewer than {3 ** box.dim} grid points")
    coef = [(-1) ** k * math.comb(M, k) for k in range(M + 1)]
    acc = np.zeros(box.shape)
    for o in offs:
        d = np.zeros_like(f.values)
        for k, c in enumerate(coef):
            d = d + c * _shift(f.values, tuple(int(k * s) for s in o))
        a = np.abs(d)
        if np.isinf(u):
            acc = np.maximum(acc, a)
        else:
            acc += a ** u
    return acc if np.isinf(u) else (acc / len(offs)) ** (1.0 / u)


# ---------------------------------------------------------------------------
# oscillations

def _monomial_exponents(n: int, M: int) -> list:
    """Exponents of the monomials of degree < M."""
    out = []
    for d in range(M):
        if n == 1:
            out.append((d,))
        else:
            out.extend((d - i, i) for i in range(d, -1, -1))
    return out


def _design(offs: np.ndarray, h: float, r: float, M: int) -> np.ndarray:
    t = offs * h / r  # rescaled to the unit ball for conditioning
    cols = []
    for e in _monomial_exponents(offs.shape[1], M):
        col = np.ones(len(offs))
        for k, p in enumerate(e):
            col = col * t[:, k] ** p
        cols.append(col)
    return np.stack(cols, axis=1)


def _lp_fit(y: np.ndarray, A: np.ndarray, u: float) -> np.ndarray:
    """Batched min_c ||y - A c||_u over rows of y (mean-normalised residual)."""
    pinv = np.linalg.pinv(A)
    c = y @ pinv.T
    res = y - c @ A.T
    if u == 2:
        return np.sqrt(np.mean(np.abs(res) ** 2, axis=1))

    def objective(r):
        a = np.abs(r)
        return a.max(axis=1) if np.isinf(u) else np.mean(a ** u, axis=1) ** (1.0 / u)

    best = objective(res)
    scale = np.maximum(np.abs(y).max(axis=1), 1e-300)
    eps = 1e-12 * scale[:, None]
    lw = np.ones_like(res, dtype=float) / A.shape[0]  # Lawson weights for u = inf
    prev = best.copy()
    for _ in range(SOLVER_MAXITER):
        a = np.abs(res)
        if np.isinf(u):
            lw = lw * a
            lw /= np.maximum(lw.sum(axis=1, keepdims=True), 1e-300)
            wts = lw + 1e-15
        else:
            wts = np.maximum(a, eps) ** (u - 2.0)
        G = np.einsum("pt,tk,tl->pkl", wts, A, A)
        b = np.einsum("pt,pt,tk->pk", wts, y, A)
        try:
            c = np.linalg.solve(G, b[..., None])[..., 0]
        except np.linalg.LinAlgError:
            c = np.einsum("pkl,pl->pk", np.linalg.pinv(G), b)
        res = y - c @ A.T
        obj = objective(res)
        best = np.minimum(best, obj)
        change = np.abs(prev - obj) / np.maximum(np.abs(obj), 1e-300)
        prev = obj
        if np.all(change <= SOLVER_TOL):
            break
    return best


def oscillation(f: GridFunction, x, t: float, M: int, u: float) -> float:
    """inf over polynomials P of degree < M of (mean over B(x,t) of |f - P|^u)^(1/u)."""
    box = f.domain
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coords = box.coords()
    d2 = sum((c - xi) ** 2 for c, xi in zip(coords, x))
    mask = d2 <= (t * (1 + 1e-12)) ** 2
    npoly = len(_monomial_exponents(box.dim, M))
    if mask.sum() < npoly:
        raise DegenerateBallError(f"ball holds {int(mask.sum())} grid points, need {npoly}")
    pts = np.stack([c[mask] - xi for c, xi in zip(coords, x)], axis=1)
    A = _design(pts / box.h, box.h, t, M)
    y = f.values[mask][None, :]
    return float(_lp_fit(y, A, u)[0])


def oscillation_field(f: GridFunction, r: float, M: int, u: float, chunk: int = 4096) -> np.ndarray:
    """osc_u^M f(x, r) at every grid point (periodic balls)."""
    box = f.domain
    offs = ball_mask_offsets(box, r)
    A = _design(offs, box.h, r, M)
    if len(offs) < max(A.shape[1], 3 ** box.dim):
        raise DegenerateBallError(f"ball of radius {r} holds too few grid points")
    N = box.samples_per_axis
    if u == 2:
        # normal equations through FFT correlations
        G = A.T @ A
        Ginv = np.linalg.inv(G)
        F = np.fft.fftn(f.values)
        b = []
        for k in range(A.shape[1]):
            ker = np.zeros(box.shape)
            idx = tuple((offs[:, i] % N) for i in range(box.dim))
            np.add.at(ker, idx, A[:, k])
            b.append(np.fft.ifftn(F * np.conj(np.fft.fftn(ker))))
        b = np.stack(b, axis=-1)
        ker = np.zeros(box.shape)
        np.add.at(ker, tuple((offs[:, i] % N) for i in range(box.dim)), 1.0)
        s2 = np.fft.ifftn(np.fft.fftn(np.abs(f.values) ** 2) * np.conj(np.fft.fftn(ker))).real
        proj = np.einsum("...k,kl,...l->...", np.conj(b), Ginv, b).real
        return np.sqrt(np.maximum(s2 - proj, 0.0) / len(offs))
    flat = f.values.reshape(-1)
    grid_idx = np.indices(box.shape).reshape(box.dim, -1).T
    out = np.empty(flat.shape[0])
    for s in range(0, flat.shape[0], chunk):
        gi = grid_idx[s:s + chunk]
        nb = (gi[:, None, :] + offs[None, :, :]) % N
        lin = np.ravel_multi_index(tuple(nb[..., i] for i in range(box.dim)), box.shape)
        out[s:s + chunk] = _lp_fit(flat[lin], A, u)
    return out.reshape(box.shape)


# ---------------------------------------------------------------------------
# norms

def j_functional(f: GridFunction, spec, a: float, restricted: bool) -> float:
    """sup over cubes (|P| >= 1 when restricted) of |P|^-tau ||chi_P w_0 sup_y |f(.+y)|/(1+|y|)^a||."""
    box = f.domain
    env = np.abs(spec.w.on_grid(box, 0)) * peetre_sup(f.values, box, 0, a)
    n = box.dim
    lo = box.covering_level()
    top = 0 if restricted else box.finest_level()
    levels = [min(lo, top)] if spec.tau == 0 else list(range(min(lo, top), top + 1))
    best = 0.0
    for l in levels:
        vals, _ = spec.space.cube_norms(env, box, l)
        best = max(best, float(vals.max()) * 2.0 ** (l * n * spec.tau))
    return best


def _level_fields(f: GridFunction, spec, cfg: DiffOscConfig, builder) -> SequenceField:
    box = f.domain
    levels = {}
    for j in spec.window.levels:
        r = cfg.C * 2.0 ** (-j)
        if not _ball_ok(box, r):
            break
        levels[j] = peetre_sup(builder(r), box, j, cfg.a)
    if not levels:
        raise DegenerateBallError("no level has a usable ball at this resolution")
    win = ScaleWindow(spec.window.j_min, max(levels))
    return SequenceField(box, win, levels)


def _combine(f, spec, cfg, G) -> float:
    restricted = spec.scale in ("B", "F")
    J = j_functional(f, spec, cfg.a, restricted)
    return J + mixed_norm(G, spec.kind, spec.space, spec.w, spec.tau, spec.q)


def difference_norm(f: GridFunction, spec, cfg: DiffOscConfig) -> float:
    check_admissible(spec, cfg)
    G = _level_fields(f, spec, cfg, lambda r: difference_field(f, r, cfg.M, cfg.u))
    return _combine(f, spec, cfg, G)


def oscillation_norm(f: GridFunction, spec, cfg: DiffOscConfig) -> float:
    check_admissible(spec, cfg)
    G = _level_fields(f, spec, cfg, lambda r: oscillation_field(f, r, cfg.M, cfg.u))
    return _combine(f, spec, cfg, G)
