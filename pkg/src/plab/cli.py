"""Batch harness: `plab <command> --config <file> [--out <dir>] [--workers N] [--seed S]`."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import AggregationError, ParameterError, PlabError
from .grid import BoxDomain, ScaleWindow

COMMANDS = ("norm", "equiv", "axioms", "witness", "wavelet", "decompose", "report")

# allowed top-level keys per command (strict schema)
COMMON_KEYS = {"command", "box", "space", "weight", "spec", "battery"}
COMMAND_KEYS = {
    "norm": COMMON_KEYS | {"characterization"},
    "equiv": COMMON_KEYS | {"characterizations", "cap", "char_options"},
    "axioms": {"command", "spaces", "box", "battery", "fit_boxes", "peetre_compat"},
    "witness": {"command", "target", "box", "space", "weight", "spec", "params"},
    "wavelet": COMMON_KEYS | {"presets", "levels", "family"},
    "decompose": COMMON_KEYS | {"ratio_cap"},
    "report": {"command", "inputs", "format"},
}
SPEC_KEYS = {"scale", "tau", "q", "a", "window", "check_peetre"}
WITNESS_TARGETS = ("proper_subspace", "fm_decay", "split_maximal", "tau_collapse")


# ---------------------------------------------------------------------------
# presets

def registry_path() -> Path:
    env = os.environ.get("PLAB_DATA_DIR")
    if env:
        p = Path(env) / "presets.json"
        if not p.is_file():
            raise ParameterError(f"PLAB_DATA_DIR={env} has no presets.json")
        return p
    return Path(str(resources.files("plab") / "data" / "presets.json"))


def load_registry() -> dict:
    reg = json.loads(registry_path().read_text())
    for k in ("boxes", "spaces", "weights", "batteries"):
        reg.setdefault(k, {})
    return reg


def _resolve(reg: dict, section: str, ref):
    """A preset name or an inline parameter block (plain values only)."""
    if isinstance(ref, str):
        if ref not in reg[section]:
            raise ParameterError(f"unknown {section[:-1]} preset {ref!r}; known: {sorted(reg[section])}")
        return dict(reg[section][ref])
    if isinstance(ref, dict):
        for k, v in ref.items():
            if isinstance(v, (dict, list)) and section != "batteries":
                raise ParameterError(f"inline {section[:-1]} parameter {k!r} must be a plain value")
        return dict(ref)
    raise ParameterError(f"{section[:-1]} must be a preset name or a parameter object")


def make_box(cfg: dict) -> BoxDomain:
    extra = set(cfg) - {"dim", "half_width", "samples"}
    if extra:
        raise ParameterError(f"unknown box keys {sorted(extra)}")
    return BoxDomain(int(cfg["dim"]), float(cfg["half_width"]), int(cfg["samples"]))


def _qval(v):
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity"):
            return math.inf
        raise ParameterError(f"expected a number or 'inf', got {v!r}")
    return float(v)


# ---------------------------------------------------------------------------
# job configuration

@dataclass
class JobConfig:
    command: str
    raw: dict
    seed: int = 0
    workers: int = 1
    resolved: dict = field(default_factory=dict)

    def hash(self) -> str:
        blob = json.dumps({"command": self.command, "config": self.resolved, "seed": self.seed},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(command: str, raw: dict, seed: int = 0, workers: int = 1) -> JobConfig:
    if command not in COMMANDS:
        raise ParameterError(f"unknown command {command!r}")
    if not isinstance(raw, dict):
        raise ParameterError("config must be a JSON object")
    if raw.get("command", command) != command:
        raise ParameterError(f"config is for command {raw['command']!r}, not {command!r}")
    extra = set(raw) - COMMAND_KEYS[command]
    if extra:
        raise ParameterError(f"unknown config keys for {command}: {sorted(extra)}")
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    job = JobConfig(command, raw, int(seed), int(workers))
    if command != "report":
        reg = load_registry()
        res = {}
        for key, section in (("box", "boxes"), ("space", "spaces"), ("weight", "weights"),
                             ("battery", "batteries")):
            if key in raw:
                res[key] = _resolve(reg, section, raw[key])
        if "spaces" in raw:
            res["spaces"] = [_resolve(reg, "spaces", s) for s in raw["spaces"]]
        if "fit_boxes" in raw:
            res["fit_boxes"] = {k: _resolve(reg, "boxes", v) for k, v in raw["fit_boxes"].items()}
        if "spec" in raw:
            extra = set(raw["spec"]) - SPEC_KEYS
            if extra:
                raise ParameterError(f"unknown spec keys {sorted(extra)}")
        for k, v in raw.items():
            if k not in res:
                res[k] = v
        res["command"] = command
        job.resolved = res
        validate(job)
    else:
        job.resolved = dict(raw, command=command)
    return job


def build_spec(res: dict):
    from .norms import SpaceSpec
    from .spaces import make_space
    from .weights import make_weight
    box = make_box(res.get("box", load_registry()["boxes"]["pinned_1d"]))
    space = make_space(res.get("space", {"kind": "lebesgue", "p": 2.0}), dim=box.dim)
    w = make_weight(res.get("weight", {"kind": "smoothness", "s": 1.0}))
    sc = dict(res.get("spec", {}))
    win = sc.pop("window", [0, 8])
    kw = {}
    if "q" in sc:
        kw["q"] = _qval(sc["q"])
    for k in ("tau", "a"):
        if k in sc and sc[k] is not None:
            kw[k] = float(sc[k])
    if "check_peetre" in sc:
        kw["check_peetre"] = bool(sc["check_peetre"])
    window = ScaleWindow(int(win[0]), int(win[1]))
    window.check(box)
    spec = SpaceSpec(sc.get("scale", "B"), space, w, window=window, **kw)
    return box, spec


def validate(job: JobConfig) -> None:
    """Reject invalid specs before any work is done."""
    res = job.resolved
    if job.command in ("norm", "equiv", "decompose") or (job.command == "wavelet" and "spec" in res):
        build_spec(res)
    if job.command == "witness":
        t = res.get("target")
        if t not in WITNESS_TARGETS:
            raise ParameterError(f"witness target must be one of {WITNESS_TARGETS}, got {t!r}")
        if t in ("proper_subspace", "tau_collapse"):
            build_spec(res)
    if job.command == "equiv":
        from .norms import CHARACTERIZATIONS
        bad = set(res.get("characterizations", [])) - set(CHARACTERIZATIONS)
        if bad:
            raise ParameterError(f"unknown characterizations {sorted(bad)}")
    if job.command == "axioms" and not res.get("spaces"):
        raise ParameterError("axioms needs a nonempty 'spaces' list")


# ---------------------------------------------------------------------------
# work cells (run in worker processes; each is deterministic and stateless)

_WORKER_CACHE: dict = {}


def _battery(box_cfg: dict, battery_cfg: dict, seed: int):
    from .norms import make_battery
    key = ("battery", json.dumps(box_cfg, sort_keys=True), seed)
    if key not in _WORKER_CACHE:
        _WORKER_CACHE.clear()
        _WORKER_CACHE[key] = dict(make_battery(make_box(box_cfg), seed=seed))
    full = _WORKER_CACHE[key]
    ids = battery_cfg.get("ids", list(full))
    unknown = [i for i in ids if i not in full]
    if unknown:
        raise ParameterError(f"unknown battery members {unknown}")
    return [(i, full[i]) for i in ids]


def _battery_seed(res: dict, seed: int) -> int:
    return int(res.get("battery", {}).get("seed", 0)) + seed


def _cell_equiv(args):
    res, seed, fid, name = args
    from .norms import CharConfig, characterization_norm, default_char_configs, _check_hypotheses
    box, spec = build_spec(res)
    f = dict(_battery(res["box"], res.get("battery", {}), _battery_seed(res, seed)))[fid]
    cc = default_char_configs(spec)[name]
    opts = dict(cc.options, **res.get("char_options", {}).get(name, {}))
    cc = CharConfig(cc.spec_overrides, opts)
    cspec = spec.with_(**cc.spec_overrides) if cc.spec_overrides else spec
    _check_hypotheses(name, cspec, cc.options)
    cache = _WORKER_CACHE.setdefault(("systems", json.dumps(res, sort_keys=True, default=str)), {})
    base = characterization_norm("default", f, cspec, {}, cache)
    val = base if name == "default" else characterization_norm(name, f, cspec, cc.options, cache)
    return {"function_id": fid, "characterization": name, "a": cspec.a, "value": val, "base": base,
            "ratio": val / base if base > 0 else float("nan")}


def _cell_norm(args):
    res, seed, fid = args
    from .norms import characterization_norm
    box, spec = build_spec(res)
    f = dict(_battery(res["box"], res.get("battery", {}), _battery_seed(res, seed)))[fid]
    name = res.get("characterization", "default")
    return {"function_id": fid, "scale": spec.scale, "characterization": name,
            "value": characterization_norm(name, f, spec, {}, {})}


def _cell_axioms(args):
    res, seed, space_cfg = args
    from .norms import make_battery
    from .spaces import make_space, verify_axioms, verify_peetre_compat
    from .weights import make_weight
    box = make_box(res.get("box", load_registry()["boxes"]["small_1d"]))
    space = make_space(space_cfg, dim=box.dim)
    bat = [g for _, g in make_battery(box, seed=seed)]
    fit_cfg = res.get("fit_boxes", {}).get(space.kind)
    rep = verify_axioms(space, bat, fit_box=make_box(fit_cfg) if fit_cfg else None)
    rows = []
    for name, chk in rep.checks.items():
        detail = {k: v for k, v in chk.items() if k != "pass"}
        rows.append({"space": space.kind, "check": name, "pass": bool(chk["pass"]),
                     "detail": json.dumps(detail, sort_keys=True, default=float)})
    pc = res.get("peetre_compat")
    if pc:
        w = make_weight(pc.get("weight", {"kind": "smoothness", "s": 1.0}))
        crep = verify_peetre_compat(space, float(pc.get("r", 1.0)), float(pc.get("R", box.dim + 2.0)), w,
                                    _qval(pc.get("q", 2.0)), bat, cap=float(pc.get("cap", 20.0)), seed=seed)
        rows.append({"space": space.kind, "check": "peetre_compat", "pass": crep.passed,
                     "detail": json.dumps({"worst_single": crep.worst_single,
                                           "worst_vector": crep.worst_vector}, sort_keys=True)})
    return rows


def _cell_wavelet(args):
    res, seed, preset, J = args
    from .wavelets import build_filters, filter_moment_residual, forward_transform, inverse_transform
    box = make_box(res["box"])
    quad = build_filters(preset)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(box.shape)
    from .grid import GridFunction
    g = GridFunction(box, f)
    back = inverse_transform(forward_transform(g, quad, J), quad)
    pr = float(np.max(np.abs(back.values - f)) / np.max(np.abs(f)))
    lo = np.asarray(quad.dec_lo)
    return {"preset": preset, "J": J, "pr_error": pr, "lowpass_sum_error": abs(float(lo.sum()) - math.sqrt(2)),
            "moment_residual": filter_moment_residual(quad), "K": quad.K, "L": quad.L,
            "K_dual": quad.K_dual, "L_dual": quad.L_dual}


def _cell_decompose(args):
    res, seed, fid = args
    from .decompositions import analyze, coeff_norm, domination_constant, synthesize
    from .norms import space_norm
    box, spec = build_spec(res)
    f = dict(_battery(res["box"], res.get("battery", {}), _battery_seed(res, seed)))[fid]
    try:
        lam, blocks = analyze(f, spec)
    except PlabError as exc:
        return {"function_id": fid, "status": type(exc).__name__, "coeff_ratio": float("nan"),
                "synth_ratio": float("nan"), "recon_error": float("nan"), "domination": float("nan"),
                "message": str(exc)}
    g, _ = synthesize(lam, blocks, spec)
    sn = space_norm(f, spec)
    return {"function_id": fid, "status": "ok", "coeff_ratio": coeff_norm(lam, spec) / sn,
            "synth_ratio": space_norm(g, spec) / sn,
            "recon_error": float(np.linalg.norm(g.values - f.values) / np.linalg.norm(f.values)),
            "domination": domination_constant(f, lam, blocks, spec.a), "message": ""}


def _run_cells(fn, cells, workers: int) -> list:
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, cells))  # map preserves canonical order


# ---------------------------------------------------------------------------
# commands

def _default_battery(res: dict) -> dict:
    if "battery" not in res:
        res["battery"] = dict(load_registry()["batteries"]["default"])
    return res


def _default_box(res: dict, name: str = "pinned_1d") -> dict:
    if "box" not in res:
        res["box"] = dict(load_registry()["boxes"][name])
    return res


def run_norm(job: JobConfig):
    res = _default_battery(_default_box(dict(job.resolved)))
    ids = res["battery"]["ids"]
    rows = _run_cells(_cell_norm, [(res, job.seed, i) for i in ids], job.workers)
    return rows, {"n_rows": len(rows)}, {}, True


def run_equiv(job: JobConfig):
    from .norms import CHARACTERIZATIONS
    res = _default_battery(_default_box(dict(job.resolved)))
    chars = list(res.get("characterizations", CHARACTERIZATIONS))
    cap = float(res.get("cap", 10.0))
    box, spec = build_spec(res)
    from .norms import _check_hypotheses, default_char_configs
    errors = {}
    for name in list(chars):
        cc = default_char_configs(spec)[name]
        try:
            cspec = spec.with_(**cc.spec_overrides) if cc.spec_overrides else spec
            _check_hypotheses(name, cspec, cc.options)
        except PlabError as exc:
            errors[name] = str(exc)
            chars.remove(name)
    cells = [(res, job.seed, fid, name) for name in chars for fid in res["battery"]["ids"]]
    rows = _run_cells(_cell_equiv, cells, job.workers)
    spreads = {}
    for name in chars:
        r = np.array([row["ratio"] for row in rows if row["characterization"] == name])
        spreads[name] = float(r.max() / r.min()) if np.all(r > 0) else math.inf
    ok = not errors and all(v <= cap for v in spreads.values())
    plots = {"ratio_vs_function": (["characterization", "function_id", "ratio"],
                                   [[r["characterization"], r["function_id"], r["ratio"]] for r in rows])}
    return rows, {"spreads": spreads, "cap": cap, "hypothesis_errors": errors}, plots, ok


def run_axioms(job: JobConfig):
    res = dict(job.resolved)
    cells = [(res, job.seed, s) for s in res["spaces"]]
    rows = [r for part in _run_cells(_cell_axioms, cells, job.workers) for r in part]
    ok = all(r["pass"] for r in rows)
    failed = [f"{r['space']}:{r['check']}" for r in rows if not r["pass"]]
    return rows, {"failed": failed}, {}, ok


def run_witness(job: JobConfig):
    res = dict(job.resolved)
    t = res["target"]
    p = dict(res.get("params", {}))
    if t == "proper_subspace":
        from .sequences import proper_subspace_witness
        res = _default_box(res)
        box, spec = build_spec(res)
        Js = p.get("J", [2, 4, 6, 8])
        rows = []
        for J in Js:
            b, nn = proper_subspace_witness(spec.space, spec.w, spec.tau, spec.q, int(J), box, spec.a)
            rows.append({"J": int(J), "q": spec.q, "b_norm": b, "n_norm": nn})
        rows.sort(key=lambda r: r["J"])
        ok = all(1 / 3 <= r["b_norm"] <= 3 for r in rows)
        summ = {"q": spec.q}
        if np.isfinite(spec.q) and len(rows) > 1:
            slope = float(np.polyfit(np.log([r["J"] + 1 for r in rows]), np.log([r["n_norm"] for r in rows]), 1)[0])
            summ["n_norm_exponent"] = slope
            ok &= abs(slope - 1 / spec.q) <= 0.1 / spec.q
        plots = {"n_norm_vs_J": (["J", "b_norm", "n_norm"], [[r["J"], r["b_norm"], r["n_norm"]] for r in rows])}
        return rows, summ, plots, bool(ok)
    if t == "fm_decay":
        from .norms import fm_witness
        box = make_box(res["box"]) if "box" in res else None
        rows = []
        for m, a in p.get("pairs", [[1, 3], [3, 1], [2, 2]]):
            rep = fm_witness(int(m), float(a), box=box, p=float(p.get("p", 2.0)))
            rows.append({"m": int(m), "a": float(a), "exponent": rep.exponent, "predicted": rep.predicted,
                         "rel_error": rep.rel_error, "high_ratio": rep.high_ratio,
                         "finite_predicted": rep.finite_predicted})
        ok = all(r["rel_error"] <= 0.05 and r["high_ratio"] <= 1e-8 for r in rows)
        plots = {"fitted_exponent": (["m", "a", "exponent", "predicted"],
                                     [[r["m"], r["a"], r["exponent"], r["predicted"]] for r in rows])}
        return rows, {}, plots, ok
    if t == "split_maximal":
        from .spaces import split_maximal_sweep
        box = make_box(res["box"]) if "box" in res else None
        d = split_maximal_sweep(box, exps=range(int(p.get("k_min", 2)), int(p.get("k_max", 8)) + 1),
                                kind=p.get("kind", "hardy_littlewood"))
        rows = [{"r": r, "f_norm": a, "mf_norm": b, "norm_ratio": c}
                for r, a, b, c in zip(d["r"], d["f_norm"], d["mf_norm"], d["norm_ratio"])]
        rows.sort(key=lambda r: -r["r"])
        summ = {k: d[k] for k in ("slope", "f_slope", "mf_slope", "model_slope", "increasing", "kind")}
        ok = d["increasing"] and abs(d["slope"] + 0.5) <= 0.075
        plots = {"split_maximal": (["r", "norm_ratio", "log2_slope"],
                                   [[r["r"], r["norm_ratio"], d["slope"]] for r in rows])}
        return rows, summ, plots, bool(ok)
    if t == "tau_collapse":
        from .sequences import CoefficientField, estimate_tau_tilde, tau_collapse_compare
        res = _default_box(res)
        box, spec = build_spec(res)
        tt = estimate_tau_tilde(spec.space, box)
        rows = []
        for J in p.get("J", [4, 8]):
            win = ScaleWindow(0, int(J))
            for i in range(int(p.get("fields", 10))):
                rng = np.random.default_rng(job.seed + i)
                lam = CoefficientField.zeros(box, win)
                for j in win.levels:
                    m = len(lam.coeffs[j])
                    lam.coeffs[j] = rng.random(m) * (rng.random(m) < 0.2) * 2.0 ** (-1.5 * j)
                lhs, rhs = tau_collapse_compare(lam, spec.space, spec.w, spec.tau, spec.q, spec.a, tt)
                rows.append({"J": int(J), "field": i, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
        return rows, {"tau_tilde": tt}, {}, True
    raise ParameterError(f"unknown witness target {t!r}")


def run_wavelet(job: JobConfig):
    from .wavelets import FAMILIES
    res = _default_box(dict(job.resolved), "small_1d")
    presets = res.get("presets", FAMILIES[res.get("family", "bior")])
    levels = res.get("levels", [1, 2, 3, 4, 5])
    cells = [(res, job.seed, pr, int(J)) for pr in presets for J in levels]
    rows = _run_cells(_cell_wavelet, cells, job.workers)
    ok = all(r["pr_error"] <= 1e-10 and r["moment_residual"] <= 1e-10 for r in rows)
    return rows, {"worst_pr": max(r["pr_error"] for r in rows)}, {}, ok


def run_decompose(job: JobConfig):
    res = _default_box(dict(job.resolved))
    if "battery" not in res:
        res["battery"] = dict(load_registry()["batteries"]["band_limited"])
    cap = float(res.get("ratio_cap", 3.0))
    rows = _run_cells(_cell_decompose, [(res, job.seed, i) for i in res["battery"]["ids"]], job.workers)
    good = [r for r in rows if r["status"] == "ok"]
    ok = bool(good) and all(1 / cap <= r["synth_ratio"] <= cap for r in good)
    return rows, {"analysed": len(good), "skipped": len(rows) - len(good)}, {}, ok


def run_report(job: JobConfig):
    res = job.resolved
    fmt = res.get("format", "tsv")
    if fmt not in ("tsv", "json", "plotdata"):
        raise ParameterError(f"format must be tsv, json or plotdata, got {fmt!r}")
    records = []
    for path in res.get("inputs", []):
        p = Path(path)
        if p.is_dir():
            p = p / "runs.jsonl"
        if not p.is_file():
            raise ParameterError(f"no run log at {p}")
        records.extend(json.loads(line) for line in p.read_text().splitlines() if line.strip())
    if not records:
        raise ParameterError("report needs at least one input record")
    cmds = {r["command"] for r in records}
    targets = {r["config"].get("target") for r in records}
    if len(cmds) != 1 or len(targets) != 1:
        raise AggregationError(f"cannot merge records of different kinds: {sorted(cmds)} / {sorted(map(str, targets))}")
    rows = [dict(row, config_hash=r["config_hash"]) for r in records for row in r["rows"]]
    if rows and "J" in rows[0]:
        rows.sort(key=lambda r: (r["J"], r["config_hash"]))
    plots = {}
    if fmt == "plotdata" and rows:
        cols = [k for k in rows[0] if k != "config_hash"]
        plots["report"] = (cols, [[r.get(c) for c in cols] for r in rows])
    return rows, {"records": len(records), "format": fmt}, plots, True


RUNNERS = {"norm": run_norm, "equiv": run_equiv, "axioms": run_axioms, "witness": run_witness,
           "wavelet": run_wavelet, "decompose": run_decompose, "report": run_report}


# ---------------------------------------------------------------------------
# outputs

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def rows_to_tsv(rows: list) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    buf = io.StringIO()
    buf.write("\t".join(cols) + "\n")
    for r in rows:
        buf.write("\t".join(_fmt(r.get(c, "")) for c in cols) + "\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class RunRecord:
    timestamp: float
    config_hash: str
    command: str
    config: dict
    seed: int
    rows: list
    summary: dict
    passed: bool
    versions: dict

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.__dict__), sort_keys=True)


def versions() -> dict:
    import scipy
    import pywt
    return {"plab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "pywt": pywt.__version__, "python": sys.version.split()[0]}


def run_job(job: JobConfig, out: Path | None = None) -> RunRecord:
    rows, summary, plots, ok = RUNNERS[job.command](job)
    rec = RunRecord(time.time(), job.hash(), job.command, job.resolved, job.seed, rows, summary,
                    bool(ok), versions())
    if out is not None:
        write_outputs(rec, plots, Path(out))
    return rec


def write_outputs(rec: RunRecord, plots: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.tsv").write_text(rows_to_tsv(rec.rows))
    summ = {"command": rec.command, "config_hash": rec.config_hash, "passed": rec.passed,
            "n_rows": len(rec.rows), "summary": rec.summary}
    (out / "summary.json").write_text(json.dumps(_jsonable(summ), sort_keys=True, indent=2) + "\n")
    with open(out / "runs.jsonl", "a") as fh:
        fh.write(rec.to_json() + "\n")
    if plots:
        pd = out / "plotdata"
        pd.mkdir(exist_ok=True)
        for name, (cols, data) in plots.items():
            with open(pd / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(cols)
                for row in data:
                    w.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# click entry point

def _command(name: str):
    @click.command(name=name, help=f"Run the {name} job described by a JSON config.")
    @click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
    @click.option("--out", "out_dir", default="plab_out", show_default=True, type=click.Path(file_okay=False))
    @click.option("--workers", default=1, show_default=True, type=int)
    @click.option("--seed", default=0, show_default=True, type=int)
    def cmd(config_path, out_dir, workers, seed):
        try:
            raw = json.loads(Path(config_path).read_text())
            job = parse_config(name, raw, seed=seed, workers=workers)
            rec = run_job(job, Path(out_dir))
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"config is not valid JSON: {exc}")
        except PlabError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}")
        click.echo(f"{name}: {len(rec.rows)} rows, {'PASS' if rec.passed else 'FAIL'}, wrote {out_dir}")
        sys.exit(0 if rec.passed else 1)
    return cmd


@click.group()
@click.version_option(__version__, prog_name="plab")
def main():
    """Numerical checks of smoothness spaces built on a general quasi-normed lattice."""


for _name in COMMANDS:
    main.add_command(_command(_name))


if __name__ == "__main__":
    main()
