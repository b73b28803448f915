"""Config-driven experiment runner.

    python -m localtimes --config run.yaml [--seed N] [--out DIR] [--threads N] [--verbose]
    python -m localtimes runs DIR

Every run writes its reports into ``OUT/<experiment>-<hash>/`` and appends
one record to ``OUT/runs/``. Numbers are written with the shortest
round-trip representation, so identical (config, seed) pairs reproduce
identical files whatever the thread count.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import __version__, analytics, gaussian, laws, localtime, rosenblatt, sde
from .core import HypothesisViolation, ProcessSpec, RngStream, make_grid
from .processes import PathSampler

log = logging.getLogger("localtimes")

EXIT_OK, EXIT_CONFIG, EXIT_FAILED, EXIT_INTERNAL = 0, 1, 2, 3

EXPERIMENTS = ("simulate", "localtime", "moments", "scaling", "chung", "tails", "lnd", "charfn",
               "analytics", "berman", "sde-convergence")

_num_list = {"type": "array", "items": {"type": "number"}}
_int_list = {"type": "array", "items": {"type": "integer"}}
_interval = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_point = {"oneOf": [{"type": "number"}, _num_list]}

PARAM_SCHEMAS = {
    "simulate": {},
    "localtime": {"window": _interval, "bins": {"oneOf": [{"type": "integer"}, _int_list]},
                  "fourier_points": {"type": "array"}, "identity_test": {"enum": ["gaussian", "one", "linear"]}},
    "moments": {"x": _point, "n_list": _int_list, "lag_list": _num_list, "shifted": {"type": "boolean"},
                "start": {"type": "number"}, "space_offsets": _num_list, "gamma": {"type": "number"},
                "window": _interval},
    "scaling": {"center": {"type": "number"}, "levels": _int_list},
    "chung": {"centers": _num_list, "levels": _int_list},
    "tails": {"interval": _interval, "u_grid": _num_list, "x": _point, "shifted": {"type": "boolean"},
              "fit_from": {"type": "number"}},
    "lnd": {"m_max": {"type": "integer", "minimum": 1}, "trials": {"type": "integer", "minimum": 1}},
    "charfn": {"partition": _num_list, "frequencies": {"type": "array"}, "samples": {"type": "integer"}},
    "analytics": {"k_max": {"type": "integer", "minimum": 1}, "enumeration_k": {"type": "integer", "minimum": 1},
                  "sharpness_k": _int_list, "delta": {"type": "number"}, "beta_draws": {"type": "integer"},
                  "simplex_thetas": {"type": "array"}, "simplex_samples": {"type": "integer"},
                  "gamma_n_max": {"type": "integer"}, "gamma_beta": {"type": "number"}},
    "berman": {"levels": {"type": "integer", "minimum": 3}, "horizon": {"type": "number"}},
    "sde-convergence": {"fields": {"enum": sorted(sde.CATALOG)}, "field_params": {"type": "object"},
                        "x0": _point, "levels": _int_list, "scheme": {"enum": [sde.EULER_YOUNG, sde.MILSTEIN2]},
                        "closed_form": {"enum": ["geometric", "none"]}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "process": {
            "type": "object",
            "additionalProperties": False,
            "required": ["class"],
            "properties": {
                "class": {"enum": ["fbm", "gaussian-quasi-helix", "rosenblatt", "fbm-sde"]},
                "d": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "theta": {"type": "number", "minimum": 0},
                "iota": {"type": "number", "minimum": 0, "maximum": 1},
                "params": {"type": "object"},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_start": {"type": "number", "minimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "n_steps": {"type": "integer", "minimum": 1},
            },
        },
        "estimator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bin_c": {"type": "number", "exclusiveMinimum": 0},
                "cutoff": {"type": "number", "exclusiveMinimum": 0},
                "freq_step": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "replicas": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "params": {"type": "object"},
    },
}

LOCAL_TIME_EXPERIMENTS = {"localtime", "moments", "scaling", "tails", "berman"}


class ConfigError(ValueError):
    pass


class ExperimentFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        cfg = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: cannot parse config: {exc}") from exc
    return validate_config(cfg)


def _path_str(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def validate_config(cfg) -> dict:
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(f"{_path_str(e.absolute_path)}: {e.message}" for e in errors))
    exp = cfg["experiment"]
    ps = {"type": "object", "additionalProperties": False, "properties": PARAM_SCHEMAS[exp]}
    errors = list(jsonschema.Draft202012Validator(ps).iter_errors(cfg.get("params", {})))
    if errors:
        raise ConfigError("; ".join(f"params/{_path_str(e.absolute_path)}: {e.message}" for e in errors))
    if exp not in ("analytics",) and "process" not in cfg:
        raise ConfigError(f"process: required for experiment {exp!r}")
    return cfg


def config_hash(cfg: dict) -> str:
    """sha256 of the canonical JSON form, output location excluded."""
    c = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(json.dumps(c, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def build_spec(cfg: dict) -> ProcessSpec:
    p = cfg["process"]
    try:
        return ProcessSpec(kind=p["class"], d=p.get("d", 1), alpha=p.get("alpha", 0.5), theta=p.get("theta"),
                           iota=p.get("iota"), params=p.get("params", {}))
    except ValueError as exc:
        raise ConfigError(f"process: {exc}") from exc


def build_grid(cfg: dict):
    g = cfg.get("grid", {})
    try:
        return make_grid(g.get("t_start", 0.0), g.get("t_end", 1.0), g.get("n_steps", 1 << 12))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if math.isfinite(f) else repr(f)
    if hasattr(o, "to_dict"):
        return _jsonable(o.to_dict())
    return o


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Experiments; each returns (files {name: text}, summary dict with "passed")
# ---------------------------------------------------------------------------


@dataclass
class Context:
    cfg: dict
    seed: int
    threads: int

    @property
    def params(self) -> dict:
        return self.cfg.get("params", {})

    @property
    def est(self) -> dict:
        return self.cfg.get("estimator", {})

    @property
    def replicas(self) -> int:
        return int(self.cfg.get("replicas", 1))

    def stream(self, *ids) -> RngStream:
        return RngStream(self.seed, (EXPERIMENTS.index(self.cfg["experiment"]),) + ids)


def _scaling_csv(rep) -> str:
    rows = zip(rep.scale, rep.stat, rep.normalizer, rep.ratios)
    return table_csv(["radius", "statistic", "normalizer", "ratio"], rows)


def exp_simulate(ctx: Context):
    spec, grid = build_spec(ctx.cfg), build_grid(ctx.cfg)
    X = PathSampler(spec, grid).sample(ctx.stream(), ctx.replicas, threads=ctx.threads)
    t = grid.points
    rows = ([i, t[k], *X[i, k]] for i in range(X.shape[0]) for k in range(X.shape[1]))
    header = ["replica", "t"] + [f"x{j + 1}" for j in range(spec.d)]
    summary = {"claim": "sample-paths", "passed": True, "replicas": ctx.replicas,
               "terminal_mean": X[:, -1].mean(axis=0), "terminal_var": X[:, -1].var(axis=0)}
    return {"paths.csv": table_csv(header, rows)}, summary


def exp_localtime(ctx: Context):
    spec, grid = build_spec(ctx.cfg), build_grid(ctx.cfg)
    spec.require_local_time()
    path = PathSampler(spec, grid).path(ctx.stream())
    p = ctx.params
    window = p.get("window", [grid.t_start, grid.t_end])
    bins = p.get("bins")
    field = localtime.occupation_histogram(path, window, bins=bins, bin_c=ctx.est.get("bin_c", 2.0),
                                           alpha=spec.alpha)
    # test functions receive the components on axis 0 when d > 1
    def comp(x):
        return np.asarray(x, dtype=float).reshape((spec.d, -1) if spec.d > 1 else (1, -1))

    g = {"gaussian": lambda x: np.exp(-np.sum(comp(x) ** 2, axis=0)).reshape(np.shape(x)[spec.d > 1:]),
         "one": lambda x: np.ones(np.shape(x)[spec.d > 1:]),
         "linear": lambda x: np.sum(comp(x), axis=0).reshape(np.shape(x)[spec.d > 1:])}[p.get("identity_test", "gaussian")]
    ident = localtime.occupation_identity_check(path, field, g)
    fourier = []
    cutoff = ctx.est.get("cutoff")
    for x in p.get("fourier_points", []):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = cutoff or 6.0 / float(np.min(field.box.widths))
        val = localtime.fourier_localtime(path, window, x, c, ctx.est.get("freq_step"), alpha=spec.alpha)
        fourier.append({"x": x, "cutoff": c, "value": val})
    agreement = localtime.fourier_histogram_agreement(path, field, cutoff, nodes=8 if spec.d == 1 else 4)
    mass_err = abs(field.total_mass - (window[1] - window[0])) / (window[1] - window[0])
    passed = bool((not field.contained) or mass_err <= 1e-6)
    summary = {"claim": "occupation-density", "passed": passed, "metadata": field.metadata(),
               "mass_relative_error": mass_err, "occupation_identity_error": ident, "fourier": fourier,
               "fourier_histogram_agreement": agreement}
    return {"field.csv": field.to_csv()}, summary


def exp_moments(ctx: Context):
    spec = build_spec(ctx.cfg)
    g = ctx.cfg.get("grid", {})
    p = ctx.params
    n_steps, T = g.get("n_steps", 1 << 14), g.get("t_end", 1.0)
    if "space_offsets" in p:
        rep = laws.holder_increment_scan(spec, p.get("x", 0.0), p["space_offsets"], p.get("gamma", 0.0),
                                         p.get("window", [0.0, T]), ctx.replicas, ctx.stream(), n_steps=n_steps,
                                         bin_c=ctx.est.get("bin_c", 2.0), threads=ctx.threads)
    else:
        lags = p.get("lag_list", [T * 2.0**-k for k in range(6)])
        rep = laws.moment_scan(spec, p.get("x", 0.0), p.get("n_list", [1, 2]), lags, ctx.replicas, ctx.stream(),
                               n_steps=n_steps, T=T, start=p.get("start", 0.0), shifted=p.get("shifted", False),
                               bin_c=ctx.est.get("bin_c", 2.0), threads=ctx.threads)
    return {"moments.csv": rep.to_csv()}, {"claim": rep.claim, "passed": rep.all_passed, "report": rep}


def exp_scaling(ctx: Context):
    spec = build_spec(ctx.cfg)
    g = ctx.cfg.get("grid", {})
    p = ctx.params
    lv = p.get("levels", [2, 7])
    rep = laws.limsup_ratio_scan(spec, p.get("center", 0.5), range(lv[0], lv[-1] + 1), ctx.replicas, ctx.stream(),
                                 n_steps=g.get("n_steps", 1 << 16), T=g.get("t_end", 1.0),
                                 bin_c=ctx.est.get("bin_c", 2.0), threads=ctx.threads)
    return {"scaling.csv": _scaling_csv(rep)}, {"claim": rep.claim, "passed": rep.passed, "report": rep}


def exp_chung(ctx: Context):
    spec = build_spec(ctx.cfg)
    g = ctx.cfg.get("grid", {})
    p = ctx.params
    lv = p.get("levels", [2, 9])
    rep = laws.chung_ratio_scan(spec, p.get("centers", [0.25, 0.5, 0.75]), range(lv[0], lv[-1] + 1), ctx.replicas,
                                ctx.stream(), n_steps=g.get("n_steps", 1 << 14), T=g.get("t_end", 1.0),
                                threads=ctx.threads)
    return {"chung.csv": _scaling_csv(rep)}, {"claim": rep.claim, "passed": rep.passed, "report": rep}


def exp_tails(ctx: Context):
    spec = build_spec(ctx.cfg)
    g = ctx.cfg.get("grid", {})
    p = ctx.params
    rep = laws.tail_probe(spec, p.get("interval", [0.0, g.get("t_end", 1.0)]), p.get("u_grid", list(range(0, 11))),
                          ctx.replicas, ctx.stream(), x=p.get("x", 0.0), shifted=p.get("shifted", False),
                          n_steps=g.get("n_steps", 1 << 12), bin_c=ctx.est.get("bin_c", 2.0),
                          fit_from=p.get("fit_from", 1.0), threads=ctx.threads)
    return {"tails.csv": rep.to_csv()}, {"claim": rep.claim, "passed": rep.passed, "report": rep}


def _gaussian_cov(spec: ProcessSpec, T: float):
    if spec.kind == "fbm":
        return gaussian.fbm_spec(spec.alpha)
    if spec.kind == "gaussian-quasi-helix":
        p = spec.params
        return gaussian.fbm_mixture_spec(spec.alpha, p.get("H2", min(0.5 * (spec.alpha + 1), 0.95)),
                                         p.get("weight", 1.0), T)
    raise ConfigError(f"process: experiment needs a Gaussian process, got {spec.kind!r}")


def exp_lnd(ctx: Context):
    spec = build_spec(ctx.cfg)
    cov = _gaussian_cov(spec, build_grid(ctx.cfg).t_end)
    p = ctx.params
    rep = gaussian.check_lnd(cov, spec.d, p.get("m_max", 6), p.get("trials", 1000), ctx.stream(),
                             T=build_grid(ctx.cfg).t_end)
    passed = rep.min_ratio > 0
    return {}, {"claim": "gaussian-local-nondeterminism", "passed": bool(passed), "report": rep}


def exp_charfn(ctx: Context):
    spec, grid = build_spec(ctx.cfg), build_grid(ctx.cfg)
    p = ctx.params
    part = np.asarray(p.get("partition", [grid.t_start, grid.t_end]), dtype=float)
    freqs = [np.asarray(f, dtype=float) for f in p.get("frequencies", [[1.0] * (part.size - 1)])]
    n = int(p.get("samples", 10**5))
    sampler = PathSampler(spec, grid)
    idx = [grid.index(t) for t in part]
    block = 1 << 12
    incs = []
    for s0, X in sampler.sample_batches(ctx.stream(), n, block, ctx.threads):
        incs.append(np.diff(X[:, idx], axis=1))  # (b, m, d)
    D = np.concatenate(incs)
    rows, ok = [], True
    for f in freqs:
        f = f.reshape(part.size - 1, -1) * np.ones((1, spec.d))
        if spec.kind == "rosenblatt":
            theory = rosenblatt.rosenblatt_charfn_bound(sampler.kernel, part, f[:, 0]).value
        else:
            theory = gaussian.gaussian_charfn(_gaussian_cov(spec, grid.t_end), spec.d, part, f)
        ph = np.einsum("nmd,md->n", D, f)
        c, s = np.cos(ph), np.sin(ph)
        mc = math.hypot(c.mean(), s.mean())
        # delta method for |mean of exp(i phase)|
        se = math.sqrt(max(((c.mean() * c + s.mean() * s) / max(mc, 1e-300)).var(ddof=1), 0.0) / n)
        z = abs(mc - theory) / se if se > 0 else 0.0
        ok &= z <= 3
        rows.append([" ".join(repr(float(v)) for v in f.ravel()), theory, mc, se, z])
    text = table_csv(["frequency", "theory", "monte_carlo", "std_error", "z"], rows)
    return {"charfn.csv": text}, {"claim": "increment-charfn", "passed": bool(ok), "samples": n}


def exp_analytics(ctx: Context):
    p = ctx.params
    rng = ctx.stream()
    table = analytics.alpha_table(p.get("k_max", 12))
    enum = analytics.check_alpha_against_enumeration(table, p.get("enumeration_k", min(12, table.k_max)))
    bound = table.bound_ok()
    sharp = analytics.alpha_sharpness_probe(p.get("sharpness_k", list(range(8, min(20, table.k_max) + 1))),
                                            p.get("delta", 0.5))
    g = rng.child(0).generator()
    betas = []
    for _ in range(int(p.get("beta_draws", 100))):
        a, b, t = g.uniform(-0.95, 2.0), g.uniform(-0.95, 2.0), g.uniform(0.1, 5.0)
        betas.append(analytics.beta_identity_check(a, b, t)["rel_diff"])
    simplex = []
    for j, th in enumerate(p.get("simplex_thetas", [[0.0], [0.0, 0.0], [-0.3, -0.3, -0.3], [0.2, -0.4, 0.5, -0.1]])):
        simplex.append(analytics.simplex_integral_check(th, 0.0, 1.0, p.get("simplex_samples", 10**5),
                                                        rng.child(1, j)))
    gam = analytics.gamma_ratio_bound_check(range(1, p.get("gamma_n_max", 200) + 1), p.get("gamma_beta", 0.5))
    checks = {
        "enumeration_oracle": enum["passed"],
        "k_pow_k_bound": all(bound.values()),
        "sharpness_lower_bound": sharp["all_hold"],
        "beta_identity": max(betas) < 1e-8,
        "simplex": all(s["z"] <= 3 for s in simplex),
        "gamma_ratio": gam["passed"],
    }
    summary = {"claim": "analytic-identities", "passed": all(checks.values()), "checks": checks,
               "enumeration": enum, "minimal_constants": table.minimal_constant(), "sharpness": sharp,
               "beta_max_rel_diff": max(betas), "simplex": simplex, "gamma_ratio": gam}
    return {"alpha_table.csv": table.to_csv()}, summary


def exp_berman(ctx: Context):
    spec, grid = build_spec(ctx.cfg), build_grid(ctx.cfg)
    p = ctx.params
    if spec.kind == "rosenblatt":
        prov = rosenblatt.increment_charfn(PathSampler(spec, make_grid(0.0, 1.0, 8)).kernel)
    else:
        prov = gaussian.increment_charfn(_gaussian_cov(spec, grid.t_end), spec.d)
    rep = laws.berman_criterion(prov, spec.alpha, spec.d, p.get("horizon", grid.t_end), levels=p.get("levels", 14))
    expected = "converges" if spec.alpha * spec.d < 1 else "diverges"
    rows = zip(rep.cutoffs, rep.shells, rep.partial, np.concatenate([[np.nan], rep.ratios]))
    return ({"berman.csv": table_csv(["cutoff", "shell", "partial", "shell_ratio"], rows)},
            {"claim": "berman-integrability", "passed": rep.verdict == expected, "report": rep})


def exp_sde(ctx: Context):
    spec = build_spec(ctx.cfg)
    p = ctx.params
    fields = sde.catalog_fields(p.get("fields", "linear"), spec.d, **p.get("field_params", {}))
    x0 = np.broadcast_to(np.asarray(p.get("x0", 1.0), dtype=float), (spec.d,))
    levels = p.get("levels", [2**k for k in range(6, 12)])
    exact = None
    if p.get("closed_form", "none") == "geometric":
        def exact(B, t):
            return x0 * np.exp(B)
    rep = sde.convergence_study(fields, x0, spec.alpha, levels, ctx.replicas, ctx.stream(), p.get("scheme"),
                                T=build_grid(ctx.cfg).t_end, exact=exact)
    passed = rep.extra.get("exact", False) or rep.fit.ci_low > 0
    if rep.target is not None and not rep.extra.get("exact", False):
        passed = passed and abs(rep.fit.slope - rep.target) <= 0.15
    rows = zip(rep.scale, rep.stat)
    return ({"convergence.csv": table_csv(["steps", "sup_difference"], rows)},
            {"claim": "sde-self-convergence", "passed": bool(passed), "report": rep})


RUNNERS = {
    "simulate": exp_simulate, "localtime": exp_localtime, "moments": exp_moments, "scaling": exp_scaling,
    "chung": exp_chung, "tails": exp_tails, "lnd": exp_lnd, "charfn": exp_charfn, "analytics": exp_analytics,
    "berman": exp_berman, "sde-convergence": exp_sde,
}


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


def run(cfg: dict, out: str | Path | None = None, seed: int | None = None, threads: int = 1) -> dict:
    """Validate, execute and persist one experiment; returns the run record."""
    cfg = validate_config(copy.deepcopy(cfg))
    if seed is not None:
        cfg["master_seed"] = int(seed)
    cfg.setdefault("master_seed", 0)
    out = Path(out or cfg.get("output", "runs-out"))
    exp = cfg["experiment"]
    if exp in LOCAL_TIME_EXPERIMENTS and exp != "berman":
        build_spec(cfg).require_local_time()
    h = config_hash(cfg)
    ctx = Context(cfg, int(cfg["master_seed"]), max(1, int(threads)))
    started = time.time()
    log.info("running %s (config %s)", exp, h[:12])
    files, summary = RUNNERS[exp](ctx)
    report = {"config_hash": h, "experiment": exp, "claim": summary.get("claim"), "config": cfg,
              "passed": bool(summary.get("passed")), "summary": summary}
    files["report.json"] = dumps_json(report)
    run_dir = out / f"{exp}-{h[:12]}"
    manifest = {}
    for name, text in sorted(files.items()):
        if name.endswith(".csv"):
            text = f"# config_hash={h} claim={summary.get('claim')}\n" + text
        atomic_write(run_dir / name, text)
        manifest[str((run_dir / name).relative_to(out))] = hashlib.sha256(text.encode()).hexdigest()
    record = {"config_hash": h, "version": __version__, "experiment": exp, "seed": ctx.seed,
              "started": started, "finished": time.time(), "outputs": manifest,
              "passed": report["passed"]}
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    name = f"{time.strftime('%Y%m%dT%H%M%S', time.gmtime(started))}-{int(started * 1e6) % 10**6:06d}-{h[:12]}.json"
    atomic_write(runs / name, dumps_json(record))
    return record


def list_runs(directory: str | Path) -> list[dict]:
    """Chronological index of run records; unreadable records are flagged, not dropped."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"no such directory: {d}")
    runs = d / "runs" if (d / "runs").is_dir() else d
    out = []
    for f in sorted(runs.glob("*.json")):
        try:
            rec = json.loads(f.read_text(encoding="utf-8"))
            if not isinstance(rec, dict) or "config_hash" not in rec:
                raise ValueError("not a run record")
            out.append({"file": f.name, "corrupted": False, **rec})
        except (ValueError, UnicodeDecodeError) as exc:
            out.append({"file": f.name, "corrupted": True, "warning": f"unreadable record: {exc}"})
    out.sort(key=lambda r: (r.get("started", math.inf), r["file"]))
    return out


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="localtimes", description="Run a local-time experiment from a config file.")
    ap.add_argument("--config", required=True, help="YAML or JSON experiment config")
    ap.add_argument("--seed", type=int, help="override master_seed")
    ap.add_argument("--out", help="output directory (default: config 'output' or ./runs-out)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["runs"]:
        if len(argv) != 2:
            print("usage: localtimes runs DIR", file=sys.stderr)
            return EXIT_CONFIG
        try:
            for r in list_runs(argv[1]):
                flag = "CORRUPTED " if r["corrupted"] else ""
                print(f"{flag}{r['file']} {r.get('experiment', '?')} {r.get('config_hash', '')[:12]} "
                      f"passed={r.get('passed')}")
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        record = run(cfg, args.out, args.seed, args.threads)
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, HypothesisViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, sde.BlowUp, gaussian.NotPSDError, gaussian.FallbackNeeded) as exc:
        print(f"experiment {cfg.get('experiment')!r} failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except Exception as exc:  # pragma: no cover - last resort
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    status = "passed" if record["passed"] else "FAILED"
    print(f"{record['experiment']} {status}; outputs: {', '.join(record['outputs'])}")
    return EXIT_OK if record["passed"] else EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
