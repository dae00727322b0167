"""Unified command line front end with JSON config support.

Subcommands: ``nu`` (growth-law sweep), ``recurse`` (recursion solver),
``seed-ctex`` (constructive seed builder + identity check), ``simulate``
(stochastic runs), ``freq`` (frequency snapshots), ``collapse`` (snapshot
distances), ``verify-lemmas`` (Monte Carlo bound checks).

Every command accepts ``--config PATH`` (a JSON object of parameter values,
loaded first and overridden by explicit flags) and writes UTF-8 CSV/JSON.
Identical argv + config + seed give byte-identical outputs.  Exit codes:
0 success, 1 failed verification suite, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis, growth, recursion, simulate
from .errors import BranchlabError, UsageError
from .tails import log_tail, parse_tail_model

_ENV_SEED = "BRANCHLAB_SEED"
_MASK64 = (1 << 64) - 1


def splitmix64(index: int) -> int:
    """The index-th output of a splitmix64 stream seeded with 0."""
    z = ((index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replica_seed(seed: int, index: int) -> int:
    """Per-replica stream seed: base seed XOR splitmix of the index."""
    return (seed ^ splitmix64(index)) & _MASK64


def _default_seed() -> int:
    raw = os.environ.get(_ENV_SEED, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{_ENV_SEED} must be an integer, got {raw!r}") from exc


def _positive(name):
    return lambda v: v > 0 or f"--{name} must be positive"


def _at_least(name, bound):
    return lambda v: v >= bound or f"--{name} must be >= {bound}"


def _in_open_unit(name):
    return lambda v: 0.0 < v < 1.0 or f"--{name} must be in (0, 1)"


def _one_of(name, choices):
    return lambda v: v in choices or f"--{name} must be one of {sorted(choices)}"


@dataclass(frozen=True)
class _Field:
    name: str
    kind: str  # float | int | str | bool | floats | ints
    default: object = None
    required: bool = False
    check: object = None
    help: str = ""


_SEED_HELP = "seed string: linear | half | ctex:phis=A,B,... | file:PATH"

_SCHEMAS: dict[str, list[_Field]] = {
    "nu": [
        _Field("alpha", "float", check=_positive("alpha"), help="single tail index"),
        _Field("alpha_min", "float", check=_positive("alpha-min"), help="sweep start"),
        _Field("alpha_max", "float", check=_positive("alpha-max"), help="sweep end"),
        _Field("points", "int", check=_at_least("points", 1), help="sweep size"),
        _Field("log_grid", "bool", default=False, help="geometric sweep grid"),
        _Field("out", "str", help="CSV path (default stdout); columns alpha,T,nu,nu_approx,rel_err"),
    ],
    "recurse": [
        _Field("alpha", "float", required=True, check=_positive("alpha")),
        _Field("seed", "str", default="linear", help=_SEED_HELP),
        _Field("t_max", "int", default=400, check=_at_least("t-max", 1)),
        _Field("detect_period", "bool", default=False,
               help="also write {t1, cycle, phi, constraints_ok} JSON"),
        _Field("tol", "float", default=1e-9, check=_positive("tol")),
        _Field("out", "str", help="CSV path; columns t,log_chi,I_t,log_c_t,nu_hat"),
    ],
    "seed-ctex": [
        _Field("alpha", "float", required=True, check=_positive("alpha")),
        _Field("phis", "floats", required=True, help="comma-separated cycle multipliers"),
        _Field("t_max", "int", default=200, check=_at_least("t-max", 1)),
        _Field("out", "str", help="JSON result path (default stdout)"),
    ],
    "simulate": [
        _Field("model", "str", required=True, check=_one_of("model", {"fmm", "mmm"})),
        _Field("tail", "str", default="pareto:alpha=1"),
        _Field("beta", "float", default=0.1, check=_in_open_unit("beta")),
        _Field("log_f", "float", required=True),
        _Field("t_max", "int", default=40, check=_at_least("t-max", 0)),
        _Field("seed", "int"),
        _Field("replicas", "int", default=1, check=_at_least("replicas", 1)),
        _Field("jobs", "int", default=1, check=_at_least("jobs", 1)),
        _Field("exact_event_cap", "float", default=1e7, check=_positive("exact-event-cap")),
        _Field("mmm_bins_per_decade", "int", default=8,
               check=_at_least("mmm-bins-per-decade", 1)),
        _Field("mmm_poisson_threshold", "float", default=1e4,
               check=_positive("mmm-poisson-threshold")),
        _Field("restart_on_extinction", "bool", default=True),
        _Field("slope_lo", "int", help="log-log slope window start (default 5/8 of t-max)"),
        _Field("slope_hi", "int", help="log-log slope window end (default t-max)"),
        _Field("out", "str",
               help="CSV path; columns replica,t,log_X,log_W,n_classes,mode,dominant_age"),
    ],
    "freq": [
        _Field("source", "str", default="recursion",
               check=_one_of("from", {"recursion", "run"})),
        _Field("alpha", "float", check=_positive("alpha"), help="recursion source"),
        _Field("t", "ints", required=True, help="comma-separated generations"),
        _Field("t_max", "int", help="recursion horizon (default max t + 2)"),
        _Field("seed_sequence", "str", default="linear", help=_SEED_HELP),
        _Field("model", "str", default="fmm", check=_one_of("model", {"fmm", "mmm"})),
        _Field("tail", "str", default="pareto:alpha=1"),
        _Field("beta", "float", default=0.1, check=_in_open_unit("beta")),
        _Field("log_f", "float", default=50.0),
        _Field("seed", "int"),
        _Field("out", "str", help="CSV path; columns t,J,R (P table goes to <out>.p.csv)"),
    ],
    "collapse": [
        _Field("alpha", "float", required=True, check=_positive("alpha")),
        _Field("seed_sequence", "str", default="linear", help=_SEED_HELP),
        _Field("t_pairs", "str", required=True, help="pairs like 300:303,300:301"),
        _Field("t_max", "int", help="recursion horizon (default max t + 2)"),
        _Field("out", "str", help="CSV path; columns t_a,t_b,distance"),
    ],
    "verify-lemmas": [
        _Field("replicas", "int", default=10000, check=_at_least("replicas", 100)),
        _Field("seed", "int"),
    ],
}


@dataclass(frozen=True)
class Config:
    """Validated parameters for one subcommand; JSON round-trips exactly."""

    command: str
    params: dict

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Config":
        doc = json.loads(text)
        return cls(command=doc["command"], params=doc["params"])


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branchlab",
        description="Branching populations under selection and heavy-tailed mutation",
    )
    sub = parser.add_subparsers(dest="command")
    for command, fields in _SCHEMAS.items():
        p = sub.add_parser(command, help=f"{command} subcommand")
        p.add_argument("--config", default=None, help="JSON parameter file loaded first")
        for f in fields:
            flag = "--from" if f.name == "source" else _flag(f.name)
            if f.kind == "bool":
                group = p.add_mutually_exclusive_group()
                group.add_argument(flag, dest=f.name, action="store_const", const=True,
                                   default=None, help=f.help)
                group.add_argument("--no-" + flag[2:], dest=f.name, action="store_const",
                                   const=False, default=None)
            else:
                p.add_argument(flag, dest=f.name, default=None, help=f.help)
    return parser


def _convert(field: _Field, value, origin: str):
    flag = _flag(field.name)
    try:
        if field.kind == "float":
            return float(value)
        if field.kind == "int":
            if isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        if field.kind == "bool":
            if isinstance(value, bool):
                return value
            raise ValueError
        if field.kind == "floats":
            if isinstance(value, str):
                return [float(v) for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if field.kind == "ints":
            if isinstance(value, str):
                return [int(v) for v in value.split(",") if v.strip()]
            return [int(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad value for {flag} ({origin}): {value!r}") from None


def parse_args(argv) -> Config:
    """Parse argv into a validated Config; flags override config-file values."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise UsageError("bad command line") from exc
    if ns.command is None:
        raise UsageError("missing subcommand")
    fields = _SCHEMAS[ns.command]
    by_name = {f.name: f for f in fields}

    params = {f.name: f.default for f in fields}
    if ns.config is not None:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in doc.items():
            if key not in by_name:
                raise UsageError(f"unknown config key {key!r} for {ns.command}")
            params[key] = _convert(by_name[key], value, f"config {ns.config}")
    for f in fields:
        given = getattr(ns, f.name)
        if given is not None:
            params[f.name] = _convert(f, given, "flag")

    for f in fields:
        value = params[f.name]
        if value is None:
            if f.required:
                raise UsageError(f"missing required option {_flag(f.name)}")
            continue
        if f.check is not None:
            verdict = f.check(value)
            if verdict is not True:
                raise UsageError(str(verdict))
    if "seed" in params and params["seed"] is None:
        params["seed"] = _default_seed()
    return Config(command=ns.command, params=params)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_csv(path, header, rows):
    fh, close = _open_out(path)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v
                             for v in row])
    finally:
        if close:
            fh.close()


def _write_json(path, payload):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _resolve_seed(text: str, alpha: float) -> recursion.SeedSequence:
    text = text.strip()
    if text == "linear":
        return recursion.SeedSequence.linear()
    if text == "half":
        return recursion.SeedSequence.half()
    if text.startswith("ctex:"):
        body = text[len("ctex:"):]
        if not body.startswith("phis="):
            raise UsageError("ctex seed needs phis=A,B,...")
        try:
            phis = [float(v) for v in body[len("phis="):].split(",")]
        except ValueError as exc:
            raise UsageError(f"bad ctex multipliers in {text!r}") from exc
        return recursion.build_ctex_seed(alpha, phis)
    if text.startswith("file:"):
        path = text[len("file:"):]
        try:
            with open(path, encoding="utf-8") as fh:
                values = [float(line) for line in fh if line.strip()]
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read seed file {path}: {exc}") from exc
        return recursion.SeedSequence.explicit(values)
    raise UsageError(f"unknown seed {text!r}; want {_SEED_HELP}")


def _cmd_nu(p) -> int:
    if p["alpha"] is not None:
        rows = growth.sweep(p["alpha"], p["alpha"], 1)
    else:
        if p["alpha_min"] is None or p["alpha_max"] is None or p["points"] is None:
            raise UsageError("need --alpha or all of --alpha-min/--alpha-max/--points")
        rows = growth.sweep(p["alpha_min"], p["alpha_max"], p["points"], p["log_grid"])
    _write_csv(p["out"], ["alpha", "T", "nu", "nu_approx", "rel_err"], rows)
    return 0


def _cmd_recurse(p) -> int:
    seed = _resolve_seed(p["seed"], p["alpha"])
    series = recursion.solve_chi(p["alpha"], seed, p["t_max"])
    lc = series.log_c_array()
    rows = []
    for t in range(1, series.t_max + 1):
        nh = recursion.nu_hat(series, t) if t + series.T <= series.t_max else math.nan
        rows.append((t, float(series.L[t]), int(series.I[t]), float(lc[t]), nh))
    _write_csv(p["out"], ["t", "log_chi", "I_t", "log_c_t", "nu_hat"], rows)
    if p["detect_period"]:
        t1, cycle = recursion.detect_period(series, tol=p["tol"])
        try:
            phi = recursion.extract_phi(cycle, series.nu, series.alpha)
            constraints_ok = True
            phi_list = [float(v) for v in phi]
        except BranchlabError:
            constraints_ok = False
            phi_list = None
        payload = {
            "t1": t1,
            "cycle": [float(v) for v in cycle],
            "phi": phi_list,
            "constraints_ok": constraints_ok,
        }
        _write_json(p["out"] + ".period.json" if p["out"] else None, payload)
    return 0


def _cmd_seed_ctex(p) -> int:
    seed = recursion.build_ctex_seed(p["alpha"], p["phis"])
    check = recursion.verify_indu(p["alpha"], p["phis"], p["t_max"])
    t_show = min(p["t_max"], 4 * len(seed.phi))
    payload = {
        "alpha": p["alpha"],
        "phi": [float(v) for v in seed.phi],
        "a": [math.exp(seed.log_a(t)) for t in range(1, t_show + 1)],
        "indu_ok": check.ok,
        "first_failing_t": check.first_failing_t,
    }
    _write_json(p["out"], payload)
    return 0


def _sim_config(p, seed: int) -> simulate.SimConfig:
    return simulate.SimConfig(
        model=p["model"],
        tail=parse_tail_model(p["tail"]),
        beta=p["beta"],
        log_f=p["log_f"],
        t_max=p["t_max"],
        seed=seed,
        exact_event_cap=p["exact_event_cap"],
        mmm_bins_per_decade=p["mmm_bins_per_decade"],
        mmm_poisson_threshold=p["mmm_poisson_threshold"],
        restart_on_extinction=p["restart_on_extinction"],
    )


def _run_one(cfg: simulate.SimConfig) -> simulate.RunRecord:
    return simulate.run(cfg)


def _cmd_simulate(p) -> int:
    configs = [
        _sim_config(p, replica_seed(p["seed"], k)) for k in range(p["replicas"])
    ]
    if p["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=p["jobs"]) as pool:
            records = list(pool.map(_run_one, configs))
    else:
        records = [_run_one(cfg) for cfg in configs]

    rows = []
    for k, rec in enumerate(records):
        for j in range(len(rec.t)):
            rows.append((
                k, int(rec.t[j]), float(rec.log_X[j]), float(rec.log_W[j]),
                int(rec.n_classes[j]),
                "exact" if rec.mode[j] == 0 else "logdet",
                int(rec.dominant_age[j]),
            ))
    _write_csv(
        p["out"],
        ["replica", "t", "log_X", "log_W", "n_classes", "mode", "dominant_age"],
        rows,
    )

    t_max = p["t_max"]
    lo = p["slope_lo"] if p["slope_lo"] is not None else (5 * t_max) // 8
    hi = p["slope_hi"] if p["slope_hi"] is not None else t_max
    slopes = []
    survived = 0
    for rec in records:
        if rec.outcome != "survived":
            continue
        survived += 1
        try:
            slopes.append(analysis.loglog_slope(rec, lo, hi))
        except BranchlabError:
            pass
    summary = {
        "replicas": p["replicas"],
        "survived": survived,
        "survival_fraction": survived / p["replicas"],
        "restarts_total": int(sum(rec.restarts for rec in records)),
        "slope_window": [lo, hi],
        "loglog_slopes": [float(s) for s in slopes],
        "loglog_slope_mean": float(np.mean(slopes)) if slopes else None,
    }
    _write_json(p["out"] + ".summary.json" if p["out"] else None, summary)
    return 0


def _cmd_freq(p) -> int:
    ts = sorted(set(p["t"]))
    if not ts or ts[0] < 1:
        raise UsageError("--t needs generations >= 1")
    snaps = []
    if p["source"] == "recursion":
        if p["alpha"] is None:
            raise UsageError("recursion source needs --alpha")
        t_max = p["t_max"] if p["t_max"] is not None else ts[-1] + 2
        seed = _resolve_seed(p["seed_sequence"], p["alpha"])
        series = recursion.solve_chi(p["alpha"], seed, t_max)
        snaps = [analysis.freq_from_chi(series, t) for t in ts]
    else:
        t_max = p["t_max"] if p["t_max"] is not None else ts[-1] + 1
        cfg = simulate.SimConfig(
            model=p["model"], tail=parse_tail_model(p["tail"]), beta=p["beta"],
            log_f=p["log_f"], t_max=t_max, seed=p["seed"],
        )
        record = simulate.run(cfg)
        snaps = [analysis.freq_from_run(record, t) for t in ts]
    point_rows = []
    p_rows = []
    for snap in snaps:
        p_rows.append((snap.t, snap.P))
        for j, r in zip(snap.J, snap.R):
            point_rows.append((snap.t, float(j), float(r)))
    _write_csv(p["out"], ["t", "J", "R"], point_rows)
    _write_csv(p["out"] + ".p.csv" if p["out"] else None, ["t", "P"], p_rows)
    return 0


def _cmd_collapse(p) -> int:
    pairs = []
    try:
        for chunk in p["t_pairs"].split(","):
            a, b = chunk.split(":")
            pairs.append((int(a), int(b)))
    except ValueError as exc:
        raise UsageError("--t-pairs wants pairs like 300:303,300:301") from exc
    t_top = max(max(a, b) for a, b in pairs)
    t_max = p["t_max"] if p["t_max"] is not None else t_top + 2
    seed = _resolve_seed(p["seed_sequence"], p["alpha"])
    series = recursion.solve_chi(p["alpha"], seed, t_max)
    rows = []
    for a, b in pairs:
        snap_a = analysis.freq_from_chi(series, a)
        snap_b = analysis.freq_from_chi(series, b)
        rows.append((a, b, analysis.collapse_distance(snap_a, snap_b)))
    _write_csv(p["out"], ["t_a", "t_b", "distance"], rows)
    return 0


def _cmd_verify_lemmas(p) -> int:
    replicas = p["replicas"]
    rng = np.random.default_rng(p["seed"])
    checks = []

    emp, bound = simulate.mc_verify_galton(101.0, 0.5, 5, replicas, rng)
    sigma = math.sqrt(max(emp * (1 - emp), 1e-12) / replicas)
    checks.append(("galton-lower-bound", emp, bound, emp >= bound - 3 * sigma))

    emp, bound = simulate.mc_verify_tdg([2.0] * 5, 1, 10.0, 2.0, replicas, rng)
    sigma = math.sqrt(max(emp * (1 - emp), 1e-12) / replicas)
    checks.append(("generation-dependent-upper-bound", emp, bound, emp >= bound - 3 * sigma))

    ks_crit = max(0.01, 1.63 / math.sqrt(replicas))
    for alpha in (1.0, 2.0):
        model = parse_tail_model(f"pareto:alpha={alpha}")
        draws = simulate.sample_fittest_mutant(0.0, model, rng, size=replicas)
        ks = _fittest_mutant_ks(np.atleast_1d(draws), model, 1.0)
        checks.append((f"fittest-mutant-law-ks-alpha-{alpha:g}", ks, ks_crit, ks <= ks_crit))

    width = max(len(name) for name, *_ in checks)
    print(f"{'check'.ljust(width)}  {'value':>12}  {'target':>12}  result")
    ok_all = True
    for name, value, target, ok in checks:
        ok_all &= ok
        print(f"{name.ljust(width)}  {value:12.6f}  {target:12.6f}  "
              f"{'pass' if ok else 'FAIL'}")
    return 0 if ok_all else 1


def _fittest_mutant_ks(log_w: np.ndarray, model, lam: float) -> float:
    """One-sample KS against CDF exp(-lam*G), atom at -inf handled exactly."""
    n = log_w.size
    atoms = int(np.count_nonzero(~np.isfinite(log_w)))
    d = abs(atoms / n - math.exp(-lam))
    finite = np.sort(log_w[np.isfinite(log_w)])
    cdf = np.exp(-lam * np.exp(np.asarray(log_tail(model, finite))))
    hi = (atoms + np.arange(1, finite.size + 1)) / n
    lo = (atoms + np.arange(0, finite.size)) / n
    if finite.size:
        d = max(d, float(np.max(np.abs(hi - cdf))), float(np.max(np.abs(lo - cdf))))
    return d


_DISPATCH = {
    "nu": _cmd_nu,
    "recurse": _cmd_recurse,
    "seed-ctex": _cmd_seed_ctex,
    "simulate": _cmd_simulate,
    "freq": _cmd_freq,
    "collapse": _cmd_collapse,
    "verify-lemmas": _cmd_verify_lemmas,
}


def dispatch(config: Config) -> int:
    """Run the configured subcommand and return its exit code."""
    return _DISPATCH[config.command](config.params)


def main(argv=None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
        return dispatch(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except BranchlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
