"""Command-line runner: density, criterion, construct, verify.

Every run reads an optional JSON config (see ``schemas/config.schema.json``),
applies flag overrides, writes its outputs under ``--out-dir`` and a
``manifest.json`` describing them.  Manifests contain no timestamps, so the
same config and seed give byte-identical files.

Exit codes: 0 success, 1 invalid config or input, 2 runtime failure
(horizon exhausted, missing certificate), 3 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .cantor import FiniteFamily, baire_h
from .constructions.eq import eq_build_blocks, eq_report, eq_vector, stages_for
from .constructions.fhc import FHCError, fhc_schedule
from .constructions.ne import (PlanBudgetError, default_scaled_plan, ne_index_plan, ne_norm_chain,
                               ne_vector_scaled, ne_visit_report)
from .constructions.targets import TargetEnumeration
from .constructions.tm import (PreconditionError, VisitStats, admissible_pairs, tm_build_schedule,
                               tm_claim_equivalence_check, tm_f, tm_zero_density_check)
from .dsl import DSLError, parse_ideal, parse_number, parse_point, parse_set, parse_weights
from .ideals import (HorizonError, density_trace, in_ideal_at_horizon, log_density_estimate,
                     lower_density_estimate, upper_density_estimate)
from .sequences import CertificateError, Cylinder, norm_estimate
from .shifts import bayart_ruzsa_report, orbit_visits
from .suites import hat_suite, lscsm_suite, shift_algebra_suite
from .weights import FRatio

__all__ = ["main", "ConfigError", "run"]

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3

DEFAULT_HORIZON = {
    "density": 10_000,
    "criterion": 100_000,
    "tm_f": 100_000,
    "eq_vector": 400_000,
    "ne_scaled": 1_000_000,
    "ne_plan": None,
    "fhc": 100_000,
    "verify": None,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config


def _schema(name: str) -> dict:
    return json.loads(resources.files("shiftlab").joinpath("schemas", name).read_text())


def _line_of(text: str | None, path) -> int | None:
    """Line of the innermost key on ``path`` in the JSON source, if it can be found."""
    if not text:
        return None
    pos, found = 0, None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if not m:
            break
        pos, found = m.end(), m.start()
    return None if found is None else text.count("\n", 0, found) + 1


class Config:
    def __init__(self, data: dict, text: str | None = None, source: str = "<config>"):
        self.data = data
        self.text = text
        self.source = source

    @classmethod
    def load(cls, path: str | None) -> "Config":
        if path is None:
            return cls({})
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        cfg = cls(data, text, path)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        validator = jsonschema.Draft202012Validator(_schema("config.schema.json"))
        errors = sorted(validator.iter_errors(self.data), key=lambda e: list(map(str, e.absolute_path)))
        if errors:
            err = errors[0]
            path = list(err.absolute_path)
            extra = re.findall(r"'([^']+)' (?:was|were) unexpected", err.message)
            if err.validator == "additionalProperties" and extra:
                path.append(extra[0])
            self.fail(path, err.message)

    def fail(self, path, msg: str):
        line = _line_of(self.text, path)
        where = f"{self.source}:{line}" if line else self.source
        key = ".".join(map(str, path)) or "<root>"
        raise ConfigError(f"{where}: {key}: {msg}")

    def get(self, path, default=None):
        node = self.data
        for key in path:
            if isinstance(node, dict) and key in node:
                node = node[key]
            elif isinstance(node, list) and isinstance(key, int) and key < len(node):
                node = node[key]
            else:
                return default
        return node

    def parse(self, path, parser, default=None):
        """Run a DSL parser on the value at ``path``, reporting errors with its line."""
        value = self.get(path, default)
        if value is None:
            return None
        try:
            return parser(value)
        except DSLError as exc:
            self.fail(path, str(exc))


def _threads() -> int:
    raw = os.environ.get("SHIFTLAB_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SHIFTLAB_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"SHIFTLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def _pmap(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# output


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if type(v).__name__ == "mpq":
        return str(Fraction(int(v.numerator), int(v.denominator)))
    return str(v)


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


class Output:
    """Serializes every file of one run under ``out_dir``."""

    def __init__(self, out_dir: Path, fmt: str):
        self.dir = out_dir
        self.fmt = fmt
        self.files: list[dict] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def table(self, stem: str, columns: list[str], rows: list[list]) -> None:
        if self.fmt == "csv":
            name = f"{stem}.csv"
            with open(self.dir / name, "w", newline="") as fh:
                out = csv.writer(fh, lineterminator="\n")
                out.writerow(columns)
                for r in rows:
                    out.writerow([_cell(v) for v in r])
        else:
            name = f"{stem}.json"
            (self.dir / name).write_text(_dumps({"columns": columns, "rows": rows}))
        self.files.append({"name": name, "columns": columns})

    def document(self, name: str, obj) -> None:
        (self.dir / name).write_text(_dumps(obj))

    def manifest(self, manifest: dict) -> None:
        manifest = _jsonable({**manifest, "files": self.files})
        jsonschema.validate(manifest, _schema("manifest.schema.json"))
        (self.dir / "manifest.json").write_text(_dumps(manifest))


def _cell(v):
    j = _jsonable(v)
    return json.dumps(j) if isinstance(j, (list, dict)) else j


# ---------------------------------------------------------------------------
# commands


def cmd_density(cfg: Config, args, out: Output) -> dict:
    N = args.horizon
    exprs = cfg.get(["density", "sets"], ["evens"])
    stride = cfg.get(["density", "trace_stride"], max(1, N // 1000))
    ideal = cfg.parse(["density", "ideal"], parse_ideal)
    delta = cfg.get(["density", "delta"], "1/10")
    try:
        delta = Fraction(parse_number(str(delta)))
    except DSLError as exc:
        cfg.fail(["density", "delta"], str(exc))
    if delta <= 0:
        cfg.fail(["density", "delta"], "delta must be positive")
    if cfg.get(["density", "sets"]) is None:
        sets = [parse_set(e) for e in exprs]
    else:
        sets = [cfg.parse(["density", "sets", k], parse_set) for k in range(len(exprs))]
    summary, rows = [], []
    for expr, S in zip(exprs, sets):
        tr = density_trace(S, N)
        entry = {"set": expr, "upper": upper_density_estimate(S, N),
                 "lower": lower_density_estimate(S, N), "log_density": log_density_estimate(S, N),
                 "running_sup": tr.running_sup, "window": list(tr.window)}
        entry["upper_float"] = float(entry["upper"])
        entry["lower_float"] = float(entry["lower"])
        if ideal is not None:
            entry["verdict"] = in_ideal_at_horizon(ideal, S, N, delta).value
        summary.append(entry)
        for n in range(0, N + 1, stride):
            rows.append([expr, n, int(tr.counts[n]), float(tr.mu(n))])
    out.table("density_trace", ["set", "n", "count", "mu_n"], rows)
    return {"sets": summary, "ideal": cfg.get(["density", "ideal"]), "delta": delta}


def cmd_criterion(cfg: Config, args, out: Output) -> dict:
    w = cfg.parse(["criterion", "weights"], parse_weights, "constant:2")
    p = cfg.get(["criterion", "p"], args.p)
    report = bayart_ruzsa_report(w, p, args.horizon)
    res = {"weights": w.describe(), **report.to_dict()}
    out.document("criterion.json", res)
    return res


def _construct_tm(cfg: Config, args, out: Output, threads: int) -> dict:
    c = ["construct"]
    w = cfg.parse(c + ["weights"], parse_weights, "constant:2")
    p = args.p
    E = TargetEnumeration()
    y = fhc_schedule(E, w, p, T=cfg.get(c + ["targets"], 4), k_max=cfg.get(c + ["k_max"], 4),
                     assignment=cfg.get(c + ["assignment"], "ruler"))
    rule = cfg.parse(c + ["point"], parse_point, "constant:0")
    stats = VisitStats(w, y, E, args.horizon)
    stages = cfg.get(c + ["stages"])
    x = baire_h(rule.prefix(max(64, stages or 0)))
    sched = tm_build_schedule(x, stats, stages=stages)
    z = tm_f(None, y, sched, w)
    pairs = admissible_pairs(sched, cfg.get(c + ["checks"], 100), random.Random(args.seed))
    verdicts = _pmap(lambda pr: tm_claim_equivalence_check(w, y, sched, pr[0], pr[1], z=z), pairs, threads)
    zeros = tm_zero_density_check(z, sched)
    nz, ny = norm_estimate(z.truncated(), p), norm_estimate(y, p)
    out.table("blocks", ["stage", "offset", "length", "source_offset"],
              [[t, sched.payload_start(t), sched.m_hat[t], sched.prev(sched.alpha, t)]
               for t in range(sched.stages)])
    passed = sum(map(bool, verdicts))
    return {
        "point": rule.name, "schedule": sched.to_dict(), "violations": sched.invariant_violations(),
        "claim_equivalence": {"checked": len(pairs), "passed": passed,
                              "pass_rate": passed / len(pairs) if pairs else 1.0},
        "zero_density": {"lower_density": zeros["lower_density"],
                         "stages": zeros["stages"]},
        "norm": {"z": nz.value, "y_upper": ny.upper, "bounded": nz.value <= ny.upper * (1 + 1e-12)},
        "ok": passed == len(pairs) and not sched.invariant_violations(),
    }


def _construct_eq(cfg: Config, args, out: Output, threads: int) -> dict:
    c = ["construct"]
    w = cfg.parse(c + ["weights"], parse_weights, "constant:2")
    i_max, j_max = cfg.get(c + ["i_max"], 5), cfg.get(c + ["j_max"], 8)
    E = TargetEnumeration()
    T = cfg.get(c + ["targets"], i_max + 1 + 8)
    if T <= i_max:
        cfg.fail(c + ["targets"], "needs more targets than i_max")
    y = fhc_schedule(E, w, args.p, T=T, k_max=cfg.get(c + ["k_max"], 2),
                     assignment=cfg.get(c + ["assignment"], "round_robin"))
    blocks = eq_build_blocks(y, E, w, stages_for(i_max, j_max), args.horizon, args.p)
    z = eq_vector(y, blocks)
    rows = eq_report(w, z, blocks, E, args.p, i_max, j_max)
    out.table("blocks", ["stage", "i", "j", "g", "m", "F_size"],
              [[t, *cantor, blocks.g[t], blocks.m[t], int(blocks.F[t].size)]
               for cantor, t in sorted(blocks.pairs.items(), key=lambda kv: kv[1])])
    out.table("errors", ["i", "j", "t", "g", "error", "bound", "ok"],
              [[r["i"], r["j"], r["t"], r["g"], r["error"], r["bound"], r["ok"]] for r in rows])
    violations = sum(not r["ok"] for r in rows)
    return {"stages": blocks.stages, "op_norm": blocks.op_norm, "pairs": len(rows),
            "violations": violations, "max_error_last_j": max(r["error"] for r in rows if r["j"] == j_max),
            "ok": violations == 0}


def _construct_ne_scaled(cfg: Config, args, out: Output, threads: int) -> dict:
    c = ["construct"]
    E = TargetEnumeration("ne_rescaled", args.p)
    blocks = [tuple(v) for v in cfg.get(c + ["plan"], [])] or None
    plan = default_scaled_plan(E, blocks, start=cfg.get(c + ["start"], 4))
    try:
        z = ne_vector_scaled(args.p, plan, E)
    except ValueError as exc:
        cfg.fail(c + ["plan"], str(exc))
    w = FRatio(args.p)
    hs = sorted({b.h for b in plan.blocks})
    reports = _pmap(lambda j: ne_visit_report(w, z, plan, E, j, args.horizon), hs, threads)
    for r in reports:
        r["bound"] = r["target"] - Fraction(1, 20)
        r["ok"] = r["upper_density"] is not None and r["upper_density"] >= r["bound"]
    nz = norm_estimate(z, args.p)
    pd = plan.to_dict()
    out.table("blocks", ["h", "start", "length", "m", "r", "q"],
              [[b["h"], b["start"], b["length"], b["m"], b["r"], b["q"]] for b in pd["blocks"]])
    return {"plan": pd, "densities": reports, "norm": nz.value, "norm_finite": math.isfinite(nz.value),
            "ok": all(r["ok"] for r in reports) and math.isfinite(nz.value)}


def _construct_ne_plan(cfg: Config, args, out: Output, threads: int) -> dict:
    plan = ne_index_plan(cfg.get(["construct", "i_max"], 1), p=args.p)
    chain = ne_norm_chain(plan)
    d = plan.to_dict()
    out.table("blocks", ["i", "h", "m", "n", "J_lo", "J_hi", "q"],
              [[e["i"], e["h"], e["m"], e["n"], e["J_lo"], e["J_hi"], e["q"]] for e in d["entries"]])
    return {"plan": d, "norm_chain": chain,
            "ok": d["checks"]["ok"] and all(r["ok"] for r in chain)}


def _construct_fhc(cfg: Config, args, out: Output, threads: int) -> dict:
    c = ["construct"]
    w = cfg.parse(c + ["weights"], parse_weights, "constant:2")
    E = TargetEnumeration()
    T = cfg.get(c + ["targets"], 3)
    k_max = cfg.get(c + ["k_max"], 0)
    y = fhc_schedule(E, w, args.p, T=T, k_max=k_max, assignment=cfg.get(c + ["assignment"], "ruler"))
    N = args.horizon

    def one(i):
        U = Cylinder.around(E.padded(i, y.period), k_max, Fraction(1, 1024))
        visits = orbit_visits(w, y, U, N)
        bound, n_min = y.density_bound(i)
        lower = lower_density_estimate(visits, N)
        return {"target": i, "code": E.code(i), "slot_density": y.slot_density(i), "bound": bound,
                "lower": lower, "ok": lower >= bound if N >= n_min else None}

    rows = _pmap(one, list(range(T)), threads)
    out.table("slots", ["target", "code", "slot_density", "bound", "lower"],
              [[r["target"], r["code"], r["slot_density"], r["bound"], r["lower"]] for r in rows])
    nz = norm_estimate(y, args.p)
    return {"period": y.period, "assignment": y.assignment, "targets": rows,
            "norm": {"value": nz.value, "lower": nz.lower, "upper": nz.upper},
            "ok": all(r["ok"] is not False for r in rows)}


CONSTRUCTIONS = {
    "tm_f": _construct_tm,
    "eq_vector": _construct_eq,
    "ne_scaled": _construct_ne_scaled,
    "ne_plan": _construct_ne_plan,
    "fhc": _construct_fhc,
}


def cmd_construct(cfg: Config, args, out: Output) -> dict:
    name = cfg.get(["construct", "construction"], args.construction)
    if name is None:
        raise ConfigError("construct needs a construction (config construct.construction or --construction)")
    res = CONSTRUCTIONS[name](cfg, args, out, _threads())
    res["construction"] = name
    return res


def cmd_verify(cfg: Config, args, out: Output) -> dict:
    v = ["verify"]
    names = cfg.get(v + ["suites"], ["hat", "lscsm", "shift_algebra"])
    M = cfg.get(v + ["M"], 10)
    families = []
    for k, sets in enumerate(cfg.get(v + ["families"], [])):
        if any(e > M for s in sets for e in s):
            cfg.fail(v + ["families", k], f"family has elements outside [0, {M}]")
        families.append(FiniteFamily.of(M, sets))
    rng = random.Random(args.seed)
    results = []
    for name in names:
        if name == "hat":
            r = hat_suite(rng, M, cfg.get(v + ["count"], 100), families)
        elif name == "lscsm":
            r = lscsm_suite(rng, cfg.get(v + ["lscsm_count"], 200))
        else:
            r = shift_algebra_suite(rng, cfg.get(v + ["algebra_count"], 1000))
        results.append(r.to_dict())
    out.table("suites", ["suite", "checked", "passed", "ok"],
              [[r["name"], r["checked"], r["passed"], r["ok"]] for r in results])
    failing = [r for r in results if not r["ok"]]
    if failing:
        out.document("failures.json", failing)
    return {"suites": results, "ok": not failing}


COMMANDS = {"density": cmd_density, "criterion": cmd_criterion, "construct": cmd_construct,
            "verify": cmd_verify}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--horizon", type=int, help="finite horizon N (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out-dir", default="shiftlab-out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], help="format of tables (default csv)")
    common.add_argument("-p", type=float, help="exponent of l_p (default 2)")

    parser = argparse.ArgumentParser(prog="shiftlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"shiftlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("density", parents=[common], help="density estimates of rule sets")
    sub.add_parser("criterion", parents=[common], help="Bayart-Ruzsa sum and verdict")
    con = sub.add_parser("construct", parents=[common], help="build and check a construction")
    con.add_argument("--construction", choices=sorted(CONSTRUCTIONS))
    sub.add_parser("verify", parents=[common], help="brute-force verification suites")
    return parser


def _resolve(cfg: Config, args) -> None:
    args.seed = args.seed if args.seed is not None else cfg.get(["seed"], 0)
    args.format = args.format or cfg.get(["format"], "csv")
    p = args.p if args.p is not None else cfg.get(["p"], 2)
    if not 1 <= p < math.inf:
        raise ConfigError(f"p must lie in [1, inf), got {p}")
    args.p = int(p) if float(p).is_integer() else float(p)
    if args.command == "construct":
        key = cfg.get(["construct", "construction"]) or getattr(args, "construction", None) or "tm_f"
        args.construction = key
        default = DEFAULT_HORIZON[key]
    else:
        default = DEFAULT_HORIZON[args.command]
    if args.horizon is None:
        args.horizon = cfg.get(["horizon"], default)
    if args.horizon is not None and args.horizon < 2:
        raise ConfigError(f"horizon must be at least 2, got {args.horizon}")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = Config.load(args.config)
        _resolve(cfg, args)
        out = Output(Path(args.out_dir), args.format)
        results = COMMANDS[args.command](cfg, args, out)
        ok = bool(results.pop("ok", True))
        manifest = {"tool": "shiftlab", "version": __version__, "command": args.command,
                    "seed": args.seed, "horizon": args.horizon, "config": cfg.data,
                    "results": results, "ok": ok}
        if args.command == "construct":
            manifest["construction"] = results["construction"]
        out.manifest(manifest)
    except (ConfigError, DSLError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (HorizonError, FHCError, CertificateError, PreconditionError, PlanBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    summary = {"command": args.command, "ok": ok, "out_dir": str(out.dir)}
    if args.command == "criterion":
        summary["classification"] = results["classification"]
    stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
