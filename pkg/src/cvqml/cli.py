"""Batch runner: ``cvqml run <config.json>`` and ``cvqml check <quick|full>``.

Exit codes: 0 success, 2 invalid config or usage, 3 numerical failure,
4 tolerance breach (``run --check``) or failed acceptance criteria.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, oracles

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 2, 3, 4

_num = {"type": "number"}
_cnum = {"oneOf": [_num, {"type": "object", "properties": {"re": _num, "im": _num},
                          "required": ["re", "im"], "additionalProperties": False}]}
_vec = {"type": "array", "items": _cnum, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}
_numlist = {"type": "array", "items": _num, "minItems": 1}
_common = {
    "kind": {"type": "string"},
    "seed": {"type": "integer"},
    "threads": {"type": "integer", "minimum": 1},
    "out": {"type": "string"},
    "tolerances": {"type": "object", "additionalProperties": {
        "type": "object", "properties": {"min": _num, "max": _num}, "additionalProperties": False}},
}

SCHEMAS = {
    "eswap": {"theta": _numlist, "dim": {"type": "integer", "minimum": 1},
              "n_states": {"type": "integer", "minimum": 1}},
    "channel-scaling": {"dim": {"type": "integer", "minimum": 1}, "deltas": _numlist,
                        "pairs": {"type": "integer", "minimum": 1}, "rank": {"type": "integer", "minimum": 1}},
    "compile": {"gate": {"enum": ["poly", "quartic"]}, "gamma": _num, "coeffs": _numlist,
                "K": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "dim": {"type": "integer", "minimum": 2}, "route": {"enum": ["compiled", "trotter"]},
                "work_dim": {"type": "integer", "minimum": 2}},
    "invert": {"A": _mat, "b": _vec, "gamma": _num, "s": _num, "window": _num,
               "path": {"enum": ["direct", "trotter", "fock"]}, "q_r": {"type": ["number", "null"]},
               "epsilon": _num, "dim_R": {"type": "integer", "minimum": 2}},
    "pca": {"A": _mat, "b": _vec, "gamma": _num, "s": _num, "dim_R": {"type": "integer", "minimum": 2},
            "path": {"enum": ["direct", "trotter"]}, "epsilon": _num},
    "distance": {"u": _vec, "vs": {"type": "array", "items": _vec, "minItems": 1}, "beta": _num,
                 "shots": {"type": "integer", "minimum": 0}, "dim_t": {"type": "integer", "minimum": 2},
                 "calibration": {"enum": ["swap-test", "unit-overlap"]}},
    "success-rate": {"s": _num, "gamma": _num, "lambdas": _numlist, "weights": _numlist, "eps": _numlist,
                     "window": {"enum": ["product", "rectangular"]}},
}
REQUIRED = {
    "eswap": [], "channel-scaling": [], "compile": ["gate"], "invert": ["A", "b"], "pca": ["A", "b"],
    "distance": ["u", "vs"], "success-rate": ["lambdas"],
}


class ConfigError(ValueError):
    pass


def validate(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown or missing experiment kind {kind!r}; expected one of {sorted(SCHEMAS)}")
    schema = {"type": "object", "properties": {**_common, **SCHEMAS[kind]},
              "required": ["kind"] + REQUIRED[kind], "additionalProperties": False}
    unknown = sorted(set(cfg) - set(schema["properties"]))
    if unknown:
        raise ConfigError(f"unknown config key(s) for kind {kind!r}: {', '.join(unknown)}")
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid value at {where}: {exc.message}") from None
    return cfg


def _c(x):
    return complex(x["re"], x["im"]) if isinstance(x, dict) else complex(x)


def _cvec(v):
    return np.array([_c(x) for x in v])


# ---------------------------------------------------------------------------
# serialisation


def _encode(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_encode(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent)
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj) + "\n"


def strip_timestamp(text: str) -> str:
    doc = json.loads(text)
    doc.pop("timestamp", None)
    return json.dumps(doc, sort_keys=True)


def write_curve(path: Path, xname: str, cols: dict, x) -> str:
    lines = [",".join([xname] + list(cols))]
    for i, xv in enumerate(x):
        lines.append(",".join([format(float(xv), ".17g")] + [format(float(c[i]), ".17g") for c in cols.values()]))
    path.write_text("\n".join(lines) + "\n")
    return path.name


# ---------------------------------------------------------------------------
# experiments


def _pool(cfg):
    return ThreadPoolExecutor(max_workers=cfg.get("threads", 1))


def _exp_eswap(cfg, out: Path):
    from .gates import exp_swap, plus_state

    rng = np.random.default_rng(cfg.get("seed", 0))
    d = cfg.get("dim", 6)
    n = cfg.get("n_states", 10)
    rows = []
    for th in cfg.get("theta", [0.0, math.pi / 6, math.pi / 4, math.pi / 2]):
        u = exp_swap(th, d).mat
        worst = 1.0
        for _ in range(n):
            a = rng.normal(size=d) + 1j * rng.normal(size=d)
            b = rng.normal(size=d) + 1j * rng.normal(size=d)
            a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
            got = u @ np.kron(plus_state().amps, np.kron(a, b))
            want = np.kron(plus_state().amps, math.cos(th) * np.kron(a, b) + 1j * math.sin(th) * np.kron(b, a))
            worst = min(worst, abs(np.vdot(want, got)) ** 2)
        rows.append({"theta": th, "min_fidelity": worst})
    return {"cases": rows, "min_fidelity": min(r["min_fidelity"] for r in rows)}, {}


def _exp_channel(cfg, out: Path):
    from .channels import eswap_channel_error, random_density
    from .gates import fit_loglog_slope

    rng = np.random.default_rng(cfg.get("seed", 0))
    d = cfg.get("dim", 6)
    deltas = cfg.get("deltas", [1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    pairs = [(random_density(d, cfg.get("rank", d), rng), random_density(d, cfg.get("rank", d), rng))
             for _ in range(cfg.get("pairs", 5))]
    with _pool(cfg) as ex:
        errs = list(ex.map(lambda pr: [eswap_channel_error(pr[0], pr[1], dl) for dl in deltas], pairs))
    slopes = [fit_loglog_slope(deltas, e) for e in errs]
    curve = write_curve(out / "curve_channel.csv", "delta", {f"error_{i}": e for i, e in enumerate(errs)}, deltas)
    return {"deltas": deltas, "errors": errs, "slopes": slopes, "slope_mean": float(np.mean(slopes))}, {"channel": curve}


def _exp_compile(cfg, out: Path):
    from .gates import PolyPhaseSpec, compile_poly_phase, compile_quartic_US, fit_loglog_slope

    Ks = cfg.get("K", [4, 8, 16, 32])
    dim = cfg.get("dim", 16)
    if cfg["gate"] == "poly":
        coeffs = tuple(cfg.get("coeffs", [0, 0, 0, 1]))
        gamma = cfg.get("gamma", 0.1)

        def build(K):
            return compile_poly_phase(PolyPhaseSpec(gamma, coeffs, K), dim)
    else:
        route = cfg.get("route", "compiled")

        def build(K):
            return compile_quartic_US(K, dim, route=route, work_dim=cfg.get("work_dim"))
    with _pool(cfg) as ex:
        seqs = list(ex.map(build, Ks))
    errs = [s.error() for s in seqs]
    (out / "sequence.json").write_text(dumps(seqs[0].to_dict()))
    curve = write_curve(out / "curve_compile.csv", "K", {"error": errs}, Ks)
    slope = fit_loglog_slope(Ks, errs) if len(Ks) > 1 else None
    return {"K": Ks, "errors": errs, "slope": slope, "factors_per_block": len(seqs[0].factors)}, {"compile": curve}


def _exp_invert(cfg, out: Path):
    from .measurement import PostSelectionWindow
    from .qml import ClassicalVector, matrix_invert

    A = np.array([_cvec(r) for r in cfg["A"]])
    b = ClassicalVector.unit(_cvec(cfg["b"]))
    path = cfg.get("path", "direct")
    q_r = cfg.get("q_r", 0.0)
    _, rep = matrix_invert(A, b, cfg.get("gamma", 5.0), cfg.get("s", 20.0),
                           PostSelectionWindow(0.0, cfg.get("window", 0.1)), path=path, q_r=q_r,
                           rng=cfg.get("seed", 0), epsilon=cfg.get("epsilon", 0.05), dim_R=cfg.get("dim_R", 14))
    return rep.to_dict(), {}


def _exp_pca(cfg, out: Path):
    from .qml import ClassicalVector, eigen_distinguish

    A = np.array([_cvec(r) for r in cfg["A"]])
    b = ClassicalVector.unit(_cvec(cfg["b"]))
    dist, est, rep = eigen_distinguish(A, b, cfg.get("gamma", 2.0), cfg.get("s", 4.0), cfg.get("path", "direct"),
                                       cfg.get("dim_R", 40), epsilon=cfg.get("epsilon", 0.05))
    curve = write_curve(out / "curve_pca.csv", "x", {"density": dist.density}, dist.grid)
    return rep.to_dict(), {"pca": curve}


def _exp_distance(cfg, out: Path):
    from .qml import ClassicalVector, DistanceProblem, distance_estimate, distance_pdf

    prob = DistanceProblem(ClassicalVector(_cvec(cfg["u"])), tuple(ClassicalVector(_cvec(v)) for v in cfg["vs"]))
    beta = cfg.get("beta", 2.0)
    dim_t = cfg.get("dim_t", 30)
    _, rep = distance_estimate(prob, beta, cfg.get("shots", 100_000), cfg.get("seed", 0), dim_t,
                               cfg.get("calibration", "swap-test"))
    dist = distance_pdf(prob, beta, dim_t)
    curve = write_curve(out / "curve_distance.csv", "x", {"density": dist.density}, dist.grid)
    return rep.to_dict(), {"distance": curve}


def _exp_success(cfg, out: Path):
    fit = oracles.success_rate_exponent(cfg.get("s", 20.0), cfg.get("gamma", 5.0), cfg["lambdas"],
                                        cfg.get("eps", [0.02, 0.05, 0.1, 0.2]), cfg.get("weights"),
                                        cfg.get("window", "product"))
    curve = write_curve(out / "curve_success.csv", "eps", {"mass": fit.mass}, fit.eps)
    return fit.to_dict(), {"success": curve}


EXPERIMENTS = {
    "eswap": _exp_eswap, "channel-scaling": _exp_channel, "compile": _exp_compile, "invert": _exp_invert,
    "pca": _exp_pca, "distance": _exp_distance, "success-rate": _exp_success,
}


def _lookup(doc, dotted):
    cur = doc
    for part in dotted.split("."):
        if isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(dotted)
    return cur


def check_tolerances(results: dict, tolerances: dict) -> list[str]:
    breaches = []
    for key, lim in tolerances.items():
        try:
            v = float(_lookup(results, key))
        except (KeyError, TypeError, ValueError):
            breaches.append(f"{key}: missing from results")
            continue
        if "min" in lim and v < lim["min"]:
            breaches.append(f"{key}={v} < {lim['min']}")
        if "max" in lim and v > lim["max"]:
            breaches.append(f"{key}={v} > {lim['max']}")
    return breaches


def run_config(cfg: dict, out_dir, check: bool = False) -> int:
    """Validate and execute one experiment; returns the exit code and writes report.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    try:
        validate(cfg)
    except ConfigError as exc:
        _write_error(out, cfg, "config", str(exc), EXIT_CONFIG, stamp)
        return EXIT_CONFIG
    try:
        results, curves = EXPERIMENTS[cfg["kind"]](cfg, out)
    except Exception as exc:  # every failure inside a validated run is numerical
        _write_error(out, cfg, type(exc).__name__, str(exc), EXIT_NUMERIC, stamp)
        return EXIT_NUMERIC
    report = {
        "version": __version__,
        "kind": cfg["kind"],
        "config": cfg,
        "results": results,
        "curves": curves,
        "timestamp": {"utc": stamp, "wall_clock_seconds": time.perf_counter() - t0},
    }
    code = EXIT_OK
    if check:
        breaches = check_tolerances(results, cfg.get("tolerances", {}))
        report["check"] = {"passed": not breaches, "breaches": breaches}
        if breaches:
            code = EXIT_TOLERANCE
    (out / "report.json").write_text(dumps(report))
    return code


def _write_error(out: Path, cfg, kind: str, message: str, code: int, stamp: str):
    rec = {"error": {"type": kind, "message": message, "exit_code": code}, "config": cfg,
           "timestamp": {"utc": stamp}}
    (out / "report.json").write_text(dumps(rec))
    sys.stderr.write(json.dumps(rec["error"]) + "\n")


def _cmd_run(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"type": "config", "message": str(exc), "exit_code": EXIT_CONFIG}) + "\n")
        return EXIT_CONFIG
    if isinstance(cfg, dict):
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.threads is not None:
            cfg["threads"] = args.threads
    out = args.out or (cfg.get("out") if isinstance(cfg, dict) else None) or "."
    code = run_config(cfg, out, check=args.check)
    print(str(Path(out) / "report.json"))
    return code


def _cmd_check(args) -> int:
    from .acceptance import run_suite

    if args.suite not in ("quick", "full"):
        sys.stderr.write(json.dumps({"type": "usage", "message": f"unknown suite {args.suite!r}",
                                     "exit_code": EXIT_CONFIG}) + "\n")
        return EXIT_CONFIG
    results = run_suite(quick=args.suite == "quick")
    failed = [r.id for r in results if not r.passed and not r.supplementary]
    doc = {"suite": args.suite, "passed": not failed, "failed": failed,
           "criteria": [r.to_dict() for r in results]}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "acceptance.json").write_text(dumps(doc))
    if failed:
        print("failed criteria: " + ", ".join(failed))
        return EXIT_TOLERANCE
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"type": "usage", "message": message, "exit_code": EXIT_CONFIG}) + "\n")
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvqml", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads for sweep points")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--out", default=None)
    r.add_argument("--check", action="store_true", help="exit 4 when a configured tolerance is breached")
    r.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    r.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    c = sub.add_parser("check", help="run the acceptance suite")
    c.add_argument("suite")
    c.add_argument("--out", default=".", help="directory for acceptance.json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "run":
        return _cmd_run(args)
    return _cmd_check(args)


if __name__ == "__main__":
    sys.exit(main())
