"""Command-line runner: play experiments, check traces and emit analysis tables."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .adversaries import PolicyError, policy_from_spec
from .conformal import IFS1D, InvalidIFS, mass_distribution_check, subsystem, subsystem_dimension
from .dynamics import InvalidMapSpec, UnsupportedAssumption, cylinder_table, map_from_spec
from .game import GameConfig, InvalidConfig, Trace, replay, run
from .geometry import unit_cube
from .numeric import PrecisionExhausted, parse_rational, to_text
from .strategies import (CertificateTooWeak, RollingCover, StrategyA, StrategyB, constants_A,
                         constants_B, verify_trace)
from .targets import InvalidTarget, target_from_spec

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_PRECISION = 0, 1, 2, 3

SPEC_KEYS = {"map", "target", "gamma", "dimension", "mode", "precision", "bob", "strategy",
             "max_rounds", "stages", "seed", "n_cap", "empirical", "output"}


class SpecError(ValueError):
    """The experiment description is malformed."""


# -- experiment specs ------------------------------------------------------------------


def load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from exc


def _parse_json_arg(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {text!r}") from exc


def build(spec: dict, trace: Trace | None = None):
    """Turn an experiment spec into ``(config, seq, targets, alice, bob)``."""
    if not isinstance(spec, dict):
        raise SpecError("the experiment spec must be a JSON object")
    unknown = set(spec) - SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {', '.join(sorted(unknown))}")
    for key in ("map", "gamma"):
        if key not in spec:
            raise SpecError(f"spec is missing {key!r}")
    dimension = int(spec.get("dimension", 1))
    try:
        gamma = parse_rational(spec["gamma"])
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    config = GameConfig(gamma, dimension, spec.get("mode", "rational"), spec.get("precision"),
                        int(spec.get("max_rounds", 1000)))
    seq = map_from_spec(spec["map"])
    targets = target_from_spec(spec.get("target", {"kind": "constant", "point": "0"}), dimension)
    stages = int(spec.get("stages", 2))
    n_cap = int(spec.get("n_cap", 512))
    kind = spec.get("strategy", "B")
    if kind == "A":
        alice = StrategyA(seq, targets, gamma, stages, n_cap=n_cap)
    elif kind == "B":
        alice = StrategyB(seq, targets, gamma, stages, n_cap=n_cap)
    elif kind == "empirical":
        options = spec.get("empirical", {})
        if "delta" not in options:
            raise SpecError("empirical mode needs empirical.delta")
        alice = RollingCover(seq, targets, gamma, options["delta"], int(options.get("horizon", 200)),
                             int(options.get("lookahead", 3)))
    else:
        raise SpecError(f"unknown strategy {kind!r}")
    bob_spec = dict(spec.get("bob", {"kind": "random"}))
    bob_spec.setdefault("seed", spec.get("seed", 0))
    bob = policy_from_spec(bob_spec, gamma, seq, targets, trace)
    return config, seq, targets, alice, bob


def _outputs(spec: dict, override: str | None) -> Path:
    out = Path(override or spec.get("output", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _exit_for(trace: Trace, report: dict) -> int:
    if trace.status == "precision_exhausted":
        return EXIT_PRECISION
    return EXIT_OK if report.get("ok") else EXIT_FAILED


# -- subcommands -------------------------------------------------------------------------


def cmd_run(args) -> int:
    spec = load_json(args.spec)
    config, seq, targets, alice, bob = build(spec)
    trace = run(config, alice, bob, unit_cube(config.dimension))
    report = verify_trace(seq, targets, trace)
    out = _outputs(spec, args.out)
    (out / "trace.json").write_text(trace.dumps())
    (out / "verify.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    _emit({"status": trace.status, "rounds": len(trace.rounds), "ok": report["ok"],
           "min_distance": report["orbit"].get("min_distance"), "delta": report.get("delta"),
           "trace": str(out / "trace.json"), "verify": str(out / "verify.json")})
    return _exit_for(trace, report)


def cmd_verify(args) -> int:
    spec = load_json(args.spec)
    trace = Trace.loads(Path(args.trace).read_text())
    seq = map_from_spec(spec["map"])
    targets = target_from_spec(spec.get("target", {"kind": "constant", "point": "0"}),
                               trace.config.dimension)
    report = verify_trace(seq, targets, trace, args.horizon)
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return _exit_for(trace, report)


def cmd_replay(args) -> int:
    original = Path(args.trace).read_text()
    again = replay(Trace.loads(original)).dumps()
    if args.out:
        Path(args.out).write_text(again)
    identical = again == original
    _emit({"identical": identical})
    return EXIT_OK if identical else EXIT_FAILED


def _write_rows(rows: list[dict], columns: list[str], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=1)
    else:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buffer.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_cylinders(args) -> int:
    seq = map_from_spec(_parse_json_arg(args.map))
    if not all(m.finite for m in seq.maps):
        raise SpecError("cylinder tables need finitely many branches")
    rows = [{"word": "".join(map(str, node.word)) if max(node.word, default=0) < 10 else
             ".".join(map(str, node.word)),
             "lo": to_text(node.lo), "hi": to_text(node.hi), "length": to_text(node.length),
             "lo_float": float(node.lo), "hi_float": float(node.hi)}
            for node in cylinder_table(seq, args.depth, args.start)]
    _write_rows(rows, ["word", "lo", "hi", "length", "lo_float", "hi_float"], args.format, args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    seq = map_from_spec(_parse_json_arg(args.map))
    targets = target_from_spec(_parse_json_arg(args.target))
    make = constants_A if args.assumption == "A" else constants_B
    ledger = make(seq, args.gamma, targets, args.n_cap).to_json()
    text = json.dumps(ledger, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def parse_scale(text: str) -> Fraction:
    """``p/q``, a decimal, or a power such as ``3^-6``."""
    if "^" in text:
        base, exponent = text.split("^", 1)
        return parse_rational(base) ** int(exponent)
    return parse_rational(text)


def cmd_subsystem(args) -> int:
    ifs = IFS1D.from_spec(_parse_json_arg(args.ifs))
    rows = []
    for raw in args.r:
        r = parse_scale(raw)
        sub = subsystem(ifs, r)
        dim = subsystem_dimension(sub)
        row = {"r": to_text(r), "candidates": len(sub.candidates), "count": sub.count,
               "gap": None if sub.gap is None else to_text(sub.gap),
               "dimension": dim.lower_bound, "moran": dim.moran}
        if args.mass_samples and sub.count > 1:
            mass = mass_distribution_check(sub, args.mass_samples, args.seed)
            row.update({"mass_max_ratio": mass.max_ratio, "mass_violations": mass.violations})
        rows.append(row)
    columns = ["r", "candidates", "count", "gap", "dimension", "moran"]
    if args.mass_samples:
        columns += ["mass_max_ratio", "mass_violations"]
    _write_rows(rows, columns, args.format, args.out)
    return EXIT_OK


def _sweep_cell(cell: tuple) -> dict:
    index, spec = cell
    try:
        config, seq, targets, alice, bob = build(spec)
        trace = run(config, alice, bob, unit_cube(config.dimension))
        report = verify_trace(seq, targets, trace)
        return {"cell": index, "gamma": to_text(config.gamma), "policy": spec["bob"]["kind"],
                "seed": spec["seed"], "status": trace.status, "rounds": len(trace.rounds),
                "min_distance": report["orbit"].get("min_distance"),
                "min_ratio": report["orbit"].get("min_ratio"), "ok": report["ok"]}
    except (SpecError, InvalidConfig, InvalidMapSpec, InvalidTarget, PolicyError,
            UnsupportedAssumption, CertificateTooWeak, ValueError) as exc:
        return {"cell": index, "gamma": str(spec.get("gamma")), "policy": spec["bob"]["kind"],
                "seed": spec["seed"], "status": "error", "rounds": 0, "min_distance": None,
                "min_ratio": None, "ok": False, "error": str(exc)}


def cmd_sweep(args) -> int:
    base = load_json(args.spec)
    cells = []
    for gamma in args.gammas.split(","):
        for policy in args.policies.split(","):
            for seed in range(args.seeds):
                spec = dict(base, gamma=gamma.strip(), seed=seed)
                spec["bob"] = dict(base.get("bob", {}), kind=policy.strip(), seed=seed)
                cells.append((len(cells), spec))
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    rows.sort(key=lambda row: row["cell"])
    columns = ["cell", "gamma", "policy", "seed", "status", "rounds", "min_distance", "min_ratio", "ok"]
    for row in rows:
        row.pop("error", None)
    _write_rows(rows, columns, args.format, args.out)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="twistwin",
        description="Hyperplane absolute game experiments. Exit codes: 0 ok, 1 verification "
                    "failed, 2 invalid spec, 3 precision exhausted. The default big-float "
                    "precision is read from TWISTWIN_PRECISION (bits).")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="play a game from an experiment spec; writes trace.json and verify.json")
    p.add_argument("spec")
    p.add_argument("--out", help="output directory (default: the spec's 'output' or .)")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("verify", help="re-check a trace against its experiment spec")
    p.add_argument("spec")
    p.add_argument("trace")
    p.add_argument("--horizon", type=int, help="orbit times to check in empirical mode")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("replay", help="replay a trace and compare byte for byte")
    p.add_argument("trace")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_replay)

    analyze = sub.add_parser("analyze", help="tables for plotting").add_subparsers(dest="kind", required=True)

    p = analyze.add_parser("cylinders", help="columns: word, lo, hi, length, lo_float, hi_float")
    p.add_argument("--map", required=True, help='map spec JSON, e.g. \'{"kind":"times","m":2}\'')
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_cylinders)

    p = analyze.add_parser("constants", help="strategy constant ledger as JSON")
    p.add_argument("--map", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--assumption", choices=("A", "B"), default="B")
    p.add_argument("--target", default='{"kind":"identity"}')
    p.add_argument("--n-cap", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_constants)

    p = analyze.add_parser("subsystem", help="columns: r, candidates, count, gap, dimension, moran "
                                             "[, mass_max_ratio, mass_violations]")
    p.add_argument("--ifs", required=True, help='IFS JSON, e.g. \'{"maps":[{"ratio":"1/3","offset":"0"},'
                                                 '{"ratio":"1/3","offset":"2/3"}]}\'')
    p.add_argument("--r", nargs="+", required=True, help="scales such as 1/81 or 3^-6")
    p.add_argument("--mass-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_subsystem)

    p = analyze.add_parser("sweep", help="columns: cell, gamma, policy, seed, status, rounds, "
                                         "min_distance, min_ratio, ok")
    p.add_argument("spec", help="base experiment spec")
    p.add_argument("--gammas", required=True, help="comma separated")
    p.add_argument("--policies", default="random", help="comma separated Bob kinds")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sweep)
    return top


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.handler(args)
    except PrecisionExhausted as exc:
        return _error("precision_exhausted", str(exc), EXIT_PRECISION)
    except (SpecError, InvalidConfig, InvalidMapSpec, InvalidTarget, InvalidIFS, PolicyError,
            UnsupportedAssumption, CertificateTooWeak) as exc:
        return _error("invalid_spec", str(exc), EXIT_INVALID)
    except (ValueError, TypeError, KeyError) as exc:
        return _error("invalid_spec", str(exc), EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
