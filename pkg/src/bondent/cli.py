"""Command-line interface: ``bondent {scan,point,verify,report}``.

Options may also come from a plain-text config file (``key = value`` per
line, keys spelled like the long flags with or without the leading dashes);
flags given on the command line win. ``BONDENT_WORKERS`` sets the default
worker count.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from bondent import oracle
from bondent.models import BondModelSpec, LatticeSpec
from bondent.scan import (
    DEFAULT_BOND_DIM,
    DEFAULT_ZERO_THRESHOLD,
    FeatureReport,
    ScanSpec,
    TooFewPointsError,
    detect_features,
    read_csv,
    run_point,
    run_scan,
    write_csv,
    write_report,
)
from bondent.schedule import DEFAULT_MAX_SWEEPS, DEFAULT_TAUS, DEFAULT_TOLERANCE, EvolutionSchedule

log = logging.getLogger("bondent")

# verify-subcommand settings: N=6 rings, one parameter point per family
VERIFY_RINGS = {
    "ising": BondModelSpec.ising(0.5),
    "xy": BondModelSpec.xy(0.5, 0.5),
    "xxz": BondModelSpec.xxz(1.5, 0.5),
}
VERIFY_OVERLAP = 1 - 1e-6
BETHE_REFERENCE = (1.5, 0.0866, 0.0005)


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["ising", "xy", "xxz"], default="ising")
    p.add_argument("--dim", type=int, choices=[1, 2, 3], default=1)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--field", type=float, default=0.0)
    p.add_argument("--bond-dim", type=int, default=None)
    p.add_argument("--tau-stages", type=_float_list, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-sweeps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=Path, default=None, help="key = value file; flags override it")


def _add_threshold_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zero-threshold", type=float, default=DEFAULT_ZERO_THRESHOLD)
    p.add_argument("--jump-threshold", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bondent", description="Entanglement per bond of spin-1/2 lattice models")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="sweep one parameter, write CSV + JSON")
    _add_model_args(scan)
    _add_threshold_args(scan)
    scan.add_argument("--sweep", choices=["field", "gamma", "delta"], default="field")
    scan.add_argument("--start", type=float, default=None)
    scan.add_argument("--stop", type=float, default=None)
    scan.add_argument("--step", type=float, default=None)
    scan.add_argument("--workers", type=int, default=None)
    scan.add_argument("--out", type=Path, default=Path("scan"))

    point = sub.add_parser("point", help="single parameter point, print the entropy report")
    _add_model_args(point)

    verify = sub.add_parser("verify", help="oracle cross-checks")
    verify.add_argument("--sites", type=int, default=6)
    verify.add_argument("--seed", type=int, default=0)

    rep = sub.add_parser("report", help="re-run feature detection on a scan CSV")
    rep.add_argument("csv", type=Path)
    _add_threshold_args(rep)
    rep.add_argument("--out", type=Path, default=None)
    return parser


def load_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path is None:
        return args
    try:
        cfg = load_config(cfg_path)
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    except ConfigError as exc:
        parser.error(str(exc))
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {a.dest: a for a in sub._actions}  # noqa: SLF001
    defaults = {}
    for key, value in cfg.items():
        if key not in known or key in ("help", "config"):
            parser.error(f"unknown config key {key!r}")
        action = known[key]
        try:
            defaults[key] = action.type(value) if action.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"bad value for config key {key!r}: {exc}")
        if action.choices is not None and defaults[key] not in action.choices:
            parser.error(f"config key {key!r} must be one of {list(action.choices)}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _model_from_args(args) -> BondModelSpec:
    lattice = LatticeSpec(args.dim)
    if args.model == "ising":
        if args.gamma is not None and args.gamma != 1.0:
            raise ValueError("--gamma is fixed to 1 for the Ising model; use --model xy")
        return BondModelSpec("XY", field=args.field, gamma=1.0, lattice=lattice)
    if args.model == "xy":
        return BondModelSpec("XY", field=args.field, gamma=1.0 if args.gamma is None else args.gamma, lattice=lattice)
    return BondModelSpec("XXZ", field=args.field, delta=1.0 if args.delta is None else args.delta, lattice=lattice)


def _schedule_from_args(args) -> EvolutionSchedule:
    return EvolutionSchedule(
        tuple(args.tau_stages) if args.tau_stages else DEFAULT_TAUS,
        args.tolerance if args.tolerance is not None else DEFAULT_TOLERANCE[args.dim],
        args.max_sweeps if args.max_sweeps is not None else DEFAULT_MAX_SWEEPS,
    )


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("BONDENT_WORKERS")
    return int(env) if env else 1


def cmd_scan(args) -> int:
    if args.model == "ising" and args.sweep == "gamma":
        raise ValueError("cannot sweep gamma for the Ising model; use --model xy")
    if args.start is None or args.stop is None or args.step is None:
        raise ValueError("scan needs --start, --stop and --step")
    spec = ScanSpec(
        _model_from_args(args),
        args.sweep,
        args.start,
        args.stop,
        args.step,
        bond_dim=args.bond_dim or DEFAULT_BOND_DIM[args.dim],
        schedule=_schedule_from_args(args),
        seed=args.seed,
        workers=_workers(args),
    )
    t0 = time.perf_counter()
    rows = run_scan(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out.with_name(out.name + ".csv"), out.with_name(out.name + ".json")
    write_csv(rows, csv_path, spec.coordination)
    prov = spec.as_dict()
    if len(rows) >= 3:
        rep = detect_features(rows, args.zero_threshold, args.jump_threshold, provenance=prov)
    else:
        rep = FeatureReport([], dict(prov, point_converged=[r.converged for r in rows]))
        if rows:
            rep.warnings.append("fewer than 3 points; feature detection skipped")
    rep.warnings.extend(f"point {r.sweep_value}: {r.error}" for r in rows if r.error)
    write_report(rep, json_path)
    log.info("scan of %d points took %.1f s", len(rows), time.perf_counter() - t0)
    print(f"wrote {csv_path} and {json_path} ({len(rows)} points, {len(rep.features)} features)")
    return 0


def cmd_point(args) -> int:
    model = _model_from_args(args)
    rep, conv = run_point(model, args.bond_dim or DEFAULT_BOND_DIM[args.dim], _schedule_from_args(args), args.seed)
    out = rep.as_dict()
    out.update(
        model=model.as_dict(),
        converged=conv.converged,
        sweeps_used=conv.sweeps_used,
        final_tau=conv.final_tau,
        final_delta=conv.final_delta,
        discarded_weight=conv.discarded_weight,
    )
    print(json.dumps(out, indent=2))
    return 0


def run_verification(sites: int = 6, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Oracle cross-checks; returns ``(name, passed, detail)`` per check."""
    results = []
    for name, model in VERIFY_RINGS.items():
        ring = oracle.RingSpec(model, sites)
        _, exact = oracle.exact_ground(ring, seed)
        evolved = oracle.trotter_evolve_dense(ring, EvolutionSchedule.default(1), seed)
        overlap = abs(float(exact @ evolved))
        results.append((f"trotter-vs-ed[{name}, N={sites}]", overlap >= VERIFY_OVERLAP, f"overlap = {overlap:.12f}"))
    delta, expected, tol = BETHE_REFERENCE
    hc = oracle.bethe_critical_field(delta)
    results.append((f"bethe-hc[delta={delta}]", abs(hc - expected) <= tol, f"h_c = {hc:.6f} (expected {expected} +- {tol})"))
    return results


def cmd_verify(args) -> int:
    ok = True
    for name, passed, detail in run_verification(args.sites, args.seed):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return 0 if ok else 1


def cmd_report(args) -> int:
    rows = read_csv(args.csv)
    rep = detect_features(rows, args.zero_threshold, args.jump_threshold, provenance={"source": str(args.csv)})
    if args.out is not None:
        write_report(rep, args.out)
    print(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
    return 0


COMMANDS = {"scan": cmd_scan, "point": cmd_point, "verify": cmd_verify, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except TooFewPointsError as exc:
        print(f"error: too few points: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
