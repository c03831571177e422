"""``moebius`` command line.

Exit codes: 0 when every requested check passes, 2 on any FAIL, 3 on
INCONCLUSIVE (and no FAIL), 64 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import remainder, sieve, summatory, verifier

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 2, 3, 64
CHECKPOINT_FILE = "checkpoints.csv"
DEFAULT_CACHE_DIR = "moebius-cache"
R4_THRESHOLD = "0.000154"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    segment_size: int = sieve.DEFAULT_SEGMENT_SIZE
    workers: int = 1
    stride: int = summatory.RENORM_BLOCK
    checkpoint_dir: Path = Path(DEFAULT_CACHE_DIR)
    output: Path | None = None
    precision: str = "standard"
    timing: bool = True

    def __post_init__(self):
        if self.segment_size < 10**4:
            raise UsageError("--segment-size must be >= 10000")
        if self.segment_size > sieve.MAX_SEGMENT_SIZE:
            raise UsageError(f"--segment-size must be <= {sieve.MAX_SEGMENT_SIZE}")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.stride < 1 or self.stride % summatory.RENORM_BLOCK:
            raise UsageError(f"--stride must be a positive multiple of {summatory.RENORM_BLOCK}")


def _int(text: str) -> int:
    """Integers, also written as 1e8 or 1_000_000."""
    try:
        return int(text.replace("_", ""))
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--segment-size", type=_int, default=sieve.DEFAULT_SEGMENT_SIZE)
    common.add_argument("--output", type=Path, default=None,
                        help="write the JSON/CSV result here instead of stdout")
    common.add_argument("--precision", choices=("standard", "shadow"), default="standard")
    common.add_argument("--no-timing", action="store_true",
                        help="omit wall times so that reports are byte-reproducible")

    p = _Parser(prog="moebius", description="Summatory functions of mu and Lambda, and checks of explicit bounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("checkpoint", parents=[common], help="stream and persist summatory checkpoints")
    c.add_argument("--upto", type=_int, required=True)
    c.add_argument("--stride", type=_int, default=summatory.RENORM_BLOCK)
    c.add_argument("--dir", type=Path, default=None)

    v = sub.add_parser("verify", parents=[common], help="verify catalog bounds")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--id", action="append", dest="ids")
    g.add_argument("--all", action="store_true")
    g.add_argument("--list", action="store_true", help="list bound ids")
    v.add_argument("--lo", type=_int, default=None, help="override the range (single --id only)")
    v.add_argument("--hi", type=_int, default=None)
    v.add_argument("--integers", action="store_true", help="check integer X only")

    sub.add_parser("constants", parents=[common], help="recompute the published numerical constants")

    s = sub.add_parser("scan-r4", parents=[common], help="windowed scan of sum Lambda(a) R(X/a)")
    s.add_argument("--a-lo", type=_int, required=True)
    s.add_argument("--a-hi", type=_int, required=True)
    s.add_argument("--x-lo", type=_int, required=True)
    s.add_argument("--x-hi", type=_int, required=True)
    s.add_argument("--threshold", default=R4_THRESHOLD, help="pass if max ratio is below this")

    r = sub.add_parser("report", parents=[common], help="summarise a checkpoint directory")
    r.add_argument("--dir", type=Path, default=None)
    return p


def _cache_dir(arg: Path | None) -> Path:
    if arg is not None:
        return arg
    return Path(os.environ.get("MOEBIUS_CACHE_DIR", DEFAULT_CACHE_DIR))


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        cfg.output.parent.mkdir(parents=True, exist_ok=True)
        cfg.output.write_text(text if text.endswith("\n") else text + "\n")


def _exit_for(statuses) -> int:
    statuses = set(statuses)
    if verifier.FAIL in statuses:
        return EXIT_FAIL
    if verifier.INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- checkpoint ------------------------------------------------------------

def read_checkpoints(path: Path) -> list[summatory.SummatoryCheckpoint]:
    """Rows of a checkpoint file up to the first malformed or out-of-order
    line (a crash can leave a torn last line)."""
    text = path.read_text()
    lines = text.split("\n")
    if lines[0] != summatory.SummatoryCheckpoint.CSV_HEADER:
        raise UsageError(f"{path}: header does not match the checkpoint format")
    rows = []
    complete = lines[1:-1] if not text.endswith("\n") else lines[1:]
    for line in complete:
        if not line:
            continue
        try:
            cp = summatory.SummatoryCheckpoint.from_csv_row(line)
        except ValueError:
            break
        if rows and cp.X <= rows[-1].X:
            break
        rows.append(cp)
    return rows


def run_checkpoint(cfg: RunConfig, upto: int, directory: Path) -> int:
    if upto < 1:
        raise UsageError("--upto must be >= 1")
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / CHECKPOINT_FILE
    header = summatory.SummatoryCheckpoint.CSV_HEADER
    keep: list[summatory.SummatoryCheckpoint] = []
    if path.exists() and path.stat().st_size:
        rows = read_checkpoints(path)
        # resume from the last row sitting on a stride mark
        while rows and (rows[-1].X % cfg.stride or rows[-1].X > upto):
            rows.pop()
        keep = rows
    state = summatory.StreamState.from_checkpoint(keep[-1]) if keep else None
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for cp in keep:
            fh.write(cp.csv_row() + "\n")
        fh.flush()
        if not keep or keep[-1].X < upto:
            for cp in summatory.stream_checkpoints(upto, cfg.stride, cfg.segment_size, cfg.workers, state):
                fh.write(cp.csv_row() + "\n")
                fh.flush()
    last = read_checkpoints(path)[-1]
    print(f"{path}: {last.X} M={last.M} psi={last.psi.value!r}", file=sys.stderr)
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def run_verify(cfg: RunConfig, args) -> int:
    if args.list:
        for spec in verifier.builtin_catalog() + [verifier.fail_demo()]:
            print(f"{spec.id:<12} {spec.paper_anchor}")
        return EXIT_OK
    if args.all:
        specs = verifier.builtin_catalog()
    else:
        specs = []
        for i in args.ids:
            try:
                specs.append(verifier.lookup(i))
            except KeyError:
                raise UsageError(f"unknown bound id {i!r}; see `moebius verify --list`") from None
    if args.lo is not None or args.hi is not None:
        if len(specs) != 1:
            raise UsageError("--lo/--hi need exactly one --id")
        lo = args.lo if args.lo is not None else specs[0].range[0]
        hi = args.hi if args.hi is not None else specs[0].range[1]
        try:
            specs = [specs[0].with_range(lo, hi)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.integers:
        specs = [s.on_integers() for s in specs]
    try:
        reports = verifier.verify_many(specs, cfg.segment_size, cfg.workers,
                                       shadow=cfg.precision == "shadow")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(cfg, verifier.reports_to_json(reports, timing=cfg.timing))
    print(verifier.summary_table(reports), file=sys.stderr)
    return _exit_for(r.status for r in reports)


# -- constants -------------------------------------------------------------

def run_constants(cfg: RunConfig) -> int:
    checks = verifier.constant_checks()
    _emit(cfg, json.dumps([c.to_dict() for c in checks], indent=2))
    head = f"{'name':<14} {'status':<13} {'computed':>22} {'err':>10}  claimed"
    lines = [head, "-" * len(head)]
    for c in checks:
        lines.append(f"{c.name:<14} {c.status:<13} {c.computed:>22.12f} {c.err:>10.2g}  {c.paper_value}")
    print("\n".join(lines), file=sys.stderr)
    return _exit_for(c.status for c in checks)


# -- scan-r4 ---------------------------------------------------------------

def run_scan_r4(cfg: RunConfig, args) -> int:
    try:
        res = remainder.windowed_R4_scan((args.a_lo, args.a_hi), (args.x_lo, args.x_hi),
                                         chunk=cfg.segment_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(cfg, remainder.R4ScanResult.CSV_HEADER + "\n" + res.csv_row() + "\n")
    thr = float(args.threshold)
    print(f"max ratio {res.max_ratio:.12g} at X={res.witness_x} ({res.witness_side}), "
          f"err {float(res.err_bound):.3g}, {res.recompute_checks} recompute checks, "
          f"max drift {res.recompute_max_diff:.3g}", file=sys.stderr)
    if not res.recompute_ok or res.max_ratio - res.err_bound > thr:
        return EXIT_FAIL
    if res.max_ratio + res.err_bound > thr:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- report ----------------------------------------------------------------

def run_report(cfg: RunConfig, directory: Path) -> int:
    if not directory.is_dir():
        raise UsageError(f"no such directory: {directory}")
    out: dict = {"dir": str(directory)}
    statuses = []
    path = directory / CHECKPOINT_FILE
    if path.exists():
        rows = read_checkpoints(path)
        out["checkpoints"] = len(rows)
        if rows:
            last = rows[-1]
            out["last"] = {"X": last.X, "M": last.M, "psi": last.psi.value, "psi_err": last.psi.error,
                           "m": last.m.value, "m_err": last.m.error, "Q": last.Q,
                           "absM_integral": last.absM_integral}
    reports = []
    for f in sorted(directory.glob("*.json")):
        try:
            data = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        items = data if isinstance(data, list) else [data]
        for item in items:
            if isinstance(item, dict) and "status" in item and "id" in item:
                reports.append({"file": f.name, "id": item["id"], "status": item["status"],
                                "ratio": item.get("ratio"), "witness_x": item.get("witness_x")})
                statuses.append(item["status"])
    out["reports"] = reports
    _emit(cfg, json.dumps(out, indent=2))
    return _exit_for(statuses)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(command=args.command, segment_size=args.segment_size, workers=args.workers,
                        stride=getattr(args, "stride", summatory.RENORM_BLOCK),
                        checkpoint_dir=_cache_dir(getattr(args, "dir", None)),
                        output=args.output, precision=args.precision, timing=not args.no_timing)
        if cfg.command == "checkpoint":
            return run_checkpoint(cfg, args.upto, cfg.checkpoint_dir)
        if cfg.command == "verify":
            return run_verify(cfg, args)
        if cfg.command == "constants":
            return run_constants(cfg)
        if cfg.command == "scan-r4":
            return run_scan_r4(cfg, args)
        return run_report(cfg, cfg.checkpoint_dir)
    except UsageError as exc:
        print(f"moebius: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
