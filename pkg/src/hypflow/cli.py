"""``hypflow`` command line.

Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 invalid input.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

from . import experiments
from .config import ConfigError, load_config
from .grid import DomainError
from .mass import MassError
from .shapes import ShapeError

log = logging.getLogger("hypflow")

INVALID_INPUT = (ConfigError, ShapeError, DomainError, MassError)


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):           # numpy scalars
        return _jsonable(obj.item())
    return obj


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _run_one(command, path, out_dir, scale, seed, jobs):
    """Run one experiment; returns (exit code, message).  Safe to call in a worker."""
    try:
        cfg = load_config(path).scaled(scale)
        target = out_dir or cfg.out or "results"
        fn = experiments.COMMANDS[command]
        if command == "convergence" and jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outcome = fn(cfg, mapper=pool.map)
        else:
            outcome = fn(cfg)
    except INVALID_INPUT as exc:
        return 2, f"{path}: invalid input: {exc}"
    outcome.summary["seed"] = seed
    outcome.summary["tolerance_scale"] = scale
    outcome.summary["passed"] = not outcome.failures
    outcome.summary["failures"] = list(outcome.failures)
    stem = os.path.join(target, f"{cfg.name}-{command}")
    atomic_write(stem + ".json", json.dumps(_jsonable(outcome.summary), indent=2, sort_keys=True) + "\n")
    for name, (header, rows) in outcome.tables.items():
        atomic_write(f"{stem}-{name}.csv", csv_text(header, rows))
    status = "PASS" if outcome.exit_code == 0 else "FAIL " + ", ".join(outcome.failures)
    return outcome.exit_code, f"{path}: {status} -> {stem}.json"


def build_parser():
    parser = argparse.ArgumentParser(prog="hypflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in experiments.COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", action="append", required=True, metavar="PATH",
                       help="experiment config (JSON); repeat for several experiments")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
        p.add_argument("--seed", type=int, default=None, help="reserved; recorded in outputs")
        p.add_argument("--tolerance-scale", type=float, default=1.0, metavar="FACTOR",
                       help="multiply every tolerance by FACTOR")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return 2
    if not args.tolerance_scale > 0:
        print("--tolerance-scale must be positive", file=sys.stderr)
        return 2
    calls = [(args.command, p, args.out, args.tolerance_scale, args.seed) for p in args.config]
    if len(calls) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, *zip(*calls), [1] * len(calls)))
    else:
        results = [_run_one(*c, args.jobs) for c in calls]
    for code, msg in results:
        print(msg, file=sys.stderr if code else sys.stdout)
    return max(code for code, _ in results)


if __name__ == "__main__":
    sys.exit(main())
