"""``exsteer <command> --config <path> [--out DIR] [--n-cells N] [--seed S]``."""

import argparse
import logging
import os
import sys
from dataclasses import replace

from .config import COMMANDS, load_config
from .errors import ConfigError, ExsteerError, ParameterError

__all__ = ["main", "thread_cap"]

logger = logging.getLogger("exsteer")


def thread_cap(environ=None):
    """Worker cap from ``EXSTEER_THREADS`` (``None`` when unset).

    Every command runs serially, so the cap can only lower parallelism
    and never changes a result; it is validated and echoed in the log.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get("EXSTEER_THREADS")
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"EXSTEER_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ParameterError(f"EXSTEER_THREADS must be a positive integer, got {raw!r}")
    return value


def _parser():
    p = argparse.ArgumentParser(prog="exsteer", description="Partial steering of heat-exchanger systems.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="flat key = value scenario file")
    p.add_argument("--out", help="output directory (default: output.dir from the config)")
    p.add_argument("--n-cells", type=int, help="override grid.n_cells")
    p.add_argument("--seed", type=int, help="seed for the randomised selftest checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    from .runner import run_scenario

    try:
        cap = thread_cap()
        cfg = load_config(args.config)
        if args.n_cells is not None:
            if args.n_cells < 8:
                raise ConfigError([f"--n-cells = {args.n_cells} out of range; admissible [8, inf)"])
            cfg = replace(cfg, n_cells=args.n_cells)
        report = run_scenario(cfg, out_dir=args.out, command=args.command, seed=args.seed)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except (ExsteerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cap is not None:
        logger.info("EXSTEER_THREADS=%d (commands run serially)", cap)

    print(f"command     {report.command}")
    print(f"config hash {report.config_hash}")
    print(f"wall clock  {report.wall_clock:.3f} s")
    for note in report.notes:
        print(f"note        {note}")
    for name, passed in report.flags.items():
        print(f"{'PASS' if passed else 'FAIL'}        {name}")
    for path in report.files:
        print(f"wrote       {path}")
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
