"""Run every verification suite at full trial counts and write reports.

Thin wrapper over the bundled desk-scale experiment; equivalent to
`vne verify all-desk-scale` but convenient to edit when poking at one suite.
"""

import argparse
import sys
import time

from vne.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=None, help="override experiment seed")
    ap.add_argument("--out", default="reports", help="report directory")
    ap.add_argument("--experiment", default="all-desk-scale",
                    help="experiment name from the bundled spec")
    args = ap.parse_args(argv)

    cli_args = ["verify", args.experiment, "--out", args.out]
    if args.seed is not None:
        cli_args += ["--seed", str(args.seed)]
    started = time.perf_counter()
    code = cli_main(cli_args)
    print(f"wall time {time.perf_counter() - started:.1f} s")
    return code


if __name__ == "__main__":
    sys.exit(run())
