#!/usr/bin/env python3
"""Run the full band-selection experiment end to end on a demo workspace.

Generates the synthetic dataset if the workspace is empty, then runs every
pipeline stage (ingest through tiling) and prints the evolution summary.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from bandsel.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("workspace", type=Path, help="workspace directory")
    parser.add_argument("--seed", type=int, default=None, help="override split/UMDA seeds")
    parser.add_argument("--force", action="store_true", help="ignore stage checkpoints")
    args = parser.parse_args()

    cfg = args.workspace / "config.json"
    if not cfg.exists():
        subprocess.run(
            [
                sys.executable,
                str(Path(__file__).with_name("make_demo_dataset.py")),
                str(args.workspace),
            ],
            check=True,
        )

    argv = ["pipeline", "--config", str(cfg)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    if args.force:
        argv.append("--force")
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
