#!/usr/bin/env python3
"""Reproduce both experiments end to end and print the report tables.

Equivalent to `prefinfer run-all` followed by a console dump of the two
markdown reports. Expect roughly 10-15 minutes at the default training
budget (one dynamic-weight training plus three fixed-weight retrainings).

    python scripts/run_experiments.py --out runs/full --seed 42
"""
import argparse
import sys
from pathlib import Path

from prefinfer import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/full", help="artifact directory")
    parser.add_argument("--seed", type=int, default=42, help="master seed")
    parser.add_argument("--force", action="store_true",
                        help="overwrite an existing run directory")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config_path = out / "config.json"
    if not config_path.exists():
        code = cli.main(["config", "init", "--out", str(out)])
        if code != 0:
            return code

    argv = ["run-all", "--config", str(config_path), "--seed", str(args.seed)]
    if args.force:
        argv.append("--force")
    code = cli.main(argv)
    if code != 0:
        return code

    for name in ("validation.md", "comparison.md"):
        print()
        print((out / name).read_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
