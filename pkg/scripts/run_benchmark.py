#!/usr/bin/env python3
"""Run the full benchmark verification and dump every artifact.

Equivalent to `cfpp verify --config benchmark.cfg --out out/benchmark`
plus the gate dump; prints the comparison table and the per-criterion
verdicts.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from cfpp import cli

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    return cli.main([
        "verify",
        "--config", str(ROOT / "benchmark.cfg"),
        "--out", str(ROOT / "out" / "benchmark"),
        "--gates-csv",
    ])


if __name__ == "__main__":
    sys.exit(main())
