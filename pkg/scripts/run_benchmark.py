"""Run the full pipeline on the 16-contract fixture and write reports.

    python3 scripts/run_benchmark.py [--out out/benchmark]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from contract_debt.cli import main as cli_main

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "benchmark"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/benchmark")
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()
    t0 = time.perf_counter()
    code = cli_main([
        "assess",
        "--portfolio", str(FIXTURE / "portfolio.yaml"),
        "--findings", *sorted(str(p) for p in (FIXTURE / "findings").glob("*.json")),
        "--manual", str(FIXTURE / "manual.json"),
        "--quote", str(FIXTURE / "quote.yaml"),
        "--out", args.out,
        "--jobs", str(args.jobs),
        "--format", "csv",
    ])
    print(f"exit {code} in {time.perf_counter() - t0:.2f}s; reports in {args.out}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
