"""Run every scenario file in scenarios/ and summarise the exit codes.

    python scripts/run_scenarios.py --out runs
"""

import argparse
import pathlib
import sys

from pareig.scenario import load_scenario, run_scenario

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="pareig-runs")
    parser.add_argument("--threads", type=int, default=2)
    args = parser.parse_args(argv)
    worst = 0
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        cfg = load_scenario(path)
        res = run_scenario(cfg, pathlib.Path(args.out) / cfg.name, threads=args.threads)
        n_fail = sum(not r["passed"] for r in res.invariants)
        print(f"{cfg.name:20s} exit {res.exit_code}  {len(res.invariants)} invariants, "
              f"{n_fail} failed")
        worst = max(worst, res.exit_code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
