"""Run the acceptance criteria and write the table as JSON.

    python scripts/acceptance_table.py --seed 0 --out acceptance.json
"""

import argparse
import sys

from pareig.scenario import dumps
from pareig.verification import verify_suite


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    rows = verify_suite(args.seed, echo=print)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps([r.to_dict() for r in rows]) + "\n")
    return 0 if all(r.passed for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
