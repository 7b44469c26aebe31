"""Seed sweep for the stationary random criterion.

Counts how often the 3-sigma Cesaro check fails across blocks of seeds, to
measure the false-failure rate of the fixed tolerance.

    python scripts/random_seed_sweep.py --blocks 40
"""

import argparse

from pareig.verification import random_ergodic


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--blocks", type=int, default=20)
    parser.add_argument("--block-size", type=int, default=5)
    args = parser.parse_args(argv)
    fails = 0
    for b in range(args.blocks):
        seed = b * args.block_size
        ok, det = random_ergodic(seed)
        worst = max(v["max_dev_in_sigma"] for v in det["cesaro"].values())
        fails += not ok
        print(f"seeds {seed:4d}..{seed + args.block_size - 1:4d}  worst {worst:5.2f} sigma  "
              f"{'ok' if ok else 'FAIL'}")
    print(f"{fails}/{args.blocks} blocks failed")


if __name__ == "__main__":
    main()
