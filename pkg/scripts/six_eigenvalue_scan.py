"""Print the six eigenvalues on R, R+ and R- for a named field.

Separable fields use the exact synthetic log-norm; other fields run the PDE.

    python scripts/six_eigenvalue_scan.py log-oscillatory --tmax 1e6
    python scripts/six_eigenvalue_scan.py periodic-drift --tmax 100 --pde
"""

import argparse
import math

from pareig.coeffield import Domain1D, make_field
from pareig.discretize import build_mesh
from pareig.growthrate import INTERVALS, NAMES, pde_report, synthetic_report
from pareig.stepper import StepScheme
from pareig.suite import NAMED, named_field


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("field", choices=sorted(NAMED))
    parser.add_argument("--tmax", type=float, default=1e5)
    parser.add_argument("--n-interior", type=int, default=99)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--pde", action="store_true", help="force the PDE path")
    parser.add_argument("--tail-start", type=float, default=None,
                        help="start of the Cesaro tail (default tmax/100 synthetic, tmax/2 PDE)")
    args = parser.parse_args(argv)

    fld = make_field(named_field(args.field))
    mesh = build_mesh(Domain1D(), args.n_interior)
    T_list = [args.tmax / 1e4, args.tmax / 1e3, args.tmax / 1e2, args.tmax / 10]
    if fld.separable and fld.ab_static and not args.pde:
        dt_record = min(1.0, args.tmax / 1e5)
        T_list = [T for T in T_list if T >= 2 * dt_record]
        tail = args.tail_start if args.tail_start is not None else args.tmax / 100
        report, _ = synthetic_report(fld, args.tmax, args.tmax, dt_record, T_list=T_list,
                                     tail_start=tail, mesh=mesh)
    else:
        T_list = [args.tmax / 16, args.tmax / 8, args.tmax / 4]
        report, _ = pde_report(fld, mesh, StepScheme(args.dt), args.tmax, args.tmax, 3.0, 10,
                               T_list=T_list, tail_start=args.tail_start)

    print(f"{'':10s}" + "".join(f"{n:>14s}" for n in NAMES))
    for iv in INTERVALS:
        cells = []
        for n in NAMES:
            v = report.value(iv, n)
            cells.append(f"{v:14.6f}" if math.isfinite(v) else f"{v:>14}")
        print(f"{iv:10s}" + "".join(cells))
    bad = [c["name"] for c in report.checks if not c["passed"]]
    print("ordering checks:", "all pass" if not bad else f"failed {bad}")


if __name__ == "__main__":
    main()
