"""Command-line entry point: run scenarios, the acceptance suite and quick oracles."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coeffield import FieldError, make_field
from .discretize import build_mesh
from .eigensolve import dirichlet_eigen
from .growthrate import TrustCollapse, base_eigenvalue, cesaro_rates, global_growth_rates
from .growthrate import synthetic_trace
from .scenario import ScenarioError, default_output_dir, dumps, load_scenario, run_scenario
from .verification import MODULES, verify_suite


def _load_json_arg(text: str):
    p = Path(text)
    if p.exists():
        text = p.read_text(encoding="utf-8")
    return json.loads(text)


def cmd_run(args) -> int:
    cfg = load_scenario(args.scenario)
    out = Path(args.out) if args.out else default_output_dir() / cfg.name
    result = run_scenario(cfg, out, threads=args.threads)
    for row in result.invariants:
        if not row["passed"]:
            kind = "HARD" if row["hard"] else "soft"
            print(f"{kind} FAIL  {row.get('experiment', '-')}: {row['name']}")
    n_fail = sum(not r["passed"] for r in result.invariants)
    print(f"{cfg.name}: {len(result.invariants)} invariants, {n_fail} failed; "
          f"report at {out / 'report.json'}")
    return result.exit_code


def cmd_verify(args) -> int:
    rows = verify_suite(args.seed, args.only, echo=print)
    passed = sum(r.passed for r in rows)
    print(f"{passed}/{len(rows)} criteria passed (seed {args.seed})")
    if args.json:
        Path(args.json).write_text(dumps({"seed": args.seed, "only": args.only,
                                          "criteria": [r.to_dict() for r in rows]}) + "\n",
                                   encoding="utf-8")
    return 0 if passed == len(rows) else 1


def cmd_eigen(args) -> int:
    cfg = load_scenario(args.scenario)
    fld = cfg.build_field()
    mesh = cfg.mesh()
    ev = dirichlet_eigen(fld, mesh, args.frozen_at)
    print(dumps({"scenario": cfg.name, "t": args.frozen_at, "lambda_h": ev.value,
                 "iterations": ev.iterations, "residual": ev.residual,
                 "n_interior": mesh.n_interior}))
    return 0


def cmd_synthetic(args) -> int:
    sigma = _load_json_arg(args.sigma)
    fld = make_field({"kind": "separable_sigma", "c0": 0.0, "sigma": sigma})
    lam = args.lambda_d
    if lam is None:
        lam = base_eigenvalue(fld, build_mesh(fld.domain, args.n_interior))
    tr = synthetic_trace(lam, fld.reflected(), 0.0, args.tmax, args.dt_record, tag="R_plus")
    T_list = args.T_list or [args.tmax / 1e4, args.tmax / 1e3, args.tmax / 1e2, args.tmax / 10]
    T_list = [T for T in T_list if T >= 2 * args.dt_record]
    lgr, ggr = global_growth_rates(tr, T_list)
    lo, hi = cesaro_rates(tr, "plus", args.tail_fraction, args.tail_start)
    out = {"lambda_d": lam, "t_max": args.tmax, "dt_record": args.dt_record,
           "R_plus": {"mu_bp": lgr.negated().to_dict(), "lambda_bp": ggr.negated().to_dict(),
                      "mu_p": lo.negated().to_dict(), "lambda_b": hi.negated().to_dict()}}
    print(dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pareig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file and write its report")
    p.add_argument("scenario")
    p.add_argument("--out", default=None,
                   help="output directory (default $PAREIG_OUTPUT_DIR/<name>)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--only", choices=MODULES, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", default=None, help="also write the table as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eigen", help="principal eigenvalue of the operator frozen at a time")
    p.add_argument("scenario")
    p.add_argument("--frozen-at", type=float, required=True)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("synthetic-growth",
                       help="R+ growth rates of beta = -lambda t + int sigma")
    p.add_argument("sigma", help="sigma spec as JSON text or a path to a JSON file")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--dt-record", type=float, default=1.0)
    p.add_argument("--lambda-d", type=float, default=None)
    p.add_argument("--n-interior", type=int, default=199)
    p.add_argument("--T-list", type=float, nargs="+", default=None)
    p.add_argument("--tail-fraction", type=float, default=0.5)
    p.add_argument("--tail-start", type=float, default=None)
    p.set_defaults(func=cmd_synthetic)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FieldError, TrustCollapse, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
