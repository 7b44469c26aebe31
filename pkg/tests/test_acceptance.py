"""The twelve acceptance criteria at their stated tolerances.

Each test prints one pass/fail line; the lines are collected again in the
terminal summary as a table.
"""

import json

import pytest

from pareig.verification import CRITERIA, run_criterion


@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CRITERIA])
def test_criterion(cid, acceptance_log):
    row = run_criterion(cid, seed=0)
    line = row.line()
    print(line)
    acceptance_log.append(line)
    assert row.passed, json.dumps(row.details, default=str, indent=1)[:4000]
