"""Claim reports used by the acceptance suite.

Run as a script it prints every report as JSON, so a second process (with a
different hash seed) can be compared byte for byte against the first.
"""

from __future__ import annotations

import json
import sys

from tropdiv import claims
from tropdiv.formats import report_dict, report_json
from tropdiv.harmonic import HarmonicBudget

SEED = 0
THEOREM_BUDGET = HarmonicBudget(max_modifications=2, denominator=8)


def _prop1_budgets():
    b = claims.prop1_budget()
    return {"grid_denominator": b.grid_denominator, "random_points": b.random_points}


def _jobs():
    """(report name, thunk, budgets) for every claim check of the suite."""
    jobs = []
    for i, spec in enumerate(claims.PERTURBED_SPECS):
        jobs.append((f"lemma1/spec{i}", lambda s=spec: claims.check_lemma1(s), {"grid_denominator": 16}))
        jobs.append((f"lemma2/spec{i}", lambda s=spec: claims.check_lemma2(s), {}))
    for n in (2, 3):
        jobs.append((f"prop1/n{n}", lambda n=n: claims.check_prop1(n), _prop1_budgets()))
    for n in (2, 3, 4, 5):
        jobs.append((f"prop2/n{n}", lambda n=n: claims.check_prop2(n, count=50, seed=SEED), {"grid_denominator": 4, "f_samples": 50}))
    jobs.append(("clifford/n2", lambda: claims.check_clifford(2), _prop1_budgets()))
    th = {"max_modifications": THEOREM_BUDGET.max_modifications, "denominator": THEOREM_BUDGET.denominator}
    for n in (2, 3):
        jobs.append((f"theorem/n{n}", lambda n=n: claims.check_theorem(n, budget=THEOREM_BUDGET), th))
    jobs.append(("lemma3", claims.check_lemma3, {}))
    return jobs


JOB_NAMES = [name for name, _, _ in _jobs()]


def build(name: str):
    """Returns (ClaimResult, report JSON text) for one named check."""
    for n, thunk, budgets in _jobs():
        if n == name:
            res = thunk()
            return res, report_json(report_dict(res, SEED, budgets))
    raise KeyError(name)


def main() -> None:
    out = {name: build(name)[1] for name in JOB_NAMES}
    sys.stdout.write(json.dumps(out, sort_keys=True))


if __name__ == "__main__":
    main()
