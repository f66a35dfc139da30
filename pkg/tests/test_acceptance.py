"""Acceptance criteria 1-9, one test each, with their time limits.

Each test prints a single line ``criterion N: PASS|FAIL ...``; the lines are
also repeated in the pytest terminal summary. Run this file directly with
``python3 tests/test_acceptance.py`` to get just those lines.
"""

import pytest

from famlab.suites import run_suite

# criterion -> (suite, seconds allowed, description)
CRITERIA = {
    1: ("atoms", 5, "atom partitions are disjoint and join to top"),
    2: ("integration", 2, "integration laws hold exactly"),
    3: ("ptree", 10, "probability-tree calculus"),
    4: ("chebyshev", 2, "binomial moments and Chebyshev bound"),
    5: ("kelley", 60, "Kelley sandwich on threshold sets"),
    6: ("limit", 30, "limit construction checked exhaustively"),
    7: ("tree", 300, "sampled and exhaustive witness search"),
    8: ("assembly", 300, "linked pieces cover and assemble"),
    9: ("determinism", 300, "identical seed gives identical certificate"),
}

LINES: list = []


def check(n):
    name, limit, what = CRITERIA[n]
    res = run_suite(name, seed=0)
    ok = res.holds and res.seconds < limit
    line = (
        f"criterion {n}: {'PASS' if ok else 'FAIL'} {what} "
        f"({len(res.rows) - len(res.failures())}/{len(res.rows)} checks, {res.seconds:.2f}s < {limit}s)"
    )
    LINES.append(line)
    print(line)
    return res, limit


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    res, limit = check(n)
    assert res.holds, res.failures()[:5]
    assert res.seconds < limit


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        check(n)
