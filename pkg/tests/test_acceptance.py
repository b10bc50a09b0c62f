"""Acceptance criteria 1-10 at their stated sample sizes and tolerances.

Set HOLOCRIT_ACCEPTANCE=quick for a reduced-size smoke run.  Each criterion
prints one ``[PASS]``/``[FAIL]`` line followed by its individual checks.
"""

import os

import pytest

from holocrit.verify import CRITERIA, _beta_profiles

SIZE = os.environ.get("HOLOCRIT_ACCEPTANCE", "full")

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def beta_profiles():
    return _beta_profiles(SIZE, 404, (1, 2, 3))


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, request, capsys):
    if number in (4, 5):
        res = CRITERIA[number](SIZE, profiles=request.getfixturevalue("beta_profiles"))
    else:
        res = CRITERIA[number](SIZE)
    with capsys.disabled():
        print()
        print(res.line())
        for d in res.details:
            print("    " + d)
    assert res.passed, "\n".join([res.line(), *res.details])
