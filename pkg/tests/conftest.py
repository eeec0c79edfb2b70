from fractions import Fraction as F

import numpy as np
import pytest

from countmech import PrivacyParam


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def fr(rows):
    """Object array of Fractions from nested numbers or ``"p/q"`` strings."""
    return np.array([[F(x) for x in row] for row in rows], dtype=object)


@pytest.fixture
def lam2():
    return PrivacyParam.from_lambda(2)


@pytest.fixture
def uniform3():
    return [F(1, 3)] * 3


# Matrices from the n=3, lambda=2, uniform-z worked example.
PSI_B1 = fr([["2/5", "1/4", "7/20"], ["1/5", "1/2", "3/10"], ["2/5", "1/4", "7/20"]])
PSI_B6 = fr([["5/6", 0, "1/6"], ["4/6", 0, "2/6"], ["5/6", 0, "1/6"]])
FIRST_COLUMN = fr([[1, 0, 0]] * 3)
TRUNC_GEO_3 = fr([["2/3", "1/6", "1/6"], ["1/3", "1/3", "1/3"], ["1/6", "1/6", "2/3"]])
B1 = fr([[0, 0, 0], [1, 0, "2/3"], [0, 1, "1/3"], [0, 0, 0]])
B2 = fr([[0, 0, "14/30"], [1, 0, 0], [0, 1, "2/30"], [0, 0, "14/30"]])
B3 = fr([["5/6", 0, "1/3"], [0, 0, 0], [0, 0, "2/3"], ["1/6", 1, 0]])
B4 = fr([["7/6", 0, 0], [0, 0, 0], ["2/3", 0, 0], ["7/6", 0, 0]])
B6 = fr([["7/6", 0, 0], [0, 0, 0], [0, 0, "2/3"], ["7/6", 0, 0]])
