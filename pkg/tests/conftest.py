import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from ftstab.expr import parse
from ftstab.lyap import LyapunovCandidate, SdeModel


def scalar_model(drift: str, diffusion: str, name: str = "") -> SdeModel:
    return SdeModel(1, 1, (parse(drift, 1),), ((parse(diffusion, 1),),), name)


@pytest.fixture(scope="session")
def ex1_case1():
    return scalar_model("-1/2*spow(x1,1/3)", "spow(x1,2/3)", "ex1-case1")


@pytest.fixture(scope="session")
def ex1_case2():
    return scalar_model("-x1 - 1/2*spow(x1,1/3)", "spow(x1,2/3)", "ex1-case2")


@pytest.fixture(scope="session")
def ex1_case3():
    return scalar_model("-spow(x1,3) - 1/2*spow(x1,1/3)", "spow(x1,2/3)", "ex1-case3")


@pytest.fixture(scope="session")
def ex2():
    drift = (parse("-1/8*spow(x1,1/3) + x2", 2), parse("-x1 - 1/8*spow(x2,1/3)", 2))
    diffusion = (
        (parse("1/2*spow(x1,2/3)", 2), parse("0", 2)),
        (parse("0", 2), parse("1/2*spow(x2,2/3)", 2)),
    )
    return SdeModel(2, 2, drift, diffusion, "ex2")


@pytest.fixture(scope="session")
def ex3():
    return scalar_model("-1/2*spow(x1,3/5)", "spow(x1,4/5)", "ex3")


@pytest.fixture(scope="session")
def det_cubicroot():
    return scalar_model("-spow(x1,1/3)", "0", "det-cubicroot")


@pytest.fixture(scope="session")
def v_square():
    return LyapunovCandidate.from_expr(parse("x1^2", 1), 1)


@pytest.fixture(scope="session")
def v_square_2d():
    return LyapunovCandidate.from_expr(parse("x1^2 + x2^2", 2), 2)


@pytest.fixture(scope="session")
def v_cube():
    return LyapunovCandidate.from_expr(parse("abs(x1)^3", 1), 1)
