"""Shared fixtures: bundled case paths and small synthetic networks."""

from pathlib import Path

import pytest

from acopf_tighten import netmodel

CASE_DIR = Path(__file__).resolve().parent.parent / "data" / "cases"

# Two buses, generators on both ends so that any voltage profile forces a
# unique dispatch (used by the grid-enumeration oracle).
TOY2_TEXT = """
function mpc = toy2
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0  0  0 0 1 1 0 230 1 1.1 0.9;
    2 1 50 20 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 300 -300 1.0 100 1 300 0;
    2 0 0 300 -300 1.0 100 1 100 0;
];
mpc.gencost = [
    2 0 0 3 0.11  5.0 100;
    2 0 0 3 0.085 1.2 200;
];
mpc.branch = [
    1 2 0.02 0.1 0.04 150 0 0 0 0 1 -30 30;
];
"""

# Triangle network, a generator at every bus, one line with a tight rating.
TOY3_TEXT = """
function mpc = toy3
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0  0  0 0 1 1 0 230 1 1.1 0.9;
    2 1 60 20 0 0 1 1 0 230 1 1.1 0.9;
    3 1 40 10 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 300 -300 1.0 100 1 300 0;
    2 0 0 300 -300 1.0 100 1 100 0;
    3 0 0 300 -300 1.0 100 1 100 0;
];
mpc.gencost = [
    2 0 0 3 0.11  5.0 100;
    2 0 0 3 0.085 1.2 200;
    2 0 0 3 0.02  9.0 50;
];
mpc.branch = [
    1 2 0.02  0.10 0.03 120 0 0 0 0 1 -30 30;
    2 3 0.03  0.08 0.02 40  0 0 0 0 1 -30 30;
    1 3 0.015 0.09 0.02 120 0 0 0 0 1 -30 30;
];
"""

# No demand, lossless-at-flat-voltage (no charging, no shunts): the optimum
# parks every generator at zero output.
TOYZERO_TEXT = """
function mpc = toyzero
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
    2 1 0 0 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 100 -100 1.0 100 1 100 0;
    2 0 0 100 -100 1.0 100 1 100 0;
];
mpc.gencost = [
    2 0 0 3 0.1 10 25;
    2 0 0 3 0.1 12 75;
];
mpc.branch = [
    1 2 0.01 0.05 0 100 0 0 0 0 1 -30 30;
];
"""

# Demand far beyond total generation capability.
TOYINFEASIBLE_TEXT = """
function mpc = toyinfeasible
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0    0   0 0 1 1 0 230 1 1.1 0.9;
    2 1 1000 300 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 50 -50 1.0 100 1 100 0;
];
mpc.gencost = [
    2 0 0 3 0.1 10 0;
];
mpc.branch = [
    1 2 0.02 0.1 0.04 150 0 0 0 0 1 -30 30;
];
"""


def case_path(name: str) -> Path:
    return CASE_DIR / f"{name}.m"


@pytest.fixture(scope="session")
def toy2():
    return netmodel.parse_case(TOY2_TEXT, name="toy2")


@pytest.fixture(scope="session")
def toy3():
    return netmodel.parse_case(TOY3_TEXT, name="toy3")


@pytest.fixture(scope="session")
def toyzero():
    return netmodel.parse_case(TOYZERO_TEXT, name="toyzero")


@pytest.fixture(scope="session")
def toyinfeasible():
    return netmodel.parse_case(TOYINFEASIBLE_TEXT, name="toyinfeasible")


@pytest.fixture(scope="session")
def case9():
    return netmodel.load_case(case_path("case9"))


@pytest.fixture(scope="session")
def case9_tree():
    return netmodel.load_case(case_path("case9_tree"))
