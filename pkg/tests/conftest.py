from __future__ import annotations

import json
from pathlib import Path

import pytest

from annular_green.greens import PotentialProfile, wavenumbers

REFERENCE = json.loads(Path(__file__).with_name("reference_values.json").read_text())

# (a, b, V0) profiles and energies of the validation matrix
PROFILES = [(2.0, 1.0, 1.0), (3.0, 1.0, 2.0), (1.5, 0.5, 1.0)]
ENERGIES = [1.5, 2.0, 4.0]
ORDERS = [0, 1, 2, 5]


def matrix_cases():
    """(l, E, a, b, V0) for every combination above the barrier."""
    return [(l, e, a, b, v0) for a, b, v0 in PROFILES for e in ENERGIES if e > v0
            for l in ORDERS]


def below_barrier_cases():
    return [(e, a, b, v0) for a, b, v0 in PROFILES for e in ENERGIES if not e > v0]


@pytest.fixture(scope="session")
def reference():
    return REFERENCE


@pytest.fixture
def ring():
    return PotentialProfile(b=1.0, a=2.0, v0=1.0)


@pytest.fixture
def ctx2(ring):
    return wavenumbers(2.0, ring)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
