"""Shared fixtures and the acceptance summary printer."""

from __future__ import annotations

import numpy as np
import pytest

from rcmi import Partition, SystemLayout, random_density, trial_rng

#: One ``PASS``/``FAIL`` line per acceptance criterion, filled by test_acceptance.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def abc() -> Partition:
    return Partition("A", "B", "C")


@pytest.fixture
def layout222() -> SystemLayout:
    return SystemLayout([("A", 2), ("B", 2), ("C", 2)])


@pytest.fixture
def rng() -> np.random.Generator:
    return trial_rng(1234)


def random_quadruple(layout: SystemLayout, rng: np.random.Generator, xi: float = 1e-3):
    """Strictly positive ``(rho, tau_AC, omega_C, theta_BC)`` on ``layout``."""
    return (
        random_density(layout, rng, xi=xi),
        random_density(layout.sub("AC"), rng, xi=xi),
        random_density(layout.sub("C"), rng, xi=xi),
        random_density(layout.sub("BC"), rng, xi=xi),
    )
