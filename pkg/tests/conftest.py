"""Shared fixtures and helpers for the test suite.

The named scenario presets double as well-understood parameter sets, so
most tests pull them from ``twostrain.figures`` instead of retyping
constants. Random parameter draws share one box: every rate uniform in
[0.05, 2], with the four strictly positive rates (s, r, L, K) redrawn
from [0.1, 2] so no draw sits near a validation boundary.
"""

import numpy as np
import pytest

from twostrain.figures import PRESETS, reproduce
from twostrain.model import ModelParameters, PARAMETER_KEYS


def draw_parameter_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 14) random valid parameter rows in PARAMETER_KEYS order."""
    matrix = rng.uniform(0.05, 2.0, size=(n, len(PARAMETER_KEYS)))
    for key in ("s", "r", "L", "K"):
        matrix[:, PARAMETER_KEYS.index(key)] = rng.uniform(0.1, 2.0, size=n)
    return matrix


def params_from_row(row: np.ndarray) -> ModelParameters:
    return ModelParameters.from_dict(dict(zip(PARAMETER_KEYS, row)))


@pytest.fixture(scope="session")
def fig1_params() -> ModelParameters:
    return PRESETS["fig1"].params


@pytest.fixture(scope="session")
def fig4_params() -> ModelParameters:
    return PRESETS["fig4"].params


@pytest.fixture(scope="session")
def fig5_params() -> ModelParameters:
    return PRESETS["fig5"].params


@pytest.fixture(scope="session")
def fig4_pipeline(tmp_path_factory):
    """One full basin/separatrix reproduction, shared by every consumer.

    The run takes about half a minute, so the summary dict and output
    directory are computed once per session.
    """
    outdir = tmp_path_factory.mktemp("fig4_pipeline")
    summary = reproduce("fig4", outdir)
    return summary, outdir


# ----------------------------------------------------------------------
# Acceptance-criterion reporting: every acceptance test records one
# PASS/FAIL line; the collected block is echoed in the terminal summary
# so the verdicts are visible even for passing tests.
# ----------------------------------------------------------------------

CRITERION_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    CRITERION_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
