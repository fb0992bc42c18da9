"""Shared fixtures: canonical traces reused across test modules.

The expensive simulations (default free-running trace, a locked and an
unlocked injected trace) are session-scoped so the suite pays for each
one exactly once; tests must treat them as read-only.
"""

import io
import sys

import pytest

from scnosc import default_scenario
from scnosc.circuits import build_system
from scnosc.solver import integrate, scenario_settings


def simulate(scenario):
    """Build and integrate a scenario with its derived solver settings."""
    return integrate(build_system(scenario), scenario_settings(scenario))


def run_cli(argv):
    """Invoke the command line entry point in-process.

    Returns (exit_code, stdout_bytes, stderr_text). stdout is captured
    at the byte level because table output is written to the binary
    stream and byte-for-byte reproducibility is part of the contract.
    """
    from scnosc.cli import main

    raw = io.BytesIO()
    out = io.TextIOWrapper(raw, encoding="utf-8", write_through=True)
    err = io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        code = main(list(argv))
    finally:
        out.flush()
        sys.stdout, sys.stderr = old
    return code, raw.getvalue(), err.getvalue()


@pytest.fixture(scope="session")
def default_trace():
    return simulate(default_scenario())


@pytest.fixture(scope="session")
def locked_scenario():
    return default_scenario().with_keys(
        {
            "circuit.topology": "injected",
            "injection.freq_MHz": 440.9,
            "injection.amp_uA": 6.0,
        }
    )


@pytest.fixture(scope="session")
def locked_trace(locked_scenario):
    return simulate(locked_scenario)


@pytest.fixture(scope="session")
def unlocked_trace(locked_scenario):
    return simulate(locked_scenario.with_key("injection.amp_uA", 0.0))
