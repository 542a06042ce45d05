"""Shared fixtures and helpers for the shiftlab test suite.

Conventions used throughout:
  - every random draw goes through a seeded ``numpy.random.Generator`` so
    failures reproduce byte for byte;
  - closeness checks on matrices use the operator norm unless a test says
    otherwise;
  - weight sequences are compared with ``shift_distance`` (sup metric) or
    via exact field equality when the value is expected to be exact.
"""

from __future__ import annotations

import numpy as np
import pytest

from shiftlab import PRESET_SHIFTS, WeightSequence


# ============================================================
# canonical operators used across modules
# ============================================================

@pytest.fixture(scope="session")
def w_sh() -> WeightSequence:
    """Shifted-hyperbolic weights: 2 up to index 0, 1/2 from index 1 on."""
    return PRESET_SHIFTS["paper-sh"]


@pytest.fixture(scope="session")
def w_hyp() -> WeightSequence:
    """Expanding hyponormal weights: 2 up to index 0, 3 from index 1 on."""
    return PRESET_SHIFTS["paper-hyp"]


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(0xC0FFEE)


# ============================================================
# helpers
# ============================================================

def op_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def mats_close(a, b, tol: float) -> bool:
    return op_norm(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)) <= tol


@pytest.fixture(scope="session")
def announce():
    """Factory printing one PASS/FAIL line per acceptance criterion.

    Writes through pytest's capture so the line is visible in a plain
    ``pytest -v`` run, not only with ``-s``.
    """
    import sys

    def _announce(number: int, name: str, ok: bool) -> None:
        line = f"ACCEPTANCE {number:02d} {name}: {'PASS' if ok else 'FAIL'}"
        try:
            import _pytest.capture  # noqa: F401
            capman = _announce._capman
            if capman is not None:
                with capman.global_and_fixture_disabled():
                    print(line, flush=True)
                return
        except Exception:
            pass
        print(line, file=sys.stderr, flush=True)

    _announce._capman = None
    return _announce


@pytest.fixture(autouse=True)
def _wire_capman(request, announce):
    capman = request.config.pluginmanager.getplugin("capturemanager")
    announce._capman = capman
