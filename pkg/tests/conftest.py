import numpy as np
import pytest

from dnlslab.spectral import Spectrum

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: int, label: str, passed: bool, detail: str) -> None:
    """Collect one pass/fail line; printed in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:2d} {label}: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spectrum(rng: np.random.Generator, N: int, scale: float = 1.0) -> Spectrum:
    c = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return Spectrum(scale * c / np.linalg.norm(c))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
