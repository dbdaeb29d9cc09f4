import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("xynoise", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("xynoise")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    A = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []
ACCEPTANCE_NOTES = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return report


@pytest.fixture(scope="session")
def acceptance_note():
    def note(text):
        ACCEPTANCE_NOTES.append(text)
        print(text)

    return note


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
    if ACCEPTANCE_NOTES:
        terminalreporter.section("acceptance details")
        for line in ACCEPTANCE_NOTES:
            terminalreporter.write_line(line)
