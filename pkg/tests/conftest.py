import numpy as np
import pytest

from ecgfield.basis import FloatingECG
from ecgfield.system import ParticleSystem, hydrogen, internal_hamiltonian


@pytest.fixture(scope="session")
def h_spec():
    return internal_hamiltonian(hydrogen())


@pytest.fixture(scope="session")
def fixed_h_spec():
    return internal_hamiltonian(hydrogen("fixed-nucleus"))


@pytest.fixture(scope="session")
def three_body_spec():
    # neutral helium-like toy with distinguishable light particles
    return internal_hamiltonian(ParticleSystem.from_particles([(5.0, 2.0, "X"), (1.0, -1.0, "a"), (1.2, -1.0, "b")]))


def random_ecg(rng, n, lo=0.2, hi=5.0, shift=3.0):
    """Exponents (diagonal of A before coupling) in [lo, hi], shifts in [-shift, shift]."""
    L = np.diag(np.sqrt(rng.uniform(lo, hi, n)))
    L[np.tril_indices(n, -1)] = rng.uniform(-0.3, 0.3, n * (n - 1) // 2)
    return FloatingECG(L, rng.uniform(-shift, shift, (n, 3)))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
