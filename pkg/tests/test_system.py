import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgfield.errors import ConstructionError, DomainError, UnsupportedError
from ecgfield.system import (
    DIFFERENCE,
    MASS_PRESETS,
    SINGLE,
    ParticleSystem,
    build_transformation,
    effective_dipole_charges,
    hydrogen,
    internal_hamiltonian,
    kinetic_coupling,
)

MP = MASS_PRESETS["proton"]


def test_hydrogen_transformation():
    sys = hydrogen()
    T = build_transformation(sys)
    M = MP + 1.0
    np.testing.assert_allclose(T, [[MP / M, 1.0 / M], [-1.0, 1.0]], rtol=0, atol=1e-16)
    assert np.linalg.det(T) == pytest.approx(1.0, abs=1e-15)


def test_three_particle_rows():
    sys = ParticleSystem.from_particles([(3.0, 1.0), (1.0, -1.0), (1.0, 0.0)])
    T = build_transformation(sys)
    np.testing.assert_array_equal(T[1], [-1.0, 1.0, 0.0])
    np.testing.assert_array_equal(T[2], [-1.0, 0.0, 1.0])
    np.testing.assert_allclose(T[0], [0.6, 0.2, 0.2])


def test_equal_masses_cm_row():
    sys = ParticleSystem.from_particles([(1.0, 1.0), (1.0, -1.0)])
    np.testing.assert_array_equal(build_transformation(sys)[0], [0.5, 0.5])


def test_canonical_sort_keeps_labels():
    sys = ParticleSystem.from_particles([(1.0, -1.0, "e"), (MP, 1.0, "p")])
    assert sys.labels == ["p", "e"]
    assert sys.original_index == (1, 0)
    assert [p["label"] for p in sys.to_dict()["particles"]] == ["e", "p"]


@pytest.mark.parametrize("mass", [0.0, -1.0, float("nan")])
def test_nonpositive_mass_rejected(mass):
    with pytest.raises(DomainError, match="mass"):
        ParticleSystem.from_particles([(mass, 1.0), (1.0, -1.0)])


def test_single_particle_rejected():
    with pytest.raises(DomainError):
        ParticleSystem.from_particles([(1.0, 0.0)])


def test_mass_presets():
    sys = ParticleSystem.from_particles([("proton", 1), ("electron", -1)])
    assert sys.masses.tolist() == [MP, 1.0]
    with pytest.raises(DomainError, match="preset"):
        ParticleSystem.from_particles([("muon", 1), ("electron", -1)])


def test_nuclear_centre_of_mass_unsupported():
    with pytest.raises(UnsupportedError):
        build_transformation(hydrogen(), "nuclear-center-of-mass")
    with pytest.raises(DomainError):
        build_transformation(hydrogen(), "jacobi")


def test_hydrogen_reduced_mass():
    # Lambda_11 = (-1)^2/m_p + 1^2/m_e by hand
    spec = internal_hamiltonian(hydrogen())
    assert spec.lam.shape == (1, 1)
    assert spec.lam[0, 0] == pytest.approx(1.0 / MP + 1.0, rel=1e-15)
    assert 1.0 / spec.lam[0, 0] == pytest.approx(0.9994556, abs=1e-7)
    assert spec.cm_coupling == pytest.approx(1.0 / (MP + 1.0), rel=1e-15)


def test_three_particle_offdiagonal():
    spec = internal_hamiltonian(ParticleSystem.from_particles([(3.0, 1.0), (1.0, -1.0), (1.0, 0.0)]))
    assert spec.lam[0, 1] == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert spec.lam[0, 0] == pytest.approx(1.0 / 3.0 + 1.0, rel=1e-15)


def test_wrong_transformation_detected():
    sys = hydrogen()
    T = build_transformation(sys)
    T[0] = [0.5, 0.5]  # geometric centre, not centre of mass
    with pytest.raises(ConstructionError):
        internal_hamiltonian(sys, T)


def test_pair_table():
    spec = internal_hamiltonian(ParticleSystem.from_particles([(5.0, 2.0), (1.0, -1.0), (1.0, -1.0)]))
    assert len(spec.pair_table) == 3
    tags = {(p.i, p.j): (p.tag, p.charge_product, tuple(p.weights)) for p in spec.pair_table}
    assert tags[(0, 1)] == (SINGLE, -2.0, (1.0, 0.0))
    assert tags[(0, 2)] == (SINGLE, -2.0, (0.0, 1.0))
    assert tags[(1, 2)] == (DIFFERENCE, 1.0, (1.0, -1.0))


def test_hydrogen_dipole_coefficient():
    # mu = q_p r_p + q_e r_e = -(r_e - r_p) for the neutral atom
    spec = internal_hamiltonian(hydrogen())
    assert spec.dipole_coeffs[0] == pytest.approx(-1.0, abs=1e-15)


def test_cm_dipole_coefficient_vanishes():
    sys = ParticleSystem.from_particles([(7.0, 1.0), (2.0, 1.0), (1.0, -2.0)])
    spec = internal_hamiltonian(sys)
    assert (sys.charges @ spec.T_inv)[0] == 0.0


def test_charged_system_has_no_dipole():
    sys = ParticleSystem.from_particles([(MP, 1.0), (MP, 1.0), (1.0, -1.0)])
    spec = internal_hamiltonian(sys)
    assert spec.dipole_coeffs is None
    with pytest.raises(DomainError, match="origin-dependent"):
        effective_dipole_charges(sys, spec.T_inv)


masses = st.floats(min_value=0.5, max_value=1e4, allow_nan=False)
charges = st.sampled_from([-2.0, -1.0, 1.0, 2.0])


@st.composite
def neutral_systems(draw):
    n = draw(st.integers(2, 5))
    qs = [draw(charges) for _ in range(n - 1)]
    qs.append(-sum(qs))
    return ParticleSystem.from_particles([(draw(masses), q) for q in qs])


@settings(max_examples=60, deadline=None)
@given(neutral_systems())
def test_kinetic_separation_and_positivity(sys):
    spec = internal_hamiltonian(sys)
    full = kinetic_coupling(sys, spec.T)
    scale = np.max(np.abs(full))
    assert np.max(np.abs(full[0, 1:])) <= 1e-14 * max(scale, 1.0)
    assert np.min(np.linalg.eigvalsh(spec.lam)) > 0.0
    np.testing.assert_allclose(spec.T @ spec.T_inv, np.eye(sys.n_particles), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(neutral_systems(), st.integers(0, 2**32 - 1))
def test_dipole_frame_independence(sys, seed):
    spec = internal_hamiltonian(sys)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        r = rng.normal(size=(sys.n_particles, 3)) * 3.0
        direct = sys.charges @ r
        internal = spec.T @ r
        via = spec.dipole_coeffs @ internal[1:]
        np.testing.assert_allclose(via, direct, atol=1e-12 * max(1.0, np.abs(r).max()))
