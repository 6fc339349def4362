"""Particle systems and the centre-of-mass separating transformation.

Everything is in Hartree atomic units. Particle 1 (index 0 after
canonical sorting) is the heaviest one; internal coordinates are the
positions of the remaining particles relative to it, and the first row of
the transformation is the centre of mass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstructionError, DomainError, UnsupportedError

MASS_PRESETS = {
    "electron": 1.0,
    "proton": 1836.15267343,
    "deuteron": 3670.48296788,
    "fixed-nucleus": 1e12,
}

TRANSFORMATIONS = ("heavy-nucleus-centered", "nuclear-center-of-mass")

SINGLE = "single-coordinate"
DIFFERENCE = "coordinate-difference"

# CM/internal kinetic coupling above this means the transformation is wrong.
_CROSS_COUPLING_TOL = 1e-12


def resolve_mass(value: float | str) -> float:
    if isinstance(value, str):
        try:
            return MASS_PRESETS[value]
        except KeyError:
            raise DomainError(
                f"unknown mass preset {value!r}; known: {sorted(MASS_PRESETS)}"
            ) from None
    return float(value)


@dataclass(frozen=True)
class Particle:
    mass: float
    charge: float
    label: str = ""


@dataclass(frozen=True)
class ParticleSystem:
    """Point particles, stored heaviest first.

    ``original_index[k]`` is the position particle ``k`` had in the list the
    system was built from, so reports can use the caller's ordering.
    """

    particles: tuple[Particle, ...]
    original_index: tuple[int, ...] = field(default=())

    @classmethod
    def from_particles(cls, particles: Iterable[Particle | Sequence]) -> "ParticleSystem":
        plist = []
        for p in particles:
            if not isinstance(p, Particle):
                mass, charge, *rest = p
                p = Particle(resolve_mass(mass), float(charge), str(rest[0]) if rest else "")
            plist.append(p)
        if len(plist) < 2:
            raise DomainError(f"a system needs at least 2 particles, got {len(plist)}")
        for k, p in enumerate(plist):
            if not np.isfinite(p.mass) or p.mass <= 0.0:
                raise DomainError(f"particle {k} ({p.label or 'unlabelled'}): mass must be > 0, got {p.mass}")
            if not np.isfinite(p.charge):
                raise DomainError(f"particle {k} ({p.label or 'unlabelled'}): charge must be finite")
        # stable sort keeps the caller's order among equal masses
        order = sorted(range(len(plist)), key=lambda k: -plist[k].mass)
        return cls(tuple(plist[k] for k in order), tuple(order))

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    @property
    def n_internal(self) -> int:
        return len(self.particles) - 1

    @property
    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.particles])

    @property
    def charges(self) -> np.ndarray:
        return np.array([p.charge for p in self.particles])

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.particles]

    @property
    def total_charge(self) -> float:
        return float(np.sum(self.charges))

    @property
    def neutral(self) -> bool:
        return self.total_charge == 0.0

    def to_dict(self) -> dict:
        """Particles in the caller's original order."""
        inv = sorted(range(self.n_particles), key=lambda k: self.original_index[k])
        return {
            "particles": [
                {"mass": self.particles[k].mass, "charge": self.particles[k].charge, "label": self.particles[k].label}
                for k in inv
            ]
        }


def hydrogen(nuclear_mass: float | str = "proton") -> ParticleSystem:
    return ParticleSystem.from_particles(
        [(resolve_mass(nuclear_mass), 1.0, "p"), (MASS_PRESETS["electron"], -1.0, "e")]
    )


def build_transformation(sys: ParticleSystem, kind: str = "heavy-nucleus-centered") -> np.ndarray:
    """Rows: centre of mass, then r_j - r_1 for every j > 1."""
    if kind not in TRANSFORMATIONS:
        raise DomainError(f"unknown transformation kind {kind!r}")
    if kind != "heavy-nucleus-centered":
        raise UnsupportedError(f"transformation {kind!r} is unsupported")
    m = sys.masses
    if np.any(m <= 0.0):
        raise DomainError("masses must be positive")
    N = sys.n_particles
    T = np.zeros((N, N))
    T[0] = m / m.sum()
    T[1:, 0] = -1.0
    T[1:, 1:] = np.eye(N - 1)
    if abs(np.linalg.det(T) - 1.0) > 1e-12:
        raise ConstructionError("transformation matrix is singular")
    return T


def inverse_transformation(sys: ParticleSystem) -> np.ndarray:
    """Closed-form inverse of ``build_transformation``.

    r_1 = R - sum_j (m_j/M) r_j', r_j = r_1 + r_j'.
    """
    m = sys.masses
    N = sys.n_particles
    frac = m[1:] / m.sum()
    Tinv = np.zeros((N, N))
    Tinv[:, 0] = 1.0
    Tinv[:, 1:] = -frac[None, :]
    Tinv[1:, 1:] += np.eye(N - 1)
    return Tinv


@dataclass(frozen=True)
class CoulombPair:
    i: int
    j: int
    charge_product: float
    tag: str
    weights: np.ndarray  # r_ij = |sum_k weights[k] r_k'|


@dataclass(frozen=True)
class InternalSpec:
    """Translation-free Hamiltonian data in internal coordinates.

    The kinetic operator is ``0.5 * sum_jk lam[j, k] p_j . p_k``.
    """

    system: ParticleSystem
    T: np.ndarray
    T_inv: np.ndarray
    lam: np.ndarray
    cm_coupling: float
    pair_table: tuple[CoulombPair, ...]
    dipole_coeffs: np.ndarray | None

    @property
    def n_internal(self) -> int:
        return self.lam.shape[0]

    @property
    def pair_weights(self) -> np.ndarray:
        return np.array([p.weights for p in self.pair_table]).reshape(len(self.pair_table), self.n_internal)

    @property
    def pair_charges(self) -> np.ndarray:
        return np.array([p.charge_product for p in self.pair_table])

    @property
    def dipole_vector(self) -> np.ndarray:
        """Dipole coefficients, or zeros for a charged system."""
        if self.dipole_coeffs is None:
            return np.zeros(self.n_internal)
        return self.dipole_coeffs


def kinetic_coupling(sys: ParticleSystem, T: np.ndarray) -> np.ndarray:
    """Full (N x N) matrix sum_i t_ji t_ki / m_i, CM row included."""
    return (T / sys.masses[None, :]) @ T.T


def internal_hamiltonian(sys: ParticleSystem, T: np.ndarray | None = None) -> InternalSpec:
    if T is None:
        T = build_transformation(sys)
    full = kinetic_coupling(sys, T)
    cross = np.max(np.abs(full[0, 1:])) if sys.n_particles > 1 else 0.0
    if cross > _CROSS_COUPLING_TOL:
        raise ConstructionError(f"centre of mass couples to internal motion ({cross:.3e}); wrong transformation")
    lam = full[1:, 1:]
    lam = 0.5 * (lam + lam.T)

    n = sys.n_internal
    q = sys.charges
    pairs = []
    for i in range(sys.n_particles):
        for j in range(i + 1, sys.n_particles):
            w = np.zeros(n)
            if i == 0:
                w[j - 1] = 1.0
                tag = SINGLE
            else:
                w[i - 1] = 1.0
                w[j - 1] = -1.0
                tag = DIFFERENCE
            pairs.append(CoulombPair(i, j, float(q[i] * q[j]), tag, w))

    T_inv = inverse_transformation(sys)
    dip = effective_dipole_charges(sys, T_inv) if sys.neutral else None
    return InternalSpec(sys, T, T_inv, lam, float(full[0, 0]), tuple(pairs), dip)


def effective_dipole_charges(sys: ParticleSystem, T_inv: np.ndarray) -> np.ndarray:
    """Coefficients c_j with mu = sum_j c_j r_j' for a neutral system."""
    if not sys.neutral:
        raise DomainError(
            f"system carries net charge {sys.total_charge:g}; its dipole is origin-dependent"
        )
    coeffs = sys.charges @ T_inv
    return coeffs[1:].copy()
