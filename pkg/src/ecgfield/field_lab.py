"""Finite-field experiments.

Field sweeps with optional per-field reoptimization, polynomial fits of
E(eps), dipole extraction from the linear coefficient, Hellmann-Feynman
residuals and parity diagnostics of the zero-field state.

Sign convention: H(eps) = H_M - eps * mu_z, so dE/deps = -<mu_z> and the
dipole read off a fit is ``-e1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .basis import BasisSet
from .errors import DomainError
from .integrals import OperatorMatrices, build_matrices
from .system import InternalSpec
from .variational import (
    OptimizeOptions,
    VariationalState,
    expectation,
    optimize_nonlinear,
    solve,
)

log = logging.getLogger(__name__)

CA_FIELDS = (0.0, -0.0016, -0.0032)
CA_FIELDS_POSITIVE = (0.0, 0.0016, 0.0032)
SYMMETRIC_5PT = (-0.002, -0.001, 0.0, 0.001, 0.002)
FULL_POWERS = (0, 1, 2)
EVEN_POWERS = (0, 2)
FD_STEP = 1e-4
NULL_DIPOLE_THRESHOLD = 1e-8


@dataclass(frozen=True)
class PolyFit:
    powers: tuple[int, ...]
    coeffs: np.ndarray
    residual_rms: float
    condition_estimate: float
    interpolation: bool

    def coeff(self, power: int) -> float:
        """Coefficient of eps**power; 0.0 when that power was not fitted."""
        if power in self.powers:
            return float(self.coeffs[self.powers.index(power)])
        return 0.0

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        return sum(c * eps**p for p, c in zip(self.powers, self.coeffs))

    def to_dict(self) -> dict:
        return {
            "powers": list(self.powers),
            "coeffs": [float(c) for c in self.coeffs],
            "residual_rms": self.residual_rms,
            "condition_estimate": self.condition_estimate,
            "interpolation": self.interpolation,
        }


def polyfit(fields: Sequence[float], values: Sequence[float], powers: Sequence[int] = FULL_POWERS) -> PolyFit:
    """Least squares in the monomials eps**p, p in ``powers``.

    The abscissa is scaled by max|eps| before solving; coefficients are
    returned for the unscaled variable.
    """
    x = np.asarray(fields, dtype=float)
    y = np.asarray(values, dtype=float)
    powers = tuple(int(p) for p in powers)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("fields and values must be equal-length 1-D sequences")
    if not powers or any(p < 0 for p in powers) or any(b <= a for a, b in zip(powers, powers[1:])):
        raise DomainError(f"powers must be non-negative and strictly increasing, got {powers}")
    if np.unique(x).size != x.size:
        raise DomainError("fit abscissae must be distinct")
    if x.size < len(powers):
        raise DomainError(f"{x.size} samples cannot determine {len(powers)} coefficients")
    scale = float(np.max(np.abs(x))) or 1.0
    X = (x[:, None] / scale) ** np.array(powers)[None, :]
    if x.size == len(powers):
        c = np.linalg.solve(X, y)
    else:
        c, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = X @ c - y
    coeffs = c / scale ** np.array(powers, dtype=float)
    return PolyFit(
        powers,
        coeffs,
        float(np.sqrt(np.mean(resid**2))),
        float(np.linalg.cond(X)),
        x.size == len(powers),
    )


@dataclass(frozen=True)
class DipoleEstimate:
    dipole: float
    e1: float

    @property
    def abs_e1(self) -> float:
        return abs(self.e1)


def extract_dipole(fit: PolyFit) -> DipoleEstimate:
    if 1 not in fit.powers:
        raise DomainError("even-only fit has no dipole term by construction")
    e1 = fit.coeff(1)
    return DipoleEstimate(-e1, e1)


# provider(eps) -> (state, matrices) for the optimized basis at eps
StateProvider = Callable[[float], tuple[VariationalState, OperatorMatrices]]


def fixed_basis_provider(basis: BasisSet, spec: InternalSpec, lin_dep_tol: float = 1e-12) -> StateProvider:
    matrices = build_matrices(basis, spec)

    def provider(eps):
        from .variational import field_hamiltonian, solve_lowest

        st = solve_lowest(field_hamiltonian(matrices, eps), matrices.S, lin_dep_tol)
        return st, matrices

    return provider


def optimized_provider(start: BasisSet, spec: InternalSpec, opts: OptimizeOptions = OptimizeOptions()) -> StateProvider:
    """Every call optimizes from ``start`` independently."""

    def provider(eps):
        best, st = optimize_nonlinear(start, spec, eps, opts)
        matrices = build_matrices(best, spec)
        return st, matrices

    return provider


@dataclass(frozen=True)
class HFCheck:
    derivative: float
    mz_expectation: float

    @property
    def residual(self) -> float:
        return abs(self.derivative + self.mz_expectation)


def hf_check(provider: StateProvider, epsilon: float, fd_step: float = FD_STEP) -> HFCheck:
    """Central-difference dE/deps next to -<mu_z> at the same field."""
    if not fd_step > 0.0:
        raise DomainError(f"fd_step must be positive, got {fd_step}")
    plus, _ = provider(epsilon + fd_step)
    minus, _ = provider(epsilon - fd_step)
    state, matrices = provider(epsilon)
    deriv = (plus.energy - minus.energy) / (2.0 * fd_step)
    return HFCheck(deriv, expectation(matrices.Mz, state, matrices.S))


def hf_residual(provider: StateProvider, epsilon: float, fd_step: float = FD_STEP) -> float:
    """|dE/deps + <mu_z>| at ``epsilon``."""
    return hf_check(provider, epsilon, fd_step).residual


@dataclass(frozen=True)
class ParityDiagnostic:
    mz_at_zero: float
    parity_overlap: float

    def to_dict(self) -> dict:
        return {"mz_at_zero": self.mz_at_zero, "parity_overlap": self.parity_overlap}


def parity_diagnostic(basis: BasisSet, spec: InternalSpec, state: VariationalState) -> ParityDiagnostic:
    """<mu_z> and <psi|i|psi>/<psi|psi> for a zero-field state.

    The inverted state is expanded in the parity partners of the members,
    so only overlaps between members and partners are needed.
    """
    A, s = basis.stacked()
    c = state.coefficients
    S_self = kernels.overlap_cross(A, s, A, s)
    S_inv = kernels.overlap_cross(A, s, A, -s)
    norm = c @ S_self @ c
    overlap = float(c @ S_inv @ c / norm)
    matrices = build_matrices(basis, spec)
    return ParityDiagnostic(expectation(matrices.Mz, state, matrices.S), overlap)


def classify_protocol(fields: Sequence[float]) -> str:
    f = np.asarray(fields, dtype=float)
    if np.all(np.isin(-f, f)):
        return "symmetric"
    if np.all(f >= 0.0) or np.all(f <= 0.0):
        return "positive-only"
    return "asymmetric"


@dataclass
class FieldPoint:
    epsilon: float
    energy: float
    mz_expectation: float
    hf_residual: float
    stationarity_norm: float
    converged: bool
    retained_rank: int


@dataclass
class SweepReport:
    fields: list[float]
    energies: list[float]
    dipole_expectations: list[float]
    hf_residuals: list[float]
    fit: PolyFit
    parity_diag: ParityDiagnostic
    protocol: str
    reoptimized: bool
    stationarity: list[float] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)
    retained_rank: list[int] = field(default_factory=list)
    zero_field_basis: BasisSet | None = None

    @property
    def dipole(self) -> DipoleEstimate | None:
        return extract_dipole(self.fit) if 1 in self.fit.powers else None

    @property
    def verdict(self) -> str:
        est = self.dipole
        if est is None:
            return "no dipole term (even-only fit)"
        if est.abs_e1 < NULL_DIPOLE_THRESHOLD:
            return "null dipole (consistent with Hellmann-Feynman and parity)"
        return "spurious dipole (nonzero linear term for a state whose exact dipole vanishes)"

    def to_dict(self) -> dict:
        est = self.dipole
        return {
            "fields": list(self.fields),
            "energies": list(self.energies),
            "dipole_expectations": list(self.dipole_expectations),
            "hf_residuals": list(self.hf_residuals),
            "stationarity": list(self.stationarity),
            "converged": list(self.converged),
            "retained_rank": list(self.retained_rank),
            "fit": self.fit.to_dict(),
            "dipole": None if est is None else {"mu_z": est.dipole, "e1": est.e1, "abs_e1": est.abs_e1},
            "e1": self.fit.coeff(1),
            "e2": self.fit.coeff(2),
            "polarizability": -2.0 * self.fit.coeff(2),
            "parity_diag": self.parity_diag.to_dict(),
            "protocol": self.protocol,
            "reoptimized": self.reoptimized,
            "verdict": self.verdict,
            "zero_field_basis": None if self.zero_field_basis is None else self.zero_field_basis.to_dict(),
        }


def _field_order(fields: Sequence[float]) -> list[tuple[float, float | None]]:
    """(field, predecessor) pairs walking outward from zero along each sign."""
    order = []
    pos = sorted(f for f in fields if f > 0.0)
    neg = sorted((f for f in fields if f < 0.0), reverse=True)
    has_zero = any(f == 0.0 for f in fields)
    if has_zero:
        order.append((0.0, None))
    for chain in (pos, neg):
        prev = 0.0 if has_zero else None
        for f in chain:
            order.append((f, prev))
            prev = f
    return order


def sweep(
    basis: BasisSet,
    spec: InternalSpec,
    fields: Sequence[float],
    reoptimize_per_field: bool = False,
    opts: OptimizeOptions = OptimizeOptions(),
    powers: Sequence[int] = FULL_POWERS,
    fd_step: float = FD_STEP,
) -> SweepReport:
    """Energies and <mu_z> over a field grid, then a polynomial fit.

    With ``reoptimize_per_field`` the optimizer walks outward from zero
    field along each sign, every field warm-started from its inner
    neighbour's optimized basis. The Hellmann-Feynman residual at each
    field uses that field's basis, reoptimized at eps +/- fd_step when the
    sweep reoptimizes.
    """
    fields = [float(f) for f in fields]
    if len(set(fields)) != len(fields):
        raise DomainError(f"duplicate field values in {fields}")
    if len(fields) < 2:
        raise DomainError("a sweep needs at least 2 distinct fields")
    if not all(np.isfinite(fields)):
        raise DomainError("field values must be finite")

    bases: dict[float, BasisSet] = {}
    points: dict[float, FieldPoint] = {}
    for eps, prev in _field_order(fields):
        start = basis if prev is None else bases[prev]
        if reoptimize_per_field:
            best, state = optimize_nonlinear(start, spec, eps, opts)
            provider = optimized_provider(best, spec, opts)
        else:
            best = start
            _, state = solve(best, spec, eps, opts.lin_dep_tol)
            provider = fixed_basis_provider(best, spec, opts.lin_dep_tol)
        bases[eps] = best
        matrices = build_matrices(best, spec)
        mz = expectation(matrices.Mz, state, matrices.S)
        plus, _ = provider(eps + fd_step)
        minus, _ = provider(eps - fd_step)
        resid = abs((plus.energy - minus.energy) / (2.0 * fd_step) + mz)
        points[eps] = FieldPoint(
            eps, state.energy, mz, resid, state.stationarity_norm, state.converged, state.retained_rank
        )
        log.info("eps=%+.5f E=%.12f <mu_z>=%.3e hf=%.2e", eps, state.energy, mz, resid)

    zero_basis = bases.get(0.0, basis)
    _, zero_state = solve(zero_basis, spec, 0.0, opts.lin_dep_tol)
    ordered = [points[f] for f in fields]
    return SweepReport(
        fields=fields,
        energies=[p.energy for p in ordered],
        dipole_expectations=[p.mz_expectation for p in ordered],
        hf_residuals=[p.hf_residual for p in ordered],
        fit=polyfit(fields, [p.energy for p in ordered], powers),
        parity_diag=parity_diagnostic(zero_basis, spec, zero_state),
        protocol=classify_protocol(fields),
        reoptimized=reoptimize_per_field,
        stationarity=[p.stationarity_norm for p in ordered],
        converged=[p.converged for p in ordered],
        retained_rank=[p.retained_rank for p in ordered],
        zero_field_basis=zero_basis,
    )


def ca_protocol(
    basis: BasisSet,
    spec: InternalSpec,
    opts: OptimizeOptions = OptimizeOptions(),
    fields: Sequence[float] = CA_FIELDS,
) -> SweepReport:
    """Three one-sided fields, full quadratic fit, reoptimized per field."""
    return sweep(basis, spec, fields, reoptimize_per_field=True, opts=opts, powers=FULL_POWERS)
