"""Field-dressed Hamiltonian, Rayleigh-Ritz solve and nonlinear optimization."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .basis import BasisSet, FloatingECG
from .errors import DegenerateBasisError, DomainError
from .integrals import OperatorMatrices, build_matrices
from .system import InternalSpec

log = logging.getLogger(__name__)

LIN_DEP_TOL = 1e-12
STAT_TOL = 1e-7
FD_REL_STEP = 1e-5
# eigenvalues this close are treated as one degenerate level
_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class FieldHamiltonian:
    epsilon: float
    matrices: OperatorMatrices
    H: np.ndarray

    @classmethod
    def build(cls, matrices: OperatorMatrices, epsilon: float) -> "FieldHamiltonian":
        return cls(float(epsilon), matrices, field_hamiltonian(matrices, epsilon))


def field_hamiltonian(matrices: OperatorMatrices, epsilon: float) -> np.ndarray:
    """H = T + V - epsilon * Mz; exactly symmetric because every term is."""
    return matrices.T_kin + matrices.V - epsilon * matrices.Mz


@dataclass(frozen=True)
class VariationalState:
    energy: float
    coefficients: np.ndarray
    retained_rank: int
    stationarity_norm: float = float("nan")
    converged: bool = True
    epsilon: float = 0.0


def solve_lowest(H, S, lin_dep_tol: float = LIN_DEP_TOL) -> VariationalState:
    """Lowest root of H c = E S c on the numerically independent subspace.

    The basis is first rescaled to unit self-overlap; overlap eigenvectors
    with eigenvalue below ``lin_dep_tol * max`` are dropped.
    """
    H = np.asarray(H, dtype=float)
    S = np.asarray(S, dtype=float)
    if H.shape != S.shape or H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"H {H.shape} and S {S.shape} must be equal square matrices")
    diag = np.diag(S)
    if not np.all(diag > 0.0) or not np.all(np.isfinite(diag)):
        raise DegenerateBasisError("overlap matrix has a non-positive diagonal")
    dinv = 1.0 / np.sqrt(diag)
    Sn = S * dinv[:, None] * dinv[None, :]
    w, U = np.linalg.eigh(Sn)
    if not np.isfinite(w[-1]) or w[-1] <= 0.0:
        raise DegenerateBasisError("overlap matrix is numerically zero")
    keep = w > lin_dep_tol * w[-1]
    X = (U[:, keep] / np.sqrt(w[keep])) * dinv[:, None]
    Hp = X.T @ H @ X
    Hp = 0.5 * (Hp + Hp.T)
    e, Y = np.linalg.eigh(Hp)
    C = X @ Y
    level = np.flatnonzero(e - e[0] <= _DEGENERACY_TOL * max(1.0, abs(e[0])))
    pick = level[np.argmax(np.abs(C[0, level]))]
    c = C[:, pick]
    lead = np.flatnonzero(np.abs(c) > 1e-12 * np.max(np.abs(c)))
    if lead.size and c[lead[0]] < 0.0:
        c = -c
    return VariationalState(float(e[pick]), c, int(keep.sum()))


def expectation(op, state: VariationalState | np.ndarray, S) -> float:
    c = state.coefficients if isinstance(state, VariationalState) else np.asarray(state)
    op = np.asarray(op)
    if op.shape != (c.size, c.size) or np.shape(S) != op.shape:
        raise DomainError("operator, overlap and coefficient dimensions disagree")
    return float(c @ op @ c / (c @ S @ c))


def lowest_energy(basis: BasisSet, spec: InternalSpec, epsilon: float, lin_dep_tol: float = LIN_DEP_TOL) -> float:
    m = build_matrices(basis, spec)
    return solve_lowest(field_hamiltonian(m, epsilon), m.S, lin_dep_tol).energy


def solve(basis: BasisSet, spec: InternalSpec, epsilon: float, lin_dep_tol: float = LIN_DEP_TOL):
    """Matrices and lowest state for a fixed basis."""
    m = build_matrices(basis, spec)
    state = solve_lowest(field_hamiltonian(m, epsilon), m.S, lin_dep_tol)
    return m, replace(state, epsilon=float(epsilon))


@dataclass(frozen=True)
class OptimizeOptions:
    max_iters: int = 200
    stat_tol: float = STAT_TOL
    parity_constrained: bool = False
    lin_dep_tol: float = LIN_DEP_TOL
    fd_rel_step: float = FD_REL_STEP


class ParameterMap:
    """Flat optimizer vector <-> basis.

    Per free member: log|L_ii| for the diagonal, raw strictly-lower entries,
    then the 3n shift components. In parity-constrained mode a partner is
    not free: it copies L and takes the negated shift, and self-partnered
    members (zero shift) only expose L.
    """

    def __init__(self, basis: BasisSet, parity_constrained: bool = False):
        if parity_constrained and not basis.parity_closed:
            raise DomainError("parity-constrained optimization needs a parity-closed basis")
        self.template = basis
        self.n = basis.n
        self.parity_constrained = parity_constrained
        self.groups: list[tuple[int, int | None]] = []
        seen = set()
        for k in range(len(basis)):
            if k in seen:
                continue
            partner = basis.pairing[k] if parity_constrained else None
            self.groups.append((k, partner))
            seen.add(k)
            if partner is not None:
                seen.add(partner)
        self._diag = np.diag_indices(self.n)
        self._low = np.tril_indices(self.n, -1)

    def _n_l(self):
        return self.n * (self.n + 1) // 2

    @property
    def size(self) -> int:
        total = 0
        for k, partner in self.groups:
            total += self._n_l()
            if partner != k:
                total += 3 * self.n
        return total

    def pack(self, basis: BasisSet) -> np.ndarray:
        out = []
        for k, partner in self.groups:
            g = basis[k]
            out.append(np.log(np.abs(g.L[self._diag])))
            out.append(g.L[self._low])
            if partner != k:
                out.append(g.s.ravel())
        return np.concatenate(out)

    def unpack(self, x: np.ndarray) -> BasisSet:
        members: list[FloatingECG | None] = list(self.template.members)
        pos = 0
        n = self.n
        for k, partner in self.groups:
            L = np.zeros((n, n))
            L[self._diag] = np.exp(x[pos:pos + n])
            pos += n
            nl = n * (n - 1) // 2
            L[self._low] = x[pos:pos + nl]
            pos += nl
            if partner == k:
                s = self.template[k].s
            else:
                s = x[pos:pos + 3 * n].reshape(n, 3)
                pos += 3 * n
            members[k] = FloatingECG(L, s)
            if partner is not None and partner != k:
                members[partner] = FloatingECG(L, -s)
        return BasisSet(tuple(members))


def _fd_gradient(f, x, rel_step):
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def stationarity_norm(basis: BasisSet, spec: InternalSpec, epsilon: float, opts: OptimizeOptions = OptimizeOptions()) -> float:
    """max |dE/da_i| by central differences over the free parameters."""
    pmap = ParameterMap(basis, opts.parity_constrained)
    f = _objective(pmap, spec, epsilon, opts.lin_dep_tol)
    return float(np.max(np.abs(_fd_gradient(f, pmap.pack(basis), opts.fd_rel_step))))


# returned in place of an energy when a trial basis cannot be solved
_PENALTY = 1e6


def _objective(pmap: ParameterMap, spec: InternalSpec, epsilon: float, lin_dep_tol: float):
    def f(x):
        try:
            e = lowest_energy(pmap.unpack(x), spec, epsilon, lin_dep_tol)
        except (DegenerateBasisError, DomainError, np.linalg.LinAlgError):
            return _PENALTY
        return e if np.isfinite(e) else _PENALTY

    return f


def optimize_nonlinear(
    basis: BasisSet,
    spec: InternalSpec,
    epsilon: float = 0.0,
    opts: OptimizeOptions = OptimizeOptions(),
) -> tuple[BasisSet, VariationalState]:
    """Minimize the lowest eigenvalue over all Cholesky entries and shifts.

    Quasi-Newton (BFGS) on central finite-difference gradients of the
    energy; stops once ``max |dE/da_i| <= stat_tol``. Running out of
    iterations is reported through ``converged=False``, not raised.
    """
    pmap = ParameterMap(basis, opts.parity_constrained)
    f = _objective(pmap, spec, epsilon, opts.lin_dep_tol)
    x0 = pmap.pack(basis)

    def jac(x):
        return _fd_gradient(f, x, opts.fd_rel_step)

    g0 = jac(x0)
    if opts.max_iters > 0 and np.max(np.abs(g0), initial=0.0) > opts.stat_tol:
        res = optimize.minimize(
            f,
            x0,
            jac=jac,
            method="BFGS",
            options={"gtol": opts.stat_tol, "norm": np.inf, "maxiter": opts.max_iters},
        )
        x = res.x if res.fun <= f(x0) else x0
        log.debug("BFGS at eps=%g: %s after %d iterations", epsilon, res.message, res.nit)
        grad = jac(x)
    else:
        x = x0
        grad = g0
    best = pmap.unpack(x)
    norm = float(np.max(np.abs(grad), initial=0.0))
    _, state = solve(best, spec, epsilon, opts.lin_dep_tol)
    state = replace(state, stationarity_norm=norm, converged=norm <= opts.stat_tol)
    return best, state
