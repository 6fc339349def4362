"""Closed-form matrix elements between floating ECGs.

Product of two members is again a Gaussian with exponent ``A = A_k + A_l``
centred at ``u = A^-1 (A_k s_k + A_l s_l)``. Overlap, kinetic and dipole
follow from its moments; the Coulomb term reduces 1/r to the Boys function
F0 of the projected distance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import BasisSet, FloatingECG
from .errors import DomainError
from .system import SINGLE, DIFFERENCE, CoulombPair, InternalSpec


@dataclass(frozen=True)
class OperatorMatrices:
    S: np.ndarray
    T_kin: np.ndarray
    V: np.ndarray
    Mz: np.ndarray

    @property
    def H0(self) -> np.ndarray:
        return self.T_kin + self.V

    def __len__(self):
        return self.S.shape[0]


def build_matrices(basis: BasisSet, spec: InternalSpec) -> OperatorMatrices:
    if basis.n != spec.n_internal:
        raise DomainError(f"basis has {basis.n} internal coordinates, system has {spec.n_internal}")
    A, s = basis.stacked()
    S, T, V, M = kernels.assemble(A, s, spec.lam, spec.pair_weights, spec.pair_charges, spec.dipole_vector)
    return OperatorMatrices(S, T, V, M)


def _pair_stack(g: FloatingECG, h: FloatingECG):
    if g.n != h.n:
        raise DomainError(f"dimension mismatch: {g.n} vs {h.n} internal coordinates")
    return np.array([g.A, h.A]), np.array([g.s, h.s])


def _element(g, h, lam=None, pair_w=None, pair_q=None, dip=None):
    A, s = _pair_stack(g, h)
    n = g.n
    lam = np.zeros((n, n)) if lam is None else np.asarray(lam, dtype=float)
    pair_w = np.zeros((0, n)) if pair_w is None else np.asarray(pair_w, dtype=float).reshape(-1, n)
    pair_q = np.zeros(0) if pair_q is None else np.asarray(pair_q, dtype=float).ravel()
    dip = np.zeros(n) if dip is None else np.asarray(dip, dtype=float)
    if lam.shape != (n, n) or dip.shape != (n,):
        raise DomainError("operator coefficients do not match the basis dimension")
    S, T, V, M = kernels.assemble(A, s, lam, pair_w, pair_q, dip)
    return S[0, 1], T[0, 1], V[0, 1], M[0, 1]


def overlap(g: FloatingECG, h: FloatingECG) -> float:
    return float(_element(g, h)[0])


def kinetic(g: FloatingECG, h: FloatingECG, lam) -> float:
    """<g| 1/2 sum_jk lam_jk p_j . p_k |h>."""
    return float(_element(g, h, lam=lam)[1])


def coulomb(g: FloatingECG, h: FloatingECG, pair: CoulombPair, spec: InternalSpec | None = None) -> float:
    if pair.tag not in (SINGLE, DIFFERENCE):
        raise DomainError(f"unknown pair tag {pair.tag!r}")
    if pair.charge_product == 0.0:
        return 0.0
    return float(_element(g, h, pair_w=pair.weights, pair_q=[pair.charge_product])[2])


def dipole_z(g: FloatingECG, h: FloatingECG, dipole_coeffs) -> float:
    return float(_element(g, h, dip=dipole_coeffs)[3])
