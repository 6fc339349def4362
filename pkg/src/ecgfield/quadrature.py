"""Numerical-integration oracle for the closed-form matrix elements.

Test-only. The integrands are evaluated pointwise from the Gaussian
definitions; no closed-form element formula is reused. Smooth integrands
(overlap, kinetic, dipole) use a tensor Gauss-Hermite grid fitted to the
product Gaussian. Coulomb terms switch to coordinates in which the singular
distance is one 3-vector, integrated in spherical coordinates about the
singularity (adaptive radial quadrature, Gauss-Legendre polar angle),
with the remaining coordinates on a Gauss-Hermite grid.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy import integrate

from .basis import FloatingECG
from .errors import DomainError, UnsupportedError
from .system import CoulombPair, InternalSpec

KINDS = ("overlap", "kinetic", "coulomb", "dipole")
MAX_INTERNAL = 2
TOL = 1e-11


def _log_product(g: FloatingECG, h: FloatingECG, x: np.ndarray) -> np.ndarray:
    """log(g(x) h(x)) for points of shape (..., n, 3)."""
    dg = x - g.s
    dh = x - h.s
    return -np.einsum("...ia,ij,...ja->...", dg, g.A, dg) - np.einsum("...ia,ij,...ja->...", dh, h.A, dh)


def _hermite_grid(center: np.ndarray, precision: np.ndarray, nodes: int):
    """Points (M, n, 3) and log-weights (M,) for weight exp(-(x-c)^T P (x-c)).

    Returns ``(x, logw, y2)`` where ``y2`` is |y|^2 in the whitened frame,
    so that integrand/weight can be formed in log space.
    """
    n = precision.shape[0]
    t, w = np.polynomial.hermite.hermgauss(nodes)
    C = np.linalg.cholesky(precision)
    Cinv_T = np.linalg.inv(C).T
    dim = 3 * n
    idx = np.array(list(itertools.product(range(nodes), repeat=dim)))
    y = t[idx].reshape(-1, n, 3)
    logw = np.log(w)[idx].sum(axis=1)
    x = center + np.einsum("ij,mja->mia", Cinv_T, y)
    jac = -3.0 * np.sum(np.log(np.diag(C)))
    return x, logw + jac, np.einsum("mia,mia->m", y, y)


def _gauss_hermite(g, h, integrand, nodes=4):
    A = g.A + h.A
    center = np.linalg.solve(A, g.A @ g.s + h.A @ h.s)
    x, logw, y2 = _hermite_grid(center, A, nodes)
    vals = integrand(x) * np.exp(_log_product(g, h, x) + y2 + logw)
    return float(np.sum(vals))


def _kinetic_density(g, h, lam):
    def f(x):
        grad_g = -2.0 * np.einsum("ij,mja->mia", g.A, x - g.s)
        grad_h = -2.0 * np.einsum("ij,mja->mia", h.A, x - h.s)
        return 0.5 * np.einsum("mia,ij,mja->m", grad_g, lam, grad_h)

    return f


def _unimodular(w: np.ndarray) -> np.ndarray:
    """Integer matrix with first row ``w`` and |det| = 1."""
    n = w.size
    pivot = int(np.flatnonzero(np.abs(w) == 1.0)[0])
    rows = [w] + [np.eye(n)[k] for k in range(n) if k != pivot]
    Q = np.array(rows, dtype=float)
    if abs(abs(np.linalg.det(Q)) - 1.0) > 1e-12:
        raise DomainError(f"pair weights {w} do not define a unimodular coordinate change")
    return Q


def _orthonormal_frame(axis: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(axis)
    e = axis / norm if norm > 1e-14 else np.array([0.0, 0.0, 1.0])
    helper = np.array([1.0, 0.0, 0.0]) if abs(e[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(e, helper)
    e1 /= np.linalg.norm(e1)
    return np.array([e, e1, np.cross(e, e1)])


def _coulomb_pair(g, h, w, n_polar=160, n_azimuth=2, inner_nodes=2):
    """<g| 1/|sum_k w_k r_k'| |h> by spherical + Gauss-Hermite quadrature."""
    n = g.n
    Q = _unimodular(np.asarray(w, dtype=float))
    Qinv = np.linalg.inv(Q)
    A = g.A + h.A
    center_x = np.linalg.solve(A, g.A @ g.s + h.A @ h.s)
    center_y = Q @ center_x
    B = Qinv.T @ A @ Qinv
    beta = 1.0 / (Q @ np.linalg.solve(A, Q.T))[0, 0]

    t0 = center_y[0]
    frame = _orthonormal_frame(t0)
    c, cw = np.polynomial.legendre.leggauss(n_polar)
    # cos(theta) = 1 - 2 v^2 packs nodes toward the peak direction
    v = 0.5 * (c + 1.0)
    vw = 0.5 * cw
    cos_t = 1.0 - 2.0 * v * v
    sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
    ang_w = vw * 4.0 * v
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    dirs = (
        cos_t[:, None, None] * frame[0]
        + (sin_t[:, None] * np.cos(phi)[None, :])[..., None] * frame[1]
        + (sin_t[:, None] * np.sin(phi)[None, :])[..., None] * frame[2]
    ).reshape(-1, 3)
    dir_w = np.repeat(ang_w, n_azimuth) * (2.0 * np.pi / n_azimuth)

    if n > 1:
        Brr = B[1:, 1:]
        Br0 = B[1:, :1]
        shift_rest = -np.linalg.solve(Brr, Br0)  # rest centre moves with y0
        zeros = np.zeros((n - 1, 3))
        y_rest, logw, y2 = _hermite_grid(zeros, Brr, inner_nodes)

    def radial(r):
        y0 = r * dirs  # (D, 3)
        if n == 1:
            x = y0[:, None, :]
            dens = np.exp(_log_product(g, h, x))
        else:
            # (D, n-1, 3): conditional centre of the remaining coordinates
            rest_center = center_y[1:][None] + shift_rest[None, :, :1] * (y0 - t0)[:, None, :]
            y = np.concatenate(
                [
                    np.broadcast_to(y0[:, None, None, :], (y0.shape[0], y_rest.shape[0], 1, 3)),
                    rest_center[:, None] + y_rest[None],
                ],
                axis=2,
            )
            x = np.einsum("ij,dmja->dmia", Qinv, y)
            dens = np.exp(_log_product(g, h, x) + y2 + logw).sum(axis=1)
        return r * np.dot(dir_w, dens)

    R = np.linalg.norm(t0) + 13.0 / np.sqrt(beta)
    peak = min(np.linalg.norm(t0), R)
    pts = [peak] if 0.0 < peak < R else None
    val, _ = integrate.quad(radial, 0.0, R, points=pts, epsabs=0.0, epsrel=1e-13, limit=400)
    return float(val)


def quadrature_oracle(kind: str, g: FloatingECG, h: FloatingECG, spec: InternalSpec, pair: CoulombPair | None = None) -> float:
    """Numerical value of one matrix element.

    ``kind`` is one of overlap, kinetic, coulomb, dipole. For coulomb the
    full potential (all pairs of ``spec``) is integrated unless ``pair`` is
    given.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown integrand kind {kind!r}; known: {KINDS}")
    if g.n != h.n or g.n != spec.n_internal:
        raise DomainError("dimension mismatch between Gaussians and system")
    if g.n > MAX_INTERNAL:
        raise UnsupportedError(f"quadrature oracle limited to {MAX_INTERNAL} internal coordinates (N <= 3)")
    if kind == "overlap":
        return _gauss_hermite(g, h, lambda x: 1.0)
    if kind == "kinetic":
        return _gauss_hermite(g, h, _kinetic_density(g, h, spec.lam))
    if kind == "dipole":
        c = spec.dipole_vector
        return _gauss_hermite(g, h, lambda x: np.einsum("i,mi->m", c, x[..., 2]))
    pairs = spec.pair_table if pair is None else (pair,)
    return float(sum(p.charge_product * _coulomb_pair(g, h, p.weights) for p in pairs if p.charge_product != 0.0))
