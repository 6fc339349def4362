"""Batched numpy evaluation of the same matrix elements as ``_loops``.

Every pair (k, l) is evaluated at once with stacked ``linalg`` calls.
"""
import numpy as np
from scipy.special import erf


def boys0(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < 1e-6
    ts = t[small]
    out[small] = 1.0 - ts / 3.0 + ts * ts / 10.0 - ts**3 / 42.0
    x = np.sqrt(t[~small])
    out[~small] = 0.5 * np.sqrt(np.pi) * erf(x) / x
    return out


def _mirror_upper(X):
    return np.triu(X) + np.triu(X, 1).T


def assemble(As, shifts, lam, pair_w, pair_q, dip):
    n = As.shape[1]
    Ak = As[:, None]
    Al = As[None, :]
    A = Ak + Al
    Ainv = np.linalg.inv(A)
    det = np.linalg.det(A)
    red = Ak @ Ainv @ Al
    d = shifts[:, None] - shifts[None, :]
    gamma = -np.einsum("klia,klij,klja->kl", d, red, d)
    S = (np.pi**n / det) ** 1.5 * np.exp(gamma)

    b = As @ shifts
    u = Ainv @ (b[:, None] + b[None, :])
    P = Ak @ lam @ Al
    kin = 3.0 * np.einsum("klij,klji->kl", P, Ainv)
    dk = u - shifts[:, None]
    dl = u - shifts[None, :]
    kin += 2.0 * np.einsum("klia,klij,klja->kl", dk, P, dl)

    pot = np.zeros_like(S)
    for w, q in zip(pair_w, pair_q):
        if q == 0.0:
            continue
        beta = 1.0 / np.einsum("i,klij,j->kl", w, Ainv, w)
        m = np.einsum("i,klia->kla", w, u)
        r2 = np.einsum("kla,kla->kl", m, m)
        pot += q * 2.0 * np.sqrt(beta / np.pi) * boys0(beta * r2)

    mz = np.einsum("i,kli->kl", dip, u[..., 2])
    return (
        _mirror_upper(S),
        _mirror_upper(S * kin),
        _mirror_upper(S * pot),
        _mirror_upper(S * mz),
    )


def overlap_cross(As1, shifts1, As2, shifts2):
    """Overlap matrix between two (possibly different) member lists."""
    n = As1.shape[1]
    Ak = As1[:, None]
    Al = As2[None, :]
    A = Ak + Al
    red = Ak @ np.linalg.inv(A) @ Al
    d = shifts1[:, None] - shifts2[None, :]
    gamma = -np.einsum("klia,klij,klja->kl", d, red, d)
    return (np.pi**n / np.linalg.det(A)) ** 1.5 * np.exp(gamma)
