"""Pairwise ECG matrix-element loops, compiled with numba when available.

The blocks are tiny (n x n with n = N - 1), so everything is written as
scalar loops; LAPACK call overhead would dominate otherwise.
"""
import math

import numpy as np

from .._accel import njit

_PI = math.pi


@njit
def boys0(t):
    """Zeroth-order Boys function F0(t) = int_0^1 exp(-t u^2) du."""
    if t < 1e-6:
        return 1.0 - t / 3.0 + t * t / 10.0 - t * t * t / 42.0
    x = math.sqrt(t)
    return 0.5 * math.sqrt(_PI) * math.erf(x) / x


@njit
def _spd_inverse(A, Ainv):
    """Inverse of a symmetric positive-definite block via Cholesky; returns det."""
    n = A.shape[0]
    C = np.zeros((n, n))
    det = 1.0
    for i in range(n):
        for j in range(i + 1):
            acc = A[i, j]
            for k in range(j):
                acc -= C[i, k] * C[j, k]
            if i == j:
                C[i, i] = math.sqrt(acc)
                det *= acc
            else:
                C[i, j] = acc / C[j, j]
    # invert the triangular factor, then Ainv = Cinv^T Cinv
    Ci = np.zeros((n, n))
    for i in range(n):
        Ci[i, i] = 1.0 / C[i, i]
        for j in range(i):
            acc = 0.0
            for k in range(j, i):
                acc -= C[i, k] * Ci[k, j]
            Ci[i, j] = acc / C[i, i]
    for i in range(n):
        for j in range(i + 1):
            acc = 0.0
            for k in range(i, n):
                acc += Ci[k, i] * Ci[k, j]
            Ainv[i, j] = acc
            Ainv[j, i] = acc
    return det


@njit
def _matmul(X, Y, out):
    n = X.shape[0]
    m = Y.shape[1]
    p = X.shape[1]
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(p):
                acc += X[i, k] * Y[k, j]
            out[i, j] = acc


@njit
def assemble(As, shifts, lam, pair_w, pair_q, dip):
    K = As.shape[0]
    n = As.shape[1]
    npair = pair_w.shape[0]
    S = np.zeros((K, K))
    T = np.zeros((K, K))
    V = np.zeros((K, K))
    M = np.zeros((K, K))
    pref = _PI ** n

    A = np.empty((n, n))
    Ainv = np.empty((n, n))
    tmp = np.empty((n, n))
    red = np.empty((n, n))
    P = np.empty((n, n))
    b = np.empty((n, 3))
    u = np.empty((n, 3))
    d = np.empty((n, 3))
    AkSk = np.empty((K, n, 3))
    for k in range(K):
        _matmul(As[k], shifts[k], AkSk[k])

    for k in range(K):
        Ak = As[k]
        sk = shifts[k]
        for l in range(k, K):
            Al = As[l]
            sl = shifts[l]
            for i in range(n):
                for j in range(n):
                    A[i, j] = Ak[i, j] + Al[i, j]
            det = _spd_inverse(A, Ainv)

            # exponent of the product at its centre: -(dS)^T Ak A^-1 Al (dS)
            _matmul(Ak, Ainv, tmp)
            _matmul(tmp, Al, red)
            gamma = 0.0
            for a in range(3):
                for i in range(n):
                    d[i, a] = sk[i, a] - sl[i, a]
                for i in range(n):
                    for j in range(n):
                        gamma -= d[i, a] * red[i, j] * d[j, a]
            s = (pref / det) ** 1.5 * math.exp(gamma)

            for i in range(n):
                for a in range(3):
                    b[i, a] = AkSk[k, i, a] + AkSk[l, i, a]
            _matmul(Ainv, b, u)

            _matmul(Ak, lam, tmp)
            _matmul(tmp, Al, P)
            kin = 0.0
            for i in range(n):
                for j in range(n):
                    kin += 3.0 * P[i, j] * Ainv[j, i]
            for a in range(3):
                for i in range(n):
                    for j in range(n):
                        kin += 2.0 * (u[i, a] - sk[i, a]) * P[i, j] * (u[j, a] - sl[j, a])

            pot = 0.0
            for p in range(npair):
                q = pair_q[p]
                if q == 0.0:
                    continue
                wAw = 0.0
                for i in range(n):
                    for j in range(n):
                        wAw += pair_w[p, i] * Ainv[i, j] * pair_w[p, j]
                beta = 1.0 / wAw
                r2 = 0.0
                for a in range(3):
                    m = 0.0
                    for i in range(n):
                        m += pair_w[p, i] * u[i, a]
                    r2 += m * m
                pot += q * 2.0 * math.sqrt(beta / _PI) * boys0(beta * r2)

            mz = 0.0
            for i in range(n):
                mz += dip[i] * u[i, 2]

            S[k, l] = s
            T[k, l] = s * kin
            V[k, l] = s * pot
            M[k, l] = s * mz
            if l != k:
                S[l, k] = S[k, l]
                T[l, k] = T[k, l]
                V[l, k] = V[k, l]
                M[l, k] = M[k, l]
    return S, T, V, M
