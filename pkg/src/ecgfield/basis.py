"""Floating s-type explicitly correlated Gaussians over internal coordinates.

A member is ``exp(-(x - s)^T (A kron I3) (x - s))`` with ``A = L L^T``;
``x`` and ``s`` are stored as ``(n, 3)`` arrays, one row per internal
coordinate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

SHIFT_TOL = 1e-12

PLACEMENTS = ("origin", "two-center", "random", "polarized-pairs")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FloatingECG:
    L: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        L = np.tril(np.atleast_2d(np.asarray(self.L, dtype=float)))
        n = L.shape[0]
        if L.shape != (n, n):
            raise DomainError(f"L must be square, got shape {L.shape}")
        s = np.asarray(self.s, dtype=float).reshape(n, 3)
        if np.any(np.diag(L) == 0.0):
            raise DomainError("L must have a nonzero diagonal")
        object.__setattr__(self, "L", _frozen(L))
        object.__setattr__(self, "s", _frozen(s))

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def A(self) -> np.ndarray:
        return self.L @ self.L.T

    def __eq__(self, other):
        if not isinstance(other, FloatingECG):
            return NotImplemented
        return np.array_equal(self.L, other.L) and np.array_equal(self.s, other.s)

    def __hash__(self):
        return hash((self.L.tobytes(), self.s.tobytes()))

    def value(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., n, 3)``."""
        d = np.asarray(x, dtype=float) - self.s
        return np.exp(-np.einsum("...ia,ij,...ja->...", d, self.A, d))

    def to_dict(self) -> dict:
        rows, cols = np.tril_indices(self.n)
        return {"L": [float(v) for v in self.L[rows, cols]], "s": [float(v) for v in self.s.ravel()]}

    @classmethod
    def from_dict(cls, d: dict) -> "FloatingECG":
        tri = np.asarray(d["L"], dtype=float)
        n = int(round((np.sqrt(8 * tri.size + 1) - 1) / 2))
        if n * (n + 1) // 2 != tri.size:
            raise DomainError(f"L triangle has {tri.size} entries, not a triangular number")
        L = np.zeros((n, n))
        L[np.tril_indices(n)] = tri
        return cls(L, np.asarray(d["s"], dtype=float))


def parity_partner(g: FloatingECG) -> FloatingECG:
    return FloatingECG(g.L, -g.s)


def _same_L(a: FloatingECG, b: FloatingECG, tol: float) -> bool:
    return np.max(np.abs(a.L - b.L)) <= tol


def find_pairing(members: Sequence[FloatingECG], tol: float = SHIFT_TOL) -> tuple[int, ...] | None:
    """Index of each member's inversion partner, or None if not closed."""
    pairing = [-1] * len(members)
    for k, g in enumerate(members):
        if pairing[k] >= 0:
            continue
        if np.max(np.abs(g.s), initial=0.0) <= tol:
            pairing[k] = k
            continue
        for j in range(len(members)):
            if j == k or pairing[j] >= 0:
                continue
            h = members[j]
            if _same_L(g, h, tol) and np.max(np.abs(g.s + h.s)) <= tol:
                pairing[k], pairing[j] = j, k
                break
        else:
            return None
    return tuple(pairing)


@dataclass(frozen=True, eq=False)
class BasisSet:
    members: tuple[FloatingECG, ...]
    parity_closed: bool = field(default=False)
    pairing: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DomainError("a basis needs at least one member")
        n = members[0].n
        if any(g.n != n for g in members):
            raise DomainError("all members must have the same number of internal coordinates")
        pairing = find_pairing(members)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "pairing", pairing)
        object.__setattr__(self, "parity_closed", pairing is not None)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k):
        return self.members[k]

    @property
    def n(self) -> int:
        return self.members[0].n

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, s)`` arrays of shapes ``(K, n, n)`` and ``(K, n, 3)``."""
        A = np.array([g.A for g in self.members])
        s = np.array([g.s for g in self.members])
        return A, s

    def mirrored(self) -> "BasisSet":
        return BasisSet(tuple(parity_partner(g) for g in self.members))

    def to_dict(self) -> dict:
        return {
            "n_internal": self.n,
            "members": [g.to_dict() for g in self.members],
            "parity_closed": self.parity_closed,
            "pairing": list(self.pairing) if self.pairing is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "BasisSet":
        return cls(tuple(FloatingECG.from_dict(m) for m in d["members"]))

    @classmethod
    def from_json(cls, text: str) -> "BasisSet":
        return cls.from_dict(json.loads(text))


def parity_close(basis: BasisSet, tol: float = SHIFT_TOL) -> BasisSet:
    if basis.parity_closed:
        return basis
    members = list(basis.members)
    for g in basis.members:
        if np.max(np.abs(g.s)) <= tol:
            continue
        present = any(
            _same_L(g, h, tol) and np.max(np.abs(g.s + h.s)) <= tol for h in members
        )
        if not present:
            members.append(parity_partner(g))
    return BasisSet(tuple(members))


def even_tempered(K: int, lo: float = 0.16, hi: float = 8.9) -> np.ndarray:
    """Geometric sequence of Cholesky diagonals (exponent = value**2)."""
    if K == 1:
        return np.array([1.0])
    return np.geomspace(lo, hi, K)


def seed_basis(
    spec,
    K: int,
    placement: str = "origin",
    *,
    d: float = 3.0,
    seed: int = 0,
    scale: float = 1.0,
    delta: float = 0.1,
) -> BasisSet:
    """Deterministic starting basis.

    ``origin``: even-tempered members at zero shift. ``two-center``: the
    first ceil(K/2) members at the origin, the rest shifted to (0, 0, d) in
    every internal coordinate. ``random``: Cholesky diagonals log-uniform in
    [0.1, 10], shifts uniform in [-scale, scale]. ``polarized-pairs``: K/2
    even-tempered exponents, each as a +/- pair shifted along z by
    ``delta`` widths; closed under inversion by construction.
    """
    if K < 1:
        raise DomainError(f"basis size must be >= 1, got {K}")
    n = spec.n_internal if hasattr(spec, "n_internal") else int(spec)
    eye = np.eye(n)
    zero = np.zeros((n, 3))
    if placement == "origin":
        members = [FloatingECG(l * eye, zero) for l in even_tempered(K)]
    elif placement == "two-center":
        k0 = (K + 1) // 2
        shifted = np.zeros((n, 3))
        shifted[:, 2] = d
        members = [FloatingECG(l * eye, zero) for l in even_tempered(k0)]
        members += [FloatingECG(l * eye, shifted) for l in even_tempered(K - k0, 0.3, 3.0)]
    elif placement == "random":
        rng = np.random.default_rng(seed)
        members = []
        for _ in range(K):
            L = np.diag(10.0 ** rng.uniform(-1.0, 1.0, n))
            L[np.tril_indices(n, -1)] = rng.uniform(-0.3, 0.3, n * (n - 1) // 2)
            members.append(FloatingECG(L, rng.uniform(-scale, scale, (n, 3))))
    elif placement == "polarized-pairs":
        if K % 2:
            raise DomainError("polarized-pairs placement needs an even basis size")
        members = []
        for l in even_tempered(K // 2, 0.1, 6.0):
            s = np.zeros((n, 3))
            s[:, 2] = delta / l
            members += [FloatingECG(l * eye, s), FloatingECG(l * eye, -s)]
    else:
        raise DomainError(f"unknown placement {placement!r}; known: {PLACEMENTS}")
    return BasisSet(tuple(members))
