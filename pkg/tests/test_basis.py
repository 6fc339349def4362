import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgfield.basis import BasisSet, FloatingECG, parity_close, parity_partner, seed_basis
from ecgfield.errors import DomainError


def ecg(shift, l=1.0):
    return FloatingECG([[l]], np.array(shift, dtype=float).reshape(1, 3))


def test_partner_of_centred_member_is_itself():
    g = ecg([0, 0, 0])
    assert parity_partner(g) == g


def test_partner_flips_shift():
    # hydrogen-centre placement quoted at about 3.05 bohr
    g = ecg([0, 0, 3.05])
    np.testing.assert_array_equal(parity_partner(g).s, [[0, 0, -3.05]])
    np.testing.assert_array_equal(parity_partner(g).L, g.L)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=6, max_size=6), st.floats(0.1, 5))
def test_partner_is_involution(s, l):
    g = FloatingECG(np.array([[l, 0.0], [0.3, l]]), np.array(s).reshape(2, 3))
    assert parity_partner(parity_partner(g)) == g


def test_close_centred_basis_unchanged():
    b = BasisSet(tuple(ecg([0, 0, 0], l) for l in (0.5, 1.0, 2.0)))
    assert b.parity_closed
    assert parity_close(b) is b
    assert len(parity_close(b)) == 3


def test_close_single_shifted_member():
    b = BasisSet((ecg([0, 0, 1.0]),))
    assert not b.parity_closed
    c = parity_close(b)
    assert len(c) == 2 and c.parity_closed
    assert c.pairing == (1, 0)


def test_close_is_idempotent():
    b = parity_close(BasisSet((ecg([0, 0, 1.0]), ecg([0.2, 0, 0], 2.0))))
    assert parity_close(b) is b
    assert len(parity_close(parity_close(b))) == len(b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_close_order_independent(seed, K):
    b = seed_basis(2, K, "random", seed=seed)
    rev = BasisSet(tuple(reversed(b.members)))
    c1, c2 = parity_close(b), parity_close(rev)
    assert c1.parity_closed and c2.parity_closed
    assert len(c1) == len(c2) <= 2 * K
    key = lambda g: (g.L.tobytes(), g.s.tobytes())
    assert sorted(map(key, c1)) == sorted(map(key, c2))
    assert all(any(g == h for h in c1) for g in b)


def test_seed_origin(h_spec):
    b = seed_basis(h_spec, 4, "origin")
    assert len(b) == 4 and b.parity_closed
    assert all(np.all(g.s == 0.0) for g in b)


def test_seed_two_center(h_spec):
    b = seed_basis(h_spec, 6, "two-center", d=3.0)
    shifts = [g.s[0, 2] for g in b]
    assert shifts.count(0.0) == 3 and shifts.count(3.0) == 3
    assert not b.parity_closed


def test_seed_random_deterministic(h_spec):
    a = seed_basis(h_spec, 5, "random", seed=1)
    b = seed_basis(h_spec, 5, "random", seed=1)
    assert all(g == h for g, h in zip(a, b))
    assert not all(g == h for g, h in zip(a, seed_basis(h_spec, 5, "random", seed=2)))


@pytest.mark.parametrize("placement", ["origin", "two-center", "random", "polarized-pairs"])
def test_seed_diagonals_in_range(placement):
    b = seed_basis(2, 8, placement, seed=4)
    diags = np.concatenate([np.diag(g.L) for g in b])
    assert np.all((diags >= 0.1) & (diags <= 10.0))


def test_polarized_pairs_closed():
    b = seed_basis(1, 6, "polarized-pairs", delta=0.1)
    assert b.parity_closed and len(b) == 6
    with pytest.raises(DomainError):
        seed_basis(1, 5, "polarized-pairs")


def test_seed_errors():
    with pytest.raises(DomainError):
        seed_basis(1, 0)
    with pytest.raises(DomainError):
        seed_basis(1, 3, "lattice")


def test_cholesky_keeps_positive_definite():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = rng.integers(1, 4)
        L = np.tril(rng.normal(size=(n, n)))
        L[np.diag_indices(n)] = np.exp(rng.uniform(-3, 3, n))
        assert np.min(np.linalg.eigvalsh(FloatingECG(L, np.zeros((n, 3))).A)) > 0.0


def test_json_roundtrip_bit_exact():
    b = seed_basis(2, 7, "random", seed=3, scale=2.0)
    text = b.to_json()
    back = BasisSet.from_json(text)
    for g, h in zip(b, back):
        assert g.L.tobytes() == h.L.tobytes()
        assert g.s.tobytes() == h.s.tobytes()
    doc = json.loads(text)
    assert len(doc["members"][0]["L"]) == 3 and len(doc["members"][0]["s"]) == 6


def test_value_matches_definition():
    g = FloatingECG([[1.0, 0.0], [0.5, 2.0]], np.arange(6.0).reshape(2, 3) / 10)
    x = np.ones((2, 3))
    d = (x - g.s).ravel()
    assert g.value(x) == pytest.approx(np.exp(-d @ np.kron(g.A, np.eye(3)) @ d))
