import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_memory.pauli import (DeterministicConflict, OutcomePolicy, PauliString, StabilizerTableau, commutes,
                                  multiply)

MATS = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1])}


def dense(p: PauliString) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(p.n):
        out = np.kron(out, MATS[p.letter(q)])
    return (1j ** p.phase) * out


paulis2 = st.builds(lambda x, z, ph: PauliString(2, x, z, ph),
                    st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))


def test_x_times_z():
    x = PauliString.parse("+X")
    z = PauliString.parse("+Z")
    assert str(multiply(x, z)) == "-iY"
    assert np.allclose(dense(multiply(x, z)), dense(x) @ dense(z))


def test_identity_and_involution():
    a = PauliString.from_letters(3, {0: "X", 2: "Y"})
    assert multiply(a, PauliString.identity(3)) == a
    assert multiply(a, a) == PauliString.identity(3)


@given(paulis2, paulis2, paulis2)
@settings(max_examples=100, deadline=None)
def test_products_match_dense_matrices(a, b, c):
    assert np.allclose(dense(multiply(a, b)), dense(a) @ dense(b))
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))
    assert commutes(a, b) == commutes(b, a)
    assert commutes(a, b) == np.allclose(dense(a) @ dense(b), dense(b) @ dense(a))


def test_text_roundtrip():
    p = PauliString.from_letters(4, {0: "X", 1: "Y", 3: "Z"}, sign=-1)
    assert PauliString.parse(str(p)) == p


def test_measure_deterministic_and_random():
    t = StabilizerTableau(2)
    zz = PauliString.parse("+ZZ")
    v, det = t.measure(zz, OutcomePolicy.FORCE_PLUS)
    assert v == 1 and not det
    v, det = t.measure(zz)
    assert v == 1 and det
    with pytest.raises(DeterministicConflict):
        t.measure(zz, OutcomePolicy.FORCE_MINUS)
    v, det = t.measure(PauliString.parse("+XX"), OutcomePolicy.FORCE_MINUS)
    assert v == -1 and t.in_group(PauliString.parse("-XX"), unsigned=False)


@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=12), st.integers(0, 99))
@settings(max_examples=40, deadline=None)
def test_tableau_invariants(ops, seed):
    rng = np.random.default_rng(seed)
    t = StabilizerTableau(4)
    t.add_logical("L", PauliString(4, 0b0011, 0))
    for x, z in ops:
        op = PauliString(4, x, z).unsigned()
        if op.weight == 0:
            continue
        before = t.rank
        t.measure(op, OutcomePolicy.RANDOM, rng)
        assert t.rank in (before, before + 1)
        for g, h in itertools.combinations(t.generators, 2):
            assert commutes(g, h)
        for g in t.generators:
            assert all(commutes(g, lg) for lg in t.logicals.values())
