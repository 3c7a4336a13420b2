from hypothesis import given, settings, strategies as st

from floquet_memory import gf2

vectors = st.lists(st.integers(0, (1 << 12) - 1), min_size=0, max_size=10)


@given(vectors)
@settings(max_examples=60, deadline=None)
def test_kernel_and_rank(vs):
    r = gf2.rank(vs)
    ker = gf2.kernel(vs)
    assert r + len(ker) == len(vs)
    for combo in ker:
        acc = 0
        for j in gf2.bits(combo):
            acc ^= vs[j]
        assert acc == 0


@given(vectors)
@settings(max_examples=60, deadline=None)
def test_annihilator(vs):
    ann = gf2.annihilator(vs, 12)
    assert len(ann) == 12 - gf2.rank(vs)
    for a in ann:
        assert all(gf2.parity(a & v) == 0 for v in vs)


@given(st.lists(st.integers(1, (1 << 10) - 1), min_size=1, max_size=8), st.integers(0, (1 << 10) - 1))
@settings(max_examples=60, deadline=None)
def test_solve(rows, secret):
    rhs = [gf2.parity(secret & r) for r in rows]
    a = gf2.solve(rows, rhs)
    assert [gf2.parity(a & r) for r in rows] == rhs


def test_basis_express():
    b = gf2.XorBasis()
    for v in (0b011, 0b110):
        assert b.add(v)
    assert not b.add(0b101)
    combo = b.express(0b101)
    assert combo is not None
    assert b.express(0b1000) is None
