"""GF(2) linear algebra on Python ints used as bit vectors."""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple


class XorBasis:
    """Incremental row-echelon basis that remembers how each row was built.

    Each stored row carries a mask over the indices of the vectors passed to
    ``add`` so that a span query can return the combination it used.
    """

    def __init__(self):
        self.rows = {}  # pivot bit -> (vector, combo mask)
        self.count = 0  # vectors offered so far

    def reduce(self, vec: int) -> Tuple[int, int]:
        combo = 0
        while vec:
            top = vec.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                break
            vec ^= row[0]
            combo ^= row[1]
        return vec, combo

    def add(self, vec: int) -> bool:
        """Offer a vector; returns True if it was independent."""
        idx = self.count
        self.count += 1
        combo = 1 << idx
        while vec:
            top = vec.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                self.rows[top] = (vec, combo)
                return True
            vec ^= row[0]
            combo ^= row[1]
        return False

    def contains(self, vec: int) -> bool:
        return self.reduce(vec)[0] == 0

    def express(self, vec: int) -> Optional[int]:
        """Mask of offered vectors summing to ``vec``, or None if outside the span."""
        rest, combo = self.reduce(vec)
        return combo if rest == 0 else None

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(vectors: Iterable[int]) -> int:
    b = XorBasis()
    for v in vectors:
        b.add(v)
    return b.rank


def independent_subset(vectors: Sequence[int]) -> List[int]:
    """Indices of a maximal independent subset, greedy in order."""
    b = XorBasis()
    return [k for k, v in enumerate(vectors) if b.add(v)]


def kernel(vectors: Sequence[int]) -> List[int]:
    """Basis of {c : XOR of vectors[k] over bits k of c == 0}, as masks."""
    rows = {}
    out = []
    for k, v in enumerate(vectors):
        combo = 1 << k
        while v:
            top = v.bit_length() - 1
            row = rows.get(top)
            if row is None:
                rows[top] = (v, combo)
                break
            v ^= row[0]
            combo ^= row[1]
        if v == 0:
            out.append(combo)
    return out


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def bits(x: int) -> List[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m ^= 1 << i
    return m


def _echelon(rows: Sequence[int], extra: Sequence[int] = None):
    """Reduced row echelon form; ``extra`` bits ride along with each row."""
    extra = list(extra) if extra is not None else [0] * len(rows)
    piv = []  # (pivot bit, row, extra)
    for v, e in zip(rows, extra):
        for p, r, re in piv:
            if v >> p & 1:
                v ^= r
                e ^= re
        if v == 0:
            if e:
                raise ValueError("inconsistent linear system")
            continue
        p = v.bit_length() - 1
        piv = [(q, r ^ v, re ^ e) if r >> p & 1 else (q, r, re) for q, r, re in piv]
        piv.append((p, v, e))
    return piv


def annihilator(rows: Sequence[int], nbits: int) -> List[int]:
    """Basis of {a : parity(a & r) == 0 for every r in rows} inside nbits-bit space."""
    piv = _echelon(rows)
    pivots = {p for p, _, _ in piv}
    out = []
    for f in range(nbits):
        if f in pivots:
            continue
        a = 1 << f
        for p, r, _ in piv:
            if r >> f & 1:
                a |= 1 << p
        out.append(a)
    return out


def solve(rows: Sequence[int], rhs: Sequence[int]) -> int:
    """Some a with parity(a & rows[j]) == rhs[j]; raises ValueError if none exists."""
    a = 0
    for p, _, e in _echelon(rows, rhs):
        if e:
            a |= 1 << p
    return a
