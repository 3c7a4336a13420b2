"""Binary-symplectic Pauli operators and a stabilizer tableau for mixed states.

A PauliString stores ``i**k * prod_j X_j**x_j Z_j**z_j`` with x and z packed
into Python ints.  With this convention a product only needs the overlap of
the left z-mask with the right x-mask to fix its phase.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .gf2 import XorBasis, parity, popcount

_LETTERS = "IXZY"  # index x + 2z


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    k: int = 0  # exponent of i in the XZ-ordered form, mod 4

    def __post_init__(self):
        object.__setattr__(self, "k", self.k % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_letters(cls, n: int, letters: Dict[int, str], sign: int = 1) -> "PauliString":
        """Hermitian Pauli with the given single-qubit letters and overall sign."""
        x = z = 0
        for q, a in letters.items():
            a = a.upper()
            if a in "XY":
                x |= 1 << q
            if a in "ZY":
                z |= 1 << q
        ny = popcount(x & z)
        return cls(n, x, z, ny + (0 if sign == 1 else 2))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Read "+XIZY"-style text; qubit 0 is the leftmost letter."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls.from_letters(len(text), {q: a for q, a in enumerate(text) if a != "I"}, sign)

    # phase of the operator written with Y letters: i**(k - #Y)
    @property
    def phase(self) -> int:
        return (self.k - popcount(self.x & self.z)) % 4

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        ph = self.phase
        if ph % 2:
            raise ValueError("non-Hermitian Pauli has no real sign")
        return 1 if ph == 0 else -1

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def vector(self) -> int:
        """Symplectic vector x | z << n used for GF(2) work."""
        return self.x | (self.z << self.n)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, popcount(self.x & self.z))

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.k + 2)

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, popcount(self.x & self.z) + (0 if sign == 1 else 2))

    def letter(self, q: int) -> str:
        return _LETTERS[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)]

    def __str__(self) -> str:
        ph = ("+", "+i", "-", "-i")[self.phase]
        return ph + "".join(self.letter(q) for q in range(self.n))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def tensor(self, other: "PauliString") -> "PauliString":
        """Append ``other``'s qubits after this string's qubits."""
        return PauliString(self.n + other.n, self.x | (other.x << self.n), self.z | (other.z << self.n),
                           self.k + other.k)

    def extend(self, n: int) -> "PauliString":
        if n < self.n:
            raise ValueError("cannot shrink a Pauli string")
        return PauliString(n, self.x, self.z, self.k)


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    _check_sizes(a, b)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.k + b.k + 2 * popcount(a.z & b.x))


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return parity((a.x & b.z) ^ (a.z & b.x)) == 0


def product(paulis: Iterable[PauliString], n: int) -> PauliString:
    out = PauliString.identity(n)
    for p in paulis:
        out = multiply(out, p)
    return out


class OutcomePolicy(enum.Enum):
    RANDOM = "random"
    FORCE_PLUS = "plus"
    FORCE_MINUS = "minus"
    PREFER_PLUS = "prefer-plus"  # + when random, accept fixed values


class DeterministicConflict(ValueError):
    pass


class StabilizerTableau:
    """Commuting stabilizer generators of a (possibly mixed) state plus tracked logicals.

    An empty generator list is the maximally mixed state.  Tracked logicals are
    kept commuting with every generator; when a measurement would break that,
    the logical is multiplied by the generator that anticommutes with the
    measured operator.
    """

    def __init__(self, n: int, generators: Iterable[PauliString] = (), logicals: Optional[Dict] = None):
        self.n = n
        self.generators: List[PauliString] = []
        for g in generators:
            self._append(g)
        self.logicals: Dict[object, PauliString] = dict(logicals or {})
        self.lost: List[object] = []

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau(self.n)
        t.generators = list(self.generators)
        t.logicals = dict(self.logicals)
        t.lost = list(self.lost)
        return t

    def _append(self, g: PauliString) -> None:
        if g.n != self.n:
            raise ValueError("generator size mismatch")
        for h in self.generators:
            if not commutes(g, h):
                raise ValueError("generators must commute")
        self.generators.append(g)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def logical_qubits(self) -> int:
        return self.n - self.rank

    def _basis(self) -> XorBasis:
        b = XorBasis()
        for g in self.generators:
            b.add(g.vector)
        return b

    def group_element(self, op: PauliString) -> Optional[PauliString]:
        """The group element with the same unsigned Pauli as ``op``, or None."""
        combo = self._basis().express(op.vector)
        if combo is None:
            return None
        out = PauliString.identity(self.n)
        j = 0
        while combo:
            if combo & 1:
                out = multiply(out, self.generators[j])
            combo >>= 1
            j += 1
        return out

    def in_group(self, op: PauliString, unsigned: bool = True) -> bool:
        g = self.group_element(op)
        if g is None:
            return False
        return unsigned or g.k == op.k

    def add_logical(self, label, op: PauliString) -> None:
        for g in self.generators:
            if not commutes(g, op):
                raise ValueError(f"logical {label} anticommutes with a stabilizer")
        self.logicals[label] = op

    def measure(self, op: PauliString, policy: OutcomePolicy = OutcomePolicy.RANDOM, rng=None):
        """Measure a Hermitian Pauli; returns (outcome sign, was_deterministic).

        The tableau is updated in place.
        """
        if op.n != self.n:
            raise ValueError("operator size mismatch")
        if not op.is_hermitian:
            raise ValueError("can only measure Hermitian Paulis")
        anti = [j for j, g in enumerate(self.generators) if not commutes(g, op)]
        if not anti:
            g = self.group_element(op)
            if g is not None:
                value = 1 if g.k == op.k else -1
                if (policy is OutcomePolicy.FORCE_PLUS and value == -1) or \
                        (policy is OutcomePolicy.FORCE_MINUS and value == 1):
                    raise DeterministicConflict(f"outcome of {op} is fixed to {value:+d}")
                return value, True
            value = self._draw(policy, rng)
            for label, lg in list(self.logicals.items()):
                if not commutes(lg, op):
                    # no stabilizer can repair it: the logical is measured out
                    del self.logicals[label]
                    self.lost.append(label)
            self.generators.append(op if value == 1 else op.negate())
            return value, False
        pivot = self.generators[anti[0]]
        for j in anti[1:]:
            self.generators[j] = multiply(self.generators[j], pivot)
        for label, lg in self.logicals.items():
            if not commutes(lg, op):
                self.logicals[label] = multiply(lg, pivot)
        value = self._draw(policy, rng)
        self.generators[anti[0]] = op if value == 1 else op.negate()
        return value, False

    @staticmethod
    def _draw(policy: OutcomePolicy, rng) -> int:
        if policy in (OutcomePolicy.FORCE_PLUS, OutcomePolicy.PREFER_PLUS):
            return 1
        if policy is OutcomePolicy.FORCE_MINUS:
            return -1
        if rng is None:
            raise ValueError("random outcome requested without an rng")
        return 1 if rng.random() < 0.5 else -1


def commutes_with_all(op: PauliString, others: Iterable[PauliString]) -> bool:
    return all(commutes(op, o) for o in others)


def same_class(a: PauliString, b: PauliString, tableau: StabilizerTableau) -> bool:
    """True when a*b lies in the tableau's group, ignoring signs."""
    return tableau.in_group(multiply(a, b))


def symplectic_rows(paulis: Iterable[PauliString]) -> Tuple[int, ...]:
    return tuple(p.vector for p in paulis)
