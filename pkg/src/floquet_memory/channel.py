"""Error models: six two-qubit error types per round, or single-qubit X flips."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .code import edge_operator
from .lattice import COLORS, ColoredTorusLattice, color_index
from .pauli import PauliString, multiply

# the two-qubit errors that can change logical classes; E_R^X, E_G^Y, E_B^Z are checks
SIMPLE_ERROR_TYPES: Tuple[Tuple[str, str], ...] = (
    ("R", "Y"), ("R", "Z"), ("G", "X"), ("G", "Z"), ("B", "X"), ("B", "Y"))


def _check_rate(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 0.5) or math.isnan(p):
        raise ValueError(f"error rate must lie in [0, 1/2], got {p}")
    return p


@dataclass(frozen=True)
class SimpleErrorModel:
    """Independent E_b^a errors on every b-colored edge after every round."""

    rates: Tuple[float, ...]

    def __init__(self, p=0.0):
        if np.ndim(p) == 0:
            rates = (float(p),) * 6
        else:
            rates = tuple(float(x) for x in p)
            if len(rates) != 6:
                raise ValueError("need one rate per error type (6)")
        object.__setattr__(self, "rates", tuple(_check_rate(r) for r in rates))

    @property
    def p(self) -> float:
        if len(set(self.rates)) != 1:
            raise ValueError("model has unequal rates")
        return self.rates[0]

    def rate(self, color, basis: str) -> float:
        return self.rates[SIMPLE_ERROR_TYPES.index((COLORS[color_index(color)], basis))]


@dataclass(frozen=True)
class SingleXErrorModel:
    """X flips on every qubit before each round-G and round-B measurement."""

    p: float

    def __post_init__(self):
        _check_rate(self.p)


@dataclass
class ErrorConfiguration:
    """Occurrence bits[step, type, site] plus the rates that produced them.

    For the simple model a site is the k-th edge of the type's color; for the
    single-X model there is one type and the sites are plaquettes.
    """

    bits: np.ndarray
    rates: Tuple[float, ...]
    kind: str  # "simple" or "single-x"

    @property
    def steps(self) -> int:
        return self.bits.shape[0]

    @property
    def log_probability(self) -> float:
        total = 0.0
        for t, rate in enumerate(self.rates):
            ones = int(self.bits[:, t, :].sum())
            zeros = self.bits[:, t, :].size - ones
            total += _xlogy(ones, rate) + _xlogy(zeros, 1.0 - rate)
        return total

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "rates": list(self.rates), "shape": list(self.bits.shape),
                           "ones": [list(map(int, idx)) for idx in np.argwhere(self.bits)]})

    @classmethod
    def from_json(cls, text: str) -> "ErrorConfiguration":
        doc = json.loads(text)
        bits = np.zeros(doc["shape"], dtype=np.uint8)
        for idx in doc["ones"]:
            bits[tuple(idx)] = 1
        return cls(bits, tuple(doc["rates"]), doc["kind"])


def _xlogy(count: int, rate: float) -> float:
    if count == 0:
        return 0.0
    return count * math.log(rate) if rate > 0 else -math.inf


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (step, type, ...) key; order of use does not matter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def sample(model, lattice: ColoredTorusLattice, steps: int, seed: int) -> ErrorConfiguration:
    """Draw independent Bernoulli errors; the (step, type) substreams make it order independent."""
    if isinstance(model, SimpleErrorModel):
        nsite = 3 * lattice.l1 * lattice.l2
        rates = model.rates
        kind = "simple"
    elif isinstance(model, SingleXErrorModel):
        nsite = lattice.n_qubits
        rates = (model.p,)
        kind = "single-x"
    else:
        raise TypeError(f"unknown error model {model!r}")
    bits = np.zeros((steps, len(rates), nsite), dtype=np.uint8)
    for step in range(steps):
        for t, rate in enumerate(rates):
            if rate > 0:
                bits[step, t] = substream(seed, step, t).random(nsite) < rate
    return ErrorConfiguration(bits, tuple(rates), kind)


def error_operators(config: ErrorConfiguration, lattice: ColoredTorusLattice, step: int, n: int = None):
    """Pauli operators that occurred at ``step``."""
    n = n or lattice.n_qubits
    out = []
    if config.kind == "simple":
        for t, (color, basis) in enumerate(SIMPLE_ERROR_TYPES):
            edges = lattice.edges_of_color(color)
            for k in np.flatnonzero(config.bits[step, t]):
                out.append(edge_operator(lattice, edges[k], basis, n))
    else:
        for q in np.flatnonzero(config.bits[step, 0]):
            out.append(PauliString.from_letters(n, {int(q): "X"}))
    return out


def apply_to_pauli_frame(config: ErrorConfiguration, lattice: ColoredTorusLattice, frame: PauliString,
                         steps: Sequence[int] = None) -> PauliString:
    """Multiply the frame by every occurred error in time order."""
    for step in (range(config.steps) if steps is None else steps):
        for op in error_operators(config, lattice, step, frame.n):
            frame = multiply(frame, op)
    return frame


def effective_rate(p: float) -> float:
    """Probability that an odd number of 6 independent Bernoulli(p) events occur."""
    p = _check_rate(p)
    q = 1.0 - p
    return 6 * p * q ** 5 + 20 * p ** 3 * q ** 3 + 6 * p ** 5 * q


def effective_rate_bruteforce(p: float) -> float:
    p = _check_rate(p)
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=6):
        k = sum(pattern)
        if k % 2:
            total += p ** k * (1 - p) ** (6 - k)
    return total


def invert_effective_rate(target: float) -> float:
    """The p in [0, 1/2] with effective_rate(p) == target."""
    if not (0.0 <= target <= 0.5):
        raise ValueError("target must lie in [0, 1/2]")
    if target in (0.0, 0.5):
        return target
    return brentq(lambda p: effective_rate(p) - target, 0.0, 0.5, xtol=1e-15, rtol=1e-15)


def string_probability(n_edges: int, length: int, pt: float) -> float:
    """(1-pt)^N (pt/(1-pt))^|E| for one superlattice string."""
    return (1.0 - pt) ** n_edges * (pt / (1.0 - pt)) ** length


__all__ = [
    "SIMPLE_ERROR_TYPES", "SimpleErrorModel", "SingleXErrorModel", "ErrorConfiguration", "sample",
    "substream", "error_operators", "apply_to_pauli_frame", "effective_rate", "effective_rate_bruteforce",
    "invert_effective_rate", "string_probability",
]
