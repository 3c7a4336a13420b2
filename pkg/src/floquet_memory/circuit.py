"""Noisy runs of the measurement schedule and the resulting syndrome record.

A trial starts from the maximally mixed state, performs a noiseless R, G, B, R
warm-up (period 0), then repeats periods of rounds G, B, R with sampled errors
applied before each round.  Vertex stabilizers are inferred from two
consecutive rounds: V_B^Z after G, V_R^X after B, V_G^Y after R.  A final
noiseless period is appended so every error is read out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Set

import numpy as np

from .channel import (SIMPLE_ERROR_TYPES, ErrorConfiguration,
                      error_operators, sample, substream)
from .code import ROUND_BASIS, MeasurementRecord, checks, measure_round, vertex_operator
from .lattice import COLORS, ColoredTorusLattice, color_index, string_class, superlattice
from .pauli import OutcomePolicy, PauliString, StabilizerTableau, commutes, multiply

PERIOD_ROUNDS = ("G", "B", "R")
# family read out at the end of each round, and the round measured just before it
READOUT = {"G": ("B", "R"), "B": ("R", "G"), "R": ("G", "B")}


def readout_sign(lattice: ColoredTorusLattice, vertex: int) -> int:
    """Sign s with V = s * (product of the six surrounding checks, earlier round first)."""
    c = lattice.vertex_color[vertex]
    earlier, later = (c + 1) % 3, (c + 2) % 3  # e.g. blue vertex: R checks, then G checks
    prod = PauliString.identity(lattice.n_qubits)
    for rnd in (earlier, later):
        for e in lattice.vertex_edges[vertex]:
            if lattice.edge_color[e] == rnd:
                prod = multiply(prod, checks_by_edge(lattice)[e])
    v = vertex_operator(lattice, vertex, ROUND_BASIS[c]).pauli
    ratio = multiply(prod, v)
    if ratio.x or ratio.z or ratio.phase % 2:
        raise AssertionError("check product is not the vertex operator")
    return 1 if ratio.phase == 0 else -1


_CHECK_CACHE: Dict[tuple, Dict[int, PauliString]] = {}


def checks_by_edge(lattice: ColoredTorusLattice) -> Dict[int, PauliString]:
    key = (lattice.l1, lattice.l2)
    if key not in _CHECK_CACHE:
        _CHECK_CACHE[key] = {c.edge: c.pauli for b in range(3) for c in checks(lattice, b)}
    return _CHECK_CACHE[key]


@dataclass
class SyndromeHistory:
    """Stabilizer values[tau][color] (bit per vertex of that color) and their changes."""

    lattice_size: tuple
    values: List[Dict[str, np.ndarray]] = field(default_factory=list)
    changes: List[Dict[str, np.ndarray]] = field(default_factory=list)  # periods 1..T

    def to_json(self) -> str:
        return json.dumps({"size": list(self.lattice_size),
                           "values": [{c: v.tolist() for c, v in d.items()} for d in self.values]})


@dataclass
class TrialOutcome:
    history: SyndromeHistory
    frame: PauliString
    strings: Dict[str, Set[int]]  # accumulated error edges per color (simple model)
    true_class: Dict[str, tuple]
    record: object = None
    errors: ErrorConfiguration = None


def _apply_error(tableau: StabilizerTableau, op: PauliString) -> None:
    for j, g in enumerate(tableau.generators):
        if not commutes(g, op):
            tableau.generators[j] = g.negate()


def _readout(lattice, last: Dict[str, Dict[int, int]], color: int) -> np.ndarray:
    earlier, later = COLORS[(color + 1) % 3], COLORS[(color + 2) % 3]
    out = []
    for v in lattice.vertices_of_color(color):
        bit = 0 if readout_sign(lattice, v) == 1 else 1
        for e in lattice.vertex_edges[v]:
            ec = COLORS[lattice.edge_color[e]]
            if ec == earlier:
                bit ^= last[earlier][e]
            elif ec == later:
                bit ^= last[later][e]
        out.append(bit)
    return np.array(out, dtype=np.uint8)


def run_trial(lattice: ColoredTorusLattice, model, periods: int, seed: int,
              errors: ErrorConfiguration = None, policy=OutcomePolicy.RANDOM) -> TrialOutcome:
    """Simulate warm-up plus ``periods`` noisy periods; ``errors`` overrides sampling."""
    steps = 3 * periods
    if errors is None:
        errors = sample(model, lattice, steps, seed)
    if errors.steps < steps:
        raise ValueError("error configuration too short")
    rng = substream(seed, 1 << 20)
    n = lattice.n_qubits
    t = StabilizerTableau(n)
    last: Dict[str, Dict[int, int]] = {}
    hist = SyndromeHistory((lattice.l1, lattice.l2))
    current: Dict[str, np.ndarray] = {}
    record = MeasurementRecord()

    def do_round(r):
        measure_round(t, lattice, r, policy, rng, record)
        last[r] = record.outcomes[-1]
        fam, prev = READOUT[r]
        if prev in last:
            current[fam] = _readout(lattice, last, color_index(fam))

    for r in "RGBR":
        do_round(r)
    hist.values.append(dict(current))

    frame = PauliString.identity(n)
    strings = {c: set() for c in COLORS}
    single_x = errors.kind == "single-x"
    step = 0
    # one extra noiseless period reads out errors from the end of the last one
    for _ in range(periods + 1):
        for r in PERIOD_ROUNDS:
            noisy = step < steps
            if noisy and (not single_x or r in ("G", "B")):
                for op in error_operators(errors, lattice, step):
                    _apply_error(t, op)
                    frame = multiply(frame, op)
            if noisy and not single_x:
                for ty, (color, _) in enumerate(SIMPLE_ERROR_TYPES):
                    edges = lattice.edges_of_color(color)
                    for k in np.flatnonzero(errors.bits[step, ty]):
                        strings[color] ^= {edges[k]}
            step += 1
            do_round(r)
        hist.values.append(dict(current))
        prev = hist.values[-2]
        hist.changes.append({c: current[c] ^ prev[c] for c in COLORS})
    truth = {c: string_class(lattice, c, strings[c]) for c in COLORS}
    return TrialOutcome(hist, frame, strings, truth, record, errors)


def project_syndrome_to_superlattice(history: SyndromeHistory, color) -> List[Set[int]]:
    """Per period, the supervertex positions whose stabilizer flipped."""
    c = COLORS[color_index(color)]
    out = []
    for ch in history.changes:
        defects = set(int(k) for k in np.flatnonzero(ch[c]))
        if len(defects) % 2:
            raise ValueError("odd number of defects in one period")
        out.append(defects)
    return out


def total_defects(history: SyndromeHistory, color) -> Set[int]:
    """Defects accumulated over all periods (XOR), for decoding the whole run at once."""
    acc: Set[int] = set()
    for d in project_syndrome_to_superlattice(history, color):
        acc ^= d
    return acc


def string_boundary(lattice: ColoredTorusLattice, color, edges) -> Set[int]:
    """Supervertex positions at the ends of a chain of ``color`` edges."""
    sl = superlattice(lattice, color)
    out: Set[int] = set()
    for e in edges:
        for v in sl.superedge_ends[sl.edge_position[e]]:
            out ^= {v}
    return out


def dump_trials(outcomes: Sequence[TrialOutcome]) -> str:
    """Newline-delimited JSON with syndrome histories and truth classes."""
    lines = []
    for o in outcomes:
        lines.append(json.dumps({
            "size": list(o.history.lattice_size),
            "changes": [{c: v.tolist() for c, v in d.items()} for d in o.history.changes],
            "true_class": {c: list(k) for c, k in o.true_class.items()},
            "strings": {c: sorted(s) for c, s in o.strings.items()},
        }))
    return "\n".join(lines)
