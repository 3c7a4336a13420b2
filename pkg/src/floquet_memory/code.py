"""Operator families of the three-round Floquet code and its measurement schedule.

Round b measures the two-qubit checks on every b-colored edge in basis
X, Y, Z for b = R, G, B.  Vertex operators and loop logicals are built from
the same edge operators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .lattice import COLORS, ColoredTorusLattice, canonical_loop, color_index
from .pauli import OutcomePolicy, PauliString, StabilizerTableau, multiply

BASES = ("X", "Y", "Z")
ROUND_BASIS = {0: "X", 1: "Y", 2: "Z"}

# per measured round: (e pair, m pair) of equivalent logical names (color, basis)
LOGICAL_TABLE = {
    "R": ((("R", "Y"), ("R", "Z")), (("B", "X"), ("G", "X"))),
    "G": ((("R", "Y"), ("B", "Y")), (("G", "X"), ("G", "Z"))),
    "B": ((("B", "Y"), ("B", "X")), (("G", "Z"), ("R", "Z"))),
}


@dataclass(frozen=True)
class CheckOperator:
    edge: int
    color: int
    basis: str
    pauli: PauliString


@dataclass(frozen=True)
class VertexOperator:
    vertex: int
    basis: str
    pauli: PauliString


@dataclass(frozen=True)
class LogicalOperator:
    color: str
    basis: str
    direction: int
    kind: Dict[str, str]  # round -> "e" / "m" where the label is valid
    pauli: PauliString

    @property
    def label(self) -> str:
        return logical_label(self.color, self.basis)


def logical_label(color, basis: str) -> str:
    return f"L_{COLORS[color_index(color)]}^{basis}"


def _letters_pauli(n: int, qubits: Sequence[int], basis: str) -> PauliString:
    return PauliString.from_letters(n, {q: basis for q in qubits})


def edge_operator(lattice: ColoredTorusLattice, edge: int, basis: str, n: int = None) -> PauliString:
    """Two-qubit ``basis`` x ``basis`` operator on the plaquettes beside ``edge``."""
    return _letters_pauli(n or lattice.n_qubits, lattice.edge_plaquettes[edge], basis)


def checks(lattice: ColoredTorusLattice, round_color, basis: str = None) -> List[CheckOperator]:
    b = color_index(round_color)
    a = basis or ROUND_BASIS[b]
    return [CheckOperator(e, b, a, edge_operator(lattice, e, a)) for e in lattice.edges_of_color(b)]


def vertex_operator(lattice: ColoredTorusLattice, vertex: int, basis: str, n: int = None) -> VertexOperator:
    return VertexOperator(vertex, basis, _letters_pauli(n or lattice.n_qubits, lattice.vertex_plaquettes[vertex], basis))


def stabilizer_family(lattice: ColoredTorusLattice, color, n: int = None) -> List[PauliString]:
    """The inferred vertex stabilizers V_R^X, V_G^Y or V_B^Z, one per vertex of that color."""
    b = color_index(color)
    return [vertex_operator(lattice, v, ROUND_BASIS[b], n).pauli for v in lattice.vertices_of_color(b)]


def logical_kinds(color, basis: str) -> Dict[str, str]:
    key = (COLORS[color_index(color)], basis)
    out = {}
    for rnd, (epair, mpair) in LOGICAL_TABLE.items():
        if key in epair:
            out[rnd] = "e"
        elif key in mpair:
            out[rnd] = "m"
    return out


def logical(lattice: ColoredTorusLattice, color, basis: str, direction: int, n: int = None) -> LogicalOperator:
    """Loop logical L_color^basis: edge operators along the canonical color loop."""
    kinds = logical_kinds(color, basis)
    if not kinds:
        raise ValueError(f"{logical_label(color, basis)} is not a logical of any round")
    loop = canonical_loop(lattice, direction, color)
    qubits = [q for e in loop.edges for q in lattice.edge_plaquettes[e]]
    return LogicalOperator(COLORS[color_index(color)], basis, direction, kinds,
                           _letters_pauli(n or lattice.n_qubits, qubits, basis))


@dataclass
class MeasurementRecord:
    rounds: List[str] = field(default_factory=list)
    outcomes: List[Dict[int, int]] = field(default_factory=list)  # edge -> bit (1 means -1)
    deterministic: List[Dict[int, bool]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps([{"round": r, "outcomes": {str(e): b for e, b in o.items()}}
                           for r, o in zip(self.rounds, self.outcomes)])


def measure_round(tableau: StabilizerTableau, lattice: ColoredTorusLattice, round_color,
                  policy=OutcomePolicy.RANDOM, rng=None, record: MeasurementRecord = None):
    b = color_index(round_color)
    record = record if record is not None else MeasurementRecord()
    out, det = {}, {}
    for chk in checks(lattice, b):
        op = chk.pauli.extend(tableau.n)
        value, was_det = tableau.measure(op, policy, rng)
        out[chk.edge] = 0 if value == 1 else 1
        det[chk.edge] = was_det
    record.rounds.append(COLORS[b])
    record.outcomes.append(out)
    record.deterministic.append(det)
    return record


def run_schedule(tableau: StabilizerTableau, lattice: ColoredTorusLattice, rounds: Sequence,
                 policy=OutcomePolicy.RANDOM, rng=None) -> Tuple[StabilizerTableau, MeasurementRecord]:
    """Measure the checks of each round in edge order on a copy of ``tableau``."""
    if not rounds:
        raise ValueError("rounds must be nonempty")
    t = tableau.copy()
    record = MeasurementRecord()
    for r in rounds:
        measure_round(t, lattice, r, policy, rng, record)
    return t, record


def warmed_up_tableau(lattice: ColoredTorusLattice, n: int = None) -> StabilizerTableau:
    """Maximally mixed start followed by the R, G, B, R warm-up, choosing + for random outcomes."""
    t = StabilizerTableau(n or lattice.n_qubits)
    for r in "RGBR":
        measure_round(t, lattice, r, OutcomePolicy.PREFER_PLUS)
    return t


def measure_vertex_round(tableau: StabilizerTableau, lattice: ColoredTorusLattice,
                         policy=OutcomePolicy.RANDOM, rng=None) -> Dict[int, int]:
    """Toric-variant round: measure V_R^X and V_G^Y directly."""
    out = {}
    for color in (0, 1):
        for v in lattice.vertices_of_color(color):
            op = vertex_operator(lattice, v, ROUND_BASIS[color], tableau.n).pauli
            value, _ = tableau.measure(op, policy, rng)
            out[v] = 0 if value == 1 else 1
    return out


def toric_variant_schedule(tableau: StabilizerTableau, lattice: ColoredTorusLattice, periods: int,
                           policy=OutcomePolicy.RANDOM, rng=None):
    """Periods of R, G, then direct vertex measurements in place of round B."""
    t = tableau.copy()
    record = MeasurementRecord()
    for _ in range(periods):
        measure_round(t, lattice, "R", policy, rng, record)
        measure_round(t, lattice, "G", policy, rng, record)
        vals = measure_vertex_round(t, lattice, policy, rng)
        record.rounds.append("V")
        record.outcomes.append(vals)
        record.deterministic.append({})
    return t, record


def _classify(lattice, tracked: PauliString, before: StabilizerTableau, round_name: str, direction: int):
    """Name from the new round's table that equals ``tracked`` modulo the previous ISG."""
    epair, mpair = LOGICAL_TABLE[round_name]
    for kind, pair in (("e", epair), ("m", mpair)):
        for color, basis in pair:
            cand = logical(lattice, color, basis, direction, before.n).pauli
            if before.in_group(multiply(cand, tracked)):
                return logical_label(color, basis), kind
    return None, None


def automorphism_trace(lattice: ColoredTorusLattice, start: Tuple[str, str], rounds: Sequence[str],
                       direction: int = 0, first_round: str = "R", toric: bool = False) -> List[str]:
    """Labels taken by a tracked logical as the schedule proceeds.

    ``start`` is (color, basis) and must be a logical of ``first_round``.
    Rounds may include "V" (direct vertex measurement, toric variant), which
    keeps the previous label.  Returns [start label, label after each round].
    """
    color, basis = start
    if (color, basis) not in LOGICAL_TABLE[first_round][0] + LOGICAL_TABLE[first_round][1]:
        raise ValueError(f"{logical_label(color, basis)} is not a logical of round {first_round}")
    t = StabilizerTableau(lattice.n_qubits)
    warm = {"R": "RGBR", "G": "GBRG", "B": "BRGB"}[first_round]
    for r in warm:
        measure_round(t, lattice, r, OutcomePolicy.PREFER_PLUS)
    t.add_logical("L", logical(lattice, color, basis, direction).pauli)
    labels = [logical_label(color, basis)]
    for r in rounds:
        before = t.copy()
        if r == "V":
            measure_vertex_round(t, lattice, OutcomePolicy.PREFER_PLUS)
            labels.append(labels[-1])
            continue
        measure_round(t, lattice, r, OutcomePolicy.PREFER_PLUS)
        if "L" not in t.logicals:
            raise ValueError("tracked logical was measured out")
        name, _ = _classify(lattice, t.logicals["L"], before, r, direction)
        if name is None:
            raise ValueError(f"logical not expressible in round {r}")
        labels.append(name)
    return labels


def label_kind(label: str, round_name: str) -> str:
    color, basis = label[2], label[4]
    return logical_kinds(color, basis).get(round_name)
