"""Exact density matrices of the decohered schedule as weighted Pauli groups.

A state on Q qubits is stored as

    rho = 2^-Q  sum_{g in G}  w(g) g,      w(g) = prod_k c_k ** [g anticommutes with t_k]

where G is generated by commuting signed Paulis and each probe t_k with factor
c_k records one Pauli channel application (c = 1 - 2p).  Measurements record
their outcome in a fresh ancilla qubit: rho -> rho~ (1 + E Z_a) / 2 with the
anticommuting part of G dropped.  Qubit layout: system qubits first, then the
logical ancilla, two reference qubits and the measurement ancillas.

Moments tr(rho_1 ... rho_n) are sums over n-tuples of group elements whose
product is the identity.  Every factor (weights, signs and group membership)
is a character of one linear functional, so the sum splits into independent
blocks, one per connected component of the functionals' binary matroid, and
each block is evaluated densely with a Walsh-Hadamard transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import gf2
from .channel import SIMPLE_ERROR_TYPES, SimpleErrorModel, SingleXErrorModel
from .code import LOGICAL_TABLE, ROUND_BASIS, automorphism_trace, checks, logical, vertex_operator
from .lattice import COLORS, ColoredTorusLattice
from .pauli import PauliString, commutes, multiply
from .statmech import BudgetExceeded

TERM_BUDGET = 24  # log2 of the largest dense block
LOGICAL_ANCILLA = 0  # offsets after the system qubits
REFERENCE = (1, 2)
WARMUP_ROUNDS = "RGBR"
EVOLUTION_ROUNDS = {"floquet": "GBRG", "toric": "GVRG"}


class LayoutMismatch(ValueError):
    pass


@dataclass
class Probe:
    pauli: PauliString
    factor: float
    tag: tuple = ()


@dataclass
class WeightedPauliState:
    n_system: int
    n_qubits: int
    generators: List[PauliString] = field(default_factory=list)
    probes: List[Probe] = field(default_factory=list)
    used: set = field(default_factory=set)
    next_ancilla: int = 0
    rounds: List[Tuple[str, Dict[int, int]]] = field(default_factory=list)  # (label, key -> ancilla)

    def __post_init__(self):
        if not self.used:
            self.used = set(range(self.n_system))
        if not self.next_ancilla:
            self.next_ancilla = self.n_system + 3

    @classmethod
    def maximally_mixed(cls, n_system: int, n_ancillas: int) -> "WeightedPauliState":
        return cls(n_system, n_system + 3 + n_ancillas)

    def copy(self) -> "WeightedPauliState":
        return WeightedPauliState(self.n_system, self.n_qubits, list(self.generators), list(self.probes),
                                  set(self.used), self.next_ancilla, [(l, dict(m)) for l, m in self.rounds])

    @property
    def logical_ancilla(self) -> int:
        return self.n_system + LOGICAL_ANCILLA

    def reference(self, k: int) -> int:
        return self.n_system + REFERENCE[k]

    @property
    def dimension(self) -> int:
        return len(self.generators)

    def lift(self, op: PauliString) -> PauliString:
        return op if op.n == self.n_qubits else op.extend(self.n_qubits)

    def restrict(self, op: PauliString) -> None:
        """Keep the subgroup commuting with ``op``."""
        anti = [j for j, g in enumerate(self.generators) if not commutes(g, op)]
        if not anti:
            return
        pivot = self.generators[anti[0]]
        for j in anti[1:]:
            self.generators[j] = multiply(self.generators[j], pivot)
        del self.generators[anti[0]]

    def append(self, op: PauliString, fresh: int) -> None:
        """Multiply by (1 + op) where ``op`` acts on the untouched qubit ``fresh``.

        Probes are shifted by the single-qubit partner of ``op`` on ``fresh`` so
        that g and g*op carry the same weight.
        """
        bit = 1 << fresh
        xs, zs = bool(op.x & bit), bool(op.z & bit)
        if not (xs or zs):
            raise ValueError("operator does not touch the fresh qubit")
        partner = PauliString(self.n_qubits, 0, bit) if xs else PauliString(self.n_qubits, bit, 0)
        for g in self.generators:
            if not commutes(g, op):
                raise ValueError("appended operator must commute with the group")
            if not commutes(g, partner):
                raise ValueError(f"qubit {fresh} is not fresh")
        for k, pr in enumerate(self.probes):
            if not commutes(pr.pauli, op):
                self.probes[k] = Probe(multiply(pr.pauli, partner), pr.factor, pr.tag)
        self.generators.append(op)
        self.used.add(fresh)

    def measure(self, op: PauliString) -> int:
        """Dephased measurement of ``op``, outcome stored in a new ancilla; returns its index."""
        op = self.lift(op)
        a = self.next_ancilla
        if a >= self.n_qubits:
            raise BudgetExceeded("ran out of ancilla qubits")
        self.next_ancilla += 1
        self.restrict(op)
        self.append(multiply(op, PauliString(self.n_qubits, 0, 1 << a)), a)
        return a

    def project(self, op: PauliString, fresh: int, partner_letter: str = "Z") -> None:
        """Multiply by (1 + op x P_fresh) for a commuting ``op``; P is Z or X on ``fresh``."""
        op = self.lift(op)
        bit = 1 << fresh
        tag = PauliString(self.n_qubits, bit if partner_letter == "X" else 0, bit if partner_letter == "Z" else 0)
        self.append(multiply(op, tag), fresh)

    def apply_error(self, op: PauliString, p: float, tag: tuple = ()) -> None:
        """Pauli channel rho -> (1-p) rho + p E rho E."""
        self.probes.append(Probe(self.lift(op), 1.0 - 2.0 * p, tag))

    def conjugate_controlled(self, control: PauliString, target: PauliString) -> None:
        """Conjugate by C = (1+Zc)/2 + (1-Zc)/2 * K for a Z-type ``control`` commuting with the group."""
        control, target = self.lift(control), self.lift(target)
        for j, g in enumerate(self.generators):
            if not commutes(g, control):
                raise ValueError("control must commute with every term")
            if not commutes(g, target):
                self.generators[j] = multiply(g, control)
        for k, pr in enumerate(self.probes):
            if not commutes(pr.pauli, control):
                self.probes[k] = Probe(multiply(pr.pauli, target), pr.factor, pr.tag)

    def weight(self, element: PauliString) -> float:
        w = 1.0
        for pr in self.probes:
            if not commutes(element, pr.pauli):
                w *= pr.factor
        return w

    def ancilla_mask(self, element: PauliString) -> int:
        """Z mask of ``element`` on the measurement ancillas."""
        first = self.n_system + 3
        return (element.z >> first) << first

    def term_table(self) -> List[Tuple[str, float]]:
        """(generator, weight) rows for debugging and CSV dumps."""
        return [(str(g), self.weight(g)) for g in self.generators]


# --- schedule -----------------------------------------------------------------

def _round_ops(lattice: ColoredTorusLattice, label: str):
    """(key, operator) pairs measured in one round; "V" measures V_R^X and V_G^Y directly."""
    if label == "V":
        return [(("V", v), vertex_operator(lattice, v, ROUND_BASIS[c]).pauli)
                for c in (0, 1) for v in lattice.vertices_of_color(c)]
    return [(c.edge, c.pauli) for c in checks(lattice, label)]


def measure_round(state: WeightedPauliState, lattice: ColoredTorusLattice, label: str) -> None:
    recorded = {}
    for key, op in _round_ops(lattice, label):
        recorded[key] = state.measure(op)
    state.rounds.append((label, recorded))


def ancillas_needed(lattice: ColoredTorusLattice, rounds: str) -> int:
    return sum(len(_round_ops(lattice, r)) for r in rounds)


def warmup(lattice: ColoredTorusLattice, extra_rounds: str = "GBRG", max_qubits: int = 4096) -> WeightedPauliState:
    """Maximally mixed start followed by the noiseless R, G, B, R warm-up."""
    n_anc = ancillas_needed(lattice, WARMUP_ROUNDS + extra_rounds)
    if lattice.n_qubits + 3 + n_anc > max_qubits:
        raise BudgetExceeded("lattice too large for the oracle")
    state = WeightedPauliState.maximally_mixed(lattice.n_qubits, n_anc)
    for r in WARMUP_ROUNDS:
        measure_round(state, lattice, r)
    return state


def apply_channel(state: WeightedPauliState, lattice: ColoredTorusLattice, model, step: int,
                  round_label: str = None) -> None:
    """One application of the error model before the round labelled ``round_label``."""
    if isinstance(model, SimpleErrorModel):
        for (color, basis), rate in zip(SIMPLE_ERROR_TYPES, model.rates):
            for e in lattice.edges_of_color(color):
                op = PauliString.from_letters(lattice.n_qubits, {q: basis for q in lattice.edge_plaquettes[e]})
                state.apply_error(op, rate, ("error", step, e, basis))
    elif isinstance(model, SingleXErrorModel):
        if round_label in ("G", "B"):
            for q in range(lattice.n_qubits):
                state.apply_error(PauliString.from_letters(lattice.n_qubits, {q: "X"}), model.p, ("x", step, q))
    else:
        raise TypeError(f"unknown error model {model!r}")


def apply_measurement_round(state: WeightedPauliState, lattice: ColoredTorusLattice, label: str) -> None:
    measure_round(state, lattice, label)


def _system_vector(state: WeightedPauliState, op: PauliString) -> int:
    m = (1 << state.n_system) - 1
    return (op.x & m) | (op.z & m) << state.n_system


def _retarget(state, lattice, tracked: PauliString, next_label: str, previous: Dict) -> PauliString:
    """Multiply ``tracked`` by recorded checks of the previous round so that it
    commutes with every check of the round ``next_label``.

    Among valid check sets, prefer checks lying inside the current support of
    ``tracked``, then the fewest checks.
    """
    upcoming = [state.lift(op) for _, op in _round_ops(lattice, next_label)]
    want = [0 if commutes(tracked, c) else 1 for c in upcoming]
    if not any(want):
        return tracked
    keys = list(previous)
    ops = dict(_round_ops(lattice, state.rounds[-1][0]))
    elems = [multiply(state.lift(ops[k]), PauliString(state.n_qubits, 0, 1 << previous[k])) for k in keys]
    sys_mask = (1 << state.n_system) - 1
    support = (tracked.x | tracked.z) & sys_mask
    outside = sum(1 << i for i, k in enumerate(keys) if (ops[k].x | ops[k].z) & ~support & sys_mask)
    # column j of the system: which previous checks anticommute with upcoming check j
    rows = []
    for c in upcoming:
        rows.append(sum(1 << i for i, e in enumerate(elems) if not commutes(e, c)))
    base = gf2.solve(rows, want)
    free = gf2.annihilator(rows, len(elems))
    if len(free) > 16:
        raise BudgetExceeded("too many equivalent check sets")
    best = None
    for combo in range(1 << len(free)):
        s = base
        for j in gf2.bits(combo):
            s ^= free[j]
        key = (gf2.popcount(s & outside), gf2.popcount(s), s)
        if best is None or key < best:
            best = key
    out = tracked
    for i in gf2.bits(best[-1]):
        out = multiply(out, elems[i])
    return out


def _find_element(state: WeightedPauliState, op: PauliString) -> Optional[PauliString]:
    """The group element equal to ``op`` up to sign, if any."""
    basis = gf2.XorBasis()
    for g in state.generators:
        basis.add(g.vector)
    combo = basis.express(op.vector)
    if combo is None:
        return None
    out = PauliString.identity(state.n_qubits)
    for j in gf2.bits(combo):
        out = multiply(out, state.generators[j])
    return out


def evolve(state: WeightedPauliState, lattice: ColoredTorusLattice, model, rounds: str,
           tracked: PauliString = None, labels: Sequence[Tuple[str, str]] = (), direction: int = 0):
    """Channel then measurement for each round; keeps ``tracked`` a group element if given."""
    for step, r in enumerate(rounds):
        apply_channel(state, lattice, model, step, r)
        if tracked is not None:
            tracked = _retarget(state, lattice, tracked, r, state.rounds[-1][1])
        measure_round(state, lattice, r)
        if tracked is not None and _find_element(state, tracked) is None:
            raise AssertionError("tracked logical left the group")
    return tracked


def _label_pairs(labels: Sequence[str]) -> List[Tuple[str, str]]:
    return [(s[2], s[4]) for s in labels]


@dataclass
class DiagnosticStates:
    rho1: WeightedPauliState  # after the controlled rotation
    rho2: WeightedPauliState
    rho_qm: WeightedPauliState
    rho_qmr: WeightedPauliState
    control: PauliString = None
    rotation_target: PauliString = None
    chain: List[str] = field(default_factory=list)


def build_states_for_diagnostics(lattice: ColoredTorusLattice, model, variant: str = "floquet",
                                 direction: int = 0) -> DiagnosticStates:
    """The four states entering the Renyi relative entropy and coherent information."""
    if variant not in EVOLUTION_ROUNDS:
        raise ValueError(f"unknown variant {variant!r}")
    rounds = EVOLUTION_ROUNDS[variant]
    base = warmup(lattice, rounds)
    chain = automorphism_trace(lattice, ("B", "X"), rounds, direction)
    labels = _label_pairs(chain)

    # first copy: m-logical eigenstate with its eigenvalue recorded on the logical ancilla
    rho1 = base.copy()
    start = logical(lattice, "B", "X", direction).pauli
    rho1.project(start, rho1.logical_ancilla)
    tracked = _find_element(rho1, multiply(rho1.lift(start),
                                           PauliString(rho1.n_qubits, 0, 1 << rho1.logical_ancilla)))
    tracked = evolve(rho1, lattice, model, rounds, tracked, labels, direction)
    control_mask = rho1.ancilla_mask(tracked)
    control = PauliString(rho1.n_qubits, 0, control_mask)
    final = logical(lattice, labels[-1][0], labels[-1][1], direction).pauli
    target = _rotation_target(lattice, final, rounds[-1], direction)
    rho1.conjugate_controlled(control, target)

    # the second copy is projected onto the e-logical eigenstate the first copy ends in;
    # the toric variant has no such state and uses the canonical L_R^Y loop instead
    if variant == "floquet":
        z_l = PauliString(rho1.n_qubits, 0, 1 << rho1.logical_ancilla)
        final_op = multiply(multiply(tracked, control), z_l)
    else:
        final_op = logical(lattice, "R", "Y", direction).pauli
    rho2 = base.copy()
    evolve(rho2, lattice, model, rounds)
    rho2.project(final_op, rho2.logical_ancilla)

    rho_qm = base.copy()
    evolve(rho_qm, lattice, model, rounds)

    rho_qmr = base.copy()
    for k, loop in enumerate((0, 1)):
        # logical Z along one loop, logical X along the crossing loop
        rho_qmr.project(logical(lattice, "R", "Y", loop).pauli, rho_qmr.reference(k), "Z")
        rho_qmr.project(logical(lattice, "B", "X", 1 - loop).pauli, rho_qmr.reference(k), "X")
    evolve(rho_qmr, lattice, model, rounds)
    return DiagnosticStates(rho1, rho2, rho_qm, rho_qmr, control, target, list(chain))


def _rotation_target(lattice, final: PauliString, last_round: str, direction: int) -> PauliString:
    """A logical of the last round along the other loop that anticommutes with ``final``."""
    epair, mpair = LOGICAL_TABLE[last_round]
    for color, basis in mpair + epair:
        cand = logical(lattice, color, basis, 1 - direction).pauli
        if not commutes(cand, final):
            return cand
    raise ValueError("no anticommuting logical found")


# --- moments ------------------------------------------------------------------

def _fwht(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    h = 1
    n = a.shape[0]
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(n)


@dataclass
class _Functionals:
    vectors: List[int]  # over union coordinates
    factors: List[float]
    tags: List[tuple]


def _union_basis(states: Sequence[WeightedPauliState]):
    basis = gf2.XorBasis()
    chosen: List[PauliString] = []
    for s in states:
        for g in s.generators:
            if basis.add(g.vector):
                chosen.append(g.unsigned())
    for i, a in enumerate(chosen):
        for b in chosen[i + 1:]:
            if not commutes(a, b):
                raise LayoutMismatch("states do not share a commuting term group")
    coords = gf2.XorBasis()
    for g in chosen:
        coords.add(g.vector)
    return chosen, coords


def _state_functionals(state: WeightedPauliState, chosen, coords) -> _Functionals:
    d = len(chosen)
    rows, signs = [], []
    for g in state.generators:
        c = coords.express(g.vector)
        canon = PauliString.identity(state.n_qubits)
        for j in gf2.bits(c):
            canon = multiply(canon, chosen[j])
        ratio = multiply(g, canon)  # g canon = s * canon^2 = s
        if ratio.x or ratio.z or ratio.phase % 2:
            raise AssertionError("generator does not match its coordinates")
        rows.append(c)
        signs.append(0 if ratio.phase == 0 else 1)
    out = _Functionals([], [], [])
    for a in gf2.annihilator(rows, d):
        out.vectors.append(a)
        out.factors.append(0.0)
        out.tags.append(("membership",))
    if any(signs):
        out.vectors.append(gf2.solve(rows, signs))
        out.factors.append(-1.0)
        out.tags.append(("sign",))
    for pr in state.probes:
        v = 0
        for j, b in enumerate(chosen):
            if not commutes(b, pr.pauli):
                v |= 1 << j
        if v and pr.factor != 1.0:
            out.vectors.append(v)
            out.factors.append(pr.factor)
            out.tags.append(pr.tag)
    return out


def _components(vectors: Sequence[int]):
    """Connected components of the binary matroid on ``vectors`` (zero vectors excluded).

    Returns (basis indices, [(component basis positions, member indices)], expressions)
    where expressions[k] is the mask over basis positions summing to vectors[k].
    """
    basis = gf2.XorBasis()
    base_idx = []
    for k, v in enumerate(vectors):
        if v and basis.add(v):
            base_idx.append(k)
    pos = gf2.XorBasis()
    for k in base_idx:
        pos.add(vectors[k])
    parent = list(range(len(base_idx)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    expr = {}
    for k, v in enumerate(vectors):
        if not v:
            continue
        m = pos.express(v)
        expr[k] = m
        idx = gf2.bits(m)
        for j in idx[1:]:
            a, b = find(idx[0]), find(j)
            if a != b:
                parent[a] = b
    groups: Dict[int, List[int]] = {}
    for j in range(len(base_idx)):
        groups.setdefault(find(j), []).append(j)
    members: Dict[int, List[int]] = {r: [] for r in groups}
    for k, m in expr.items():
        members[find(gf2.bits(m)[0])].append(k)
    return len(base_idx), [(groups[r], members[r]) for r in groups], expr


@dataclass
class MomentResult:
    log_value: float
    sign: int
    union_dimension: int
    rank: int
    block_sizes: List[int]

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_value) if self.sign else 0.0


def moment(states: Sequence[WeightedPauliState], budget: int = TERM_BUDGET) -> MomentResult:
    """tr(rho_1 rho_2 ... rho_n) for states on a common register, exactly."""
    if not states:
        raise ValueError("need at least one state")
    used = states[0].used
    for s in states[1:]:
        if s.used != used or s.n_qubits != states[0].n_qubits:
            raise LayoutMismatch("states live on different registers")
    n = len(states)
    distinct = []
    for s in states:
        if not any(s is t for t in distinct):
            distinct.append(s)
    chosen, coords = _union_basis(distinct)
    d = len(chosen)
    funcs = [_state_functionals(s, chosen, coords) for s in distinct]
    which = [next(i for i, t in enumerate(distinct) if t is s) for s in states]

    vectors, owner = [], []
    for i, f in enumerate(funcs):
        for k, v in enumerate(f.vectors):
            vectors.append(v)
            owner.append((i, k))
    rank, comps, expr = _components(vectors)
    sizes = [len(b) for b, _ in comps]
    if sizes and max(sizes) > budget:
        raise BudgetExceeded(f"block of 2^{max(sizes)} terms exceeds the 2^{budget} budget")

    log_total = (n - 1) * (d - rank - len(used)) * math.log(2.0)
    sign = 1
    for positions, members in comps:
        r = len(positions)
        local = {p: i for i, p in enumerate(positions)}
        y = np.arange(1 << r, dtype=np.int64)
        tables = [np.ones(1 << r) for _ in distinct]
        for k in members:
            i, j = owner[k]
            m = 0
            for p in gf2.bits(expr[k]):
                m |= 1 << local[p]
            odd = (np.bitwise_count(y & m) & 1).astype(bool)
            tables[i][odd] *= funcs[i].factors[j]
        hats = [_fwht(t) for t in tables]
        prod = np.ones(1 << r)
        for i in which:
            prod = prod * hats[i]
        block = float(prod.sum()) / (1 << r)
        if block == 0.0:
            return MomentResult(-math.inf, 0, d, rank, sizes)
        sign *= 1 if block > 0 else -1
        log_total += math.log(abs(block))
    return MomentResult(log_total, sign, d, rank, sizes)


def log_trace_power(state: WeightedPauliState, n: int) -> float:
    return moment([state] * n).log_value


def renyi_relative_entropy(rho2: WeightedPauliState, rho1: WeightedPauliState, n: int) -> float:
    """(1/(1-n)) log(tr rho2 rho1^(n-1) / tr rho2^n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    num = moment([rho2] + [rho1] * (n - 1))
    den = moment([rho2] * n)
    if num.sign <= 0:
        return math.inf
    return (num.log_value - den.log_value) / (1 - n)


def renyi_coherent_info(rho_qm: WeightedPauliState, rho_qmr: WeightedPauliState, n: int) -> float:
    """(1/(1-n)) log(tr rho_QM^n / tr rho_QMR^n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return (log_trace_power(rho_qm, n) - log_trace_power(rho_qmr, n)) / (1 - n)


def oracle_diagnostics(lattice: ColoredTorusLattice, p: float, n: int, variant: str = "floquet") -> Dict[str, float]:
    states = build_states_for_diagnostics(lattice, SimpleErrorModel(p), variant)
    return {"D_em": renyi_relative_entropy(states.rho2, states.rho1, n),
            "I_c": renyi_coherent_info(states.rho_qm, states.rho_qmr, n)}


# --- weight bookkeeping -----------------------------------------------------------

def weight_multipliers(lattice: ColoredTorusLattice, variant: str = "floquet") -> Dict[Tuple[str, int], int]:
    """Integer multiples of mu in the log-weights of the plain evolved state, per membrane label.

    For every edge the decoherence probes are grouped by the functional they
    define on the term group; distinct nonzero functionals are the membrane
    variables and their multiplicities the coefficients.  Labels (color, k)
    number a color's functionals by first and last step of appearance.
    Raises if edges of one color disagree.
    """
    state = warmup(lattice, EVOLUTION_ROUNDS[variant])
    evolve(state, lattice, SimpleErrorModel(0.25), EVOLUTION_ROUNDS[variant])
    chosen, coords = _union_basis([state])
    f = _state_functionals(state, chosen, coords)
    per_edge: Dict[int, Dict[int, List[int]]] = {}
    for v, tag in zip(f.vectors, f.tags):
        if tag[:1] != ("error",):
            continue
        _, step, edge, _ = tag
        per_edge.setdefault(edge, {}).setdefault(v, []).append(step)
    result: Dict[str, List[int]] = {}
    for edge, groups in per_edge.items():
        color = COLORS[lattice.edge_color[edge]]
        summary = sorted((min(s), max(s), len(s)) for s in groups.values())
        counts = [c for _, _, c in summary]
        if result.setdefault(color, counts) != counts:
            raise AssertionError(f"edges of color {color} carry different multipliers")
    return {(color, k + 1): c for color, counts in result.items() for k, c in enumerate(counts)}
