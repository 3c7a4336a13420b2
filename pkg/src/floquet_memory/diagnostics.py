"""Renyi relative entropy and Renyi coherent information from flavor-Ising partition functions.

Both quantities are ratios of products of the seven partition functions
Z_{b,tau} of the four-round window, with sign flips inserted along the bonds
that a loop logical crosses.  The relative entropy uses the three labels
(R,1), (G,2), (B,2) that the tracked m-logical touches; the coherent
information uses those three for the X sector and the other four for the Z
sector.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .lattice import ColoredTorusLattice, build_lattice
from .statmech import DefectSpec, FlavorIsingInstance, binary_vectors, coefficient_table, flavor_log_partition

VARIANTS = ("floquet", "toric")
# label -> color of the loop logical whose crossing bonds carry the defect
EM_LABELS = {("R", 1): "B", ("G", 2): "R", ("B", 2): "R"}
X_SECTOR = {("R", 1): "B", ("G", 2): "R", ("B", 2): "R"}
Z_SECTOR = {("R", 2): "B", ("G", 1): "R", ("B", 1): "R", ("B", 3): "G"}
LOG2 = math.log(2.0)


@dataclass
class DiagnosticsRequest:
    n: int
    p: float
    size: Tuple[int, int]
    variant: str = "floquet"
    steady_state: bool = False
    rounds: int = 4

    def validate(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if not (0.0 <= self.p <= 0.5):
            raise ValueError("p must lie in [0, 1/2]")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.rounds != 4:
            raise ValueError("only the four-round window is modelled")
        if min(self.size) < 1:
            raise ValueError("lattice size must be positive")


@dataclass
class DiagnosticsResult:
    request: DiagnosticsRequest
    d_em: float
    i_c: float
    log_z: Dict[str, float] = field(default_factory=dict)
    defect_free_energies: Dict[str, float] = field(default_factory=dict)
    method: str = "enumeration"


class _Partitions:
    """Cached log Z for the seven labels with arbitrary defect vectors."""

    def __init__(self, lattice: ColoredTorusLattice, n: int, p: float, steady_state: bool):
        self.lattice = lattice
        self.n = n
        self.coefficients = coefficient_table(steady_state)
        self.instances = {label: FlavorIsingInstance(lattice, label[0], n, c, p)
                          for label, c in self.coefficients.items()}
        self.cache: Dict[tuple, float] = {}

    def log_z(self, label, loop_color: str, vectors: Sequence[Tuple[int, ...]], product: bool) -> float:
        """``vectors[l]`` is the per-flavor defect along the logical in direction l."""
        key = (label, loop_color, tuple(map(tuple, vectors)), product)
        if key not in self.cache:
            inst = self.instances[label]
            masks = [inst.logical_mask(loop_color, l) for l in range(len(vectors))]
            spec = DefectSpec.from_vectors(inst, masks, vectors, product)
            self.cache[key] = flavor_log_partition(inst, spec)
        return self.cache[key]

    def plain(self, label) -> float:
        return self.log_z(label, "R", [(0,) * (self.n - 1)], True)


def _defect_vectors(n: int, variant: str) -> List[Tuple[int, ...]]:
    vecs = binary_vectors(n - 1)
    if variant == "toric":
        vecs = [v for v in vecs if sum(v) % 2 == 0]
    return vecs


def relative_entropy_terms(parts: _Partitions, variant: str = "floquet", direction: int = 0):
    """(log sum_d prod Z^(d), log prod Z, per-d defect free energies)."""
    n = parts.n
    base = sum(parts.plain(label) for label in EM_LABELS)
    logs, dfs = [], {}
    for d in _defect_vectors(n, variant):
        vecs = [(0,) * (n - 1)] * direction + [d]
        # the copy of rho_2 is the unweighted product term, so it carries no defect
        val = sum(parts.log_z(label, c, vecs, False) for label, c in EM_LABELS.items())
        logs.append(val)
        dfs["".join(map(str, d))] = base - val
    return float(logsumexp(logs)), base, dfs


def renyi_relative_entropy(request: DiagnosticsRequest, parts: _Partitions = None) -> float:
    request.validate()
    parts = parts or _Partitions(build_lattice(*request.size), request.n, request.p, request.steady_state)
    n = request.n
    num, base, _ = relative_entropy_terms(parts, request.variant)
    return (num - base - (n - 1) * LOG2) / (1 - n)


def coherent_info_terms(parts: _Partitions):
    """Per sector: (log sum over (d_l1, d_l2) of prod Z^(d) / prod Z, per-pair free energies)."""
    n = parts.n
    out = {}
    for name, sector in (("X", X_SECTOR), ("Z", Z_SECTOR)):
        base = sum(parts.plain(label) for label in sector)
        logs, dfs = [], {}
        for d1, d2 in itertools.product(binary_vectors(n - 1), repeat=2):
            val = sum(parts.log_z(label, c, [d1, d2], True) for label, c in sector.items())
            logs.append(val - base)
            dfs["".join(map(str, d1)) + "|" + "".join(map(str, d2))] = base - val
        out[name] = (float(logsumexp(logs)), dfs)
    return out


def renyi_coherent_info(request: DiagnosticsRequest, parts: _Partitions = None) -> float:
    request.validate()
    parts = parts or _Partitions(build_lattice(*request.size), request.n, request.p, request.steady_state)
    terms = coherent_info_terms(parts)
    return -2 * LOG2 + (terms["X"][0] + terms["Z"][0]) / (request.n - 1)


def evaluate(request: DiagnosticsRequest) -> DiagnosticsResult:
    """Both diagnostics plus their constituent log Z and defect free energies."""
    request.validate()
    parts = _Partitions(build_lattice(*request.size), request.n, request.p, request.steady_state)
    d_em = renyi_relative_entropy(request, parts)
    i_c = renyi_coherent_info(request, parts) if request.variant == "floquet" else math.nan
    log_z = {f"{c}{t}": parts.plain((c, t)) for c, t in parts.coefficients}
    _, _, em_df = relative_entropy_terms(parts, request.variant)
    dfs = {f"em:{k}": v for k, v in em_df.items()}
    if request.variant == "floquet":
        for sector, (_, sector_df) in coherent_info_terms(parts).items():
            dfs.update({f"{sector}:{k}": v for k, v in sector_df.items()})
    return DiagnosticsResult(request, d_em, i_c, log_z, dfs)


def phase_table(n: int, p_low: float, p_high: float, size=(2, 2)) -> Dict[str, Dict[str, float]]:
    """Rows I_c and D_em across the Floquet, toric and trivial regimes.

    The Floquet and toric columns are evaluated at ``p_low`` with the two
    schedules; the trivial column at ``p_high``.
    """
    flo = evaluate(DiagnosticsRequest(n, p_low, size, "floquet"))
    tor = evaluate(DiagnosticsRequest(n, p_low, size, "toric"))
    triv = evaluate(DiagnosticsRequest(n, p_high, size, "floquet"))
    return {
        "I_c": {"floquet": flo.i_c, "toric": flo.i_c, "trivial": triv.i_c},
        "D_em": {"floquet": flo.d_em, "toric": tor.d_em, "trivial": triv.d_em},
    }
