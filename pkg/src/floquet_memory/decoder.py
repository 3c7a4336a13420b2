"""Decoding simple errors on a color-b superlattice.

Errors of color b are strings of b-colored edges (superedges); their
boundaries are the flipped b-vertex stabilizers.  Maximum-likelihood decoding
compares the total probability of the four homology classes, computed either
by summing over the cycle space or as a random-bond Ising partition function
on the honeycomb lattice of the other two vertex colors.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Set, Tuple

import networkx as nx
import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .channel import effective_rate, substream
from .lattice import (ColoredTorusLattice, build_lattice, color_index, string_class, super_cycle,
                      superlattice)
from .statmech import BudgetExceeded, ising_log_partition, nishimori_coupling

CLASSES = ((0, 0), (0, 1), (1, 0), (1, 1))  # tie-break order
CYCLE_BUDGET = 24


@dataclass
class ClassProbabilities:
    log_probs: Dict[Tuple[int, int], float]
    reference: Set[int]

    @property
    def log_total(self) -> float:
        return float(logsumexp(list(self.log_probs.values())))

    def ratios(self) -> Dict[Tuple[int, int], float]:
        tot = self.log_total
        return {k: math.exp(v - tot) for k, v in self.log_probs.items()}

    def best(self) -> Tuple[int, int]:
        """Most probable class; near-ties go to the earliest class in CLASSES."""
        top = max(self.log_probs.values())
        tol = 1e-12 * max(1.0, abs(top))
        for k in CLASSES:
            if self.log_probs[k] >= top - tol:
                return k
        return CLASSES[0]


@lru_cache(maxsize=None)
def _graph(l1: int, l2: int, color: int):
    lat = build_lattice(l1, l2)
    sl = superlattice(lat, color)
    adj = [[] for _ in range(sl.n_vertices)]
    for k, (a, b) in enumerate(sl.superedge_ends):
        adj[a].append((b, sl.superedges[k]))
        adj[b].append((a, sl.superedges[k]))
    return lat, sl, adj


def _path(adj, src: int, dst: int) -> List[int]:
    """Shortest path as base-edge list; neighbours scanned in index order."""
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for w, e in sorted(adj[u]):
            if w not in prev:
                prev[w] = (u, e)
                queue.append(w)
    out = []
    u = dst
    while prev[u] is not None:
        u, e = prev[u]
        out.append(e)
    return out


def _distances(adj, src: int) -> Dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w, _ in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def reference_string(lattice: ColoredTorusLattice, color, defects, kappa=(0, 0)) -> Set[int]:
    """A string with boundary ``defects``: consecutive sorted defects joined by shortest paths.

    Class offsets append the straight superlattice cycles.
    """
    b = color_index(color)
    defects = sorted(defects)
    if len(defects) % 2:
        raise ValueError("odd number of defects")
    _, _, adj = _graph(lattice.l1, lattice.l2, b)
    out: Set[int] = set()
    for a, c in zip(defects[0::2], defects[1::2]):
        for e in _path(adj, a, c):
            out ^= {e}
    for d in (0, 1):
        if kappa[d]:
            out ^= set(super_cycle(lattice, d, b))
    return out


def _cycle_basis(lattice: ColoredTorusLattice, b: int):
    """Fundamental cycles of a BFS spanning tree, as base-edge sets."""
    _, sl, adj = _graph(lattice.l1, lattice.l2, b)
    parent = {0: None}
    order = [0]
    queue = deque([0])
    tree = set()
    while queue:
        u = queue.popleft()
        for w, e in sorted(adj[u]):
            if w not in parent:
                parent[w] = (u, e)
                tree.add(e)
                order.append(w)
                queue.append(w)

    def to_root(v):
        out = set()
        while parent[v] is not None:
            v, e = parent[v]
            out ^= {e}
        return out

    basis = []
    for k, e in enumerate(sl.superedges):
        if e in tree:
            continue
        a, c = sl.superedge_ends[k]
        basis.append(to_root(a) ^ to_root(c) ^ {e})
    return basis


def class_probabilities_exact(lattice: ColoredTorusLattice, color, defects, p_eff: float) -> ClassProbabilities:
    """Sum P(E) over every string E with boundary ``defects``, grouped by class relative to the reference."""
    b = color_index(color)
    if not (0.0 <= p_eff <= 0.5):
        raise ValueError("effective rate must lie in [0, 1/2]")
    sl = superlattice(lattice, b)
    basis = _cycle_basis(lattice, b)
    if len(basis) > CYCLE_BUDGET:
        raise BudgetExceeded(f"cycle space of dimension {len(basis)} exceeds {CYCLE_BUDGET}")
    pos = sl.edge_position
    ref = reference_string(lattice, b, defects)

    def as_int(es):
        return sum(1 << pos[e] for e in es)

    masks = np.zeros(1, dtype=np.int64)
    cls = np.zeros(1, dtype=np.int64)
    for cyc in basis:
        k1, k2 = string_class(lattice, b, cyc)
        masks = np.concatenate([masks, masks ^ as_int(cyc)])
        cls = np.concatenate([cls, cls ^ (2 * k1 + k2)])
    lengths = np.bitwise_count(masks ^ as_int(ref)).astype(float)
    n_edges = sl.n_edges
    if p_eff == 0.0:
        logw = np.where(lengths == 0, 0.0, -np.inf)
    else:
        logw = n_edges * math.log1p(-p_eff) + lengths * (math.log(p_eff) - math.log1p(-p_eff))
    out = {}
    for k1, k2 in CLASSES:
        sel = logw[cls == 2 * k1 + k2]
        out[(k1, k2)] = float(logsumexp(sel)) if np.isfinite(sel).any() else -math.inf
    return ClassProbabilities(out, ref)


@dataclass
class RbimInstance:
    """Ising spins on the honeycomb of non-b vertices; one bond per b-colored edge."""

    sites: List[int]  # base vertex indices
    bonds: List[Tuple[int, int]]  # site positions
    bond_edges: List[int]
    eta: np.ndarray
    coupling: float

    def log_partition(self) -> float:
        return ising_log_partition(len(self.sites), self.bonds, self.coupling * self.eta)


def rbim_instance(lattice: ColoredTorusLattice, color, string: Set[int], p_eff: float) -> RbimInstance:
    b = color_index(color)
    sites = [v for v in range(lattice.n_vertices) if lattice.vertex_color[v] != b]
    pos = {v: k for k, v in enumerate(sites)}
    edges = lattice.edges_of_color(b)
    bonds = [(pos[lattice.edges[e][0]], pos[lattice.edges[e][1]]) for e in edges]
    eta = np.array([-1.0 if e in string else 1.0 for e in edges])
    return RbimInstance(sites, bonds, edges, eta, nishimori_coupling(p_eff))


def class_probabilities_rbim(lattice: ColoredTorusLattice, color, defects, p_eff: float) -> ClassProbabilities:
    """Class probabilities from RBIM partition functions.

    log P_kappa = (N/2) log(p(1-p)) - log 2 + log Z(eta of reference + class cycle).
    """
    b = color_index(color)
    if not (0.0 < p_eff <= 0.5):
        raise ValueError("RBIM form needs 0 < p_eff <= 1/2")
    out = {}
    ref0 = reference_string(lattice, b, defects)
    for kappa in CLASSES:
        string = reference_string(lattice, b, defects, kappa)
        inst = rbim_instance(lattice, b, string, p_eff)
        n_edges = len(inst.bond_edges)
        out[kappa] = (0.5 * n_edges * math.log(p_eff * (1.0 - p_eff)) - math.log(2.0) + inst.log_partition())
    return ClassProbabilities(out, ref0)


def _recovery(lattice, b, defects, kappa):
    return reference_string(lattice, b, defects, kappa)


def ml_decode_color(lattice: ColoredTorusLattice, color, defects, p_eff: float, method: str = "exact"):
    """Most likely class and a recovery string in it."""
    fn = class_probabilities_exact if method == "exact" else class_probabilities_rbim
    probs = fn(lattice, color, defects, p_eff)
    kappa = probs.best()
    return kappa, _recovery(lattice, color_index(color), defects, kappa), probs


def ml_decode(lattice: ColoredTorusLattice, history, p: float, method: str = "exact"):
    """Decode each color family independently from the accumulated syndrome changes."""
    from .circuit import total_defects
    p_eff = effective_rate(p)
    out = {}
    for c in "RGB":
        kappa, rec, _ = ml_decode_color(lattice, c, total_defects(history, c), p_eff, method)
        out[c] = (kappa, rec)
    return out


def matching_decode_color(lattice: ColoredTorusLattice, color, defects):
    """Minimum-weight pairing on superlattice distances; returns (class of the recovery, recovery)."""
    b = color_index(color)
    defects = sorted(defects)
    if len(defects) % 2:
        raise ValueError("odd number of defects")
    _, _, adj = _graph(lattice.l1, lattice.l2, b)
    g = nx.Graph()
    for i, a in enumerate(defects):
        dist = _distances(adj, a)
        for c in defects[i + 1:]:
            g.add_edge(a, c, weight=-dist[c])
    pairs = nx.max_weight_matching(g, maxcardinality=True)
    rec: Set[int] = set()
    for a, c in sorted(tuple(sorted(pr)) for pr in pairs):
        for e in _path(adj, a, c):
            rec ^= {e}
    ref = reference_string(lattice, b, defects)
    return string_class(lattice, b, rec ^ ref), rec


def matching_decode(lattice: ColoredTorusLattice, history):
    from .circuit import total_defects
    return {c: matching_decode_color(lattice, c, total_defects(history, c)) for c in "RGB"}


def sample_string(lattice: ColoredTorusLattice, color, p_eff: float, rng) -> Set[int]:
    edges = lattice.edges_of_color(color)
    hit = rng.random(len(edges)) < p_eff
    return {e for e, h in zip(edges, hit) if h}


def boundary(lattice: ColoredTorusLattice, color, string) -> Set[int]:
    sl = superlattice(lattice, color)
    out: Set[int] = set()
    for e in string:
        for v in sl.superedge_ends[sl.edge_position[e]]:
            out ^= {v}
    return out


@dataclass
class FidelityEstimate:
    fidelity: float  # mean of max_kappa P_kappa / P_s over sampled syndromes
    stderr: float
    success_rate: float  # fraction decoded into the true class
    success_ci: Tuple[float, float]
    trials: int

    @property
    def ci(self) -> Tuple[float, float]:
        z = norm.ppf(0.975)
        return (self.fidelity - z * self.stderr, self.fidelity + z * self.stderr)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ph = successes / trials
    den = 1 + z * z / trials
    mid = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def ml_fidelity(lattice: ColoredTorusLattice, p: float, trials: int, seed: int, color="B",
                effective: bool = False) -> FidelityEstimate:
    """Monte Carlo estimate of the ML decoding fidelity for one color family over one period.

    ``p`` is the physical rate unless ``effective`` is set.
    """
    p_eff = p if effective else effective_rate(p)
    ratios, wins = [], 0
    rng = substream(seed, 7)
    for _ in range(trials):
        string = sample_string(lattice, color, p_eff, rng)
        defects = boundary(lattice, color, string)
        probs = class_probabilities_exact(lattice, color, defects, p_eff)
        r = probs.ratios()
        ratios.append(max(r.values()))
        truth = string_class(lattice, color, string ^ probs.reference)
        wins += probs.best() == truth
    arr = np.array(ratios)
    stderr = float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return FidelityEstimate(float(arr.mean()), stderr, wins / trials, wilson_interval(wins, trials), trials)
