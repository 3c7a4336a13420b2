"""Class probabilities for single-qubit X errors via Ising spins on a kagome lattice.

X flips on plaquette p happen before round G (sub-step 1) and before round B
(sub-step 2) of each period.  They flip green and blue checks; the flipped
checks of period tau form a set E(tau) of green and blue edges.  Kagome
sites sit on red edges, and each green or blue edge is a kagome bond joining
the red edges of its two plaquettes.  Deformations that keep the syndrome
fixed are domain walls of the kagome spins plus non-contractible green loops.

Variable x_p(tau, k) is +1 (no flip) or -1 (flip); as bits, 1 means flipped.
x_p(0, 2) is fixed to +1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .gf2 import XorBasis
from .lattice import ColoredTorusLattice, canonical_loop, loop_points

KAGOME_BUDGET = 24  # error bits enumerated exhaustively


@dataclass
class KagomeModelInstance:
    lattice: ColoredTorusLattice
    periods: int
    sites: List[int] = field(default_factory=list)  # red edge per site
    bond_edges: List[int] = field(default_factory=list)  # green edges, then blue edges
    bond_sites: List[Tuple[int, int]] = field(default_factory=list)
    bond_plaquettes: List[Tuple[int, int]] = field(default_factory=list)
    bond_is_green: List[bool] = field(default_factory=list)

    def __post_init__(self):
        lat = self.lattice
        self.sites = lat.edges_of_color("R")
        site_of = {e: k for k, e in enumerate(self.sites)}
        red_of_plaq = [next(e for e in lat.plaquette_edges[q] if lat.edge_color[e] == 0)
                       for q in range(lat.n_qubits)]
        for color in (1, 2):
            for e in lat.edges_of_color(color):
                p, q = lat.edge_plaquettes[e]
                self.bond_edges.append(e)
                self.bond_plaquettes.append((p, q))
                self.bond_sites.append((site_of[red_of_plaq[p]], site_of[red_of_plaq[q]]))
                self.bond_is_green.append(color == 1)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_bonds(self) -> int:
        return len(self.bond_edges)

    @property
    def n_plaquettes(self) -> int:
        return self.lattice.n_qubits

    @property
    def n_error_bits(self) -> int:
        return 2 * self.periods * self.n_plaquettes

    def var(self, tau: int, sub: int, plaq: int) -> int:
        """Bit position of x_plaq(tau, sub) for tau >= 1."""
        return ((tau - 1) * 2 + (sub - 1)) * self.n_plaquettes + plaq

    def bond_mask(self, edges) -> int:
        edges = set(edges)
        return sum(1 << k for k, e in enumerate(self.bond_edges) if e in edges)

    def coboundary_rows(self) -> List[int]:
        """Bond masks of single-site spin flips."""
        rows = [0] * self.n_sites
        for k, (a, b) in enumerate(self.bond_sites):
            rows[a] ^= 1 << k
            rows[b] ^= 1 << k
        return rows

    def class_loops(self) -> List[int]:
        """Bond masks of the straight green loops along l1 and l2."""
        return [self.bond_mask(canonical_loop(self.lattice, d, "G").edges) for d in (0, 1)]

    def detector_cycles(self) -> List[int]:
        """Kagome cycles that follow the canonical red loops, as bond masks.

        Consecutive red edges meet at a vertex; the bond between them is the
        edge at that vertex shared by one plaquette of each.
        """
        lat = self.lattice
        pos = {e: k for k, e in enumerate(self.bond_edges)}
        out = []
        for d in (0, 1):
            pts = loop_points(lat, d, "R")
            steps = [(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])]
            mask = 0
            for k, mid in enumerate(pts[:-1]):
                u = (-steps[k - 1][0], -steps[k - 1][1])
                w = steps[k]
                bisector = (mid[0] + u[0] + w[0], mid[1] + u[1] + w[1])
                mask ^= 1 << pos[lat.edge_between(mid, bisector)]
            out.append(mask)
        return out

    def class_of(self, bond_mask: int) -> Tuple[int, int]:
        """Winding class of a deformation: bit d is set by the green loop along d."""
        gam = self.detector_cycles()
        return tuple(bin(bond_mask & gam[1 - d]).count("1") % 2 for d in (0, 1))

    def flipped_check_masks(self) -> List[List[int]]:
        """For each period and bond, the error-bit mask whose parity flips that check."""
        out = []
        for tau in range(1, self.periods + 1):
            row = []
            for (p, q), green in zip(self.bond_plaquettes, self.bond_is_green):
                m = 0
                if green:
                    if tau > 1:
                        m ^= (1 << self.var(tau - 1, 2, p)) ^ (1 << self.var(tau - 1, 2, q))
                    m ^= (1 << self.var(tau, 1, p)) ^ (1 << self.var(tau, 1, q))
                else:
                    m ^= (1 << self.var(tau, 1, p)) ^ (1 << self.var(tau, 1, q))
                    m ^= (1 << self.var(tau, 2, p)) ^ (1 << self.var(tau, 2, q))
                row.append(m)
            out.append(row)
        return out

    def syndrome(self, flipped: Sequence[int]) -> Tuple:
        """Stabilizer changes implied by flipped checks, as sorted vertex tuples.

        Returns, per period, (boundary of green part on B vertices, boundary of
        blue part on G vertices, combined boundary on R vertices).
        """
        lat = self.lattice
        out = []
        for mask in flipped:
            bnd = {0: set(), 1: set(), 2: set()}
            for k in range(self.n_bonds):
                if mask >> k & 1:
                    for v in lat.edges[self.bond_edges[k]]:
                        bnd[lat.vertex_color[v]] ^= {v}
            out.append((tuple(sorted(bnd[2])), tuple(sorted(bnd[1])), tuple(sorted(bnd[0]))))
        return tuple(out)


def _echelon(rows: Sequence[int]) -> List[Tuple[int, int]]:
    b = XorBasis()
    for r in rows:
        b.add(r)
    # fully reduce so that each pivot bit appears in one row only
    piv = sorted(b.rows)
    vecs = {t: b.rows[t][0] for t in piv}
    for t in piv:
        for s in piv:
            if s != t and vecs[s] >> t & 1:
                vecs[s] ^= vecs[t]
    return [(t, vecs[t]) for t in sorted(piv, reverse=True)]


def reduce_mod_coboundary(model: KagomeModelInstance, masks):
    """Canonical coset representative of bond masks modulo spin-flip domain walls."""
    rows = _echelon(model.coboundary_rows())
    masks = np.asarray(masks, dtype=np.int64).copy()
    for pivot, vec in rows:
        sel = (masks >> pivot) & 1
        masks ^= sel * vec
    return masks


def raw_class_table(model: KagomeModelInstance, p: float, chunk: int = 1 << 21) -> Dict[Tuple[int, ...], float]:
    """Probability of every reachable coset (flipped checks per period, modulo domain walls).

    Enumerates all 2^(error bits) X-error configurations.
    """
    nbits = model.n_error_bits
    if nbits > KAGOME_BUDGET:
        raise ValueError(f"{nbits} error bits exceed the enumeration budget of {KAGOME_BUDGET}")
    masks = model.flipped_check_masks()
    nb = model.n_bonds
    counts = np.arange(nbits + 1)
    wtab = (p ** counts) * ((1.0 - p) ** (nbits - counts))
    table: Dict[Tuple[int, ...], float] = {}
    for start in range(0, 2 ** nbits, chunk):
        cfg = np.arange(start, min(2 ** nbits, start + chunk), dtype=np.int64)
        w = wtab[np.bitwise_count(cfg)]
        key = np.zeros_like(cfg)
        for tau, row in enumerate(masks):
            flipped = np.zeros_like(cfg)
            for k, m in enumerate(row):
                flipped |= (np.bitwise_count(cfg & m) & 1) << k
            key |= reduce_mod_coboundary(model, flipped) << (tau * nb)
        uniq, inv = np.unique(key, return_inverse=True)
        sums = np.bincount(inv, weights=w)
        for u, s in zip(uniq.tolist(), sums.tolist()):
            k = tuple((u >> (tau * nb)) & ((1 << nb) - 1) for tau in range(model.periods))
            table[k] = table.get(k, 0.0) + s
    return table


def _plaquette_pair_parity(model: KagomeModelInstance, states: np.ndarray, p: int, q: int) -> np.ndarray:
    return ((states >> p) ^ (states >> q)) & 1


def projector_sum(model: KagomeModelInstance, reference: Sequence[int], p: float, field_form: bool = False) -> float:
    """The spin sum with parity projectors, evaluated literally by a transfer over periods.

    ``reference`` holds one bond mask per period; eta = -1 on its bonds.
    With ``field_form`` each error variable carries exp(h x) with
    h = log((1-p)/p) / 2; otherwise it carries p or 1-p.
    """
    n = model.n_plaquettes
    if n > 12:
        raise ValueError("transfer over plaquette states limited to 12 plaquettes")
    states = np.arange(2 ** n, dtype=np.int64)
    flips = np.bitwise_count(states).astype(float)
    if field_form:
        h = 0.5 * math.log((1.0 - p) / p)
        w = np.exp(h * (n - 2 * flips))
    else:
        w = (p ** flips) * ((1.0 - p) ** (n - flips))
    spins = np.array(list(itertools.product((1, -1), repeat=model.n_sites)))
    vec = np.zeros(2 ** n)
    vec[0] = 1.0  # x(0, 2) = +1 everywhere
    for tau in range(model.periods):
        eta = np.array([-1.0 if reference[tau] >> k & 1 else 1.0 for k in range(model.n_bonds)])
        M = np.zeros((2 ** n, 2 ** n))
        for sig in spins:
            G = np.ones((2 ** n, 2 ** n))  # [a, b]: a = x(tau-1, 2), b = x(tau, 1)
            B = np.ones((2 ** n, 2 ** n))  # [b, c]: c = x(tau, 2)
            for k, ((i, j), (pp, qq), green) in enumerate(
                    zip(model.bond_sites, model.bond_plaquettes, model.bond_is_green)):
                par = _plaquette_pair_parity(model, states, pp, qq)
                xx = 1.0 - 2.0 * par
                s = eta[k] * sig[i] * sig[j]
                fac = 0.5 * (1.0 + s * np.outer(xx, xx))
                if green:
                    G *= fac
                else:
                    B *= fac
            M += (G * w[None, :]) @ (B * w[None, :])
        vec = vec @ M
    return float(vec.sum())


def class_vectors(periods: int):
    return list(itertools.product(((0, 0), (0, 1), (1, 0), (1, 1)), repeat=periods))


def kagome_class_probability(model: KagomeModelInstance, reference: Sequence[int], p: float):
    """Probability of each per-period class vector relative to ``reference``, and the marginal per total class.

    Values are normalized to probabilities of the X-error distribution (the
    projector sum divided by the 2 spin solutions per period).
    """
    loops = model.class_loops()
    out = {}
    for vec in class_vectors(model.periods):
        ref = []
        for tau, (k1, k2) in enumerate(vec):
            m = reference[tau]
            if k1:
                m ^= loops[0]
            if k2:
                m ^= loops[1]
            ref.append(m)
        out[vec] = projector_sum(model, ref, p) / 2 ** model.periods
    marginal = {}
    for vec, val in out.items():
        tot = (sum(k[0] for k in vec) % 2, sum(k[1] for k in vec) % 2)
        marginal[tot] = marginal.get(tot, 0.0) + val
    return out, marginal


def summand(model: KagomeModelInstance, reference: Sequence[int], sigma: np.ndarray, x_bits: int, p: float) -> float:
    """One term of the spin sum, for testing the per-period spin-flip symmetry.

    ``sigma`` has shape (periods, sites) with entries +-1.
    """
    h = 0.5 * math.log((1.0 - p) / p)
    masks = model.flipped_check_masks()
    val = 1.0
    for tau in range(model.periods):
        for k, (i, j) in enumerate(model.bond_sites):
            eta = -1.0 if reference[tau] >> k & 1 else 1.0
            xprod = -1.0 if bin(x_bits & masks[tau][k]).count("1") % 2 else 1.0
            val *= 0.5 * (1.0 + eta * sigma[tau, i] * sigma[tau, j] * xprod)
    nbits = model.n_error_bits
    flips = bin(x_bits).count("1")
    return val * math.exp(h * (nbits - 2 * flips))
