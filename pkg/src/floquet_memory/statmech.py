"""Partition functions: honeycomb random-bond Ising models and replica-flavor Ising models.

Everything is computed in the log domain.  Small systems are summed
exhaustively; strips of the honeycomb lattice use a transfer matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .channel import substream
from .lattice import ColoredTorusLattice, canonical_loop, color_index, superlattice

ENUM_BUDGET = 26  # binary variables summed exhaustively
_CHUNK = 1 << 18


class BudgetExceeded(RuntimeError):
    pass


def log_partition_terms(n_vars: int, terms: Sequence[Tuple[int, ...]], couplings: Sequence[float],
                        symmetric: bool = False) -> float:
    """log sum over s in {+-1}^n of exp(sum_t K_t prod_{v in t} s_v).

    ``symmetric`` asserts the weight is invariant under flipping every spin,
    which halves the work by pinning spin 0.
    """
    if n_vars > ENUM_BUDGET:
        raise BudgetExceeded(f"{n_vars} spins exceed the enumeration budget of {ENUM_BUDGET}")
    K = np.asarray(couplings, dtype=float)
    if n_vars == 0:
        return float(K.sum())
    free = n_vars - 1 if symmetric else n_vars
    total = 2 ** free
    parts = []
    # each term becomes a mask; product of spins = (-1)^popcount(config & mask)
    masks = np.array([sum(1 << v for v in set(t) if list(t).count(v) % 2) for t in terms], dtype=np.int64)
    for start in range(0, total, _CHUNK):
        cfg = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        if symmetric:
            cfg = cfg << 1  # spin 0 fixed to +1
        signs = 1.0 - 2.0 * (np.bitwise_count(cfg[:, None] & masks[None, :]) & 1)
        parts.append(logsumexp(signs @ K))
    out = float(logsumexp(parts))
    return out + (math.log(2.0) if symmetric else 0.0)


def ising_log_partition(n_sites: int, bonds: Sequence[Tuple[int, int]], couplings: Sequence[float]) -> float:
    """Zero-field Ising: log sum exp(sum_e K_e s_i s_j) by exhaustive summation."""
    return log_partition_terms(n_sites, [tuple(b) for b in bonds], couplings, symmetric=True)


# --- replica-flavor Ising model -----------------------------------------------

# integer multipliers of mu for each (color, time) label of the four-round window
COEFFICIENTS = {("R", 1): 3, ("G", 1): 5, ("B", 1): 1, ("R", 2): 5, ("G", 2): 3, ("B", 2): 6, ("B", 3): 1}
STEADY_STATE_COEFFICIENT = 6


def coefficient_table(steady_state: bool = False) -> Dict[Tuple[str, int], int]:
    if steady_state:
        return {k: STEADY_STATE_COEFFICIENT for k in COEFFICIENTS}
    return dict(COEFFICIENTS)


def decay_rate(p: float) -> float:
    """mu = -log(1 - 2p); infinite at p = 1/2."""
    if not (0.0 <= p <= 0.5):
        raise ValueError("p must lie in [0, 1/2]")
    return math.inf if p == 0.5 else -math.log1p(-2.0 * p)


@dataclass
class FlavorIsingInstance:
    """(n-1) flavors of Ising spins on the color-``color`` vertices.

    Weight of a configuration: exp(-c mu sum_bonds [sum_r |g^r| + |g^prod|])
    where |g| counts unsatisfied bonds, |g| = (1 - eta s s) / 2.  The product
    term couples all flavors at once.  Bonds are the superedges, one per
    ``color`` edge of the lattice.
    """

    lattice: ColoredTorusLattice
    color: int
    n: int
    coefficient: int
    p: float
    sites: int = 0
    bonds: List[Tuple[int, int]] = field(default_factory=list)
    bond_edges: List[int] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("replica count n must be >= 2")
        self.color = color_index(self.color)
        sl = superlattice(self.lattice, self.color)
        self.sites = sl.n_vertices
        self.bonds = list(sl.superedge_ends)
        self.bond_edges = list(sl.superedges)

    @property
    def flavors(self) -> int:
        return self.n - 1

    @property
    def coupling(self) -> float:
        """Coupling per spin product, c mu / 2."""
        return 0.5 * self.coefficient * decay_rate(self.p)

    def loop_mask(self, direction: int) -> np.ndarray:
        """Bonds crossing the canonical loop of this color (a homologically nontrivial cut)."""
        on = set(canonical_loop(self.lattice, direction, self.color).edges)
        return np.array([e in on for e in self.bond_edges], dtype=bool)

    def logical_mask(self, loop_color, direction: int) -> np.ndarray:
        """Bonds whose edge overlaps the support of a ``loop_color`` loop logical an odd number of times."""
        loop = canonical_loop(self.lattice, direction, color_index(loop_color))
        support = {q for e in loop.edges for q in self.lattice.edge_plaquettes[e]}
        return np.array([len(support.intersection(self.lattice.edge_plaquettes[e])) % 2 == 1
                         for e in self.bond_edges], dtype=bool)


@dataclass
class DefectSpec:
    """Bond sign flips: one mask per flavor plus one for the product term."""

    flavor_masks: np.ndarray
    product_mask: np.ndarray

    @classmethod
    def none(cls, inst: FlavorIsingInstance) -> "DefectSpec":
        nb = len(inst.bonds)
        return cls(np.zeros((inst.flavors, nb), dtype=bool), np.zeros(nb, dtype=bool))

    @classmethod
    def from_vectors(cls, inst: FlavorIsingInstance, masks: Sequence[np.ndarray], vectors: Sequence[Sequence[int]],
                     product: bool = True) -> "DefectSpec":
        """Flavor r is flipped on masks[l] when vectors[l][r] = 1.

        With ``product`` the product term carries the XOR of all flavor flips,
        otherwise it is left unflipped.
        """
        spec = cls.none(inst)
        for m, vec in zip(masks, vectors):
            if len(vec) != inst.flavors:
                raise ValueError("defect vector length must equal the flavor count")
            for r, bit in enumerate(vec):
                if bit not in (0, 1):
                    raise ValueError("defect components must be 0 or 1")
                if bit:
                    spec.flavor_masks[r] ^= m
        if product:
            spec.product_mask = np.logical_xor.reduce(spec.flavor_masks, axis=0)
        return spec


def _flavor_terms(inst: FlavorIsingInstance, defect: DefectSpec):
    """Spin-product terms and their bond signs for one defect choice."""
    f = inst.flavors
    eta = np.ones((f + 1, len(inst.bonds)))
    eta[:f][defect.flavor_masks] = -1.0
    eta[f][defect.product_mask] = -1.0
    terms, signs = [], []
    for k, (i, j) in enumerate(inst.bonds):
        for r in range(f):
            terms.append((r * inst.sites + i, r * inst.sites + j))
            signs.append(eta[r, k])
        prod = []
        for r in range(f):
            prod += [r * inst.sites + i, r * inst.sites + j]
        terms.append(tuple(prod))
        signs.append(eta[f, k])
    return terms, np.array(signs)


def flavor_log_partition(inst: FlavorIsingInstance, defect: DefectSpec = None) -> float:
    """log Z with weight exp(-c mu sum |g|), i.e. coupling c mu / 2 on each spin product."""
    defect = defect if defect is not None else DefectSpec.none(inst)
    terms, signs = _flavor_terms(inst, defect)
    mu = decay_rate(inst.p)
    nvars = inst.flavors * inst.sites
    if nvars > ENUM_BUDGET:
        raise BudgetExceeded(f"{nvars} flavor spins exceed the enumeration budget")
    if math.isinf(mu):
        return _zero_temperature_log_count(nvars, terms, signs)
    K = inst.coupling * signs
    # exp(-c mu (1 - eta s)/2) = exp(-c mu / 2) exp(c mu eta s / 2)
    return log_partition_terms(nvars, terms, K) - inst.coupling * len(terms)


def _zero_temperature_log_count(nvars, terms, signs) -> float:
    """log of the number of configurations with every term satisfied (mu = infinity)."""
    if nvars > ENUM_BUDGET:
        raise BudgetExceeded("too many spins")
    masks = np.array([sum(1 << v for v in set(t) if list(t).count(v) % 2) for t in terms], dtype=np.int64)
    want = (np.asarray(signs) < 0).astype(np.int64)
    count = 0
    total = 2 ** nvars
    for start in range(0, total, _CHUNK):
        cfg = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        par = np.bitwise_count(cfg[:, None] & masks[None, :]) & 1
        count += int(np.all(par == want[None, :], axis=1).sum())
    return math.log(count) if count else -math.inf


def flavor_partition(inst: FlavorIsingInstance) -> float:
    return flavor_log_partition(inst)


def defect_free_energy(inst: FlavorIsingInstance, defect: DefectSpec) -> float:
    """Delta F = -log(Z_defect / Z)."""
    return flavor_log_partition(inst) - flavor_log_partition(inst, defect)


def binary_vectors(length: int):
    return [tuple(v) for v in itertools.product((0, 1), repeat=length)]


# --- honeycomb random-bond Ising model on strips ------------------------------

TRANSFER_WIDTH_LIMIT = 16


@dataclass
class BrickWallStrip:
    """Honeycomb lattice drawn as a brick wall: ``width`` sites per row (periodic),
    ``length`` rows (open ends).  Site (x, y) has horizontal bonds to (x +- 1, y)
    and a vertical bond to (x, y + 1) when x + y is even, so every bulk site has
    three neighbours.
    """

    width: int
    length: int

    def __post_init__(self):
        if self.width < 2 or self.width % 2:
            raise ValueError("strip width must be even and >= 2")
        if self.width > TRANSFER_WIDTH_LIMIT:
            raise BudgetExceeded(f"width {self.width} exceeds the transfer-matrix limit {TRANSFER_WIDTH_LIMIT}")
        if self.length < 1:
            raise ValueError("strip length must be positive")

    @property
    def n_sites(self) -> int:
        return self.width * self.length

    def horizontal(self):
        """(y, x) for the bond between (x, y) and (x + 1 mod width, y)."""
        return [(y, x) for y in range(self.length) for x in range(self.width)]

    def vertical(self):
        """(y, x) for the bond between (x, y) and (x, y + 1)."""
        return [(y, x) for y in range(self.length - 1) for x in range(self.width) if (x + y) % 2 == 0]

    def bonds(self):
        """All bonds as site pairs, horizontal first, sites numbered x + width * y."""
        w = self.width
        out = [(x + w * y, (x + 1) % w + w * y) for y, x in self.horizontal()]
        out += [(x + w * y, x + w * (y + 1)) for y, x in self.vertical()]
        return out

    def seam(self) -> np.ndarray:
        """Horizontal bonds crossing the cut between column width-1 and column 0."""
        return np.array([x == self.width - 1 for _, x in self.horizontal()], dtype=bool)


def strip_log_partition(strip: BrickWallStrip, couplings: np.ndarray) -> float:
    """log Z for couplings ordered as ``strip.bonds()``, by row transfer."""
    w, length = strip.width, strip.length
    couplings = np.asarray(couplings, dtype=float)
    n_h = w * length
    kh = couplings[:n_h].reshape(length, w)
    kv = {yx: k for yx, k in zip(strip.vertical(), couplings[n_h:])}
    states = np.arange(1 << w, dtype=np.int64)
    spins = 1.0 - 2.0 * ((states[:, None] >> np.arange(w)[None, :]) & 1)
    bond_products = spins * np.roll(spins, -1, axis=1)  # (state, x): s_x s_{x+1}
    log_scale = 0.0
    vec = None
    for y in range(length):
        row = np.exp(bond_products @ kh[y] - np.abs(kh[y]).sum())
        log_scale += np.abs(kh[y]).sum()
        if vec is None:
            vec = row
        else:
            for x in range(w):
                k = kv.get((y - 1, x), 0.0)
                # vec'[s] = sum over t_x of vec[t] exp(k s_x t_x), other bits unchanged
                a = abs(k)
                vec = math.exp(k - a) * vec + math.exp(-k - a) * vec[states ^ (1 << x)]
                log_scale += a
            vec = vec * row
        top = vec.max()
        vec = vec / top
        log_scale += math.log(top)
    return log_scale + math.log(vec.sum())


def nishimori_coupling(p_eff: float) -> float:
    """J with exp(-2J) = p/(1-p)."""
    if p_eff <= 0.0:
        return math.inf
    return 0.5 * math.log((1.0 - p_eff) / p_eff)


@dataclass
class FreeEnergyResult:
    log_z: Dict[str, float]
    delta_f: Dict[str, float]
    method: str = "transfer-matrix"
    errors: Dict[str, float] = field(default_factory=dict)


def disorder_uniforms(width: int, length: int, seed: int, sample: int) -> np.ndarray:
    """One uniform per bond; thresholding at p gives bond signs coupled across p."""
    strip = BrickWallStrip(width, length)
    return substream(seed, width, length, sample).random(len(strip.bonds()))


def seam_free_energy(strip: BrickWallStrip, couplings: np.ndarray) -> Tuple[float, float]:
    """(log Z, Delta F) where Delta F = log Z - log Z with the seam bonds reversed."""
    couplings = np.asarray(couplings, dtype=float)
    flipped = couplings.copy()
    n_h = len(strip.horizontal())
    flipped[:n_h][strip.seam()] *= -1.0
    log_z = strip_log_partition(strip, couplings)
    return log_z, log_z - strip_log_partition(strip, flipped)


def rbim_sample_free_energy(width: int, p_eff: float, seed: int, sample: int = 0, length: int = None,
                            defect: bool = True) -> FreeEnergyResult:
    """One disorder sample of the honeycomb RBIM on the Nishimori line."""
    if not (0.0 < p_eff <= 0.5):
        raise ValueError("p_eff must lie in (0, 1/2]")
    length = length or width
    strip = BrickWallStrip(width, length)
    eta = np.where(disorder_uniforms(width, length, seed, sample) < p_eff, -1.0, 1.0)
    couplings = nishimori_coupling(p_eff) * eta
    if not defect:
        return FreeEnergyResult({"periodic": strip_log_partition(strip, couplings)}, {})
    log_z, df = seam_free_energy(strip, couplings)
    return FreeEnergyResult({"periodic": log_z, "antiperiodic": log_z - df}, {"seam": df})


class NoCrossing(ValueError):
    pass


@dataclass
class ThresholdEstimate:
    value: float
    ci: Tuple[float, float]
    pair_crossings: List[float]
    grid: List[float]
    widths: List[int]
    mean_delta_f: Dict[int, List[float]]
    samples: int


def _crossing(grid, lower, upper) -> float:
    """First sign change of upper - lower along the grid, linearly interpolated."""
    diff = np.asarray(upper) - np.asarray(lower)
    for k in range(len(grid) - 1):
        if diff[k] == 0.0:
            return float(grid[k])
        if diff[k] * diff[k + 1] < 0:
            t = diff[k] / (diff[k] - diff[k + 1])
            return float(grid[k] + t * (grid[k + 1] - grid[k]))
    raise NoCrossing("curves do not cross inside the grid")


def crossing_estimate(grid, curves: Dict[int, np.ndarray]) -> Tuple[float, List[float]]:
    """Mean of crossings between consecutive sizes; curves[w] is indexed like grid."""
    widths = sorted(curves)
    if len(widths) < 2:
        raise ValueError("need at least two sizes")
    pairs = [_crossing(grid, curves[a], curves[b]) for a, b in zip(widths, widths[1:])]
    return float(np.mean(pairs)), pairs


def rbim_delta_f_table(width: int, grid: Sequence[float], samples: int, seed: int, aspect: float = 1.0) -> np.ndarray:
    """Seam free energies, shape (samples, len(grid)); the disorder is coupled across the grid."""
    length = max(2, int(round(aspect * width)))
    strip = BrickWallStrip(width, length)
    out = np.empty((samples, len(grid)))
    for s in range(samples):
        u = disorder_uniforms(width, length, seed, s)
        for k, p in enumerate(grid):
            out[s, k] = seam_free_energy(strip, nishimori_coupling(p) * np.where(u < p, -1.0, 1.0))[1]
    return out


def _delta_f_tables(widths, grid, samples, seed, aspect, workers):
    if workers <= 1:
        return {w: rbim_delta_f_table(w, grid, samples, seed, aspect) for w in widths}
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {w: pool.submit(rbim_delta_f_table, w, grid, samples, seed, aspect) for w in widths}
        return {w: futures[w].result() for w in widths}


def locate_rbim_threshold(widths: Sequence[int], grid: Sequence[float], samples: int, seed: int,
                          aspect: float = 1.0, bootstrap: int = 200, tables=None, workers: int = 1) -> ThresholdEstimate:
    """Crossing of the disorder-averaged seam free energy across widths, bootstrap CI.

    ``tables`` may supply precomputed rbim_delta_f_table results keyed by width.
    Widths run in ``workers`` processes; results do not depend on the count.
    """
    widths = sorted(widths)
    if len(widths) < 2:
        raise ValueError("need at least two widths")
    grid = [float(p) for p in grid]
    if any(not (0.0 < p <= 0.5) for p in grid) or grid != sorted(grid):
        raise ValueError("grid must be increasing inside (0, 1/2]")
    if tables is None:
        tables = _delta_f_tables(widths, grid, samples, seed, aspect, workers)
    means = {w: tables[w].mean(axis=0) for w in widths}
    value, pairs = crossing_estimate(grid, means)
    rng = substream(seed, 0xB007)
    boots = []
    for _ in range(bootstrap):
        resampled = {w: tables[w][rng.integers(0, len(tables[w]), len(tables[w]))].mean(axis=0) for w in widths}
        try:
            boots.append(crossing_estimate(grid, resampled)[0])
        except NoCrossing:
            continue
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (math.nan, math.nan)
    return ThresholdEstimate(value, ci, pairs, grid, widths, {w: means[w].tolist() for w in widths}, samples)


def honeycomb_critical_coupling() -> float:
    """Pure honeycomb Ising critical coupling, the root of cosh(2K) = 2."""
    return brentq(lambda k: math.cosh(2.0 * k) - 2.0, 0.1, 2.0)


def locate_pure_ising_coupling(widths: Sequence[int], couplings: Sequence[float], aspect: float = 1.0) -> float:
    """Crossing in K of the seam free energy of the clean model across widths."""
    curves = {}
    for w in sorted(widths):
        strip = BrickWallStrip(w, max(2, int(round(aspect * w))))
        nb = len(strip.bonds())
        curves[w] = np.array([seam_free_energy(strip, np.full(nb, k))[1] for k in couplings])
    # Delta F grows with size above K_c, so the roles of the curves flip relative to p
    return crossing_estimate(list(couplings), curves)[0]
