"""Three-colored triangular lattice on a torus.

Vertices carry colors R, G, B (0, 1, 2) with no two neighbours sharing a
color; every edge gets the color missing from its two endpoints.  Qubits sit
on the triangular plaquettes.

Coordinates: a vertex is written (i, j) in the primitive triangular basis
a1 = (1, 0), a2 = (1/2, sqrt(3)/2) and has color (i - j) mod 3.  The torus is
spanned by l1 * A1 and l2 * A2 with A1 = 2 a1 - a2 and A2 = a1 + a2, so one
unit cell holds exactly one vertex of each color.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

COLORS = ("R", "G", "B")
COLOR_INDEX = {c: k for k, c in enumerate(COLORS)}

# edge directions stored per vertex
EDGE_DIRS = ((1, 0), (0, 1), (-1, 1))
CELL_VECTORS = ((2, -1), (1, 1))
# one period of a color-b loop, as steps leaving a vertex of color b+1
_LOOP_STEPS = {0: ((1, 0), (1, -1)), 1: ((1, 0), (0, 1))}


def color_index(color) -> int:
    if isinstance(color, str):
        return COLOR_INDEX[color]
    if color in (0, 1, 2):
        return int(color)
    raise ValueError(f"unknown color {color!r}")


@dataclass(frozen=True)
class LoopSpec:
    direction: int  # 0 for l1, 1 for l2
    color: int
    edges: Tuple[int, ...]
    vertices: Tuple[int, ...]
    winding: Tuple[int, int]


@dataclass(frozen=True)
class SuperlatticeView:
    """The round-``color`` superlattice: a triangular lattice of same-color vertices."""

    color: int
    supervertices: Tuple[int, ...]
    superedges: Tuple[int, ...]  # base-edge index of each superedge
    superedge_ends: Tuple[Tuple[int, int], ...]  # supervertex positions
    superplaquettes: Tuple[int, ...]  # base vertices of the two other colors
    vertex_position: Dict[int, int] = field(repr=False)
    edge_position: Dict[int, int] = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.supervertices)

    @property
    def n_edges(self) -> int:
        return len(self.superedges)


class ColoredTorusLattice:
    """Immutable 3-colored triangular lattice on an l1 x l2 torus."""

    def __init__(self, l1: int, l2: int):
        if int(l1) != l1 or int(l2) != l2 or l1 < 1 or l2 < 1:
            raise ValueError(f"lattice size must be positive integers, got ({l1}, {l2})")
        self.l1 = int(l1)
        self.l2 = int(l2)
        nv = 3 * self.l1 * self.l2

        coords = []
        for c1 in range(self.l1):
            for c2 in range(self.l2):
                for s in range(3):
                    coords.append((2 * c1 + c2 + s, -c1 + c2))
        self.vertex_coords: Tuple[Tuple[int, int], ...] = tuple(coords)
        self.vertex_color: Tuple[int, ...] = tuple(s for _ in range(self.l1 * self.l2) for s in range(3))

        edges = []
        edge_color = []
        for v in range(nv):
            i, j = coords[v]
            for di, dj in EDGE_DIRS:
                w = self.vertex_at(i + di, j + dj)
                edges.append((v, w))
                edge_color.append(3 - self.vertex_color[v] - self.vertex_color[w])
        self.edges: Tuple[Tuple[int, int], ...] = tuple(edges)
        self.edge_color: Tuple[int, ...] = tuple(edge_color)

        plaqs = []
        plaq_edges = []
        for v in range(nv):
            i, j = coords[v]
            plaqs.append((v, self.vertex_at(i + 1, j), self.vertex_at(i, j + 1)))
            plaq_edges.append((self.edge_at(i, j, 0), self.edge_at(i, j, 1), self.edge_at(i + 1, j, 2)))
            plaqs.append((self.vertex_at(i + 1, j), self.vertex_at(i, j + 1), self.vertex_at(i + 1, j + 1)))
            plaq_edges.append((self.edge_at(i + 1, j, 1), self.edge_at(i, j + 1, 0), self.edge_at(i + 1, j, 2)))
        self.plaquettes: Tuple[Tuple[int, int, int], ...] = tuple(plaqs)
        self.plaquette_edges: Tuple[Tuple[int, int, int], ...] = tuple(plaq_edges)

        ep: List[List[int]] = [[] for _ in edges]
        vp: List[List[int]] = [[] for _ in range(nv)]
        ve: List[List[int]] = [[] for _ in range(nv)]
        for p, (es, vs) in enumerate(zip(plaq_edges, plaqs)):
            for e in es:
                ep[e].append(p)
            for v in vs:
                vp[v].append(p)
        for e, (u, w) in enumerate(edges):
            ve[u].append(e)
            ve[w].append(e)
        self.edge_plaquettes: Tuple[Tuple[int, int], ...] = tuple(tuple(x) for x in ep)
        self.vertex_plaquettes: Tuple[Tuple[int, ...], ...] = tuple(tuple(x) for x in vp)
        self.vertex_edges: Tuple[Tuple[int, ...], ...] = tuple(tuple(x) for x in ve)
        self._check()

    # --- coordinates -------------------------------------------------
    def vertex_at(self, i: int, j: int) -> int:
        s = (i - j) % 3
        c1 = (i - s - j) // 3
        c2 = j + c1
        return ((c1 % self.l1) * self.l2 + (c2 % self.l2)) * 3 + s

    def edge_at(self, i: int, j: int, d: int) -> int:
        return self.vertex_at(i, j) * 3 + d

    def edge_between(self, a: Tuple[int, int], b: Tuple[int, int]) -> int:
        """Edge joining neighbouring coordinate points a and b."""
        delta = (b[0] - a[0], b[1] - a[1])
        if delta in EDGE_DIRS:
            return self.edge_at(a[0], a[1], EDGE_DIRS.index(delta))
        back = (-delta[0], -delta[1])
        if back in EDGE_DIRS:
            return self.edge_at(b[0], b[1], EDGE_DIRS.index(back))
        raise ValueError(f"points {a} and {b} are not neighbours")

    # --- counts ------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertex_coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_qubits(self) -> int:
        return len(self.plaquettes)

    def vertices_of_color(self, color) -> List[int]:
        c = color_index(color)
        return [v for v in range(self.n_vertices) if self.vertex_color[v] == c]

    def edges_of_color(self, color) -> List[int]:
        c = color_index(color)
        return [e for e in range(self.n_edges) if self.edge_color[e] == c]

    def _check(self) -> None:
        # independent re-scan of the constructed tables
        for e, (u, w) in enumerate(self.edges):
            cu, cw = self.vertex_color[u], self.vertex_color[w]
            if cu == cw or self.edge_color[e] in (cu, cw):
                raise AssertionError(f"bad coloring on edge {e}")
            if len(self.edge_plaquettes[e]) != 2:
                raise AssertionError(f"edge {e} borders {len(self.edge_plaquettes[e])} plaquettes")
        for p, vs in enumerate(self.plaquettes):
            if sorted(self.vertex_color[v] for v in vs) != [0, 1, 2]:
                raise AssertionError(f"plaquette {p} lacks a color")
            if sorted(self.edge_color[e] for e in self.plaquette_edges[p]) != [0, 1, 2]:
                raise AssertionError(f"plaquette {p} edge colors")
        for v, ps in enumerate(self.vertex_plaquettes):
            if len(set(ps)) != 6:
                raise AssertionError(f"vertex {v} touches {len(set(ps))} distinct plaquettes")

    def to_json(self) -> str:
        doc = {
            "l1": self.l1,
            "l2": self.l2,
            "vertices": [{"index": v, "coords": list(self.vertex_coords[v]), "color": COLORS[self.vertex_color[v]]}
                         for v in range(self.n_vertices)],
            "edges": [{"index": e, "ends": list(self.edges[e]), "color": COLORS[self.edge_color[e]],
                       "plaquettes": list(self.edge_plaquettes[e])} for e in range(self.n_edges)],
            "plaquettes": [{"index": p, "vertices": list(self.plaquettes[p]), "edges": list(self.plaquette_edges[p])}
                           for p in range(self.n_qubits)],
        }
        return json.dumps(doc, indent=1)


def build_lattice(l1: int, l2: int) -> ColoredTorusLattice:
    return ColoredTorusLattice(l1, l2)


def superlattice(lattice: ColoredTorusLattice, color) -> SuperlatticeView:
    """Round-``color`` superlattice; superedge k sits on base edge ``superedges[k]``."""
    b = color_index(color)
    sverts = tuple(lattice.vertices_of_color(b))
    vpos = {v: k for k, v in enumerate(sverts)}
    sedges = tuple(lattice.edges_of_color(b))
    epos = {e: k for k, e in enumerate(sedges)}
    ends = []
    for e in sedges:
        pair = []
        for p in lattice.edge_plaquettes[e]:
            (vb,) = [v for v in lattice.plaquettes[p] if lattice.vertex_color[v] == b]
            pair.append(vpos[vb])
        ends.append(tuple(pair))
    splaq = tuple(v for v in range(lattice.n_vertices) if lattice.vertex_color[v] != b)
    return SuperlatticeView(b, sverts, sedges, tuple(ends), splaq, vpos, epos)


def canonical_loop(lattice: ColoredTorusLattice, direction: int, color) -> LoopSpec:
    """Straight cycle of color-``color`` edges winding once along ``direction``.

    The cycle starts at the cell-(0,0) vertex of color b+1 and alternates
    between the two colors other than b.
    """
    if direction not in (0, 1):
        raise ValueError("direction must be 0 (l1) or 1 (l2)")
    b = color_index(color)
    pts = loop_points(lattice, direction, b)
    verts = [lattice.vertex_at(*pt) for pt in pts]
    edges = [lattice.edge_between(a, c) for a, c in zip(pts, pts[1:])]
    winding = (1, 0) if direction == 0 else (0, 1)
    return LoopSpec(direction, b, tuple(edges), tuple(verts[:-1]), winding)


def loop_points(lattice: ColoredTorusLattice, direction: int, color) -> List[Tuple[int, int]]:
    """Unwrapped coordinates visited by the canonical loop, first point repeated at the end."""
    b = color_index(color)
    length = lattice.l1 if direction == 0 else lattice.l2
    pt = ((b + 1) % 3, 0)
    pts = [pt]
    for _ in range(length):
        for step in _LOOP_STEPS[direction]:
            pt = (pt[0] + step[0], pt[1] + step[1])
            pts.append(pt)
    return pts


def super_cycle(lattice: ColoredTorusLattice, direction: int, color) -> Tuple[int, ...]:
    """Straight cycle on the color-``color`` superlattice, as base-edge indices.

    Steps between consecutive same-color vertices by one cell vector; the
    superedge of each step is the base edge joining the two common neighbours.
    """
    b = color_index(color)
    delta = CELL_VECTORS[direction]
    length = lattice.l1 if direction == 0 else lattice.l2
    common = [d for d in _NEIGHBOURS if (delta[0] - d[0], delta[1] - d[1]) in _NEIGHBOURS]
    pt = (b, 0)
    out = []
    for _ in range(length):
        a = (pt[0] + common[0][0], pt[1] + common[0][1])
        c = (pt[0] + common[1][0], pt[1] + common[1][1])
        out.append(lattice.edge_between(a, c))
        pt = (pt[0] + delta[0], pt[1] + delta[1])
    return tuple(out)


_NEIGHBOURS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def edge_boundary(lattice: ColoredTorusLattice, edges: Sequence[int]) -> set:
    """Vertices of odd degree in an edge multiset."""
    odd = set()
    for e in edges:
        for v in lattice.edges[e]:
            odd ^= {v}
    return odd


def cycle_winding(lattice: ColoredTorusLattice, edges: Sequence[int]) -> Tuple[int, int]:
    """Winding numbers (along l1, l2) of a closed walk given as an ordered edge list.

    Consecutive edges must share a vertex; displacements are accumulated in
    primitive coordinates and converted to torus periods.
    """
    if not edges:
        return (0, 0)
    u, w = lattice.edges[edges[0]]
    if len(edges) > 1 and u in lattice.edges[edges[1]] and w not in lattice.edges[edges[1]]:
        u, w = w, u
    start = u
    total = [0, 0]
    cur = u
    for e in edges:
        a, b = lattice.edges[e]
        d = EDGE_DIRS[e % 3]
        if cur == a:
            total[0] += d[0]
            total[1] += d[1]
            cur = b
        elif cur == b:
            total[0] -= d[0]
            total[1] -= d[1]
            cur = a
        else:
            raise ValueError("edges do not form a walk")
    if cur != start:
        raise ValueError("walk is not closed")
    # total = m1 * l1 * A1 + m2 * l2 * A2
    x, y = total
    m1 = (x - y) / 3
    m2 = (x + 2 * y) / 3
    return (int(round(m1 / lattice.l1)), int(round(m2 / lattice.l2)))


def string_class(lattice: ColoredTorusLattice, color, edges) -> Tuple[int, int]:
    """Homology class of a superlattice chain of ``color`` edges.

    Bit d is the parity of crossings with the canonical loop running along
    the other direction, so a string winding once along l1 has class (1, 0).
    """
    edges = set(edges)
    return tuple(len(edges & set(canonical_loop(lattice, 1 - d, color).edges)) % 2 for d in (0, 1))
