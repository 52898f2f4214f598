"""Discrete-mode Mach-Zehnder model and source/detector handshake paths.

Conventions (not physical constants, just a fixed choice): a beam splitter
maps input ports (0, 1) to output ports (0, 1) through
(1/sqrt 2) [[1, i], [i, 1]], so equal port indices mean transmission; a
mirror multiplies by i; an edge of length L and extra phase p multiplies by
exp(i (k L + p)).

Blockers absorb whatever reaches them.  They may keep a geometric
continuation edge (e.g. the rest of a blocked arm); that edge carries no
amplitude but still exists for path enumeration, where a path through a
blocker is reported as closed.
"""
from __future__ import annotations

import enum
import graphlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError, PathError, TopologyError
from .field import ComplexField, Grid
from .states import Direction, SpacetimePoint, TravelingGaussian2D

BEAM_SPLITTER_MATRIX = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
MIRROR_FACTOR = 1j


class NodeKind(str, enum.Enum):
    SOURCE = "source"
    VACUUM = "vacuum"
    BEAM_SPLITTER = "beam_splitter"
    MIRROR = "mirror"
    DETECTOR = "detector"
    BLOCKER = "blocker"


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind
    position: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    length: float
    phase: float = 0.0
    src_port: int = 0
    dst_port: int = 0


@dataclass
class PathGraph:
    nodes: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    k: float = 0.4

    def add(self, name: str, kind, position=(0.0, 0.0)) -> "PathGraph":
        if name in self.nodes:
            raise TopologyError(f"duplicate node {name!r}")
        self.nodes[name] = Node(name, NodeKind(kind), tuple(float(c) for c in position))
        return self

    def connect(self, src: str, dst: str, length: Optional[float] = None, phase: float = 0.0,
                src_port: int = 0, dst_port: int = 0) -> "PathGraph":
        for n in (src, dst):
            if n not in self.nodes:
                raise TopologyError(f"edge refers to unknown node {n!r}")
        if length is None:
            (x0, y0), (x1, y1) = self.nodes[src].position, self.nodes[dst].position
            length = math.hypot(x1 - x0, y1 - y0)
        self.edges.append(Edge(src, dst, float(length), float(phase), src_port, dst_port))
        return self

    def out_edges(self, name: str) -> list:
        return [e for e in self.edges if e.src == name]

    def in_edges(self, name: str) -> list:
        return [e for e in self.edges if e.dst == name]

    @property
    def source(self) -> str:
        sources = [n.name for n in self.nodes.values() if n.kind is NodeKind.SOURCE]
        if len(sources) != 1:
            raise TopologyError(f"graph needs exactly one source, found {len(sources)}")
        return sources[0]

    def topological_order(self) -> list:
        ts = graphlib.TopologicalSorter({n: set() for n in self.nodes})
        for e in self.edges:
            ts.add(e.dst, e.src)
        try:
            return list(ts.static_order())
        except graphlib.CycleError as exc:
            raise TopologyError(f"graph has a cycle: {exc.args[1]}") from None

    def validate(self) -> None:
        """Full port-count check required for mode propagation."""
        self.source
        self.topological_order()
        for node in self.nodes.values():
            ins, outs = self.in_edges(node.name), self.out_edges(node.name)
            kind = node.kind
            if kind in (NodeKind.SOURCE, NodeKind.VACUUM):
                ok = not ins and len(outs) == 1
            elif kind is NodeKind.BEAM_SPLITTER:
                ok = (sorted(e.dst_port for e in ins) == [0, 1]
                      and sorted(e.src_port for e in outs) == [0, 1])
            elif kind is NodeKind.MIRROR:
                ok = len(ins) == 1 and len(outs) == 1
            elif kind is NodeKind.DETECTOR:
                ok = len(ins) >= 1 and not outs
            else:
                ok = len(ins) >= 1 and len(outs) <= 1
            if not ok:
                raise TopologyError(
                    f"{kind.value} {node.name!r} has {len(ins)} inputs / {len(outs)} outputs")


@dataclass
class ModeResult:
    amplitudes: dict
    probabilities: dict
    total: float


def propagate_modes(graph: PathGraph) -> ModeResult:
    graph.validate()
    out_amp: dict = {}
    sinks: dict = {}
    for name in graph.topological_order():
        node = graph.nodes[name]
        arriving = {}
        for e in graph.in_edges(name):
            a = out_amp[e.src].get(e.src_port, 0j)
            arriving[e.dst_port] = arriving.get(e.dst_port, 0j) + a * np.exp(
                1j * (graph.k * e.length + e.phase))
        kind = node.kind
        if kind is NodeKind.SOURCE:
            out_amp[name] = {0: 1 + 0j}
        elif kind is NodeKind.VACUUM:
            out_amp[name] = {0: 0j}
        elif kind is NodeKind.BEAM_SPLITTER:
            vec = BEAM_SPLITTER_MATRIX @ np.array([arriving.get(0, 0j), arriving.get(1, 0j)])
            out_amp[name] = {0: complex(vec[0]), 1: complex(vec[1])}
        elif kind is NodeKind.MIRROR:
            out_amp[name] = {e.src_port: MIRROR_FACTOR * arriving.get(0, 0j)
                             for e in graph.out_edges(name)}
        else:
            sinks[name] = complex(sum(arriving.values()))
            out_amp[name] = {}
    probs = {n: abs(a) ** 2 for n, a in sinks.items()}
    return ModeResult(sinks, probs, float(sum(probs.values())))


@dataclass(frozen=True)
class HandshakePath:
    nodes: tuple
    open: bool
    points: tuple = ()

    @property
    def detector(self) -> str:
        return self.nodes[-1]

    @property
    def length(self) -> float:
        return sum(math.dist(a, b) for a, b in zip(self.points, self.points[1:]))


def _all_paths(graph: PathGraph, start: str, goal_kind: NodeKind) -> list:
    succ = {n: [e.dst for e in graph.out_edges(n)] for n in graph.nodes}
    found = []
    stack = [(start, (start,))]
    while stack:
        node, path = stack.pop()
        if graph.nodes[node].kind is goal_kind:
            found.append(path)
            continue
        for nxt in reversed(succ[node]):
            stack.append((nxt, path + (nxt,)))
    return sorted(found)


def _reach(graph: PathGraph, start: str, forward: bool) -> set:
    """Nodes reached by a wave launched at ``start``; blockers stop it."""
    seen = {start}
    frontier = [start]
    while frontier:
        n = frontier.pop()
        if n != start and graph.nodes[n].kind is NodeKind.BLOCKER:
            continue
        nbrs = ([e.dst for e in graph.out_edges(n)] if forward
                else [e.src for e in graph.in_edges(n)])
        for m in nbrs:
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    return seen


def handshake_paths(graph: PathGraph) -> list:
    """Every source-to-detector path, flagged open where the waves overlap.

    The source's retarded wave fills ``forward``; each detector's advanced
    wave fills its ``backward`` set.  A path is open when all of its nodes
    lie in both sets and none of them is a blocker.
    """
    graph.topological_order()
    src = graph.source
    forward = _reach(graph, src, forward=True)
    blockers = {n for n, v in graph.nodes.items() if v.kind is NodeKind.BLOCKER}
    result = []
    backward_cache: dict = {}
    for path in _all_paths(graph, src, NodeKind.DETECTOR):
        det = path[-1]
        if det not in backward_cache:
            backward_cache[det] = _reach(graph, det, forward=False)
        overlap = (forward & backward_cache[det]) - blockers
        is_open = all(n in overlap for n in path)
        pts = tuple(graph.nodes[n].position for n in path)
        result.append(HandshakePath(path, is_open, pts))
    return result


def mach_zehnder(arm: float = 400.0, lead: float = 200.0, block_upper: bool = False,
                 block_lower: bool = False, k: float = 0.4, upper_phase: float = 0.0,
                 lower_phase: float = 0.0) -> PathGraph:
    """Square MZI: S -> B1 at the origin, lower arm via M1 = (arm, 0),
    upper arm via M2 = (0, arm), recombining at B2 = (arm, arm).

    Port labels are calibrated so that with both arms open every particle
    reaches D1; D2 sits on the continuation of the lower arm.  The optional
    blockers sit mid-way along the first leg of each arm (D3 upper, D4 lower).
    """
    g = PathGraph(k=k)
    g.add("S", NodeKind.SOURCE, (-lead, 0.0))
    g.add("V", NodeKind.VACUUM, (0.0, -lead))
    g.add("B1", NodeKind.BEAM_SPLITTER, (0.0, 0.0))
    g.add("M1", NodeKind.MIRROR, (arm, 0.0))
    g.add("M2", NodeKind.MIRROR, (0.0, arm))
    g.add("B2", NodeKind.BEAM_SPLITTER, (arm, arm))
    g.add("D1", NodeKind.DETECTOR, (arm + lead, arm))
    g.add("D2", NodeKind.DETECTOR, (arm, arm + lead))
    g.connect("S", "B1", dst_port=0)
    g.connect("V", "B1", dst_port=1)
    if block_lower:
        g.add("D4", NodeKind.BLOCKER, (arm / 2, 0.0))
        g.connect("B1", "D4", src_port=0, phase=lower_phase)
        g.connect("D4", "M1")
    else:
        g.connect("B1", "M1", src_port=0, phase=lower_phase)
    if block_upper:
        g.add("D3", NodeKind.BLOCKER, (0.0, arm / 2))
        g.connect("B1", "D3", src_port=1, phase=upper_phase)
        g.connect("D3", "M2")
    else:
        g.connect("B1", "M2", src_port=1, phase=upper_phase)
    g.connect("M1", "B2", dst_port=0)
    g.connect("M2", "B2", dst_port=1)
    g.connect("B2", "D2", src_port=0)
    g.connect("B2", "D1", src_port=1)
    return g


def path_render_grid(path: HandshakePath, s: float, spacing: Optional[float] = None) -> Grid:
    """Lab-frame grid covering the polyline with a 4 s margin."""
    spacing = spacing or s / 16
    pts = np.array(path.points)
    lo = pts.min(axis=0) - 4 * s
    hi = pts.max(axis=0) + 4 * s
    nx = int(math.ceil((hi[0] - lo[0]) / spacing))
    ny = int(math.ceil((hi[1] - lo[1]) / spacing))
    return Grid(lo[0], lo[0] + nx * spacing, nx, lo[1], lo[1] + ny * spacing, ny)


def unfold(points: Sequence, X: np.ndarray, Y: np.ndarray) -> tuple:
    """Map lab coordinates to (arc length, signed offset) along the nearest segment.

    The first segment extends backward and the last forward without limit, so
    packets sitting on the end points are not clipped.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    best_d = np.full(X.shape, np.inf)
    U = np.zeros(X.shape)
    V = np.zeros(X.shape)
    start = 0.0
    nseg = len(pts) - 1
    for j in range(nseg):
        a, b = pts[j], pts[j + 1]
        seg = b - a
        L = float(np.hypot(*seg))
        if L == 0:
            continue
        ux, uy = seg / L
        rx, ry = X - a[0], Y - a[1]
        along = rx * ux + ry * uy
        perp = -rx * uy + ry * ux
        lo = -np.inf if j == 0 else 0.0
        hi = np.inf if j == nseg - 1 else L
        clipped = np.clip(along, lo, hi)
        d = np.hypot(along - clipped, perp)
        take = d < best_d
        best_d = np.where(take, d, best_d)
        U = np.where(take, start + along, U)
        V = np.where(take, perp, V)
        start += L
    return U, V


def path_density_snapshots(path: HandshakePath, k: float, s: float, times: Sequence[float],
                           t_i: float = 0.0, grid: Optional[Grid] = None) -> list:
    """Transition density of a traveling packet pair carried along ``path``.

    In the unfolded frame the retarded packet leaves the source at t_i and the
    advanced one arrives at the detector at t_f = t_i + length / k, so both
    envelopes share the centre k (t - t_i) at every t.
    """
    if not path.open:
        raise PathError(f"path {'->'.join(path.nodes)} is blocked")
    if not k > 0 or not s > 0:
        raise ParameterError("k and s must be positive")
    L = path.length
    t_f = t_i + L / k
    for t in times:
        if not t_i <= t <= t_f:
            raise ParameterError(f"time {t} outside [{t_i}, {t_f}]")
    grid = grid or path_render_grid(path, s)
    X, Y = grid.mesh()
    U, V = unfold(path.points, X, Y)
    psi = TravelingGaussian2D(SpacetimePoint(0.0, 0.0, t_i), (k, 0.0), s, Direction.RETARDED)
    phi = TravelingGaussian2D(SpacetimePoint(L, 0.0, t_f), (k, 0.0), s, Direction.ADVANCED)
    return [(float(t), ComplexField(grid, phi.sample(U, V, t) * psi.sample(U, V, t)))
            for t in times]


def point_at_arc_length(points: Sequence, u: float) -> tuple:
    pts = [np.asarray(p, dtype=float) for p in points]
    for a, b in zip(pts, pts[1:]):
        L = float(np.hypot(*(b - a)))
        if u <= L:
            return tuple(a + (b - a) * (u / L))
        u -= L
    return tuple(pts[-1])
