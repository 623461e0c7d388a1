"""
Cylinder lattice, Fisher decoration and clockwise-odd orientation

Every site z = (column, row) of the L x M cylinder is replaced by the six-vertex
cluster {Hbar, H, Vbar, V, Tbar, T}. Long edges join clusters (Hbar_z to
H_{z+e1} with weight t1, Vbar_z to V_{z+e2} with weight t2); auxiliary edges
join V vertices of the lower row or Vbar vertices of the upper row.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from boundary_ising.errors import (
    CrossingAuxEdges,
    InvalidPair,
    InvalidSpec,
    InvalidTuple,
    MultipleCrossings,
)
from boundary_ising.logger import get_logger

logger = get_logger(__name__)

CRITICAL_TOL = 1e-9
ISOTROPIC_T = math.sqrt(2.0) - 1.0


class BoundaryCondition(str, Enum):
    """Horizontal boundary condition, for spins or for Grassmann fields"""
    PERIODIC = "p"
    ANTIPERIODIC = "a"

    @property
    def sign(self) -> int:
        return 1 if self is BoundaryCondition.PERIODIC else -1

    def opposite(self) -> "BoundaryCondition":
        if self is BoundaryCondition.PERIODIC:
            return BoundaryCondition.ANTIPERIODIC
        return BoundaryCondition.PERIODIC

    @classmethod
    def from_sign(cls, sign: int) -> "BoundaryCondition":
        return cls.PERIODIC if sign > 0 else cls.ANTIPERIODIC


class Side(str, Enum):
    LOWER = "l"
    UPPER = "u"


class Kind(IntEnum):
    """Vertex kinds of a Fisher cluster, in index order"""
    HBAR = 0
    H = 1
    VBAR = 2
    V = 3
    TBAR = 4
    T = 5

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]


_KIND_LABELS = {
    Kind.HBAR: "Hbar", Kind.H: "H", Kind.VBAR: "Vbar",
    Kind.V: "V", Kind.TBAR: "Tbar", Kind.T: "T",
}

# Planar offsets inside a cluster (cluster centres sit on a 3x3 grid)
_OFFSETS = {
    Kind.HBAR: (1.0, 0.0), Kind.H: (-1.0, 0.0),
    Kind.VBAR: (0.0, 1.0), Kind.V: (0.0, -1.0),
    Kind.T: (0.3, 0.3), Kind.TBAR: (-0.3, -0.3),
}

# Direction of the single long or auxiliary edge leaving each outer vertex
_EXTERNAL_ANGLE = {
    Kind.HBAR: 0.0, Kind.H: math.pi,
    Kind.VBAR: math.pi / 2, Kind.V: -math.pi / 2,
}

# Unit-weight cluster edges as (tail, head)
SHORT_EDGES: Tuple[Tuple[Kind, Kind], ...] = (
    (Kind.VBAR, Kind.HBAR),
    (Kind.HBAR, Kind.T),
    (Kind.T, Kind.VBAR),
    (Kind.V, Kind.H),
    (Kind.H, Kind.TBAR),
    (Kind.TBAR, Kind.V),
    (Kind.TBAR, Kind.T),
)


class LatticeSpec(BaseModel):
    """Cylinder dimensions, couplings and horizontal spin boundary condition"""
    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=2, description="Horizontal circumference")
    M: int = Field(..., ge=1, description="Number of rows")
    t1: float = Field(..., gt=0.0, lt=1.0, description="tanh(beta J1)")
    t2: float = Field(..., gt=0.0, lt=1.0, description="tanh(beta J2)")
    tau: BoundaryCondition = Field(
        BoundaryCondition.PERIODIC, description="Horizontal spin boundary condition"
    )

    @classmethod
    def checked(cls, **fields) -> "LatticeSpec":
        """Construct, reporting range violations as InvalidSpec"""
        try:
            return cls(**fields)
        except ValidationError as e:
            raise InvalidSpec(
                f"invalid lattice spec: {e.error_count()} error(s)",
                {"fields": {k: str(v) for k, v in fields.items()}},
            )

    @classmethod
    def at_criticality(
        cls,
        L: int,
        M: int,
        t1: float = ISOTROPIC_T,
        tau: BoundaryCondition = BoundaryCondition.PERIODIC,
    ) -> "LatticeSpec":
        return cls.checked(L=L, M=M, t1=t1, t2=(1.0 - t1) / (1.0 + t1), tau=tau)

    @property
    def n_sites(self) -> int:
        return self.L * self.M

    @property
    def K1(self) -> float:
        return math.atanh(self.t1)

    @property
    def K2(self) -> float:
        return math.atanh(self.t2)

    @property
    def beta(self) -> float:
        """Inverse temperature with J1 = 1"""
        return self.K1

    @property
    def J2(self) -> float:
        return self.K2 / self.K1

    @property
    def critical_t2(self) -> float:
        return (1.0 - self.t1) / (1.0 + self.t1)

    def is_critical(self, tol: float = CRITICAL_TOL) -> bool:
        return abs(self.t2 - self.critical_t2) < tol

    @property
    def grassmann_bc(self) -> BoundaryCondition:
        """Periodic spins pair with antiperiodic Grassmann fields and vice versa"""
        return self.tau.opposite()

    def with_tau(self, tau: BoundaryCondition) -> "LatticeSpec":
        return self.model_copy(update={"tau": tau})


@dataclass(frozen=True, order=True)
class BoundarySite:
    """A site on the lower (row 0) or upper (row M-1) boundary"""
    column: int
    side: Side

    @classmethod
    def parse(cls, text: str) -> "BoundarySite":
        """Parse `l:7` / `u:3`"""
        try:
            side, column = text.strip().split(":")
            return cls(int(column), Side(side.strip().lower()))
        except ValueError:
            raise InvalidTuple(f"cannot parse boundary site {text!r}", {"site": text})

    def row(self, M: int) -> int:
        return 0 if self.side is Side.LOWER else M - 1

    @property
    def kind(self) -> Kind:
        """Fisher vertex carrying the spin insertion"""
        return Kind.V if self.side is Side.LOWER else Kind.VBAR

    def normalized(self, L: int) -> "BoundarySite":
        return BoundarySite(self.column % L, self.side)

    def __str__(self) -> str:
        return f"{self.side.value}:{self.column}"


@dataclass(frozen=True)
class AuxPair:
    """Auxiliary boundary edge between two sites with weight tanh(beta J~)"""
    first: BoundarySite
    second: BoundarySite
    weight: float

    def __post_init__(self):
        if not -1.0 < self.weight < 1.0:
            raise InvalidPair(
                f"auxiliary weight must lie in (-1, 1), got {self.weight}",
                {"weight": self.weight},
            )

    @property
    def is_crossing(self) -> bool:
        return self.first.side is not self.second.side

    def lower_upper(self) -> Tuple[BoundarySite, BoundarySite]:
        """Endpoints of a crossing pair as (lower, upper)"""
        if self.first.side is Side.LOWER:
            return self.first, self.second
        return self.second, self.first


@dataclass(frozen=True)
class BoundaryTuple:
    """Ordered boundary sites indexing a spin product"""
    sites: Tuple[BoundarySite, ...]

    @classmethod
    def parse(cls, text: str) -> "BoundaryTuple":
        """Parse `l:7,l:5,u:0`"""
        parts = [p for p in text.split(",") if p.strip()]
        return cls(tuple(BoundarySite.parse(p) for p in parts))

    @classmethod
    def lower(cls, columns: Iterable[int]) -> "BoundaryTuple":
        return cls(tuple(BoundarySite(c, Side.LOWER) for c in columns))

    @property
    def m(self) -> int:
        return len(self.sites)

    @property
    def n_lower(self) -> int:
        return sum(1 for s in self.sites if s.side is Side.LOWER)

    @property
    def n_upper(self) -> int:
        return self.m - self.n_lower

    def validated(self, spec: LatticeSpec) -> "BoundaryTuple":
        """
        Reduce columns mod L and reject repeated sites

        On a single-row cylinder the lower and upper site of a column are the
        same spin and may not both appear.
        """
        sites = tuple(s.normalized(spec.L) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise InvalidTuple("boundary sites must be distinct", {"sites": [str(s) for s in sites]})
        if spec.M == 1:
            columns = [s.column for s in sites]
            if len(set(columns)) != len(columns):
                raise InvalidTuple(
                    "on a one-row cylinder a column may appear only once",
                    {"sites": [str(s) for s in sites]},
                )
        return BoundaryTuple(sites)

    def canonical(self) -> "BoundaryTuple":
        """Cyclic order: lower sites right-to-left, then upper sites left-to-right"""
        lower = sorted((s for s in self.sites if s.side is Side.LOWER), key=lambda s: -s.column)
        upper = sorted((s for s in self.sites if s.side is Side.UPPER), key=lambda s: s.column)
        return BoundaryTuple(tuple(lower + upper))

    def shifted(self, dx: int, L: int) -> "BoundaryTuple":
        return BoundaryTuple(tuple(BoundarySite((s.column + dx) % L, s.side) for s in self.sites))

    def reflected(self, L: int) -> "BoundaryTuple":
        return BoundaryTuple(tuple(BoundarySite((-s.column) % L, s.side) for s in self.sites))

    def __str__(self) -> str:
        return ",".join(str(s) for s in self.sites)


@dataclass(frozen=True)
class Vertex:
    index: int
    column: int
    row: int
    kind: Kind


@dataclass(frozen=True)
class Edge:
    """Undirected pair u < v with orientation sign (+1 means u -> v)"""
    u: int
    v: int
    weight: float
    sign: int
    kind: str

    @classmethod
    def directed(cls, tail: int, head: int, weight: float, kind: str) -> "Edge":
        if tail < head:
            return cls(tail, head, weight, 1, kind)
        return cls(head, tail, weight, -1, kind)

    @property
    def tail(self) -> int:
        return self.u if self.sign > 0 else self.v

    @property
    def head(self) -> int:
        return self.v if self.sign > 0 else self.u

    def flipped(self) -> "Edge":
        return replace(self, sign=-self.sign)


@dataclass(frozen=True)
class DecoratedGraph:
    """Oriented Fisher graph with its bounded faces"""
    spec: LatticeSpec
    grassmann_bc: BoundaryCondition
    aux_pairs: Tuple[AuxPair, ...]
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Edge, ...]
    faces: Tuple[Tuple[int, ...], ...]
    boundary_faces: Tuple[Tuple[int, ...], ...] = field(default=())
    crossing_edge: Optional[int] = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def with_edge_flipped(self, edge_index: int) -> "DecoratedGraph":
        """Same embedding, one edge reversed"""
        edges = list(self.edges)
        edges[edge_index] = edges[edge_index].flipped()
        return replace(self, edges=tuple(edges))

    def to_json(self) -> dict:
        return {
            "L": self.spec.L,
            "M": self.spec.M,
            "tau": self.spec.tau.value,
            "grassmann_bc": self.grassmann_bc.value,
            "vertices": [
                {"index": v.index, "column": v.column, "row": v.row, "kind": v.kind.label}
                for v in self.vertices
            ],
            "edges": [
                {"u": e.u, "v": e.v, "w": e.weight, "sign": e.sign, "kind": e.kind}
                for e in self.edges
            ],
            "faces": [list(f) for f in self.faces],
        }


def vertex_index(spec: LatticeSpec, column: int, row: int, kind: Kind) -> int:
    """Flat index of a decorated vertex (column-major, kind innermost)"""
    return ((column % spec.L) * spec.M + row) * 6 + int(kind)


def validate_aux_pairs(spec: LatticeSpec, aux_pairs: Sequence[AuxPair]) -> Tuple[AuxPair, ...]:
    """
    Normalise columns and check the auxiliary edges can be drawn without crossings

    Raises:
        InvalidPair: a pair repeats a site, or a site is used twice
        MultipleCrossings: more than one lower-upper pair
        CrossingAuxEdges: same-side arcs interleave or enclose the crossing endpoint
    """
    pairs = tuple(
        AuxPair(p.first.normalized(spec.L), p.second.normalized(spec.L), p.weight)
        for p in aux_pairs
    )
    used: Dict[Tuple[int, Side], AuxPair] = {}
    for pair in pairs:
        if pair.first == pair.second:
            raise InvalidPair(f"auxiliary pair repeats site {pair.first}", {"site": str(pair.first)})
        for site in (pair.first, pair.second):
            key = (site.column, site.side)
            if key in used:
                raise InvalidPair(f"site {site} carries two auxiliary edges", {"site": str(site)})
            used[key] = pair
    if spec.M == 1:
        columns = [c for c, _ in used]
        if len(set(columns)) != len(columns):
            raise InvalidPair("on a one-row cylinder a column may carry only one auxiliary edge")

    crossings = [p for p in pairs if p.is_crossing]
    if len(crossings) > 1:
        raise MultipleCrossings(
            f"at most one lower-upper auxiliary edge, got {len(crossings)}",
            {"count": len(crossings)},
        )

    for side in (Side.LOWER, Side.UPPER):
        intervals = sorted(
            (min(p.first.column, p.second.column), max(p.first.column, p.second.column))
            for p in pairs
            if not p.is_crossing and p.first.side is side
        )
        for i, (a, b) in enumerate(intervals):
            for c, d in intervals[i + 1:]:
                if a < c < b < d:
                    raise CrossingAuxEdges(
                        f"auxiliary arcs [{a},{b}] and [{c},{d}] intersect on side {side.value}",
                        {"side": side.value, "arcs": [[a, b], [c, d]]},
                    )
        for crossing in crossings:
            end = crossing.lower_upper()[0 if side is Side.LOWER else 1]
            for a, b in intervals:
                if a < end.column < b:
                    raise CrossingAuxEdges(
                        f"auxiliary arc [{a},{b}] encloses the crossing endpoint {end}",
                        {"side": side.value, "arc": [a, b], "endpoint": str(end)},
                    )
    return pairs


def oriented_edges(
    spec: LatticeSpec,
    aux_pairs: Sequence[AuxPair] = (),
    grassmann_bc: Optional[BoundaryCondition] = None,
    crossing_sign: int = -1,
) -> List[Edge]:
    """
    All edges of the decorated graph with the standard orientation

    The seam edges (column L-1 to 0) are reversed for antiperiodic Grassmann
    fields. Lower arcs point right-to-left, upper arcs left-to-right, and the
    crossing edge points bottom-to-top for crossing_sign = -1.
    """
    bc = grassmann_bc or spec.grassmann_bc
    L, M = spec.L, spec.M
    edges: List[Edge] = []

    for x in range(L):
        for y in range(M):
            for tail, head in SHORT_EDGES:
                edges.append(Edge.directed(
                    vertex_index(spec, x, y, tail), vertex_index(spec, x, y, head), 1.0, "short"
                ))

    for x in range(L):
        for y in range(M):
            left = vertex_index(spec, x, y, Kind.HBAR)
            right = vertex_index(spec, x + 1, y, Kind.H)
            if x == L - 1:
                if bc.sign < 0:
                    left, right = right, left
                edges.append(Edge.directed(left, right, spec.t1, "seam"))
            else:
                edges.append(Edge.directed(left, right, spec.t1, "horizontal"))

    for x in range(L):
        for y in range(M - 1):
            edges.append(Edge.directed(
                vertex_index(spec, x, y, Kind.VBAR),
                vertex_index(spec, x, y + 1, Kind.V),
                spec.t2,
                "vertical",
            ))

    for pair in aux_pairs:
        if pair.is_crossing:
            low, up = pair.lower_upper()
            tail = vertex_index(spec, low.column, 0, Kind.V)
            head = vertex_index(spec, up.column, M - 1, Kind.VBAR)
            if crossing_sign > 0:
                tail, head = head, tail
            edges.append(Edge.directed(tail, head, pair.weight, "crossing"))
            continue
        a, b = sorted((pair.first.column, pair.second.column))
        if pair.first.side is Side.LOWER:
            tail = vertex_index(spec, b, 0, Kind.V)
            head = vertex_index(spec, a, 0, Kind.V)
        else:
            tail = vertex_index(spec, a, M - 1, Kind.VBAR)
            head = vertex_index(spec, b, M - 1, Kind.VBAR)
        edges.append(Edge.directed(tail, head, pair.weight, "aux"))
    return edges


def _dart_shift(vertices: Sequence[Vertex], edge: Edge, tail: int, head: int) -> int:
    """Horizontal displacement (in columns) of traversing `edge` from tail to head"""
    if edge.kind in ("horizontal", "seam"):
        return 1 if vertices[tail].kind is Kind.HBAR else -1
    if edge.kind == "aux":
        return vertices[head].column - vertices[tail].column
    return 0


def _trace_faces(
    vertices: Sequence[Vertex], edges: Sequence[Edge]
) -> Tuple[List[Tuple[int, ...]], List[Tuple[int, ...]]]:
    """
    Faces of the cylinder embedding, each traversed with the face on the right

    Faces whose boundary winds around the cylinder are the two boundary circles.
    """
    incident: Dict[int, List[Tuple[float, int]]] = {v.index: [] for v in vertices}
    shift: Dict[Tuple[int, int], int] = {}
    for edge in edges:
        if edge.kind == "crossing":
            continue
        for a, b in ((edge.u, edge.v), (edge.v, edge.u)):
            va, vb = vertices[a], vertices[b]
            if edge.kind == "short":
                ax, ay = _OFFSETS[va.kind]
                bx, by = _OFFSETS[vb.kind]
                angle = math.atan2(by - ay, bx - ax)
            else:
                angle = _EXTERNAL_ANGLE[va.kind]
            incident[a].append((angle, b))
            shift[(a, b)] = _dart_shift(vertices, edge, a, b)

    rotation = {v: [b for _, b in sorted(nbrs)] for v, nbrs in incident.items()}
    position = {v: {b: i for i, b in enumerate(nbrs)} for v, nbrs in rotation.items()}

    bounded, boundary = [], []
    visited = set()
    for start in rotation:
        for first in rotation[start]:
            if (start, first) in visited:
                continue
            cycle, winding = [], 0
            u, v = start, first
            while (u, v) not in visited:
                visited.add((u, v))
                cycle.append(u)
                winding += shift[(u, v)]
                around = rotation[v]
                u, v = v, around[(position[v][u] + 1) % len(around)]
            (boundary if winding else bounded).append(tuple(cycle))
    return bounded, boundary


def build_decorated_graph(
    spec: LatticeSpec,
    aux_pairs: Sequence[AuxPair] = (),
    grassmann_bc: Optional[BoundaryCondition] = None,
    crossing_sign: int = -1,
) -> DecoratedGraph:
    """
    Fisher-decorated cylinder with auxiliary edges and its orientation

    Args:
        spec: lattice spec
        aux_pairs: auxiliary boundary edges
        grassmann_bc: horizontal Grassmann condition (default: opposite of spec.tau)
        crossing_sign: -1 for the bottom-to-top crossing edge, +1 reversed

    Raises:
        InvalidPair, MultipleCrossings, CrossingAuxEdges
    """
    pairs = validate_aux_pairs(spec, aux_pairs)
    bc = grassmann_bc or spec.grassmann_bc
    vertices = tuple(
        Vertex(vertex_index(spec, x, y, kind), x, y, kind)
        for x in range(spec.L)
        for y in range(spec.M)
        for kind in Kind
    )
    edges = oriented_edges(spec, pairs, bc, crossing_sign)
    faces, boundary = _trace_faces(vertices, edges)
    crossing = next((i for i, e in enumerate(edges) if e.kind == "crossing"), None)

    logger.debug(
        f"Decorated graph L={spec.L} M={spec.M}: {len(vertices)} vertices, "
        f"{len(edges)} edges, {len(faces)} bounded faces"
    )
    return DecoratedGraph(
        spec=spec,
        grassmann_bc=bc,
        aux_pairs=pairs,
        vertices=vertices,
        edges=tuple(edges),
        faces=tuple(faces),
        boundary_faces=tuple(boundary),
        crossing_edge=crossing,
    )


def _clockwise(face: Sequence[int], directed: set) -> int:
    return sum(1 for i, u in enumerate(face) if (u, face[(i + 1) % len(face)]) in directed)


def clockwise_count(graph: DecoratedGraph, face: Sequence[int]) -> int:
    """Number of edges of `face` directed along its clockwise traversal"""
    return _clockwise(face, {(e.tail, e.head) for e in graph.edges})


def verify_clockwise_odd(graph: DecoratedGraph) -> List[Tuple[int, ...]]:
    """Bounded faces with an even number of clockwise edges"""
    directed = {(e.tail, e.head) for e in graph.edges}
    violating = [face for face in graph.faces if _clockwise(face, directed) % 2 == 0]
    if violating:
        logger.warning(f"{len(violating)} faces violate the clockwise-odd rule")
    return violating


Segment = Tuple[Tuple[float, float], Tuple[float, float]]


def _arc_depths(spans: Sequence[Tuple[int, int]]) -> Dict[Tuple[int, int], int]:
    """Drawing depth of each same-side arc: one more than the arcs it encloses"""
    return {
        (a, b): 1 + sum(1 for c, d in spans if a <= c and d <= b and (c, d) != (a, b))
        for a, b in spans
    }


def _edge_paths(graph: DecoratedGraph) -> Dict[int, List[Segment]]:
    """
    Planar drawing of the long edges on the cylinder cut open at the seam

    Vertex (x, y) sits at the point (x, y); the seam edge of row y runs from
    (L-1, y) to the cut at (L, y). Lower arcs hang below row 0 and upper arcs
    rise above row M-1 as rectangular U shapes, nested arcs drawn shallower.
    """
    L, M = graph.spec.L, graph.spec.M
    vertices = graph.vertices
    spans = {Side.LOWER: [], Side.UPPER: []}
    for edge in graph.edges:
        if edge.kind == "aux":
            a, b = sorted((vertices[edge.u].column, vertices[edge.v].column))
            side = Side.LOWER if vertices[edge.u].kind is Kind.V else Side.UPPER
            spans[side].append((a, b))
    depths = {side: _arc_depths(s) for side, s in spans.items()}

    paths: Dict[int, List[Segment]] = {}
    for i, edge in enumerate(graph.edges):
        u, v = vertices[edge.u], vertices[edge.v]
        if edge.kind == "horizontal":
            x, y = min(u.column, v.column), u.row
            paths[i] = [((x, y), (x + 1, y))]
        elif edge.kind == "seam":
            paths[i] = [((L - 1, u.row), (L, u.row))]
        elif edge.kind == "vertical":
            x = u.column
            paths[i] = [((x, min(u.row, v.row)), (x, max(u.row, v.row)))]
        elif edge.kind == "aux":
            a, b = sorted((u.column, v.column))
            if u.kind is Kind.V:
                base, level = 0, -depths[Side.LOWER][(a, b)]
            else:
                base, level = M - 1, M - 1 + depths[Side.UPPER][(a, b)]
            paths[i] = [((a, base), (a, level)), ((a, level), (b, level)), ((b, level), (b, base))]
    return paths


def _crossing_route(graph: DecoratedGraph, paths: Dict[int, List[Segment]]) -> List[Segment]:
    """
    Drawing of the lower-upper edge: down past every lower arc, along to the
    seam, up through the seam column past every upper arc, over and down to
    the upper endpoint
    """
    L, M = graph.spec.L, graph.spec.M
    edge = graph.edges[graph.crossing_edge]
    ends = {graph.vertices[w].kind: graph.vertices[w].column for w in (edge.u, edge.v)}
    low, up = ends[Kind.V], ends[Kind.VBAR]
    below, above = 0.0, float(M - 1)
    for path in paths.values():
        for (_, y0), (_, y1) in path:
            below = min(below, y0, y1)
            above = max(above, y0, y1)
    below, above = below - 1, above + 1
    slot = L - 0.5
    return [
        ((low, 0), (low, below)),
        ((low, below), (slot, below)),
        ((slot, below), (slot, above)),
        ((slot, above), (up, above)),
        ((up, above), (up, M - 1)),
    ]


def _cross(first: Segment, second: Segment) -> bool:
    """Interior intersection of two axis-parallel segments"""
    (ax0, ay0), (ax1, ay1) = first
    (bx0, by0), (bx1, by1) = second
    if ay0 == ay1 and bx0 == bx1:
        return min(ax0, ax1) < bx0 < max(ax0, ax1) and min(by0, by1) < ay0 < max(by0, by1)
    if ax0 == ax1 and by0 == by1:
        return _cross(second, first)
    return False


def crossing_intersections(graph: DecoratedGraph) -> List[int]:
    """
    Indices of the edges met by the lower-upper auxiliary edge

    The crossing edge is drawn around every same-side arc and through the
    seam column, so a valid configuration meets exactly the M seam edges;
    any other index means an arc encloses one of its endpoints.
    """
    if graph.crossing_edge is None:
        return []
    paths = _edge_paths(graph)
    route = _crossing_route(graph, paths)
    return sorted(
        i for i, path in paths.items()
        if sum(_cross(r, s) for r in route for s in path) % 2 == 1
    )
