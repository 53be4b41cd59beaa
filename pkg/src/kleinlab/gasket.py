"""Circle packings and gasket verification.

Circles here are oriented: each one carries a preferred side (its disk), so
an enclosing circle of a bounded packing and the half-plane sides of lines
need no special cases.  The representation is a Hermitian coefficient triple
(A, B, C) scaled to discriminant |B|^2 - AC = 1, with the disk being the set
where A|z|^2 + 2 Re(conj(B) z) + C <= 0.  Two such circles bound disjoint
disks tangent to each other exactly when their inversive product is -2,
which turns tangency detection, overlap detection, and the Descartes
quadruple flip into arithmetic on triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mobius import (
    INFINITY,
    Circline,
    MoebiusMap,
    SpherePoint,
    moebius_mapping,
    sphere_coords,
    transform_hermitian,
)

__all__ = [
    "OverlappingCirclesError",
    "NoTangentTripleError",
    "OrientedCircle",
    "CirclePacking",
    "TangencyEdge",
    "TangencyGraph",
    "detect_tangencies",
    "tangency_point",
    "descartes_residual",
    "tangent_quadruple_flip",
    "standard_base_triple",
    "standard_base_quadruple",
    "STANDARD_TANGENCY_POINTS",
    "standard_gasket",
    "bounded_gasket",
    "normalize_to_standard_gasket",
    "apply_to_packing",
    "GasketVerdict",
    "is_apollonian_like",
    "load_packing",
    "dump_packing",
]


class OverlappingCirclesError(ValueError):
    """A packing contains a pair of circles whose disks overlap."""

    def __init__(self, pairs):
        self.pairs = tuple(pairs)
        super().__init__(f"overlapping circle pairs: {self.pairs[:8]}")


class NoTangentTripleError(ValueError):
    """No three mutually tangent circles were found."""


class OrientedCircle:
    """A circle or line with a chosen disk, as a discriminant-1 Hermitian triple.

    curvature is the A coefficient: 1/radius for a circle enclosing its
    interior, negative for a reversed (enclosing) circle, 0 for a line.
    """

    __slots__ = ("A", "B", "C")

    def __init__(self, A: float, B: complex, C: float):
        A = float(A)
        B = complex(B)
        C = float(C)
        disc = (B.real * B.real + B.imag * B.imag) - A * C
        if not disc > 0.0:
            raise ValueError(f"triple ({A}, {B}, {C}) has no real locus")
        t = 1.0 / math.sqrt(disc)
        self.A = A * t
        self.B = B * t
        self.C = C * t

    @classmethod
    def from_center_radius(cls, center: complex, radius: float) -> "OrientedCircle":
        """Circle whose disk is its interior."""
        if not radius > 0.0:
            raise ValueError(f"radius must be positive, got {radius}")
        center = complex(center)
        k = 1.0 / radius
        # This triple has discriminant exactly 1; rederiving it numerically
        # would cancel |center|^2 k^2 against itself and shift high
        # curvatures, so bypass the normalizing constructor.
        out = object.__new__(cls)
        out.A = k
        out.B = -center * k
        out.C = (center.real * center.real + center.imag * center.imag - radius * radius) * k
        return out

    @classmethod
    def from_line(cls, normal: complex, offset: float) -> "OrientedCircle":
        """Line Re(conj(normal) z) = offset, disk = the side where that is <= offset."""
        normal = complex(normal)
        n = abs(normal)
        if n == 0.0:
            raise ValueError("line normal must be nonzero")
        out = object.__new__(cls)
        out.A = 0.0
        out.B = normal / n
        out.C = -2.0 * offset / n
        return out

    def reversed(self) -> "OrientedCircle":
        """Same locus, complementary disk."""
        out = object.__new__(OrientedCircle)
        out.A = -self.A
        out.B = -self.B
        out.C = -self.C
        return out

    @property
    def curvature(self) -> float:
        return self.A

    @property
    def is_line(self) -> bool:
        return abs(self.A) < 1e-9

    @property
    def center(self) -> SpherePoint:
        if self.is_line:
            return INFINITY
        return -self.B / self.A

    @property
    def radius(self) -> float:
        if self.is_line:
            return math.inf
        return 1.0 / abs(self.A)

    def line_geometry(self) -> tuple[complex, float]:
        """(unit normal, offset) with the disk on the <= side."""
        n = abs(self.B)
        return (self.B / n, -self.C / (2.0 * n))

    def chordal_diameter(self) -> float:
        return 4.0 / math.sqrt(
            4.0 * (self.B.real ** 2 + self.B.imag ** 2) + (self.A - self.C) ** 2
        )

    def evaluate(self, z: complex) -> float:
        z = complex(z)
        return self.A * abs(z) ** 2 + 2.0 * (self.B.conjugate() * z).real + self.C

    def transform(self, m: MoebiusMap) -> "OrientedCircle":
        # m has determinant 1, so the discriminant is preserved analytically.
        # Recomputing it here would subtract two large near-equal products
        # (|B|^2 and A*C), and renormalizing by that noisy value perturbs
        # high curvatures enough to spoil exact Descartes relations.
        A, B, C = transform_hermitian(m, self.A, self.B, self.C)
        out = object.__new__(OrientedCircle)
        out.A = A
        out.B = B
        out.C = C
        return out

    def inversive_product(self, other: "OrientedCircle") -> float:
        """-2 for tangent disjoint disks, < -2 separated, in (-2, 2) crossing,
        2 for the same oriented circle, > 2 nested."""
        return (
            2.0 * (self.B * other.B.conjugate()).real
            - self.A * other.C
            - other.A * self.C
        )

    def as_circline(self) -> Circline:
        return Circline(self.A, self.B, self.C)

    def __repr__(self) -> str:
        if self.is_line:
            n, d = self.line_geometry()
            return f"OrientedCircle.line(normal={n!r}, offset={d!r})"
        return f"OrientedCircle(center={self.center!r}, radius={self.radius!r}, curvature={self.A!r})"


def tangency_point(c1: OrientedCircle, c2: OrientedCircle) -> SpherePoint:
    """The common point of two tangent circles.

    The sum of the two triples is a point circline concentrated at the
    tangency; parallel tangent lines meet at infinity.
    """
    A = c1.A + c2.A
    B = c1.B + c2.B
    C = c1.C + c2.C
    scale = max(abs(A), abs(B), abs(C))
    if abs(A) < 1e-9 * scale:
        return INFINITY
    return -B / A


def descartes_residual(k1: float, k2: float, k3: float, k4: float) -> float:
    """(k1+k2+k3+k4)^2 - 2(k1^2+k2^2+k3^2+k4^2); zero for a mutually tangent
    quadruple, symmetric in the arguments."""
    s = k1 + k2 + k3 + k4
    return s * s - 2.0 * (k1 * k1 + k2 * k2 + k3 * k3 + k4 * k4)


def tangent_quadruple_flip(
    c1: OrientedCircle, c2: OrientedCircle, c3: OrientedCircle, c4: OrientedCircle
) -> OrientedCircle:
    """Replace c4 by the other circle tangent to c1, c2, c3.

    Componentwise 2(H1+H2+H3) - H4 on the normalized triples; this is the
    full-strength Descartes flip and works with lines and enclosing circles
    (a curvature-and-center version loses the offsets when two lines are
    present).
    """
    return OrientedCircle(
        2.0 * (c1.A + c2.A + c3.A) - c4.A,
        2.0 * (c1.B + c2.B + c3.B) - c4.B,
        2.0 * (c1.C + c2.C + c3.C) - c4.C,
    )


class CirclePacking:
    """A finite list of oriented circles, optionally with the words that
    produced them."""

    def __init__(self, circles, words=None):
        self.circles: list[OrientedCircle] = list(circles)
        self.words: list[str] | None = list(words) if words is not None else None
        if self.words is not None and len(self.words) != len(self.circles):
            raise ValueError("words list must match circles list")

    def __len__(self) -> int:
        return len(self.circles)

    def curvatures(self) -> list[float]:
        return [c.A for c in self.circles]


@dataclass(frozen=True)
class TangencyEdge:
    i: int
    j: int
    point: SpherePoint


class TangencyGraph:
    def __init__(self, n: int, edges):
        self.n = n
        self.edges: list[TangencyEdge] = sorted(edges, key=lambda e: (e.i, e.j))
        adj: dict[int, set[int]] = {i: set() for i in range(n)}
        for e in self.edges:
            adj[e.i].add(e.j)
            adj[e.j].add(e.i)
        self.adjacency = adj
        self._points = {(e.i, e.j): e.point for e in self.edges}

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._points

    def edge_point(self, i: int, j: int) -> SpherePoint:
        return self._points[(min(i, j), max(i, j))]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


# Circles with chordal diameter above this are paired exhaustively; the rest
# go through a spatial grid sized so tangent small pairs land in adjacent cells.
_BIG_DIAMETER = 0.05


def _near_pairs(circles: list[OrientedCircle]):
    n = len(circles)
    diam = [c.chordal_diameter() for c in circles]
    big = [i for i in range(n) if diam[i] > _BIG_DIAMETER]
    small = [i for i in range(n) if diam[i] <= _BIG_DIAMETER]
    for a in range(len(big)):
        i = big[a]
        for b in range(a + 1, len(big)):
            yield (min(i, big[b]), max(i, big[b]))
        for j in small:
            yield (min(i, j), max(i, j))
    if small:
        cell = 2.0 * _BIG_DIAMETER
        grid: dict[tuple[int, int, int], list[int]] = {}
        keys: dict[int, tuple[int, int, int]] = {}
        for j in small:
            x, y, z = sphere_coords(circles[j].center)
            key = (math.floor(x / cell), math.floor(y / cell), math.floor(z / cell))
            keys[j] = key
            grid.setdefault(key, []).append(j)
        for j in small:
            kx, ky, kz = keys[j]
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for dz in (-1, 0, 1):
                        for i in grid.get((kx + dx, ky + dy, kz + dz), ()):
                            if i < j:
                                yield (i, j)


def _scan_products(circles: list[OrientedCircle], tol: float):
    """(tangent pairs, overlapping pairs) among all pairs that could touch."""
    tangent: list[tuple[int, int]] = []
    overlap: list[tuple[int, int]] = []
    for i, j in _near_pairs(circles):
        p = circles[i].inversive_product(circles[j])
        if abs(p + 2.0) <= tol:
            tangent.append((i, j))
        elif p > -2.0:
            overlap.append((i, j))
    return tangent, overlap


def detect_tangencies(packing: CirclePacking, tol: float = 1e-6) -> TangencyGraph:
    """Tangency graph of a packing, with the tangency point on each edge.

    Tolerance applies to the inversive product (deviation from -2).  Raises
    OverlappingCirclesError if any pair of disks overlaps deeper than tol;
    duplicated circles count as overlapping.
    """
    circles = packing.circles
    tangent, overlap = _scan_products(circles, tol)
    if overlap:
        raise OverlappingCirclesError(overlap)
    edges = [
        TangencyEdge(i, j, tangency_point(circles[i], circles[j])) for i, j in tangent
    ]
    return TangencyGraph(len(circles), edges)


# -- reference configurations ------------------------------------------------

def standard_base_triple() -> list[OrientedCircle]:
    """The standard gasket's anchor triple: the lower half-plane below
    Im z = 0, the upper half-plane above Im z = 1, and the circle of radius
    1/2 at i/2.  Pairwise tangency points: infinity, 0, and i."""
    return [
        OrientedCircle.from_line(1j, 0.0),
        OrientedCircle.from_line(-1j, -1.0),
        OrientedCircle.from_center_radius(0.5j, 0.5),
    ]


STANDARD_TANGENCY_POINTS: tuple[SpherePoint, SpherePoint, SpherePoint] = (
    INFINITY,
    0j,
    1j,
)


def standard_base_quadruple() -> list[OrientedCircle]:
    return standard_base_triple() + [OrientedCircle.from_center_radius(1.0 + 0.5j, 0.5)]


class _CircleSet:
    """Dedup accumulator keyed on the rounded normalized triple."""

    def __init__(self, grid: float = 1e-8):
        self.grid = grid
        self.circles: list[OrientedCircle] = []
        self._seen: set[tuple[int, int, int, int]] = set()

    def add(self, c: OrientedCircle) -> bool:
        g = self.grid
        comps = (c.A / g, c.B.real / g, c.B.imag / g, c.C / g)
        key = tuple(round(q) for q in comps)
        # Probe neighbor keys so equal circles straddling a rounding
        # boundary still collide.
        options = []
        for q, k in zip(comps, key):
            opts = [k]
            if q - k > 0.49:
                opts.append(k + 1)
            elif q - k < -0.49:
                opts.append(k - 1)
            options.append(opts)
        for k0 in options[0]:
            for k1 in options[1]:
                for k2 in options[2]:
                    for k3 in options[3]:
                        if (k0, k1, k2, k3) in self._seen:
                            return False
        self._seen.add(key)
        self.circles.append(c)
        return True


def _expand_quadruples(seed_quadruples, generations: int) -> list[OrientedCircle]:
    acc = _CircleSet()
    for quad in seed_quadruples:
        for c in quad:
            acc.add(c)

    def grow(quad, skip: int, depth: int) -> None:
        if depth == 0:
            return
        for i in range(4):
            if i == skip:
                continue
            new = tangent_quadruple_flip(*(quad[j] for j in range(4) if j != i), quad[i])
            acc.add(new)
            child = list(quad)
            child[i] = new
            grow(tuple(child), i, depth - 1)

    for quad in seed_quadruples:
        grow(tuple(quad), -1, generations)
    return acc.circles


def standard_gasket(generations: int, span: int = 1) -> CirclePacking:
    """Finite truncation of the standard gasket between the lines Im z = 0
    and Im z = 1, covering the columns -span..span+1 of unit circles and
    inscribing `generations` rounds of tangent circles."""
    low = OrientedCircle.from_line(1j, 0.0)
    high = OrientedCircle.from_line(-1j, -1.0)
    quadruples = []
    # Center column first, so the packing's first three circles are the
    # anchor triple with tangency points (infinity, 0, i).
    for k in sorted(range(-span, span + 1), key=lambda k: (abs(k), k)):
        quadruples.append(
            (
                low,
                high,
                OrientedCircle.from_center_radius(k + 0.5j, 0.5),
                OrientedCircle.from_center_radius(k + 1.0 + 0.5j, 0.5),
            )
        )
    return CirclePacking(_expand_quadruples(quadruples, generations))


def bounded_gasket(generations: int) -> CirclePacking:
    """Finite truncation of the curvature (-1, 2, 2, 3) gasket inside the
    unit circle."""
    quad = (
        OrientedCircle.from_center_radius(0j, 1.0).reversed(),
        OrientedCircle.from_center_radius(0.5 + 0j, 0.5),
        OrientedCircle.from_center_radius(-0.5 + 0j, 0.5),
        OrientedCircle.from_center_radius(2j / 3, 1.0 / 3.0),
    )
    return CirclePacking(_expand_quadruples([quad], generations))


def apply_to_packing(m: MoebiusMap, packing: CirclePacking) -> CirclePacking:
    return CirclePacking([c.transform(m) for c in packing.circles], packing.words)


def normalize_to_standard_gasket(
    packing: CirclePacking,
    tangency_tol: float = 1e-6,
) -> MoebiusMap:
    """The Moebius map taking one mutually tangent triple of the packing to
    the standard gasket's base triple.

    The triple's three pairwise tangency points are matched to the standard
    triple's points (infinity, 0, i): tangency points are Moebius-equivariant,
    so for gasket-equivalent packings this maps the whole packing onto the
    standard gasket.  The triple is the index-lexicographically first
    triangle of the tangency graph.  Indices survive transport by a map, so
    distorting a packing and normalizing it recovers the distortion's
    inverse; a size-based choice would not.  Shipped packings list their
    largest circles first, which keeps the three anchor points well spread.
    """
    graph = detect_tangencies(packing, tangency_tol)
    adj = graph.adjacency
    n = len(packing.circles)
    for i in range(n):
        for j in sorted(x for x in adj[i] if x > i):
            for k in sorted(x for x in adj[i] & adj[j] if x > j):
                src = (
                    graph.edge_point(i, j),
                    graph.edge_point(i, k),
                    graph.edge_point(j, k),
                )
                return moebius_mapping(src, STANDARD_TANGENCY_POINTS)
    raise NoTangentTripleError("packing has no mutually tangent triple")


@dataclass(frozen=True)
class GasketVerdict:
    passed: bool
    connected: bool
    overlap_pairs: tuple[tuple[int, int], ...]
    worst_residual: float
    worst_quadruple: tuple[int, int, int, int] | None
    triangles_checked: int
    quadruples_checked: int
    failures: tuple[str, ...]


def is_apollonian_like(
    packing: CirclePacking,
    residual_tol: float = 1e-5,
    tangency_tol: float = 1e-6,
) -> GasketVerdict:
    """Desk-scale gasket check on a finite packing.

    Verifies that the tangency graph is connected, that no two disks cross,
    and that every quadruple formed by a mutually tangent triangle plus a
    circle tangent to all three has Descartes residual below residual_tol.
    """
    circles = packing.circles
    if len(circles) < 4:
        raise ValueError(f"need at least 4 circles, got {len(circles)}")
    tangent, overlap = _scan_products(circles, tangency_tol)
    edges = [TangencyEdge(i, j, None) for i, j in tangent]
    graph = TangencyGraph(len(circles), edges)
    connected = graph.is_connected()
    adj = graph.adjacency
    curv = [c.A for c in circles]

    worst = 0.0
    worst_quad = None
    triangles = 0
    quadruples = 0
    for i in range(len(circles)):
        ai = adj[i]
        for j in sorted(ai):
            if j <= i:
                continue
            common = ai & adj[j]
            for k in sorted(common):
                if k <= j:
                    continue
                triangles += 1
                for l in sorted(common & adj[k]):
                    if l <= k:
                        continue
                    quadruples += 1
                    r = descartes_residual(curv[i], curv[j], curv[k], curv[l])
                    if abs(r) > worst:
                        worst = abs(r)
                        worst_quad = (i, j, k, l)

    failures = []
    if not connected:
        failures.append("tangency graph disconnected")
    if overlap:
        failures.append(f"{len(overlap)} crossing pair(s)")
    if quadruples == 0:
        failures.append("no tangent quadruples found")
    if worst >= residual_tol:
        failures.append(
            f"worst Descartes residual {worst:.3g} at {worst_quad} exceeds {residual_tol:.3g}"
        )
    return GasketVerdict(
        passed=not failures,
        connected=connected,
        overlap_pairs=tuple(overlap),
        worst_residual=worst,
        worst_quadruple=worst_quad,
        triangles_checked=triangles,
        quadruples_checked=quadruples,
        failures=tuple(failures),
    )


# -- packing text format -------------------------------------------------------
#
#   C re im radius     circle (center, radius); negative radius = enclosing
#   L re im offset     line (unit normal re,im and offset); disk on the <= side
#
# '#' comments and blank lines allowed.

def load_packing(text: str) -> CirclePacking:
    circles: list[OrientedCircle] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] not in ("C", "L"):
            raise ValueError(f"line {line_no}: expected 'C re im radius' or 'L re im offset'")
        x, y, v = (float(p) for p in parts[1:])
        if parts[0] == "C":
            if v == 0.0:
                raise ValueError(f"line {line_no}: zero radius")
            c = OrientedCircle.from_center_radius(complex(x, y), abs(v))
            circles.append(c.reversed() if v < 0 else c)
        else:
            circles.append(OrientedCircle.from_line(complex(x, y), v))
    if not circles:
        raise ValueError("packing file defines no circles")
    return CirclePacking(circles)


def dump_packing(packing: CirclePacking) -> str:
    lines = []
    for c in packing.circles:
        if c.is_line:
            n, d = c.line_geometry()
            lines.append(f"L {n.real:.17g} {n.imag:.17g} {d:.17g}")
        else:
            m = c.center
            lines.append(f"C {m.real:.17g} {m.imag:.17g} {1.0 / c.A:.17g}")
    return "\n".join(lines) + "\n"
