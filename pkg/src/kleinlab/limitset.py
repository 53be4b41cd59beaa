"""Limit sets of marked Moebius groups: fixed-point clouds, depth-first
circle enumeration with diameter pruning, convergence diagnostics, and
rasterization.

All dedup and pruning distances are chordal (measured through the unit
sphere), since the limit sets of interest contain the point at infinity.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .gasket import OrientedCircle
from .groups import MarkedGroup
from .mobius import (
    INFINITY,
    MapClass,
    MoebiusMap,
    SpherePoint,
    chordal_distance,
    sphere_coords,
)

__all__ = [
    "EllipticOnlyError",
    "EmptyWindowError",
    "Rectangle",
    "CloudPoint",
    "LimitSetCloud",
    "DfsConfig",
    "DfsStats",
    "EmittedCircle",
    "DfsResult",
    "limit_points_by_fixed_points",
    "limit_set_dfs",
    "hausdorff_distance",
    "RenderResult",
    "render",
    "BenchResult",
    "benchmark_word_traversal",
]


class EllipticOnlyError(ValueError):
    """No word up to the bound was parabolic or loxodromic."""


class EmptyWindowError(ValueError):
    """A cloud has no finite points inside the requested window."""


@dataclass(frozen=True)
class Rectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate window {self}")

    @classmethod
    def parse(cls, text: str) -> "Rectangle":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"window must be 'x0,y0,x1,y1', got {text!r}")
        return cls(*(float(p) for p in parts))

    def contains(self, z: complex) -> bool:
        return self.x0 <= z.real <= self.x1 and self.y0 <= z.imag <= self.y1

    def corners(self) -> tuple[complex, complex, complex, complex]:
        return (
            complex(self.x0, self.y0),
            complex(self.x1, self.y0),
            complex(self.x1, self.y1),
            complex(self.x0, self.y1),
        )


@dataclass(frozen=True)
class CloudPoint:
    point: SpherePoint
    word_length: int
    word: str


class _SphereGrid:
    """Chordal-metric dedup via the stereographic lift: chordal distance is
    Euclidean distance between lifts, so a cell size equal to the tolerance
    with 27-cell probing is exact."""

    def __init__(self, tol: float):
        if not tol > 0.0:
            raise ValueError("dedup tolerance must be positive")
        self.tol = tol
        self._cells: dict[tuple[int, int, int], list[tuple[float, float, float]]] = {}

    def try_add(self, p: SpherePoint) -> bool:
        x, y, z = sphere_coords(p)
        t = self.tol
        kx, ky, kz = math.floor(x / t), math.floor(y / t), math.floor(z / t)
        t2 = t * t
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for (px, py, pz) in self._cells.get((kx + dx, ky + dy, kz + dz), ()):
                        if (px - x) ** 2 + (py - y) ** 2 + (pz - z) ** 2 < t2:
                            return False
        self._cells.setdefault((kx, ky, kz), []).append((x, y, z))
        return True


class LimitSetCloud:
    """Deduplicated limit-set sample points in deterministic discovery order."""

    def __init__(self, dedup_tolerance: float):
        self.dedup_tolerance = dedup_tolerance
        self.points: list[CloudPoint] = []
        self._grid = _SphereGrid(dedup_tolerance)

    def try_add(self, point: SpherePoint, word: str) -> bool:
        if self._grid.try_add(point):
            self.points.append(CloudPoint(point, len(word), word))
            return True
        return False

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[CloudPoint]:
        return iter(self.points)

    def finite_points(self) -> list[complex]:
        return [complex(p.point) for p in self.points if p.point is not INFINITY]


def limit_points_by_fixed_points(
    group: MarkedGroup, max_word_len: int, dedup: float = 1e-9
) -> LimitSetCloud:
    """Attracting (or parabolic) fixed points of every nontrivial reduced
    word up to max_word_len, visited in length-lexicographic order.

    The per-length pass makes the depth-d cloud an exact prefix of the
    depth-(d+1) cloud.  Raises EllipticOnlyError when no word contributes.
    """
    if max_word_len < 1:
        raise ValueError("max_word_len must be >= 1")
    cloud = LimitSetCloud(dedup)
    letters = group.alphabet.letters
    maps = [group.letter_map(x) for x in letters]
    banned = {x: x.swapcase() for x in letters}

    def visit(word: str, m: MoebiusMap, remaining: int) -> None:
        if remaining == 0:
            kind = m.classify()
            if kind is MapClass.IDENTITY or kind is MapClass.ELLIPTIC:
                return
            cloud.try_add(m.attracting_fixed_point(), word)
            return
        last = word[-1] if word else None
        for x, mx in zip(letters, maps):
            if last is not None and banned[last] == x:
                continue
            visit(word + x, m.compose(mx), remaining - 1)

    for n in range(1, max_word_len + 1):
        visit("", MoebiusMap.identity(), n)
    if not cloud.points:
        raise EllipticOnlyError(
            f"no parabolic or loxodromic word up to length {max_word_len}"
        )
    return cloud


@dataclass(frozen=True)
class DfsConfig:
    epsilon: float
    max_depth: int
    seeds: tuple[OrientedCircle, ...]
    window: Rectangle | None = None
    dedup: float = 1e-9

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed circline is required")


@dataclass
class DfsStats:
    words_visited: int = 0
    branches_pruned: int = 0
    circles_emitted: int = 0
    depth_exhausted_branches: int = 0
    max_depth_reached: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class EmittedCircle:
    circle: OrientedCircle
    word: str
    depth_exhausted: bool


class DfsResult(NamedTuple):
    cloud: LimitSetCloud
    circles: list[EmittedCircle]
    stats: DfsStats


def _circle_meets_window(c: OrientedCircle, w: Rectangle) -> bool:
    """Whether the circle's locus (the curve, not the disk) meets the
    closed rectangle."""
    if c.is_line:
        n, d = c.line_geometry()
        vals = [(n.conjugate() * corner).real for corner in w.corners()]
        return min(vals) <= d <= max(vals)
    m = -c.B / c.A
    r = 1.0 / abs(c.A)
    # Distance from center to the rectangle ranges over [dmin, dmax]; the
    # curve meets the rectangle iff r lies in that interval.
    cx = min(max(m.real, w.x0), w.x1)
    cy = min(max(m.imag, w.y0), w.y1)
    dmin = math.hypot(m.real - cx, m.imag - cy)
    dmax = max(abs(corner - m) for corner in w.corners())
    return dmin <= r <= dmax


class _TripleGrid:
    """Dedup grid for emitted circles keyed on the rounded normalized triple,
    probing neighbor keys near rounding boundaries."""

    __slots__ = ("grid", "_seen")

    def __init__(self, grid: float = 1e-8):
        self.grid = grid
        self._seen: set[tuple[int, int, int, int]] = set()

    def try_add(self, A: float, Bre: float, Bim: float, C: float) -> bool:
        g = self.grid
        comps = (A / g, Bre / g, Bim / g, C / g)
        key = tuple(round(q) for q in comps)
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
        return True


def limit_set_dfs(group: MarkedGroup, config: DfsConfig) -> DfsResult:
    """Depth-first enumeration of the seed-circline orbit over reduced words.

    Each branch carries one circline image w(S) of a seed S; its children
    prepend a letter, so the recorded word re-applied to the seed reproduces
    the circline.  A branch prunes when its circline has chordal diameter
    below epsilon (emitted), when it reproduces a circline already visited
    (a seed stabilizer is a whole free subgroup, so without this the
    traversal revisits the invariant circline exponentially often), or at
    max_depth (emitted with the depth_exhausted flag).  Every distinct
    circline encountered is emitted once, so oversized members of the orbit
    appear in the output alongside the sub-epsilon horizon.  Emitted circle
    centers form the returned cloud.
    """
    t0 = time.perf_counter()
    stats = DfsStats()
    cloud = LimitSetCloud(config.dedup)
    emitted: list[EmittedCircle] = []
    grid = _TripleGrid()
    window = config.window
    eps2 = config.epsilon * config.epsilon
    max_depth = config.max_depth

    letters = group.alphabet.letters
    nletters = len(letters)
    inverse_rank = [group.alphabet.letter_rank(x.swapcase()) for x in letters]

    # Per-letter transport coefficients; constant for the whole run, so a
    # child costs about a dozen real multiplications.
    gen_coeffs = []
    for x in letters:
        m = group.letter_map(x)
        a, b, c, d = m.a, m.b, m.c, m.d
        gen_coeffs.append(
            (
                (d * d.conjugate()).real,
                (c * c.conjugate()).real,
                (b * b.conjugate()).real,
                (a * a.conjugate()).real,
                c * d.conjugate(),
                a * d.conjugate(),
                b * c.conjugate(),
                a * c.conjugate(),
                a * b.conjugate(),
                b * d.conjugate(),
            )
        )

    def emit(A: float, Bre: float, Bim: float, C: float, word: str, flagged: bool) -> bool:
        """Record the circline; returns False when it was already visited."""
        disc = (Bre * Bre + Bim * Bim) - A * C
        if not disc > 0.0:
            return False
        t = 1.0 / math.sqrt(disc)
        A, Bre, Bim, C = A * t, Bre * t, Bim * t, C * t
        # Dedup on the sign-canonical triple: a triple and its negation are
        # the same locus, and mixed-sign seeds would otherwise shadow each
        # other's orbits.  The emitted circle keeps the sign it arrived with,
        # preserving the seeds' disk orientations in the output.
        s = 1.0
        for q in (A, Bre, Bim, C):
            if q > 0.0:
                break
            if q < 0.0:
                s = -1.0
                break
        if not grid.try_add(s * A, s * Bre, s * Bim, s * C):
            return False
        circle = object.__new__(OrientedCircle)
        circle.A = A
        circle.B = complex(Bre, Bim)
        circle.C = C
        if window is None or _circle_meets_window(circle, window):
            emitted.append(EmittedCircle(circle, word, flagged))
            stats.circles_emitted += 1
            cloud.try_add(circle.center, word)
        return True

    # Explicit stack, preorder; children pushed in reverse rank order so the
    # traversal matches the natural recursive order letter by letter.
    stack: list[tuple[float, float, float, float, str, int, int]] = []
    for seed in reversed(config.seeds):
        stack.append((seed.A, seed.B.real, seed.B.imag, seed.C, "", -1, 0))
    while stack:
        A, Bre, Bim, C, word, last_rank, depth = stack.pop()
        stats.words_visited += 1
        if depth > stats.max_depth_reached:
            stats.max_depth_reached = depth
        bb = Bre * Bre + Bim * Bim
        disc = bb - A * C
        ac = A - C
        small = 16.0 * disc < eps2 * (4.0 * bb + ac * ac)
        flagged = not small and depth >= max_depth
        if not emit(A, Bre, Bim, C, word, flagged):
            stats.branches_pruned += 1
            continue
        if small:
            stats.branches_pruned += 1
            continue
        if depth >= max_depth:
            stats.depth_exhausted_branches += 1
            continue
        skip = inverse_rank[last_rank] if last_rank >= 0 else -1
        Br = complex(Bre, Bim)
        Brc = Br.conjugate()
        for rank in range(nletters - 1, -1, -1):
            if rank == skip:
                continue
            dd, cc, bbc, aa, cd, ad, bcc, acc, ab, bd = gen_coeffs[rank]
            A2 = A * dd + C * cc - 2.0 * (Br * cd).real
            B2 = -A * bd + Br * ad + Brc * bcc - C * acc
            C2 = A * bbc + C * aa - 2.0 * (Br * ab).real
            stack.append((A2, B2.real, B2.imag, C2, letters[rank] + word, rank, depth + 1))

    stats.wall_time = time.perf_counter() - t0
    return DfsResult(cloud, emitted, stats)


def _windowed_finite(points, window: Rectangle) -> np.ndarray:
    if isinstance(points, LimitSetCloud):
        pts = points.finite_points()
    else:
        pts = [complex(p) for p in points if p is not INFINITY]
    arr = [(z.real, z.imag) for z in pts if window.contains(z)]
    return np.asarray(arr, dtype=float).reshape(-1, 2)


def hausdorff_distance(a, b, window: Rectangle) -> float:
    """Symmetric Hausdorff distance between the finite points of two clouds
    restricted to a window, in the plane metric of the window."""
    pa = _windowed_finite(a, window)
    pb = _windowed_finite(b, window)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptyWindowError("a cloud has no finite points in the window")
    da = cKDTree(pb).query(pa)[0].max()
    db = cKDTree(pa).query(pb)[0].max()
    return float(max(da, db))


class RenderResult(NamedTuple):
    ppm: bytes
    svg: str


def render(
    cloud: LimitSetCloud | Iterable[SpherePoint] | None,
    circles: Iterable[OrientedCircle],
    window: Rectangle,
    resolution: int,
    comment: str | None = None,
) -> RenderResult:
    """Rasterize circle outlines and cloud points into a P6 pixmap and an
    SVG with one element per circle.  Byte-deterministic for fixed inputs."""
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    width = int(resolution)
    xspan = window.x1 - window.x0
    yspan = window.y1 - window.y0
    height = max(1, round(width * yspan / xspan))
    scale = width / xspan

    def to_px(z: complex) -> tuple[float, float]:
        return ((z.real - window.x0) * scale, (window.y1 - z.imag) * scale)

    raster = bytearray(b"\xff" * (width * height * 3))

    def plot(xf: float, yf: float, rgb: tuple[int, int, int]) -> None:
        x = int(xf)
        y = int(yf)
        if 0 <= x < width and 0 <= y < height:
            i = (y * width + x) * 3
            raster[i] = rgb[0]
            raster[i + 1] = rgb[1]
            raster[i + 2] = rgb[2]

    circles = list(circles)
    svg_parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    if comment is not None:
        # "--" is not allowed inside an XML comment.
        svg_parts.insert(0, "<!-- " + comment.replace("--", "- -") + " -->")
    svg_parts.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')

    black = (0, 0, 0)
    for c in circles:
        if c.is_line:
            n, d = c.line_geometry()
            p0 = n * d
            direction = n * 1j
            # Clip the line to the window by intersecting with each edge.
            ts: list[float] = []
            for t_axis, lo, hi, other_lo, other_hi, real_axis in (
                ("x", window.x0, window.x1, window.y0, window.y1, True),
                ("y", window.y0, window.y1, window.x0, window.x1, False),
            ):
                comp = direction.real if real_axis else direction.imag
                base = p0.real if real_axis else p0.imag
                if abs(comp) > 1e-15:
                    for edge in (lo, hi):
                        t = (edge - base) / comp
                        q = p0 + t * direction
                        o = q.imag if real_axis else q.real
                        if other_lo - 1e-9 <= o <= other_hi + 1e-9:
                            ts.append(t)
            if len(ts) < 2:
                continue
            t_lo, t_hi = min(ts), max(ts)
            q0, q1 = p0 + t_lo * direction, p0 + t_hi * direction
            x0, y0 = to_px(q0)
            x1, y1 = to_px(q1)
            steps = 2 * max(width, height)
            for s in range(steps + 1):
                f = s / steps
                plot(x0 + f * (x1 - x0), y0 + f * (y1 - y0), black)
            svg_parts.append(
                f'<line x1="{x0:.4f}" y1="{y0:.4f}" x2="{x1:.4f}" y2="{y1:.4f}" '
                f'stroke="#000000" stroke-width="1"/>'
            )
        else:
            m = c.center
            r = c.radius
            cx, cy = to_px(m)
            rpx = r * scale
            if rpx < 0.4:
                plot(cx, cy, black)
            else:
                npts = min(4096, max(16, int(rpx * 8)))
                for sidx in range(npts):
                    t = 2.0 * math.pi * sidx / npts
                    plot(cx + rpx * math.cos(t), cy + rpx * math.sin(t), black)
            svg_parts.append(
                f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="{rpx:.4f}" '
                f'fill="none" stroke="#000000" stroke-width="1"/>'
            )

    red = (200, 0, 0)
    if cloud is not None:
        pts = cloud.finite_points() if isinstance(cloud, LimitSetCloud) else [
            complex(p) for p in cloud if p is not INFINITY
        ]
        for z in pts:
            if window.contains(z):
                x, y = to_px(z)
                plot(x, y, red)
                svg_parts.append(
                    f'<rect x="{x:.4f}" y="{y:.4f}" width="1" height="1" fill="#c80000"/>'
                )

    svg_parts.append("</svg>")
    header = b"P6\n"
    if comment is not None:
        for line in comment.splitlines():
            header += b"# " + line.encode("ascii", "replace") + b"\n"
    header += f"{width} {height}\n255\n".encode("ascii")
    return RenderResult(header + bytes(raster), "\n".join(svg_parts) + "\n")


class BenchResult(NamedTuple):
    words_visited: int
    seconds: float

    @property
    def words_per_second(self) -> float:
        return self.words_visited / self.seconds if self.seconds > 0 else math.inf


def benchmark_word_traversal(group: MarkedGroup, max_depth: int) -> BenchResult:
    """Visit every nonempty reduced word up to max_depth with incremental
    matrix products, mimicking the DFS inner loop without geometry."""
    letters = group.alphabet.letters
    nletters = len(letters)
    gen_mats = [group.letter_map(x).matrix for x in letters]
    inverse_rank = [group.alphabet.letter_rank(x.swapcase()) for x in letters]
    count = 0

    def visit(a, b, c, d, last_rank: int, depth: int) -> None:
        nonlocal count
        count += 1
        if depth >= max_depth:
            return
        skip = inverse_rank[last_rank]
        for rank in range(nletters):
            if rank == skip:
                continue
            ga, gb, gc, gd = gen_mats[rank]
            visit(
                a * ga + b * gc,
                a * gb + b * gd,
                c * ga + d * gc,
                c * gb + d * gd,
                rank,
                depth + 1,
            )

    t0 = time.perf_counter()
    for rank in range(nletters):
        a, b, c, d = gen_mats[rank]
        visit(a, b, c, d, rank, 1)
    return BenchResult(count, time.perf_counter() - t0)
