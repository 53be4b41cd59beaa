"""Moebius transformations on the Riemann sphere, and the circles and lines
they permute.

Matrices are determinant-normalized at construction, so traces are defined up
to a global sign and classification reads off the squared trace.  Circles and
lines share one representation, a Hermitian coefficient triple, which keeps
every geometric predicate to a single code path and makes the image of a
circline under a map an exact linear operation on coefficients.
"""

from __future__ import annotations

import cmath
import math
from enum import Enum

__all__ = [
    "INFINITY",
    "SpherePoint",
    "DegenerateMatrixError",
    "IdentityMapError",
    "MapClass",
    "MoebiusMap",
    "Circline",
    "chordal_distance",
    "sphere_coords",
    "transform_hermitian",
    "moebius_to_zero_one_inf",
    "moebius_mapping",
]

# Relative threshold below which a denominator counts as a pole hit.
_POLE_EPS = 1e-14
# Tolerance for trace-based classification.
_CLASS_EPS = 1e-9


class DegenerateMatrixError(ValueError):
    """Raised when a matrix with (numerically) zero determinant is used."""


class IdentityMapError(ValueError):
    """Raised when fixed-point extraction is asked of the identity."""


class _Infinity:
    """The point at infinity.

    A dedicated sentinel rather than ``complex(math.inf, 0)`` so that no
    arithmetic on sphere points can silently produce NaNs.
    """

    __slots__ = ()
    _instance = None

    def __new__(cls) -> "_Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()

SpherePoint = complex | _Infinity


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Distance between two sphere points measured through the unit sphere.

    Ranges over [0, 2]; antipodal points realize 2.  Finite inputs may be
    given as anything ``complex()`` accepts.
    """
    if isinstance(p, _Infinity):
        if isinstance(q, _Infinity):
            return 0.0
        q = complex(q)
        return 2.0 / math.hypot(1.0, abs(q))
    if isinstance(q, _Infinity):
        p = complex(p)
        return 2.0 / math.hypot(1.0, abs(p))
    p = complex(p)
    q = complex(q)
    # hypot keeps 1 + |z|^2 from overflowing for |z| near 1e154.
    return 2.0 * abs(p - q) / (math.hypot(1.0, abs(p)) * math.hypot(1.0, abs(q)))


def sphere_coords(p: SpherePoint) -> tuple[float, float, float]:
    """Stereographic lift of a sphere point to unit-sphere coordinates,
    with infinity at the north pole (0, 0, 1)."""
    if isinstance(p, _Infinity):
        return (0.0, 0.0, 1.0)
    p = complex(p)
    n = math.hypot(1.0, abs(p)) ** 2
    return (2.0 * p.real / n, 2.0 * p.imag / n, (abs(p) ** 2 - 1.0) / n)


class MapClass(Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"


class MoebiusMap:
    """A fractional linear map z -> (a z + b) / (c z + d), det-normalized.

    The stored matrix has determinant 1; the matrix is only defined up to a
    global sign, and ``almost_equal`` compares projectively.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: complex, b: complex, c: complex, d: complex):
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0.0 or abs(det) < 1e-12 * scale * scale:
            raise DegenerateMatrixError(f"determinant {det} too small for scale {scale}")
        s = cmath.sqrt(det)
        self.a = a / s
        self.b = b / s
        self.c = c / s
        self.d = d / s

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @property
    def matrix(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def __repr__(self) -> str:
        return f"MoebiusMap({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self after other: (self.compose(other))(z) == self(other(z))."""
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        out = object.__new__(MoebiusMap)
        out.a = a1 * a2 + b1 * c2
        out.b = a1 * b2 + b1 * d2
        out.c = c1 * a2 + d1 * c2
        out.d = c1 * b2 + d1 * d2
        return out

    __mul__ = compose

    def inverse(self) -> "MoebiusMap":
        out = object.__new__(MoebiusMap)
        out.a = self.d
        out.b = -self.b
        out.c = -self.c
        out.d = self.a
        return out

    def apply(self, p: SpherePoint) -> SpherePoint:
        if isinstance(p, _Infinity):
            scale = abs(self.a) + abs(self.b) + abs(self.c) + abs(self.d)
            if abs(self.c) < _POLE_EPS * scale:
                return INFINITY
            return self.a / self.c
        z = complex(p)
        num = self.a * z + self.b
        den = self.c * z + self.d
        scale = abs(self.a) + abs(self.b) + abs(self.c) + abs(self.d)
        if abs(den) < _POLE_EPS * scale * max(1.0, abs(z)):
            return INFINITY
        return num / den

    __call__ = apply

    def almost_equal(self, other: "MoebiusMap", tol: float = 1e-9) -> bool:
        """Projective comparison: equal as maps, i.e. matrices agree up to sign."""
        plus = max(
            abs(self.a - other.a), abs(self.b - other.b),
            abs(self.c - other.c), abs(self.d - other.d),
        )
        minus = max(
            abs(self.a + other.a), abs(self.b + other.b),
            abs(self.c + other.c), abs(self.d + other.d),
        )
        return min(plus, minus) <= tol

    def classify(self, tol: float = _CLASS_EPS) -> MapClass:
        """Classify by squared trace.

        The parabolic band |tr^2 - 4| < tol is tested first, so maps within
        tol of parabolic are reported parabolic even if the trace is not
        exactly real.  Inside the band, vanishing off-diagonal terms mean
        the identity.
        """
        t2 = self.trace * self.trace
        if abs(t2 - 4.0) < tol:
            if abs(self.b) < tol and abs(self.c) < tol and abs(self.a - self.d) < tol:
                return MapClass.IDENTITY
            return MapClass.PARABOLIC
        if abs(t2.imag) < tol and -tol < t2.real < 4.0:
            return MapClass.ELLIPTIC
        return MapClass.LOXODROMIC

    def fixed_points(self) -> list[tuple[SpherePoint, str]]:
        """Fixed points with stability tags.

        Returns one or two (point, tag) pairs, tag in {"attracting",
        "repelling", "indifferent"}.  Raises IdentityMapError for the
        identity, which fixes everything.
        """
        kind = self.classify()
        if kind is MapClass.IDENTITY:
            raise IdentityMapError("the identity fixes every point")
        a, b, c, d = self.a, self.b, self.c, self.d
        scale = abs(a) + abs(b) + abs(c) + abs(d)

        def tag_from_multiplier(m: float) -> str:
            if m < 1.0 - _CLASS_EPS:
                return "attracting"
            if m > 1.0 + _CLASS_EPS:
                return "repelling"
            return "indifferent"

        if abs(c) < _POLE_EPS * scale:
            # z -> (a/d) z + b/d.  Infinity is always fixed; its local
            # multiplier in the chart w = 1/z is d/a.
            out: list[tuple[SpherePoint, str]] = [
                (INFINITY, tag_from_multiplier(abs(d / a)))
            ]
            if abs(a - d) > _POLE_EPS * scale:
                out.append((b / (d - a), tag_from_multiplier(abs(a / d))))
            return out

        if kind is MapClass.PARABOLIC:
            return [((a - d) / (2.0 * c), "indifferent")]

        # Roots of c z^2 + (d - a) z - b = 0; with det 1 the discriminant
        # collapses to tr^2 - 4 and the multiplier at each root is the
        # matching eigenvalue squared.
        tr = a + d
        sq = cmath.sqrt(tr * tr - 4.0)
        if abs(tr + sq) < abs(tr - sq):
            sq = -sq
        lam = (tr + sq) / 2.0  # |lam| >= 1
        z_plus = (a - d + sq) / (2.0 * c)
        z_minus = (a - d - sq) / (2.0 * c)
        # Multiplier at z_plus is 1/lam^2.
        m = abs(lam) ** 2
        return [
            (z_plus, tag_from_multiplier(1.0 / m)),
            (z_minus, tag_from_multiplier(m)),
        ]

    def attracting_fixed_point(self) -> SpherePoint:
        """The point every generic orbit converges to.

        For a loxodromic map this is the attracting fixed point, for a
        parabolic map its unique fixed point.  Elliptic maps and the
        identity have no such point and raise.
        """
        kind = self.classify()
        if kind is MapClass.IDENTITY:
            raise IdentityMapError("the identity has no distinguished fixed point")
        if kind is MapClass.ELLIPTIC:
            raise ValueError("elliptic maps have no attracting fixed point")
        for point, tag in self.fixed_points():
            if tag != "repelling":
                return point
        raise AssertionError("unreachable: non-elliptic map with only repelling fixed points")


def transform_hermitian(
    m: MoebiusMap, A: float, B: complex, C: float
) -> tuple[float, complex, float]:
    """Push the Hermitian form A|z|^2 + 2 Re(conj(B) z) + C forward by m.

    The output triple vanishes exactly on the image of the input locus, and
    the side of the sphere where the form is negative maps to the side where
    the output is negative, so orientation is preserved.  Determinant-1
    matrices preserve the discriminant |B|^2 - A C exactly.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    A2 = (
        A * (d * d.conjugate()).real
        + C * (c * c.conjugate()).real
        - 2.0 * (B * c * d.conjugate()).real
    )
    B2 = (
        -A * b * d.conjugate()
        + B * a * d.conjugate()
        + B.conjugate() * b * c.conjugate()
        - C * a * c.conjugate()
    )
    C2 = (
        A * (b * b.conjugate()).real
        + C * (a * a.conjugate()).real
        - 2.0 * (B * a * b.conjugate()).real
    )
    return (A2, B2, C2)


class Circline:
    """A circle or line as the zero set of A|z|^2 + 2 Re(conj(B) z) + C.

    A and C are real, B complex, and the locus is a genuine circle or line
    exactly when |B|^2 - A C > 0; A = 0 gives a line.  Instances are stored
    in a canonical scaling (largest coefficient magnitude 1, leading sign
    positive), so equal loci produce identical coefficient triples and the
    triples can be used directly as dedup keys.
    """

    __slots__ = ("A", "B", "C")

    def __init__(self, A: float, B: complex, C: float):
        A = float(A)
        B = complex(B)
        C = float(C)
        scale = max(abs(A), abs(B), abs(C))
        if scale == 0.0:
            raise ValueError("zero Hermitian form does not define a circline")
        A, B, C = A / scale, B / scale, C / scale
        # Sign convention: first sufficiently large entry of
        # (A, Re B, Im B, C) is made positive.
        for lead in (A, B.real, B.imag, C):
            if abs(lead) > 1e-9:
                if lead < 0.0:
                    A, B, C = -A, -B, -C
                break
        self.A = A
        self.B = B
        self.C = C

    # -- factories ---------------------------------------------------------

    @classmethod
    def from_center_radius(cls, center: complex, radius: float) -> "Circline":
        if not radius > 0.0:
            raise ValueError(f"radius must be positive, got {radius}")
        center = complex(center)
        return cls(1.0, -center, abs(center) ** 2 - radius * radius)

    @classmethod
    def from_line(cls, normal: complex, offset: float) -> "Circline":
        """The line Re(conj(normal) z) = offset."""
        normal = complex(normal)
        n = abs(normal)
        if n == 0.0:
            raise ValueError("line normal must be nonzero")
        return cls(0.0, normal / n, -2.0 * offset / n)

    @classmethod
    def from_three_points(cls, p: SpherePoint, q: SpherePoint, r: SpherePoint) -> "Circline":
        pts = [p, q, r]
        for i in range(3):
            for j in range(i + 1, 3):
                if chordal_distance(pts[i], pts[j]) < 1e-12:
                    raise ValueError("three distinct points are required")
        at_inf = [isinstance(x, _Infinity) for x in pts]
        if any(at_inf):
            u, v = (complex(x) for x in pts if not isinstance(x, _Infinity))
            direction = (v - u) / abs(v - u)
            normal = direction * 1j
            return cls.from_line(normal, (normal.conjugate() * u).real)
        z1, z2, z3 = (complex(x) for x in pts)
        rows = [
            (abs(z1) ** 2, z1.real, z1.imag),
            (abs(z2) ** 2, z2.real, z2.imag),
            (abs(z3) ** 2, z3.real, z3.imag),
        ]

        def minor(col: int) -> float:
            # 3x3 determinant of rows with the given column of
            # (w, x, y, 1) removed; column 3 is the constant 1.
            cols = [k for k in range(4) if k != col]
            m = [[(row + (1.0,))[k] for k in cols] for row in rows]
            return (
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            )

        A = minor(0)
        Bx = -minor(1) / 2.0
        By = minor(2) / 2.0
        C = -minor(3)
        return cls(A, complex(Bx, By), C)

    # -- predicates and geometry -------------------------------------------

    @property
    def discriminant(self) -> float:
        return abs(self.B) ** 2 - self.A * self.C

    @property
    def is_line(self) -> bool:
        return abs(self.A) < 1e-12

    def evaluate(self, z: complex) -> float:
        z = complex(z)
        return self.A * abs(z) ** 2 + 2.0 * (self.B.conjugate() * z).real + self.C

    def contains(self, p: SpherePoint, tol: float = 1e-9) -> bool:
        if isinstance(p, _Infinity):
            return abs(self.A) < tol
        z = complex(p)
        # Dividing by 1 + |z|^2 makes the test chordally fair near infinity.
        return abs(self.evaluate(z)) / (1.0 + abs(z) ** 2) < tol

    def geometry(self):
        """("circle", center, radius) or ("line", unit_normal, offset)."""
        if self.is_line:
            n = abs(self.B)
            return ("line", self.B / n, -self.C / (2.0 * n))
        disc = self.discriminant
        if disc <= 0.0:
            raise ValueError("degenerate circline has no real locus")
        return ("circle", -self.B / self.A, math.sqrt(disc) / abs(self.A))

    def chordal_diameter(self) -> float:
        """Diameter of the locus on the unit sphere; scale-invariant.

        Lines through the origin and the unit circle are great circles and
        return 2.
        """
        disc = self.discriminant
        if disc <= 0.0:
            return 0.0
        denom = 4.0 * abs(self.B) ** 2 + (self.A - self.C) ** 2
        return 4.0 * math.sqrt(disc) / math.sqrt(denom)

    def transform(self, m: MoebiusMap) -> "Circline":
        return Circline(*transform_hermitian(m, self.A, self.B, self.C))

    def inversive_distance(self, other: "Circline") -> float:
        """|cos| of the intersection angle, extended past tangency.

        1 means tangent, < 1 crossing, > 1 disjoint.  Unoriented, hence the
        absolute value.
        """
        t1 = 1.0 / math.sqrt(self.discriminant)
        t2 = 1.0 / math.sqrt(other.discriminant)
        prod = (
            2.0 * (self.B * other.B.conjugate()).real
            - self.A * other.C
            - other.A * self.C
        )
        return abs(prod) * t1 * t2 / 2.0

    def __repr__(self) -> str:
        return f"Circline(A={self.A!r}, B={self.B!r}, C={self.C!r})"

    def almost_equal(self, other: "Circline", tol: float = 1e-9) -> bool:
        # Canonical form makes this a plain componentwise comparison,
        # except that a leading coefficient sitting under the sign
        # threshold can still flip; compare both signs.
        plus = max(abs(self.A - other.A), abs(self.B - other.B), abs(self.C - other.C))
        minus = max(abs(self.A + other.A), abs(self.B + other.B), abs(self.C + other.C))
        return min(plus, minus) <= tol


def moebius_to_zero_one_inf(p1: SpherePoint, p2: SpherePoint, p3: SpherePoint) -> MoebiusMap:
    """The unique map sending (p1, p2, p3) to (0, 1, infinity)."""
    pts = (p1, p2, p3)
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal_distance(pts[i], pts[j]) < 1e-12:
                raise ValueError("three distinct points are required")
    if isinstance(p1, _Infinity):
        z2, z3 = complex(p2), complex(p3)
        return MoebiusMap(0, z2 - z3, 1, -z3)
    if isinstance(p2, _Infinity):
        z1, z3 = complex(p1), complex(p3)
        return MoebiusMap(1, -z1, 1, -z3)
    if isinstance(p3, _Infinity):
        z1, z2 = complex(p1), complex(p2)
        return MoebiusMap(1, -z1, 0, z2 - z1)
    z1, z2, z3 = complex(p1), complex(p2), complex(p3)
    return MoebiusMap(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def moebius_mapping(
    src: tuple[SpherePoint, SpherePoint, SpherePoint],
    dst: tuple[SpherePoint, SpherePoint, SpherePoint],
) -> MoebiusMap:
    """The unique map sending the src triple to the dst triple in order."""
    return moebius_to_zero_one_inf(*dst).inverse().compose(moebius_to_zero_one_inf(*src))
