"""Homothety IFS on the unit square: maps, symmetries, cells, axioms, dimension."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import mpmath

from .exactnum import QuadNumber, format_literal, parse_literal, qn_sign

Point = tuple  # (QuadNumber, QuadNumber)
Word = tuple  # 1-based map indices; () is the unit square

ZERO = QuadNumber(0)
ONE = QuadNumber(1)


def _q(x) -> QuadNumber:
    return QuadNumber.coerce(x)


def point(x, y) -> Point:
    return (_q(x), _q(y))


# ---------------------------------------------------------------------------
# symmetry group of the square
# ---------------------------------------------------------------------------

# tag -> (linear part row-major, offset)
_ISOMETRY_TABLE = {
    "id": ((1, 0, 0, 1), (0, 0)),
    "r1": ((0, -1, 1, 0), (1, 0)),
    "r2": ((-1, 0, 0, -1), (1, 1)),
    "r3": ((0, 1, -1, 0), (0, 1)),
    "h": ((-1, 0, 0, 1), (1, 0)),
    "v": ((1, 0, 0, -1), (0, 1)),
    "d1": ((0, 1, 1, 0), (0, 0)),
    "d2": ((0, -1, -1, 0), (1, 1)),
}
_TAG_BY_ACTION = {v: k for k, v in _ISOMETRY_TABLE.items()}

# rotations first so that a broken rotation symmetry is reported before reflections
ISOMETRY_TAGS = ("id", "r1", "r2", "r3", "h", "v", "d1", "d2")


@dataclass(frozen=True)
class Isometry:
    """One of the eight self-isometries of the unit square.

    ``v``: (x1, 1 - x2), ``h``: (1 - x1, x2), ``d1``: (x2, x1),
    ``d2``: (1 - x2, 1 - x1), ``r1``: (1 - x2, x1) and its powers.
    """

    tag: str

    def __post_init__(self):
        if self.tag not in _ISOMETRY_TABLE:
            raise ValueError(f"unknown isometry {self.tag!r}")

    @property
    def matrix(self) -> tuple[int, int, int, int]:
        return _ISOMETRY_TABLE[self.tag][0]

    @property
    def offset(self) -> tuple[int, int]:
        return _ISOMETRY_TABLE[self.tag][1]

    def __call__(self, x):
        return apply_isometry(self, x)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition ``self o other``."""
        a, b, c, d = self.matrix
        e, f = self.offset
        a2, b2, c2, d2 = other.matrix
        e2, f2 = other.offset
        m = (a * a2 + b * c2, a * b2 + b * d2, c * a2 + d * c2, c * b2 + d * d2)
        off = (a * e2 + b * f2 + e, c * e2 + d * f2 + f)
        return Isometry(_TAG_BY_ACTION[(m, off)])

    def inverse(self) -> "Isometry":
        for tag in ISOMETRY_TAGS:
            g = Isometry(tag)
            if (self @ g).tag == "id":
                return g
        raise AssertionError("group table is broken")

    def __repr__(self):
        return f"Isometry({self.tag!r})"


GROUP = tuple(Isometry(t) for t in ISOMETRY_TAGS)


# ---------------------------------------------------------------------------
# squares and segments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Closed axis-aligned segment; endpoints stored in lexicographic order."""

    a: Point
    b: Point

    def __post_init__(self):
        a, b = self.a, self.b
        if a[0] != b[0] and a[1] != b[1]:
            raise ValueError("segment is not axis-aligned")
        if a == b:
            raise ValueError("degenerate segment")
        if (a[0], a[1]) > (b[0], b[1]):
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)

    @property
    def vertical(self) -> bool:
        return self.a[0] == self.b[0]

    def contains_point(self, p: Point) -> bool:
        if self.vertical:
            return p[0] == self.a[0] and self.a[1] <= p[1] <= self.b[1]
        return p[1] == self.a[1] and self.a[0] <= p[0] <= self.b[0]

    def contains(self, other: "Segment") -> bool:
        return self.contains_point(other.a) and self.contains_point(other.b)

    def __str__(self):
        (x0, y0), (x1, y1) = self.a, self.b
        if self.vertical:
            return f"{{{x0}}}x[{y0},{y1}]"
        return f"[{x0},{x1}]x{{{y0}}}"


@dataclass(frozen=True)
class Square:
    x0: QuadNumber
    y0: QuadNumber
    side: QuadNumber

    @property
    def x1(self) -> QuadNumber:
        return self.x0 + self.side

    @property
    def y1(self) -> QuadNumber:
        return self.y0 + self.side

    def corners(self) -> tuple[Point, Point, Point, Point]:
        x0, y0, x1, y1 = self.x0, self.y0, self.x1, self.y1
        return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))

    def edge(self, which: str) -> Segment:
        c = self.corners()
        idx = {"bottom": (0, 1), "right": (1, 2), "top": (2, 3), "left": (3, 0)}[which]
        return Segment(c[idx[0]], c[idx[1]])

    def contains_point(self, p: Point) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    def contains_square(self, other: "Square") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )

    def contains_segment(self, seg: Segment) -> bool:
        return self.contains_point(seg.a) and self.contains_point(seg.b)

    def __str__(self):
        return f"[{self.x0},{self.x1}]x[{self.y0},{self.y1}]"


UNIT_SQUARE = Square(ZERO, ZERO, ONE)
CORNERS = UNIT_SQUARE.corners()  # q1..q4


def unit_edge(i: int) -> Segment:
    """``L_i``: segment from corner q_i to q_{i+1} (cyclic), i = 1..4."""
    c = CORNERS
    return Segment(c[i - 1], c[i % 4])


def _overlap_1d(a0, a1, b0, b1):
    lo = a0 if a0 >= b0 else b0
    hi = a1 if a1 <= b1 else b1
    return lo, hi, qn_sign(hi - lo)


def classify_contact(a: Square, b: Square):
    """Exact intersection type of two closed squares.

    Returns ``(kind, geometry)`` with kind in ``none``, ``point``, ``segment``,
    ``overlap``.
    """
    xlo, xhi, sx = _overlap_1d(a.x0, a.x1, b.x0, b.x1)
    if sx < 0:
        return "none", None
    ylo, yhi, sy = _overlap_1d(a.y0, a.y1, b.y0, b.y1)
    if sy < 0:
        return "none", None
    if sx > 0 and sy > 0:
        return "overlap", Square(xlo, ylo, xhi - xlo) if xhi - xlo == yhi - ylo else None
    if sx == 0 and sy == 0:
        return "point", (xlo, ylo)
    if sx == 0:
        return "segment", Segment((xlo, ylo), (xlo, yhi))
    return "segment", Segment((xlo, ylo), (xhi, ylo))


def apply_isometry(g: Isometry, x):
    """Image of a point, Segment or Square under ``g``."""
    if isinstance(x, Square):
        c0 = apply_isometry(g, (x.x0, x.y0))
        c2 = apply_isometry(g, (x.x1, x.y1))
        x0 = c0[0] if c0[0] <= c2[0] else c2[0]
        y0 = c0[1] if c0[1] <= c2[1] else c2[1]
        return Square(x0, y0, x.side)
    if isinstance(x, Segment):
        return Segment(apply_isometry(g, x.a), apply_isometry(g, x.b))
    a, b, c, d = g.matrix
    e, f = g.offset
    u, v = _q(x[0]), _q(x[1])
    return (a * u + b * v + e, c * u + d * v + f)


# ---------------------------------------------------------------------------
# maps and systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Similarity:
    """Homothety ``x -> ratio * x + (tx, ty)``."""

    ratio: QuadNumber
    tx: QuadNumber
    ty: QuadNumber

    def __call__(self, p: Point) -> Point:
        return (self.ratio * p[0] + self.tx, self.ratio * p[1] + self.ty)

    def inverse_point(self, p: Point) -> Point:
        return ((p[0] - self.tx) / self.ratio, (p[1] - self.ty) / self.ratio)

    def compose(self, other: "Similarity") -> "Similarity":
        """``self o other``."""
        return Similarity(
            self.ratio * other.ratio,
            self.ratio * other.tx + self.tx,
            self.ratio * other.ty + self.ty,
        )

    def conjugate(self, g: Isometry) -> "Similarity":
        """``g o self o g^-1``, again a homothety."""
        a, b, c, d = g.matrix
        e, f = g.offset
        tx = a * self.tx + b * self.ty + e - self.ratio * e
        ty = c * self.tx + d * self.ty + f - self.ratio * f
        return Similarity(self.ratio, tx, ty)

    def square(self) -> Square:
        return Square(self.tx, self.ty, self.ratio)


class MalformedSystemError(ValueError):
    pass


@dataclass(frozen=True)
class IFSystem:
    name: str
    radicand: int
    maps: tuple
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    def __len__(self):
        return len(self.maps)

    def map(self, i: int) -> Similarity:
        """1-based access matching the usual F_1..F_N labelling."""
        if not 1 <= i <= len(self.maps):
            raise IndexError(f"map index {i} out of range 1..{len(self.maps)}")
        return self.maps[i - 1]

    @cached_property
    def squares(self) -> tuple:
        return tuple(m.square() for m in self.maps)

    @cached_property
    def contacts(self) -> tuple:
        """Cached ``level_one_contacts``."""
        return tuple(level_one_contacts(self))

    @cached_property
    def validation(self) -> "ValidationReport":
        return validate_lsc(self)

    def __eq__(self, other):
        if not isinstance(other, IFSystem):
            return NotImplemented
        return self.maps == other.maps and self.radicand == other.radicand

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.radicand, self.maps))


def cell_map(sys: IFSystem, w: Sequence[int]) -> Similarity:
    m = Similarity(ONE, ZERO, ZERO)
    for i in w:
        m = m.compose(sys.map(i))
    return m


def cell_square(sys: IFSystem, w: Sequence[int]) -> Square:
    """Exact square ``F_w(unit square)``, ``F_w = F_w1 o ... o F_wn``."""
    return cell_map(sys, w).square()


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class AxiomResult:
    name: str
    passed: bool
    witness: object = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} {self.name}"
        if self.detail:
            msg += f": {self.detail}"
        return msg


@dataclass
class ValidationReport:
    system: str
    axioms: dict = field(default_factory=dict)
    permutations: dict = field(default_factory=dict)
    sum_sq_ratio: QuadNumber | None = None
    contacts: list = field(default_factory=list)

    @property
    def sum_sq_ok(self) -> bool:
        return self.sum_sq_ratio is not None and self.sum_sq_ratio < 1

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axioms.values()) and self.sum_sq_ok

    def lines(self) -> list[str]:
        out = [a.line() for a in self.axioms.values()]
        status = "PASS" if self.sum_sq_ok else "FAIL"
        out.append(f"{status} sum of squared ratios = {self.sum_sq_ratio} < 1")
        return out


AXIOMS = ("non-overlapping", "connectivity", "symmetry", "boundary-included")


def _float_box(sq: Square):
    return (
        sq.x0.to_float("down"),
        sq.y0.to_float("down"),
        sq.x1.to_float("up"),
        sq.y1.to_float("up"),
    )


def level_one_contacts(sys: IFSystem):
    """All touching/overlapping pairs ``(i, j, kind, geometry)`` (0-based, i < j).

    Float boxes with directed rounding reject far pairs; everything else is
    classified exactly.
    """
    sqs = sys.squares
    boxes = [_float_box(s) for s in sqs]
    out = []
    for i in range(len(sqs)):
        bi = boxes[i]
        for j in range(i + 1, len(sqs)):
            bj = boxes[j]
            if bi[2] < bj[0] or bj[2] < bi[0] or bi[3] < bj[1] or bj[3] < bi[1]:
                continue
            kind, geom = classify_contact(sqs[i], sqs[j])
            if kind != "none":
                out.append((i, j, kind, geom))
    return out


def _check_malformed(sys: IFSystem) -> None:
    if sys.n_maps < 2:
        raise MalformedSystemError(f"system {sys.name!r} has {sys.n_maps} maps, need >= 2")
    for i, m in enumerate(sys.maps, 1):
        if not (ZERO < m.ratio < ONE):
            raise MalformedSystemError(f"map {i}: ratio {m.ratio} outside (0, 1)")
        for c in (m.ratio, m.tx, m.ty):
            if c.d is not None and c.d != sys.radicand:
                raise MalformedSystemError(f"map {i}: number {c!r} not in Q(sqrt({sys.radicand}))")


def symmetry_permutation(sys: IFSystem, g: Isometry):
    """0-based permutation ``perm`` with ``g(F_i(sq)) = F_perm[i](sq)``, or the
    first index whose image is missing."""
    index = {sq: i for i, sq in enumerate(sys.squares)}
    perm = []
    for i, sq in enumerate(sys.squares):
        j = index.get(apply_isometry(g, sq))
        if j is None:
            return None, i
        perm.append(j)
    return tuple(perm), None


def validate_lsc(sys: IFSystem) -> ValidationReport:
    """Check the four carpet-like axioms exactly; see ``AXIOMS``."""
    _check_malformed(sys)
    rep = ValidationReport(sys.name)
    n = sys.n_maps
    sqs = sys.squares

    contacts = level_one_contacts(sys)
    rep.contacts = contacts
    bad = [(i + 1, j + 1) for i, j, kind, _ in contacts if kind == "overlap"]
    rep.axioms["non-overlapping"] = AxiomResult(
        "non-overlapping",
        not bad,
        bad[0] if bad else None,
        f"interiors of F_{bad[0][0]} and F_{bad[0][1]} overlap" if bad else f"{n} squares, {len(contacts)} contacts",
    )

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, _, _ in contacts:
        parent[find(i)] = find(j)
    comps = sorted({find(i) for i in range(n)})
    witness = None
    if len(comps) > 1:
        witness = sorted(i + 1 for i in range(n) if find(i) == comps[1])
    rep.axioms["connectivity"] = AxiomResult(
        "connectivity",
        len(comps) == 1,
        witness,
        f"{len(comps)} component(s) in contact graph",
    )

    failed = []
    for g in GROUP:
        perm, missing = symmetry_permutation(sys, g)
        if perm is None:
            failed.append((g.tag, missing + 1))
        else:
            rep.permutations[g.tag] = perm
    rep.axioms["symmetry"] = AxiomResult(
        "symmetry",
        not failed,
        failed[0][0] if failed else None,
        (
            f"image of F_{failed[0][1]} under {failed[0][0]} is not a cell; failing: "
            + ",".join(t for t, _ in failed)
        )
        if failed
        else "invariant under all 8 isometries",
    )

    outside = [i + 1 for i, s in enumerate(sqs) if not UNIT_SQUARE.contains_square(s)]
    bottom = sorted((s for s in sqs if s.y0 == ZERO), key=lambda s: s.x0)
    pos = ZERO
    gap = None
    for s in bottom:
        if s.x0 != pos:
            gap = (pos, s.x0)
            break
        pos = s.x1
    if gap is None and pos != ONE:
        gap = (pos, ONE)
    ok = not outside and gap is None
    if outside:
        detail = f"F_{outside[0]} leaves the unit square"
    elif gap is not None:
        detail = f"bottom edge not tiled near x = {gap[0]}"
    else:
        detail = f"bottom edge tiled exactly by {len(bottom)} squares"
    rep.axioms["boundary-included"] = AxiomResult("boundary-included", ok, outside[:1] or gap, detail)

    total = ZERO
    for m in sys.maps:
        total = total + m.ratio * m.ratio
    rep.sum_sq_ratio = total
    return rep


# ---------------------------------------------------------------------------
# dimension and measure
# ---------------------------------------------------------------------------


class DimensionError(RuntimeError):
    def __init__(self, msg, bracket):
        super().__init__(msg)
        self.bracket = bracket


@dataclass
class DimensionResult:
    dimension: float
    residual: float
    bracket: tuple
    iterations: int
    exact: object = None  # high precision value (mpf)


def _mp_ratio(x: QuadNumber):
    v = mpmath.mpf(x.p)
    if x.q:
        v += x.q * mpmath.sqrt(x.d)
    return v / x.s


def hausdorff_dimension(sys: IFSystem, tol: float = 1e-12, prec: int = 200, max_iter: int = 2000) -> DimensionResult:
    """Solve ``sum_i ratio_i ** alpha = 1`` by bisection at ``prec`` bits."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    for m in sys.maps:
        if not (ZERO < m.ratio < ONE):
            raise MalformedSystemError(f"ratio {m.ratio} outside (0, 1)")
    with mpmath.workprec(prec):
        # group equal ratios: fewer powers to evaluate
        counts: dict = {}
        for m in sys.maps:
            counts[m.ratio] = counts.get(m.ratio, 0) + 1
        terms = [(c, _mp_ratio(r)) for r, c in counts.items()]

        def phi(alpha):
            return mpmath.fsum(c * mpmath.power(r, alpha) for c, r in terms)

        lo = mpmath.mpf(0)
        hi = mpmath.mpf(1)
        while phi(hi) > 1:
            hi *= 2
            if hi > 1e6:
                raise DimensionError("no upper bracket found", (float(lo), float(hi)))
        for it in range(1, max_iter + 1):
            mid = (lo + hi) / 2
            val = phi(mid)
            res = abs(val - 1)
            if res <= tol and hi - lo <= max(tol, mpmath.mpf(2) ** (-prec // 2)):
                return DimensionResult(float(mid), float(res), (float(lo), float(hi)), it, mid)
            if val > 1:
                lo = mid
            else:
                hi = mid
        raise DimensionError(f"bisection did not converge in {max_iter} steps", (float(lo), float(hi)))


def cell_measure(sys: IFSystem, w: Sequence[int], d_h: float) -> float:
    """Self-similar measure of the cell ``F_w K``."""
    out = 1.0
    for i in w:
        out *= float(sys.map(i).ratio) ** d_h
    return out


# ---------------------------------------------------------------------------
# IFS text format
# ---------------------------------------------------------------------------


class IFSFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def dump_ifs(sys: IFSystem) -> str:
    lines = [f"ifs {sys.name}", f"radicand {sys.radicand}"]
    if sys.k is not None:
        lines.append(f"k {sys.k}")
    for m in sys.maps:
        lines.append(f"map {format_literal(m.ratio)} {format_literal(m.tx)} {format_literal(m.ty)}")
    return "\n".join(lines) + "\n"


def load_ifs(text: str) -> IFSystem:
    name = None
    radicand = None
    k = None
    maps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        try:
            if key == "ifs" and len(parts) == 2:
                name = parts[1]
            elif key == "radicand" and len(parts) == 2:
                radicand = int(parts[1])
                QuadNumber(0, 1, 1, radicand)  # validates
            elif key == "k" and len(parts) == 2:
                k = int(parts[1])
            elif key == "map" and len(parts) == 4:
                if radicand is None:
                    raise IFSFormatError("map before radicand", lineno)
                r, tx, ty = (parse_literal(p, radicand) for p in parts[1:])
                maps.append(Similarity(r, tx, ty))
            else:
                raise IFSFormatError(f"unrecognized line {raw.strip()!r}", lineno)
        except IFSFormatError:
            raise
        except ValueError as exc:
            raise IFSFormatError(str(exc), lineno) from exc
    if name is None or radicand is None:
        raise IFSFormatError("missing 'ifs' or 'radicand' header")
    return IFSystem(name, radicand, tuple(maps), k)


def read_ifs(path) -> IFSystem:
    with open(path) as fh:
        return load_ifs(fh.read())


def write_ifs(sys: IFSystem, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_ifs(sys))
