"""Level-n cell graphs with exact adjacency.

Every coordinate of a level-n cell of a system whose level-1 data have common
denominator ``M`` is of the form ``(P + Q sqrt(D)) / M**n`` with integer P, Q.
Cells are stored on that lattice as integer arrays, so equality of
coordinates is integer equality and order is decided by comparing ``P**2``
with ``Q**2 D``; floats are only used to propose candidate pairs.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exactnum import QuadNumber, format_literal, parse_literal
from .geometry import IFSystem, Isometry, Square

SEGMENT = 0
POINT = 1
KIND_NAMES = ("segment", "point")

_INT64_SAFE = 1 << 62


class BudgetExceededError(ValueError):
    pass


class UnvalidatedSystemError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact lattice coordinates
# ---------------------------------------------------------------------------


def _sign(p: np.ndarray, q: np.ndarray, d: int | None) -> np.ndarray:
    """Exact sign of ``p + q sqrt(d)`` elementwise."""
    sp_ = (p > 0).astype(np.int8) - (p < 0).astype(np.int8)
    if d is None:
        return sp_
    sq_ = (q > 0).astype(np.int8) - (q < 0).astype(np.int8)
    # if p and q agree, either sign will do; otherwise the larger magnitude wins
    return np.where(p * p > q * q * d, sp_, sq_).astype(np.int8)


@dataclass
class CellCoords:
    """Lower-left corners and sides of a batch of cells on one lattice."""

    denom: int
    d: int | None
    x0p: np.ndarray
    x0q: np.ndarray
    y0p: np.ndarray
    y0q: np.ndarray
    sp: np.ndarray
    sq: np.ndarray

    def __len__(self):
        return len(self.x0p)

    def take(self, idx) -> "CellCoords":
        return CellCoords(
            self.denom,
            self.d,
            self.x0p[idx],
            self.x0q[idx],
            self.y0p[idx],
            self.y0q[idx],
            self.sp[idx],
            self.sq[idx],
        )

    def _float(self, p, q):
        r = math.sqrt(self.d) if self.d else 0.0
        return (p.astype(np.float64) + q.astype(np.float64) * r) / self.denom

    def floats(self):
        """(x0, y0, side) as float arrays (approximate, see ``float_error``)."""
        return (
            self._float(self.x0p, self.x0q),
            self._float(self.y0p, self.y0q),
            self._float(self.sp, self.sq),
        )

    def float_error(self) -> float:
        """Generous bound on the absolute error of :meth:`floats` coordinates."""
        if len(self) == 0:
            return 0.0
        r = math.sqrt(self.d) if self.d else 0.0
        mag = max(
            int(np.max(np.abs(a))) + int(np.max(np.abs(b))) * r
            for a, b in ((self.x0p, self.x0q), (self.y0p, self.y0q), (self.sp, self.sq))
        )
        return 64 * 2.0**-52 * (mag + 1) / self.denom

    def square(self, i: int) -> Square:
        def qn(p, q):
            return QuadNumber(int(p), int(q), self.denom, self.d)

        return Square(qn(self.x0p[i], self.x0q[i]), qn(self.y0p[i], self.y0q[i]), qn(self.sp[i], self.sq[i]))

    def sign_of(self, p, q):
        if p.dtype == object or self._cmp_safe(p, q):
            return _sign(p, q, self.d)
        return _sign(p.astype(object), q.astype(object), self.d)

    def _cmp_safe(self, p, q) -> bool:
        if len(p) == 0:
            return True
        m = max(int(np.max(np.abs(p))), int(np.max(np.abs(q))))
        return m * m * ((self.d or 0) + 1) < _INT64_SAFE

    def compare_const(self, p, q, value: QuadNumber) -> np.ndarray:
        """Sign of ``(p + q r)/denom - value`` elementwise."""
        value = QuadNumber.coerce(value)
        if value.d is not None and self.d is not None and value.d != self.d:
            raise ValueError("value lives in a different quadratic field")
        if value.d is not None and self.d is None:
            raise ValueError("irrational value compared against a rational lattice")
        a = p.astype(object) * value.s - value.p * self.denom
        b = q.astype(object) * value.s - value.q * self.denom
        return _sign(a, b, self.d)


def _level_one(sys: IFSystem) -> CellCoords:
    nums = [c for m in sys.maps for c in (m.ratio, m.tx, m.ty)]
    denom = 1
    for c in nums:
        denom = denom * c.s // math.gcd(denom, c.s)
    d = sys.radicand if any(c.q for c in nums) else None

    def col(attr, part):
        vals = []
        for m in sys.maps:
            c = getattr(m, attr)
            vals.append((c.p if part == "p" else c.q) * (denom // c.s))
        return np.array(vals, dtype=object)

    return CellCoords(
        denom, d, col("tx", "p"), col("tx", "q"), col("ty", "p"), col("ty", "q"), col("ratio", "p"), col("ratio", "q")
    )


def _maybe_int64(arrs, d):
    m = max((max(abs(int(v)) for v in a) if len(a) else 0) for a in arrs)
    if m * m * ((d or 0) + 1) * 4 < _INT64_SAFE:
        return [a.astype(np.int64) for a in arrs]
    return arrs


def level_coords(sys: IFSystem, n: int) -> CellCoords:
    """Exact coordinates of all ``N**n`` cells in lexicographic word order."""
    if n < 0:
        raise ValueError("level must be >= 0")
    base = _level_one(sys)
    N = sys.n_maps
    if n == 0:
        one = np.array([1], dtype=object)
        zero = np.array([0], dtype=object)
        return CellCoords(1, None, zero, zero, zero, zero, one, zero)
    d = base.d or 0
    cur = base
    for _ in range(n - 1):
        # child w.i: corner = S_w * c_i + T_w, side = S_w * rho_i
        big = not _product_safe(cur, base)
        dt = object if big else np.int64
        Sp = cur.sp.astype(dt)[:, None]
        Sq = cur.sq.astype(dt)[:, None]
        M = base.denom

        def mul(cp, cq):
            cp = cp.astype(dt)[None, :]
            cq = cq.astype(dt)[None, :]
            return Sp * cp + Sq * cq * d, Sp * cq + Sq * cp

        xp, xq = mul(base.x0p, base.x0q)
        yp, yq = mul(base.y0p, base.y0q)
        sp_, sq_ = mul(base.sp, base.sq)
        xp = xp + cur.x0p.astype(dt)[:, None] * M
        xq = xq + cur.x0q.astype(dt)[:, None] * M
        yp = yp + cur.y0p.astype(dt)[:, None] * M
        yq = yq + cur.y0q.astype(dt)[:, None] * M
        arrs = [a.ravel() for a in (xp, xq, yp, yq, sp_, sq_)]
        cur = CellCoords(cur.denom * M, base.d, *arrs)
    arrs = [cur.x0p, cur.x0q, cur.y0p, cur.y0q, cur.sp, cur.sq]
    if arrs[0].dtype == object:
        arrs = _maybe_int64(arrs, base.d)
    cur = CellCoords(cur.denom, base.d, *arrs)
    if len(cur) != N**n:
        raise AssertionError("cell count mismatch")
    return cur


def _product_safe(cur: CellCoords, base: CellCoords) -> bool:
    def mx(c):
        return max(int(np.max(np.abs(a))) for a in (c.x0p, c.x0q, c.y0p, c.y0q, c.sp, c.sq))

    bound = mx(cur) * mx(base) * ((base.d or 0) + 1) + mx(cur) * base.denom
    return 4 * bound < _INT64_SAFE


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def word_to_index(w: Sequence[int], N: int) -> int:
    idx = 0
    for i in w:
        if not 1 <= i <= N:
            raise IndexError(f"letter {i} out of range 1..{N}")
        idx = idx * N + (i - 1)
    return idx


def index_to_word(idx: int, N: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        idx, r = divmod(idx, N)
        out.append(r + 1)
    return tuple(reversed(out))


def format_word(w: Sequence[int]) -> str:
    return ".".join(str(i) for i in w) if w else "()"


def parse_word(text: str) -> tuple:
    t = text.strip().strip("()")
    if not t:
        return ()
    return tuple(int(x) for x in re.split(r"[.,\s]+", t) if x)


# ---------------------------------------------------------------------------
# conductance rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConductanceRule:
    """``unit``, or ``theta``: edge {v, w} gets ``(side_v side_w) ** (-theta/2)``.

    The theta rule is a heuristic discretisation of the renormalised energy.
    """

    kind: str = "unit"
    theta: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "ConductanceRule":
        if text == "unit":
            return cls()
        m = re.fullmatch(r"theta[:(]\s*([-+0-9.eE]+)\s*\)?", text)
        if not m:
            raise ValueError(f"unknown conductance rule {text!r}")
        return cls("theta", float(m.group(1)))

    @property
    def label(self) -> str:
        return "unit" if self.kind == "unit" else f"theta:{self.theta:g}"

    def conductances(self, side_u: np.ndarray, side_v: np.ndarray) -> np.ndarray:
        if self.kind == "unit":
            return np.ones(len(side_u))
        return (side_u * side_v) ** (-self.theta / 2.0)


UNIT = ConductanceRule()


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------


@dataclass
class CellGraph:
    system: IFSystem
    level: int
    cells: np.ndarray  # global word indices, ascending
    coords: CellCoords
    edges: np.ndarray  # (E, 2) local indices, u < v, lexicographic
    kinds: np.ndarray  # SEGMENT / POINT
    conductance: np.ndarray
    rule: ConductanceRule = UNIT
    _adj: dict = field(default_factory=dict, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.cells)

    @property
    def n_maps(self) -> int:
        return self.system.n_maps

    def word(self, i: int) -> tuple:
        return index_to_word(int(self.cells[i]), self.n_maps, self.level)

    def words(self) -> list:
        return [self.word(i) for i in range(self.n_vertices)]

    def index_of(self, w: Sequence[int]) -> int:
        if len(w) != self.level:
            raise KeyError(f"word {format_word(w)} is not a level-{self.level} cell")
        g = word_to_index(w, self.n_maps)
        i = int(np.searchsorted(self.cells, g))
        if i >= len(self.cells) or self.cells[i] != g:
            raise KeyError(f"word {format_word(w)} is not a vertex of this graph")
        return i

    def square(self, i: int) -> Square:
        return self.coords.square(i)

    def sides(self) -> np.ndarray:
        return self.coords.floats()[2]

    def edge_mask(self, corner_edges: bool = False) -> np.ndarray:
        if corner_edges:
            return np.ones(len(self.kinds), dtype=bool)
        return self.kinds == SEGMENT

    def adjacency(self, corner_edges: bool = False) -> sp.csr_matrix:
        """Symmetric weighted adjacency (conductances)."""
        key = bool(corner_edges)
        if key not in self._adj:
            m = self.edge_mask(corner_edges)
            u, v = self.edges[m, 0], self.edges[m, 1]
            c = self.conductance[m]
            n = self.n_vertices
            a = sp.coo_matrix((np.concatenate([c, c]), (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(n, n))
            self._adj[key] = a.tocsr()
        return self._adj[key]

    def neighbors(self, i: int, corner_edges: bool = True) -> np.ndarray:
        a = self.adjacency(corner_edges)
        return np.sort(a.indices[a.indptr[i] : a.indptr[i + 1]])

    def n_components(self, corner_edges: bool = False) -> int:
        from scipy.sparse.csgraph import connected_components

        return connected_components(self.adjacency(corner_edges), directed=False)[0]

    def automorphism(self, g: Isometry) -> np.ndarray:
        """Local-index permutation induced by ``g`` (letterwise on words)."""
        perms = self.system.validation.permutations
        if g.tag not in perms:
            raise ValueError(f"system is not invariant under {g.tag}")
        sigma = np.asarray(perms[g.tag], dtype=np.int64)
        N, n = self.n_maps, self.level
        digits = np.empty((len(self.cells), n), dtype=np.int64)
        rest = self.cells.copy()
        for k in range(n - 1, -1, -1):
            digits[:, k] = rest % N
            rest //= N
        image = np.zeros(len(self.cells), dtype=np.int64)
        for k in range(n):
            image = image * N + sigma[digits[:, k]]
        local = np.searchsorted(self.cells, image)
        if np.any(local >= len(self.cells)) or np.any(self.cells[np.minimum(local, len(self.cells) - 1)] != image):
            raise ValueError("vertex set is not invariant under this isometry")
        return local


def _check_budget(sys: IFSystem, n: int, max_cells: int | None):
    count = sys.n_maps**n
    if max_cells is not None and count > max_cells:
        raise BudgetExceededError(f"level {n} of {sys.name} has {count} cells, budget is {max_cells}")


def _line_matches(key_a, lo_a, hi_a, key_b, lo_b, hi_b, eps):
    """Candidate pairs (a, b) with equal line key and float intervals meeting.

    Intervals within one side of a line have disjoint interiors, so sorting
    by ``lo`` also sorts ``hi``.
    """
    if len(key_a) == 0 or len(key_b) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    keys = np.concatenate([key_a, key_b])
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    la, lb = inv[: len(key_a)], inv[len(key_a) :]
    order_b = np.lexsort((lo_b, lb))
    lb_s, lo_b_s, hi_b_s = lb[order_b], lo_b[order_b], hi_b[order_b]
    starts = np.searchsorted(lb_s, la, "left")
    ends = np.searchsorted(lb_s, la, "right")
    out_a, out_b = [], []
    has = np.nonzero(ends > starts)[0]
    # group the a-side by line to reuse the b-side block
    if len(has) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    order_a = has[np.argsort(la[has], kind="stable")]
    lines, first = np.unique(la[order_a], return_index=True)
    bounds = list(first) + [len(order_a)]
    for k in range(len(lines)):
        ia = order_a[bounds[k] : bounds[k + 1]]
        s, e = starts[ia[0]], ends[ia[0]]
        blo, bhi = lo_b_s[s:e], hi_b_s[s:e]
        lo_idx = np.searchsorted(bhi, lo_a[ia] - eps, "left")
        hi_idx = np.searchsorted(blo, hi_a[ia] + eps, "right")
        cnt = np.maximum(hi_idx - lo_idx, 0)
        if cnt.sum() == 0:
            continue
        rep_a = np.repeat(ia, cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        rep_b = order_b[s + np.repeat(lo_idx, cnt) + offs]
        out_a.append(rep_a)
        out_b.append(rep_b)
    if not out_a:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(out_a), np.concatenate(out_b)


def find_contacts(coords: CellCoords):
    """All touching pairs ``(u, v, kind)`` with ``u < v`` among the given cells.

    Two closed axis-aligned squares touch iff the right (top) edge of one lies
    on the same line as the left (bottom) edge of the other and the other
    coordinate intervals meet.  Lines are matched by exact lattice keys.
    """
    x0, y0, s = coords.floats()
    eps = coords.float_error()
    x1p, x1q = coords.x0p + coords.sp, coords.x0q + coords.sq
    y1p, y1q = coords.y0p + coords.sp, coords.y0q + coords.sq

    def key(p, q):
        return np.stack([p, q], axis=1) if p.dtype != object else np.array([hash((int(a), int(b))) for a, b in zip(p, q)])[:, None]

    us, vs, ks = [], [], []
    for (ap, aq), (bp, bq), (lo, hi), (olo_p, olo_q), (ohi_p, ohi_q) in (
        # vertical lines: right edge of a == left edge of b, compare y-intervals
        ((x1p, x1q), (coords.x0p, coords.x0q), (y0, y0 + s), (coords.y0p, coords.y0q), (y1p, y1q)),
        # horizontal lines: top of a == bottom of b, compare x-intervals
        ((y1p, y1q), (coords.y0p, coords.y0q), (x0, x0 + s), (coords.x0p, coords.x0q), (x1p, x1q)),
    ):
        ka, kb = key(ap, aq), key(bp, bq)
        ia, ib = _line_matches(ka, lo, hi, kb, lo, hi, eps)
        if len(ia) == 0:
            continue
        if ap.dtype == object:
            same = np.array([ap[i] == bp[j] and aq[i] == bq[j] for i, j in zip(ia, ib)], dtype=bool)
            ia, ib = ia[same], ib[same]
        # exact overlap of the other coordinate: min(hi) - max(lo)
        sgn_lo = coords.sign_of(olo_p[ia] - olo_p[ib], olo_q[ia] - olo_q[ib])
        lo_p = np.where(sgn_lo >= 0, olo_p[ia], olo_p[ib])
        lo_q = np.where(sgn_lo >= 0, olo_q[ia], olo_q[ib])
        sgn_hi = coords.sign_of(ohi_p[ia] - ohi_p[ib], ohi_q[ia] - ohi_q[ib])
        hi_p = np.where(sgn_hi <= 0, ohi_p[ia], ohi_p[ib])
        hi_q = np.where(sgn_hi <= 0, ohi_q[ia], ohi_q[ib])
        ov = coords.sign_of(hi_p - lo_p, hi_q - lo_q)
        keep = ov >= 0
        us.append(ia[keep])
        vs.append(ib[keep])
        ks.append(np.where(ov[keep] > 0, SEGMENT, POINT).astype(np.int8))
    if not us:
        return np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int8)
    u = np.concatenate(us).astype(np.int64)
    v = np.concatenate(vs).astype(np.int64)
    k = np.concatenate(ks)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))
    lo, hi, k = lo[order], hi[order], k[order]
    # a corner contact is found once from each family of lines
    keep = np.ones(len(lo), dtype=bool)
    keep[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    return np.stack([lo[keep], hi[keep]], axis=1), k[keep]


def build_graph(
    sys: IFSystem,
    n: int,
    rule: ConductanceRule | str = UNIT,
    max_cells: int | None = 2_000_000,
) -> CellGraph:
    """Cell graph on all words of length ``n`` (both contact kinds stored)."""
    if n < 1:
        raise ValueError("level must be >= 1")
    if isinstance(rule, str):
        rule = ConductanceRule.parse(rule)
    if not sys.validation.passed:
        failed = [a.name for a in sys.validation.axioms.values() if not a.passed]
        raise UnvalidatedSystemError(f"{sys.name} fails validation: {', '.join(failed) or 'sum of squares'}")
    _check_budget(sys, n, max_cells)
    coords = level_coords(sys, n)
    edges, kinds = find_contacts(coords)
    side = coords.floats()[2]
    cond = rule.conductances(side[edges[:, 0]], side[edges[:, 1]])
    cells = np.arange(sys.n_maps**n, dtype=np.int64)
    return CellGraph(sys, n, cells, coords, edges, kinds, cond, rule)


# ---------------------------------------------------------------------------
# selections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionSelector:
    kind: str  # edge | prefix | rect | indexset | all
    value: object = None

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "RegionSelector":
        text = text.strip()
        if text == "all":
            return cls("all")
        if ":" not in text:
            raise ValueError(f"malformed selector {text!r}")
        kind, arg = text.split(":", 1)
        if kind == "edge":
            if arg not in ("bottom", "right", "top", "left"):
                raise ValueError(f"unknown edge {arg!r}")
            return cls("edge", arg)
        if kind == "prefix":
            return cls("prefix", parse_word(arg))
        if kind == "indexset":
            return cls("indexset", frozenset(int(x) for x in re.split(r"[,\s{}]+", arg) if x))
        if kind == "rect":
            parts = [p for p in re.split(r",(?![^()]*\))", arg.strip("()")) if p]
            if len(parts) != 4:
                raise ValueError(f"rect needs 4 numbers, got {arg!r}")
            return cls("rect", tuple(parse_literal(p, d) for p in parts))
        raise ValueError(f"unknown selector kind {kind!r}")

    def __str__(self):
        if self.kind == "all":
            return "all"
        if self.kind == "prefix":
            return f"prefix:{format_word(self.value)}"
        if self.kind == "indexset":
            return "indexset:" + ",".join(str(i) for i in sorted(self.value))
        if self.kind == "rect":
            return "rect:" + ",".join(format_literal(v) for v in self.value)
        return f"{self.kind}:{self.value}"


def select(g: CellGraph, sel: RegionSelector | str) -> np.ndarray:
    """Sorted local indices of the vertices matching ``sel`` (exact)."""
    if isinstance(sel, str):
        sel = RegionSelector.parse(sel, g.system.radicand)
    c = g.coords
    n, N = g.level, g.n_maps
    if sel.kind == "all":
        mask = np.ones(g.n_vertices, dtype=bool)
    elif sel.kind == "edge":
        zero_p = lambda p, q: (p == 0) & (q == 0)  # noqa: E731
        one_p = lambda p, q: (p == c.denom) & (q == 0)  # noqa: E731
        if sel.value == "bottom":
            mask = zero_p(c.y0p, c.y0q)
        elif sel.value == "left":
            mask = zero_p(c.x0p, c.x0q)
        elif sel.value == "top":
            mask = one_p(c.y0p + c.sp, c.y0q + c.sq)
        else:
            mask = one_p(c.x0p + c.sp, c.x0q + c.sq)
    elif sel.kind == "prefix":
        w = sel.value
        if len(w) > n:
            mask = np.zeros(g.n_vertices, dtype=bool)
        else:
            base = word_to_index(w, N) * N ** (n - len(w))
            mask = (g.cells >= base) & (g.cells < base + N ** (n - len(w)))
    elif sel.kind == "indexset":
        first = g.cells // N ** (n - 1) + 1
        mask = np.isin(first, sorted(sel.value))
    elif sel.kind == "rect":
        rx0, ry0, rx1, ry1 = sel.value
        mask = (
            (c.compare_const(c.x0p, c.x0q, rx0) >= 0)
            & (c.compare_const(c.y0p, c.y0q, ry0) >= 0)
            & (c.compare_const(c.x0p + c.sp, c.x0q + c.sq, rx1) <= 0)
            & (c.compare_const(c.y0p + c.sp, c.y0q + c.sq, ry1) <= 0)
        )
    else:
        raise ValueError(f"unknown selector kind {sel.kind!r}")
    return np.nonzero(np.asarray(mask, dtype=bool))[0]


def complement_nonneighbors(g: CellGraph, w: Sequence[int]) -> np.ndarray:
    """Vertices whose squares neither equal nor touch ``F_w`` (any contact kind)."""
    i = g.index_of(tuple(w))
    mask = np.ones(g.n_vertices, dtype=bool)
    mask[i] = False
    mask[g.neighbors(i, corner_edges=True)] = False
    return np.nonzero(mask)[0]


def induced_subgraph(g: CellGraph, verts: Iterable[int]) -> CellGraph:
    verts = np.unique(np.asarray(list(verts) if not isinstance(verts, np.ndarray) else verts, dtype=np.int64))
    remap = -np.ones(g.n_vertices, dtype=np.int64)
    remap[verts] = np.arange(len(verts))
    u, v = remap[g.edges[:, 0]], remap[g.edges[:, 1]]
    keep = (u >= 0) & (v >= 0)
    edges = np.stack([u[keep], v[keep]], axis=1) if len(u) else g.edges[:0]
    return CellGraph(
        g.system,
        g.level,
        g.cells[verts],
        g.coords.take(verts),
        edges.astype(np.int64),
        g.kinds[keep],
        g.conductance[keep],
        g.rule,
    )


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_graph(g: CellGraph, corner_edges: bool = True) -> str:
    lines = [
        f"# graph {g.system.name} level {g.level} rule {g.rule.label} vertices {g.n_vertices}",
    ]
    c = g.coords
    for i in range(g.n_vertices):
        sq = c.square(i)
        lines.append(
            f"vertex {i} {format_word(g.word(i))} {format_literal(sq.x0)} {format_literal(sq.y0)} {format_literal(sq.side)}"
        )
    m = g.edge_mask(corner_edges)
    for (u, v), k, cond in zip(g.edges[m], g.kinds[m], g.conductance[m]):
        lines.append(f"edge {u} {v} {KIND_NAMES[k]} {float(cond)!r}")
    return "\n".join(lines) + "\n"
