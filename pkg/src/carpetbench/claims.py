"""Exact checks of the two energy-scaling bounds on carpet104 and their conflict.

Everything here is symbolic: reference energies are opaque symbols ``e_h``,
``e_f`` and only ratios of energies are manipulated.  Two analytic inputs
are not re-proved and appear as named axioms in the derivation logs:

* ``restriction``: restricting a function to a union of cells does not
  increase its energy;
* ``symmetric-gluing``: on the strip subsystem the glued copies of the
  reference function attain the minimal energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache

from mpmath import iv
from mpmath.libmp import to_rational

from .exactnum import QuadNumber, _iv_precision, enclosure, format_literal, sign_witness
from .geometry import (
    ONE,
    ZERO,
    IFSystem,
    Isometry,
    Segment,
    Square,
    apply_isometry,
    unit_edge,
)

ID = Isometry("id")
STRIP = (38, 39, 88, 89, 101, 102, 103, 104)


class SpecError(ValueError):
    pass


class ClaimError(RuntimeError):
    def __init__(self, step: str, msg: str):
        super().__init__(f"{step}: {msg}")
        self.step = step


class UnverifiedSpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def _box(region):
    if isinstance(region, Square):
        return region.x0, region.x1, region.y0, region.y1
    return region.a[0], region.b[0], region.a[1], region.b[1]


def _intersects(r1, r2) -> bool:
    a0, a1, b0, b1 = _box(r1)
    c0, c1, d0, d1 = _box(r2)
    return max(a0, c0) <= min(a1, c1) and max(b0, d0) <= min(b1, d1)


def _contains(region, seg: Segment) -> bool:
    if isinstance(region, Square):
        return region.contains_segment(seg)
    return region.contains(seg)


# ---------------------------------------------------------------------------
# reference functions and gluing specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceFunction:
    """A function on the attractor known only through constant traces and
    invariances ``ref o g = ref``."""

    name: str
    traces: tuple  # ((Segment | Square, Fraction), ...)
    symmetries: tuple = (ID,)

    def __post_init__(self):
        if ID not in self.symmetries:
            object.__setattr__(self, "symmetries", (ID,) + tuple(self.symmetries))
        regions = self.expanded_traces()
        for k, (r1, v1) in enumerate(regions):
            for r2, v2 in regions[k + 1 :]:
                if v1 != v2 and _intersects(r1, r2):
                    raise SpecError(f"{self.name}: traces {v1} on {r1} and {v2} on {r2} are inconsistent")

    @property
    def symbol(self) -> str:
        return f"e_{self.name}"

    def expanded_traces(self) -> list:
        """Declared traces plus their images under the declared symmetries."""
        return list(self._expanded)

    @cached_property
    def _expanded(self) -> tuple:
        out = []
        for region, value in self.traces:
            for g in self.symmetries:
                img = apply_isometry(g.inverse(), region)
                if all(not (img == r and value == v) for r, v in out):
                    out.append((img, Fraction(value)))
        return tuple(out)

    def trace_on(self, seg: Segment):
        for region, value in self.expanded_traces():
            if _contains(region, seg):
                return value
        return None


@dataclass(frozen=True)
class Constant:
    c: Fraction

    def shifted(self, delta) -> "Constant":
        return Constant(self.c + delta)


@dataclass(frozen=True)
class Copy:
    """``alpha * ref(pre(F_i^-1 x)) + beta`` on cell i."""

    ref: ReferenceFunction
    pre: Isometry
    alpha: Fraction
    beta: Fraction

    def shifted(self, delta) -> "Copy":
        return replace(self, beta=self.beta + delta)


@dataclass(frozen=True)
class GluingSpec:
    """Assignment of a Constant or Copy to each cell of ``domain`` (1-based)."""

    name: str
    cells: tuple  # ((i, Constant | Copy), ...) sorted by i
    domain: frozenset | None = None  # None means all cells of the system

    @classmethod
    def from_pairs(cls, name, pairs, domain=None) -> "GluingSpec":
        seen = {}
        for i, a in pairs:
            if i in seen:
                raise SpecError(f"cell {i} assigned twice")
            seen[i] = a
        return cls(name, tuple(sorted(seen.items())), None if domain is None else frozenset(domain))

    def assignment(self) -> dict:
        return dict(self.cells)

    def check_complete(self, sys: IFSystem) -> frozenset:
        dom = frozenset(range(1, sys.n_maps + 1)) if self.domain is None else self.domain
        got = {i for i, _ in self.cells}
        if got != dom:
            missing, extra = sorted(dom - got), sorted(got - dom)
            raise SpecError(f"{self.name}: unassigned cells {missing[:5]}, cells outside domain {extra[:5]}")
        for i, a in self.cells:
            if not 1 <= i <= sys.n_maps:
                raise SpecError(f"{self.name}: cell {i} out of range")
            if not isinstance(a, (Constant, Copy)):
                raise SpecError(f"{self.name}: cell {i} has invalid assignment {a!r}")
        return dom

    def mutated(self, cell: int, delta) -> "GluingSpec":
        """Copy of this gluing spec with the offset (constant or beta) of ``cell`` shifted."""
        new = tuple((i, a.shifted(Fraction(delta)) if i == cell else a) for i, a in self.cells)
        return replace(self, cells=new, name=f"{self.name}+mut{cell}")

    def replaced(self, cell: int, assignment) -> "GluingSpec":
        new = tuple((i, assignment if i == cell else a) for i, a in self.cells)
        return replace(self, cells=new)


# ---------------------------------------------------------------------------
# continuity
# ---------------------------------------------------------------------------


@dataclass
class ContactCheck:
    i: int
    j: int
    segment: Segment
    trace_i: object  # Fraction or None
    trace_j: object
    status: str  # pass | mismatch | undetermined
    how: str = ""

    def line(self) -> str:
        return f"{self.status} F_{self.i}/F_{self.j} on {self.segment}: {self.how}"


@dataclass
class ContinuityReport:
    spec: str
    checks: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c.status != "pass"]

    @property
    def status(self) -> str:
        kinds = {c.status for c in self.checks}
        if "mismatch" in kinds:
            return "mismatch"
        if "undetermined" in kinds:
            return "undetermined"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def first_violation(self):
        v = self.violations
        return v[0] if v else None


def _pullback(sys: IFSystem, i: int, a: Copy, seg: Segment):
    F = sys.map(i)
    pa = apply_isometry(a.pre, F.inverse_point(seg.a))
    pb = apply_isometry(a.pre, F.inverse_point(seg.b))
    return pa, pb


@lru_cache(maxsize=65536)
def _trace(sys, i, a, seg):
    """Constant trace on ``seg`` if determined, else the pulled-back endpoints."""
    if isinstance(a, Constant):
        return Fraction(a.c), None
    pa, pb = _pullback(sys, i, a, seg)
    v = a.ref.trace_on(Segment(pa, pb))
    if v is not None:
        return a.alpha * v + a.beta, None
    return None, (pa, pb)


def _check_contact(sys, i, j, ai, aj, seg) -> ContactCheck:
    ti, pi = _trace(sys, i, ai, seg)
    tj, pj = _trace(sys, j, aj, seg)
    if ti is not None and tj is not None:
        ok = ti == tj
        return ContactCheck(i, j, seg, ti, tj, "pass" if ok else "mismatch", f"{ti} vs {tj}")
    if pi is not None and pj is not None and ai.ref == aj.ref:
        # both sides read the same reference trace, possibly through a symmetry
        for g in ai.ref.symmetries:
            if apply_isometry(g, pi[0]) == pj[0] and apply_isometry(g, pi[1]) == pj[1]:
                if ai.alpha != aj.alpha:
                    break
                if ai.beta == aj.beta:
                    return ContactCheck(i, j, seg, None, None, "pass", f"same trace of {ai.ref.name} via {g.tag}")
                return ContactCheck(
                    i, j, seg, None, None, "mismatch", f"traces of {ai.ref.name} offset by {aj.beta - ai.beta}"
                )
    return ContactCheck(i, j, seg, ti, tj, "undetermined", "trace not fixed by declared data")


def verify_continuity(sys: IFSystem, spec: GluingSpec) -> ContinuityReport:
    """Compare the two prescribed traces on every shared segment inside the domain."""
    dom = spec.check_complete(sys)
    amap = spec.assignment()
    rep = ContinuityReport(spec.name)
    for i0, j0, kind, geom in sys.contacts:
        i, j = i0 + 1, j0 + 1
        if kind != "segment" or i not in dom or j not in dom:
            continue
        rep.checks.append(_check_contact(sys, i, j, amap[i], amap[j], geom))
    return rep


@dataclass
class BoundaryReport:
    checks: list = field(default_factory=list)  # (cell, region, expected, got, ok)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c[-1] for c in self.checks)


def check_boundary(sys: IFSystem, spec: GluingSpec, conditions) -> BoundaryReport:
    """Check ``g = value`` on each region.

    A Square region must be a union of whole cells carrying the constant; for a
    Segment region, every cell edge lying on it must carry the value.
    """
    amap = spec.assignment()
    rep = BoundaryReport()
    for region, value in conditions:
        value = Fraction(value)
        for i, a in sorted(amap.items()):
            sq = sys.map(i).square()
            if isinstance(region, Square):
                if not region.contains_square(sq):
                    continue
                got = a.c if isinstance(a, Constant) else None
                rep.checks.append((i, region, value, got, got == value))
                continue
            for which in ("bottom", "right", "top", "left"):
                e = sq.edge(which)
                if region.contains(e):
                    got, _ = _trace(sys, i, a, e)
                    rep.checks.append((i, region, value, got, got == value))
    return rep


# ---------------------------------------------------------------------------
# energy expressions
# ---------------------------------------------------------------------------


def _iroot(n: int, k: int):
    """Exact integer k-th root of n >= 0, or None."""
    if n < 0:
        return None
    r = int(round(n ** (1.0 / k))) if n < 2**1000 else 1 << (n.bit_length() // k)
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r if r**k == n else None


@dataclass(frozen=True)
class EnergyExpression:
    """``sum coef * base**(-theta)`` times the reference energy ``symbol``."""

    terms: tuple  # ((Fraction, QuadNumber), ...) sorted by base
    symbol: str = "e"

    def single(self):
        if len(self.terms) != 1:
            raise ValueError(f"expression has {len(self.terms)} terms, expected one")
        return self.terms[0]

    def evaluate_exact(self, theta: Fraction):
        """Exact value at rational theta, or None if some power is irrational."""
        theta = Fraction(theta)
        total = Fraction(0)
        for coef, base in self.terms:
            if not base.is_rational:
                if theta.denominator != 1:
                    return None
                v = base ** (-theta.numerator)
                if not v.is_rational:
                    return None
                total += coef * v.as_fraction()
                continue
            b = 1 / base.as_fraction()  # base**(-theta) = b**theta
            num, den = _iroot(b.numerator, theta.denominator), _iroot(b.denominator, theta.denominator)
            if num is None or den is None:
                return None
            total += coef * Fraction(num, den) ** theta.numerator
        return total

    def enclose(self, theta_lo, theta_hi, prec: int = 128):
        """Interval for the value over theta in [theta_lo, theta_hi]."""
        with _iv_precision(prec):
            lo, hi = _iv_of(theta_lo), _iv_of(theta_hi)
            th = iv.mpf([lo.a, hi.b])
            total = iv.mpf(0)
            for coef, base in self.terms:
                b = enclosure(base, prec)
                total += iv.mpf(coef.numerator) / coef.denominator * iv.exp(-th * iv.log(b))
            return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = [f"{c} * ({format_literal(b)})^(-theta)" for c, b in self.terms]
        return " + ".join(parts) + f" * {self.symbol}"


def _iv_of(x):
    """Interval enclosing a rational (or an existing interval)."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return iv.mpf(x.numerator) / x.denominator
    return iv.mpf(x)


def energy_expression(sys: IFSystem, spec: GluingSpec, report: ContinuityReport | None = None) -> EnergyExpression:
    """Scaling-identity energy of a glued function: each Copy on cell i adds
    ``alpha**2 * rho_i**(-theta)``; constants add nothing."""
    rep = verify_continuity(sys, spec) if report is None else report
    if not rep.passed:
        raise UnverifiedSpecError(f"{spec.name}: continuity {rep.status}; refusing to quote an energy")
    merged: dict = {}
    symbols = set()
    for i, a in spec.cells:
        if isinstance(a, Copy):
            r = sys.map(i).ratio
            merged[r] = merged.get(r, Fraction(0)) + a.alpha * a.alpha
            symbols.add(a.ref.symbol)
    if len(symbols) > 1:
        raise ValueError(f"copies of several reference functions: {sorted(symbols)}")
    terms = tuple(sorted(((c, b) for b, c in merged.items()), key=lambda t: t[1]))
    return EnergyExpression(terms, symbols.pop() if symbols else "e")


# ---------------------------------------------------------------------------
# built-in constructions
# ---------------------------------------------------------------------------


def reference_h() -> ReferenceFunction:
    """0 on the right edge L_2, 1 on the left edge L_4, invariant under v."""
    return ReferenceFunction("h", ((unit_edge(2), Fraction(0)), (unit_edge(4), Fraction(1))), (ID, Isometry("v")))


def reference_f(sys: IFSystem) -> ReferenceFunction:
    """0 on the cell F_1, 1 on the cell F_26."""
    return ReferenceFunction("f", ((sys.map(1).square(), Fraction(0)), (sys.map(26).square(), Fraction(1))))


def strip_spec(sys: IFSystem) -> GluingSpec:
    """Copies ``h/4 + k/4`` on the strip cells, k = 3 in the leftmost column."""
    h = reference_h()
    pairs = []
    for i in STRIP:
        col = int(sys.map(i).tx.as_fraction() * 4)
        pairs.append((i, Copy(h, ID, Fraction(1, 4), Fraction(3 - col, 4))))
    return GluingSpec.from_pairs("strip", pairs, STRIP)


def corner_spec(sys: IFSystem) -> GluingSpec:
    """Piecewise copies of ``f/10`` climbing from 0 on F_1 to 1 on F_26."""
    f = reference_f(sys)
    perms = sys.validation.permutations
    d1, h = Isometry("d1"), Isometry("h")
    a: dict = {1: Constant(Fraction(0))}
    # bottom row, left half
    for j in range(1, 7):
        a[2 * j] = Constant(Fraction(j - 1, 10))
    for j in range(1, 6):
        a[2 * j + 1] = Copy(f, ID, Fraction(1, 10), Fraction(j - 1, 10))
    # reflect F_2..F_12 across the diagonal into the left column
    for k in range(2, 13):
        i = perms["d1"][k - 1] + 1
        src = a[k]
        a[i] = src if isinstance(src, Constant) else replace(src, pre=src.pre @ d1)
    # rest of the left half is 1/2
    for i in range(1, sys.n_maps + 1):
        if i not in a and sys.map(i).square().x1 <= Fraction(1, 2):
            a[i] = Constant(Fraction(1, 2))
    # g o h + g = 1 on the right half
    for i in range(1, sys.n_maps + 1):
        if i in a:
            continue
        k = perms["h"][i - 1] + 1
        src = a[k]
        if isinstance(src, Constant):
            a[i] = Constant(1 - src.c)
        else:
            a[i] = Copy(src.ref, src.pre @ h, -src.alpha, 1 - src.beta)
    return GluingSpec.from_pairs("corner", a.items())


# ---------------------------------------------------------------------------
# theta bounds
# ---------------------------------------------------------------------------


def _endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    lo, hi = x._mpi_
    return Fraction(*to_rational(lo)), Fraction(*to_rational(hi))


@dataclass
class ThetaBound:
    """``theta <= or >= log(1/coef) / log(1/base)``."""

    direction: str
    coef: Fraction
    base: QuadNumber
    exact: Fraction | None
    lo: Fraction
    hi: Fraction
    description: str
    steps: list = field(default_factory=list)

    def decimal_enclosure(self, digits: int = 5) -> tuple[str, str]:
        scale = 10**digits
        lo = math.floor(self.lo * scale)
        hi = math.ceil(self.hi * scale)
        return _decimal(lo, digits), _decimal(hi, digits)

    def line(self) -> str:
        if self.exact is not None:
            return f"bound {self.direction} exact {self.exact}"
        lo, hi = self.decimal_enclosure()
        return f"bound {self.direction} {self.description} enclosure {lo} {hi}"


def _decimal(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 10**digits}.{n % 10**digits:0{digits}d}"


def _exact_log_ratio(x: Fraction, y: QuadNumber) -> Fraction | None:
    """p/q with ``x**q == y**p`` if log(x)/log(y) is rational (small q)."""
    if x == 1:
        return Fraction(0)
    approx = math.log(x) / math.log(float(y))
    cand = Fraction(approx).limit_denominator(1000)
    p, q = cand.numerator, cand.denominator
    if QuadNumber.coerce(x) ** q == y**p:
        return cand
    return None


def theta_bound(direction: str, coef, base, base_label: str | None = None, prec: int = 128) -> ThetaBound:
    """Bound from comparing ``coef * base**(-theta)`` with 1."""
    if direction not in ("upper", "lower"):
        raise ValueError(f"direction must be upper or lower, got {direction!r}")
    coef = Fraction(coef)
    base = QuadNumber.coerce(base)
    if coef <= 0:
        raise ValueError("coefficient must be positive")
    if not (ZERO < base < ONE):
        raise ValueError(f"base {base} outside (0, 1)")
    x = 1 / coef
    y = 1 / base
    exact = _exact_log_ratio(x, y)
    with _iv_precision(prec):
        b = enclosure(base, prec)
        val = iv.log(iv.mpf(x.numerator) / x.denominator) / (-iv.log(b))
        lo, hi = _endpoints(val)
    if exact is not None:
        lo = hi = exact
    label = base_label if base_label else format_literal(base)
    desc = f"log({x})/log(1/{label})" if base_label else f"log({x})/log({format_literal(y)})"
    rel = "<=" if direction == "upper" else ">="
    cmp = "1 >=" if direction == "upper" else "1 <="
    steps = [
        f"{cmp} {coef} * ({label})^(-theta)",
        f"theta {rel} {desc}" + (f" = {exact}" if exact is not None else ""),
    ]
    return ThetaBound(direction, coef, base, exact, lo, hi, desc, steps)


def upper_bound_from_expression(expr: EnergyExpression, base_label=None) -> ThetaBound:
    c, b = expr.single()
    return theta_bound("upper", c, b, base_label)


def lower_bound_from_expression(expr: EnergyExpression, base_label=None) -> ThetaBound:
    c, b = expr.single()
    return theta_bound("lower", c, b, base_label)


def _require(ok: bool, step: str, msg: str, steps: list):
    if not ok:
        raise ClaimError(step, msg)
    steps.append(f"[ok] {step}: {msg}")


def tiles_rectangle(squares, x0, x1, y0, y1) -> bool:
    """Exact tiling test for pairwise non-overlapping squares: containment
    plus equal total area."""
    x0, x1, y0, y1 = (QuadNumber.coerce(v) for v in (x0, x1, y0, y1))
    rect = (x0, x1, y0, y1)
    area = ZERO
    for s in squares:
        if not (rect[0] <= s.x0 and s.x1 <= rect[1] and rect[2] <= s.y0 and s.y1 <= rect[3]):
            return False
        area = area + s.side * s.side
    return area == (x1 - x0) * (y1 - y0)


def claim1_upper_bound(sys: IFSystem) -> ThetaBound:
    """Upper bound on theta from the horizontal strip through the center."""
    steps: list = []
    _require(sys.n_maps >= max(STRIP), "system", f"{sys.n_maps} maps, strip cells need 104", steps)
    _require(sys.validation.passed, "validate", "all four axioms hold", steps)
    sq = [sys.map(i).square() for i in STRIP]
    _require(tiles_rectangle(sq, 0, 1, Fraction(1, 4), Fraction(3, 4)), "strip", "S tiles [0,1]x[1/4,3/4]", steps)
    spec = strip_spec(sys)
    rep = verify_continuity(sys, spec)
    _require(rep.passed, "continuity", f"{len(rep.checks)} shared segments agree", steps)
    left = Segment((ZERO, QuadNumber.coerce(Fraction(1, 4))), (ZERO, QuadNumber.coerce(Fraction(3, 4))))
    right = Segment((ONE, QuadNumber.coerce(Fraction(1, 4))), (ONE, QuadNumber.coerce(Fraction(3, 4))))
    bnd = check_boundary(sys, spec, [(left, 1), (right, 0)])
    _require(bnd.passed, "boundary", "glued function is 1 on the left edge, 0 on the right edge", steps)
    expr = energy_expression(sys, spec, rep)
    steps.append(f"energy of glued function = {expr}")
    steps.append("[axiom restriction] E(h) >= E_S(h restricted to the strip)")
    steps.append("[axiom symmetric-gluing] E_S minimum = energy of glued function")
    steps.append(f"hence e_h >= {expr}")
    bound = upper_bound_from_expression(expr)
    bound.steps = steps + bound.steps
    return bound


def claim2_lower_bound(sys: IFSystem) -> ThetaBound:
    """Lower bound on theta from the corner-to-corner gluing."""
    steps: list = []
    _require(sys.n_maps >= 26, "system", f"{sys.n_maps} maps, corner cells need 26", steps)
    _require(sys.validation.passed, "validate", "all four axioms hold", steps)
    spec = corner_spec(sys)
    rep = verify_continuity(sys, spec)
    _require(rep.passed, "continuity", f"{len(rep.checks)} shared segments agree", steps)
    bnd = check_boundary(sys, spec, [(sys.map(1).square(), 0), (sys.map(26).square(), 1)])
    _require(bnd.passed, "boundary", "glued function is 0 on F_1 and 1 on F_26", steps)
    expr = energy_expression(sys, spec, rep)
    steps.append(f"energy of glued function = {expr}")
    steps.append("f is eps-optimal for R(F_1, F_26); the glued function competes in the same problem")
    steps.append(f"hence {expr} >= e_f - eps; let eps -> 0")
    label = "a" if sys.name == "carpet104" else None
    bound = lower_bound_from_expression(expr, label)
    bound.steps = steps + bound.steps
    return bound


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------


@dataclass
class ContradictionCertificate:
    upper: ThetaBound
    lower: ThetaBound
    verdict: str  # contradiction | no contradiction | undecided
    witness: str | None
    chain: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [self.upper.line(), self.lower.line()]
        if self.witness:
            out.append(f"witness {self.witness}")
        out.append(f"verdict {self.verdict}")
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def certify(upper: ThetaBound, lower: ThetaBound) -> ContradictionCertificate:
    """Decide ``lower > upper`` strictly, in exact arithmetic when the upper
    bound is rational."""
    if upper.exact is None:
        if lower.lo > upper.hi:
            return ContradictionCertificate(upper, lower, "contradiction", None, ["enclosures are disjoint"])
        if lower.hi <= upper.lo:
            return ContradictionCertificate(upper, lower, "no contradiction", None, ["enclosures are ordered"])
        return ContradictionCertificate(upper, lower, "undecided", None, ["enclosures overlap"])
    p, q = upper.exact.numerator, upper.exact.denominator
    b, c = lower.base, QuadNumber.coerce(lower.coef)
    bp, cq = b**p, c**q
    diff = bp - cq
    chain = [
        f"lower > {upper.exact}  <=>  q*log(1/C) > p*log(1/b) with p/q = {p}/{q}",
        f"  <=>  b^{p} > C^{q}, i.e. {format_literal(bp)} > {format_literal(cq)}",
        f"  <=>  {format_literal(diff)} > 0",
    ]
    if diff.is_rational:
        fb, fc = bp.as_fraction(), cq.as_fraction()
        lhs, rhs = fb.numerator * fc.denominator, fc.numerator * fb.denominator
        rel = ">" if lhs > rhs else "<" if lhs < rhs else "="
        witness = f"{lhs} {rel} {rhs}"
        positive = lhs > rhs
    else:
        w = sign_witness(diff)
        witness = str(w)
        positive = w.sign > 0
        if w.rhs != 0:
            chain.append(f"  <=>  q^2 D vs p^2 for the numerator: {w}")
    chain.append(f"witness {witness}")
    verdict = "contradiction" if positive else "no contradiction"
    return ContradictionCertificate(upper, lower, verdict, witness, chain)


def contradiction_certificate(sys: IFSystem) -> ContradictionCertificate:
    return certify(claim1_upper_bound(sys), claim2_lower_bound(sys))


def derivation_log(sys: IFSystem) -> list[str]:
    up = claim1_upper_bound(sys)
    lo = claim2_lower_bound(sys)
    cert = certify(up, lo)
    out = ["# upper bound"] + up.steps + ["# lower bound"] + lo.steps + ["# comparison"] + cert.chain
    out.append(f"verdict {cert.verdict}")
    return out
