"""Built-in systems: the standard carpet and a 104-map carpet-like system.

Map indices are 1-based, so index sets such as {38, 39, 88, 89, 101, 102,
103, 104} refer to the maps F_38, ..., F_104 directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import QuadNumber
from .geometry import IFSystem, Isometry, Similarity

RADICAND = 42

# a = sqrt(7/24) - 1/2 = (-6 + sqrt(42)) / 12, the positive root of 6(a^2 + a) = 1/4
A = QuadNumber(-6, 1, 12, RADICAND)
A2 = A * A
QUARTER = QuadNumber(1, 0, 4)


def _sim(ratio, tx, ty=0) -> Similarity:
    return Similarity(QuadNumber.coerce(ratio), QuadNumber.coerce(tx), QuadNumber.coerce(ty))


def carpet104() -> IFSystem:
    """The 104-map carpet-like system with ratios a, a^2 and 1/4."""
    base = {}
    for j in range(6):
        base[2 * j + 1] = _sim(A, Fraction(j, 24))
        base[2 * j + 2] = _sim(A2, A + Fraction(j, 24))
    base[13] = _sim(QUARTER, QUARTER)
    h = Isometry("h")
    for i in range(14, 27):
        base[i] = base[27 - i].conjugate(h)
    maps = dict(base)
    rot = {1: Isometry("r1"), 2: Isometry("r2"), 3: Isometry("r3")}
    for j in (1, 2, 3):
        for i in range(1, 26):
            # F_26 is defined twice (reflection and rotation); consistency_audit checks they agree
            maps[i + 25 * j] = base[i].conjugate(rot[j])
    maps[101] = _sim(QUARTER, QUARTER, QUARTER)
    maps[102] = _sim(QUARTER, Fraction(1, 2), QUARTER)
    maps[103] = _sim(QUARTER, Fraction(1, 2), Fraction(1, 2))
    maps[104] = _sim(QUARTER, QUARTER, Fraction(1, 2))
    return IFSystem("carpet104", RADICAND, tuple(maps[i] for i in range(1, 105)), k=4)


def sc8() -> IFSystem:
    """Standard Sierpinski carpet, cells numbered counter-clockwise from the
    lower-left corner."""
    third = Fraction(1, 3)
    grid = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
    maps = tuple(_sim(third, third * i, third * j) for i, j in grid)
    return IFSystem("sc8", 2, maps, k=3)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: object
    doc: str


CATALOG = {
    "carpet104": CatalogEntry(
        "carpet104",
        carpet104,
        "104 homotheties: 44 of ratio a, 48 of ratio a^2, 12 of ratio 1/4, "
        "a = sqrt(7/24) - 1/2",
    ),
    "sc8": CatalogEntry("sc8", sc8, "standard Sierpinski carpet, 8 maps of ratio 1/3"),
}


def build(name: str) -> IFSystem:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    return entry.builder()


def ratio_census(sys: IFSystem) -> dict:
    out: dict = {}
    for m in sys.maps:
        out[m.ratio] = out.get(m.ratio, 0) + 1
    return out


@dataclass
class AuditReport:
    passed: bool
    checks: list = field(default_factory=list)  # (name, ok, detail)

    def lines(self):
        return [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in self.checks]


def consistency_audit(sys: IFSystem) -> AuditReport:
    """Cross-check overlapping definition rules and distinctness of cells."""
    checks = []
    if sys.name == "carpet104" and sys.n_maps == 104:
        f1 = sys.map(1)
        by_rotation = f1.conjugate(Isometry("r1"))
        by_reflection = f1.conjugate(Isometry("h"))
        checks.append(
            (
                "corner F_26",
                by_rotation == by_reflection == sys.map(26),
                f"r1 F_1 r3 = {_fmt(by_rotation)}, h F_1 h = {_fmt(by_reflection)}",
            )
        )
    squares = sys.squares
    distinct = len(set(squares)) == len(squares)
    checks.append(("distinct squares", distinct, f"{len(set(squares))} of {len(squares)} distinct"))
    return AuditReport(all(ok for _, ok, _ in checks), checks)


def _fmt(m: Similarity) -> str:
    return f"x -> {m.ratio} x + ({m.tx}, {m.ty})"
