"""Command-line entry point: ``carpetbench <subcommand> [options]``."""
from __future__ import annotations

import os

# BLAS threads must be pinned before numpy is first imported.
_threads = os.environ.get("LSC_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import configparser  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
import time  # noqa: E402
from dataclasses import dataclass, field  # noqa: E402

import numpy as np  # noqa: E402

from . import catalog  # noqa: E402
from .cellgraph import (  # noqa: E402
    BudgetExceededError,
    ConductanceRule,
    RegionSelector,
    UnvalidatedSystemError,
    build_graph,
    export_graph,
    format_word,
    select,
)
from .geometry import DimensionError, IFSFormatError, MalformedSystemError, hausdorff_dimension, read_ifs, dump_ifs  # noqa: E402
from .potential import (  # noqa: E402
    ConvergenceError,
    DisconnectedGraphError,
    EnergyForm,
    capacity,
    effective_resistance,
    poincare_constant,
    resistance_constant,
    vertex_masses,
)

CSV_HEADER = "system,level,rule,problem,setA,setB,R,energy,residual,iters,seconds"
DEFAULT_BUDGET = {"carpet104": 3, "sc8": 6}
MAX_CELLS = 2_000_000
PROBLEMS = ("crossing", "corner", "poincare", "rnconst")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """CSV number: shortest round-trip decimal, or ``inf``."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def csv_row(system, level, rule, problem, set_a, set_b, value, energy, residual, iters, seconds) -> str:
    cells = [system, str(level), rule, problem, str(set_a), str(set_b)]
    cells += [fmt(value), fmt(energy), fmt(residual), fmt(iters), fmt(seconds)]
    return ",".join(cells)


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------


def read_budget_config(path) -> dict:
    """``budget.<system> = <max level>`` lines; other keys are ignored."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_string("[main]\n" + fh.read())
    out = {}
    for key, value in parser["main"].items():
        if key.startswith("budget."):
            try:
                out[key[len("budget.") :]] = int(value)
            except ValueError:
                raise UsageError(f"{path}: {key} must be an integer, got {value!r}") from None
    return out


def level_budget(sys_, override=None, table=None) -> int:
    if override is not None:
        return override
    table = DEFAULT_BUDGET if table is None else table
    if sys_.name in table:
        return table[sys_.name]
    return max(1, int(math.log(MAX_CELLS) / math.log(sys_.n_maps)))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    label: str
    levels: list
    values: list
    slope: float
    intercept: float
    residual: float
    ratios: list

    def lines(self) -> list[str]:
        vals = " ".join(fmt(v) for v in self.values)
        ratios = " ".join(fmt(r) for r in self.ratios)
        return [
            f"fit {self.label} levels {self.levels[0]}..{self.levels[-1]} values {vals}",
            f"fit {self.label} slope {fmt(self.slope)} intercept {fmt(self.intercept)} residual {fmt(self.residual)}",
            f"fit {self.label} ratios {ratios}",
        ]


def fit_growth(levels, values, label="") -> FitResult:
    """Least-squares line through ``(level, log value)``."""
    if len(levels) < 2:
        raise ValueError("a fit needs at least two levels")
    y = np.asarray(values, dtype=np.float64)
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("fit needs positive finite values")
    x = np.asarray(levels, dtype=np.float64)
    A = np.column_stack([x, np.ones_like(x)])
    ly = np.log(y)
    coef = np.linalg.lstsq(A, ly, rcond=None)[0]
    res = ly - A @ coef
    rms = float(np.sqrt(np.mean(res * res)))
    ratios = [float(y[k + 1] / y[k]) for k in range(len(y) - 1)]
    return FitResult(label, list(levels), [float(v) for v in y], float(coef[0]), float(coef[1]), rms, ratios)


@dataclass
class ExperimentPlan:
    system: object  # IFSystem
    levels: tuple  # inclusive (a, b)
    problems: list = field(default_factory=lambda: ["crossing"])
    rule: ConductanceRule = field(default_factory=ConductanceRule)
    corner_edges: bool = False
    tol: float = 1e-10
    weighting: str = "uniform"
    budget: int | None = None
    timing: bool = False

    def max_level(self, problem: str, level: int) -> int:
        return level + 1 if problem == "rnconst" else level

    def check(self):
        a, b = self.levels
        if a < 1 or b < a:
            raise UsageError(f"bad level range {a}..{b}")
        for p in self.problems:
            if p not in PROBLEMS:
                raise UsageError(f"unknown problem {p!r}; choose from {', '.join(PROBLEMS)}")
            if p == "corner" and self.system.n_maps < 26:
                raise UsageError("corner problem needs at least 26 maps")
        cap = level_budget(self.system, self.budget)
        for p in self.problems:
            need = self.max_level(p, b)
            if need > cap:
                raise UsageError(f"problem {p} needs level {need}, budget for {self.system.name} is {cap}")


@dataclass
class ExperimentReport:
    rows: list
    fits: list
    notes: list

    def csv(self) -> str:
        return "\n".join([CSV_HEADER] + self.rows) + "\n"


def _solve_problem(plan, g, problem):
    """Returns (setA, setB, value, energy, residual, iters)."""
    if problem in ("crossing", "corner"):
        sa, sb = ("edge:left", "edge:right") if problem == "crossing" else ("prefix:1", "prefix:26")
        form = EnergyForm.from_graph(g, plan.corner_edges)
        r = effective_resistance(form, select(g, sa), select(g, sb), tol=plan.tol)
        sol = r.solution
        return sa, sb, r.R, r.energy, sol.residual if sol else 0.0, sol.iterations if sol else 0
    if problem == "poincare":
        form = EnergyForm.from_graph(g, plan.corner_edges)
        p = poincare_constant(form, plan.weighting)
        return plan.weighting, "", p.lam, p.eigenvalue, p.residual, p.iterations
    raise ValueError(problem)


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    plan.check()
    sys_ = plan.system
    a, b = plan.levels
    rows, values, notes = [], {p: [] for p in plan.problems}, []
    label = plan.rule.label + ("(heuristic)" if plan.rule.kind == "theta" else "")
    for level in range(a, b + 1):
        g = None
        for p in plan.problems:
            t0 = time.perf_counter()
            if p == "rnconst":
                rc = resistance_constant(sys_, level, 1, plan.rule, plan.corner_edges, plan.tol)
                out = (format_word(rc.argmin), "C_w", rc.value, 1.0 / rc.value, rc.max_residual, rc.total_iterations)
                notes.append(f"rnconst n={level}: {rc.note}")
            else:
                if g is None:
                    g = build_graph(sys_, level, plan.rule)
                out = _solve_problem(plan, g, p)
            secs = time.perf_counter() - t0 if plan.timing else 0
            rows.append(csv_row(sys_.name, level, label, p, *out, secs))
            values[p].append(out[2])
    fits = []
    levels = list(range(a, b + 1))
    if len(levels) >= 2:
        for p in plan.problems:
            if all(0 < v < math.inf for v in values[p]):
                fits.append(fit_growth(levels, values[p], p))
        if "crossing" in values and "corner" in values:
            ratio = [c / x for c, x in zip(values["corner"], values["crossing"])]
            fits.append(fit_growth(levels, ratio, "corner/crossing"))
            inc = all(ratio[k + 1] > ratio[k] for k in range(len(ratio) - 1))
            notes.append(f"corner/crossing strictly increasing: {'yes' if inc else 'no'}")
    return ExperimentReport(rows, fits, notes)


def probe_scaling_constants(sys_, ns=(1, 2), ms=(1, 2), rule=None, tol=1e-10) -> dict:
    """Empirical constants in ``R_n lam_m <= C lam_{n+m}`` and
    ``lam_{n+m} <= C lam_n lam_m`` over the given ranges.

    ``R_n`` is truncated at m = 1.
    """
    rule = rule or ConductanceRule()
    top = max(ns) + max(ms)
    lam = {}
    for k in range(1, top + 1):
        g = build_graph(sys_, k, rule)
        lam[k] = poincare_constant(EnergyForm.from_graph(g)).lam
    rn = {n: resistance_constant(sys_, n, 1, rule, tol=tol).value for n in ns}
    c_lower = max(rn[n] * lam[m] / lam[n + m] for n in ns for m in ms)
    c_upper = max(lam[n + m] / (lam[n] * lam[m]) for n in ns for m in ms)
    return {"lambda": lam, "R": rn, "C_lower": c_lower, "C_upper": c_upper}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def parse_levels(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return int(a), int(b)
        n = int(text)
        return n, n
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like 1..3, got {text!r}") from None


def _rule(text):
    try:
        return ConductanceRule.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--system", default=None, help="built-in system: " + ", ".join(sorted(catalog.CATALOG)))
    src.add_argument("--ifs", default=None, help="IFS text file")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--budget", type=int, default=None, help="maximum level allowed")
    common.add_argument("--config", default=None, help="file with budget.<system> = <level> lines")
    common.add_argument("--timing", action="store_true", help="fill the seconds column (breaks byte-identity)")

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--level", type=int, default=1)
    solve.add_argument("--rule", type=_rule, default=ConductanceRule(), help="unit | theta:<x>")
    solve.add_argument("--corner-edges", action="store_true", help="also use point contacts as edges")
    solve.add_argument("--tol", type=float, default=1e-10)

    p = argparse.ArgumentParser(prog="carpetbench", description="Exact carpet geometry and cell-graph energies.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the carpet axioms exactly")
    d = sub.add_parser("dim", parents=[common], help="similarity dimension")
    d.add_argument("--tol", type=float, default=1e-12)
    sub.add_parser("graph", parents=[common, solve], help="build a cell graph and summarise or export it")
    r = sub.add_parser("resistance", parents=[common, solve], help="effective resistance between two selectors")
    r.add_argument("--from", dest="set_a", required=True)
    r.add_argument("--to", dest="set_b", required=True)
    pc = sub.add_parser("poincare", parents=[common, solve], help="Poincare constant of a cell graph")
    pc.add_argument("--weighting", choices=("uniform", "hausdorff"), default="uniform")
    rn = sub.add_parser("rnconst", parents=[common, solve], help="resistance constant R_n at fixed m")
    rn.add_argument("--m", type=int, default=1)
    cap = sub.add_parser("capacity", parents=[common, solve], help="discrete capacity of a selector")
    cap.add_argument("--from", dest="set_a", required=True)
    cap.add_argument("--masses", choices=("measure", "uniform", "unit"), default="measure")
    sub.add_parser("claims", parents=[common], help="derive the theta bounds and the certificate")
    sc = sub.add_parser("scan", parents=[common, solve], help="problems over a level range, with growth fits")
    sc.add_argument("--levels", type=parse_levels, default=(1, 2))
    sc.add_argument("--problems", default="crossing,corner")
    sc.add_argument("--weighting", choices=("uniform", "hausdorff"), default="uniform")
    sc.add_argument("--probe", action="store_true", help="also report scaling-inequality constants over n, m in {1, 2}")
    sub.add_parser("export-ifs", parents=[common], help="write a system in the IFS text format")
    return p


def load_system(args):
    if args.ifs:
        return read_ifs(args.ifs)
    try:
        return catalog.build(args.system or "carpet104")
    except KeyError as e:
        raise UsageError(e.args[0]) from None


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _budget_for(args, sys_) -> int:
    table = dict(DEFAULT_BUDGET)
    if args.config:
        table.update(read_budget_config(args.config))
    return level_budget(sys_, args.budget, table)


def _graph(args, sys_, level):
    cap = _budget_for(args, sys_)
    if level < 0 or level > cap:
        raise UsageError(f"level {level} outside budget 0..{cap} for {sys_.name}")
    return build_graph(sys_, level, args.rule)


def _selector(text, sys_):
    try:
        return RegionSelector.parse(text, sys_.radicand)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_validate(args, sys_):
    rep = sys_.validation
    lines = rep.lines() + catalog.consistency_audit(sys_).lines()
    _emit(args, "\n".join(lines) + "\n")
    return 0 if rep.passed else 1


def cmd_dim(args, sys_):
    r = hausdorff_dimension(sys_, tol=args.tol)
    text = f"system {sys_.name}\ndimension {r.dimension!r}\nresidual {fmt(r.residual)}\n"
    text += f"bracket {r.bracket[0]!r} {r.bracket[1]!r}\niterations {r.iterations}\n"
    _emit(args, text)
    return 0


def cmd_graph(args, sys_):
    g = _graph(args, sys_, args.level)
    if args.out:
        _emit(args, export_graph(g, args.corner_edges))
    n_seg = int(np.sum(g.kinds == 0))
    sys.stdout.write(
        f"system {sys_.name} level {g.level} vertices {g.n_vertices} edges {len(g.edges)} "
        f"segment {n_seg} point {len(g.edges) - n_seg} components {g.n_components()}\n"
    )
    return 0


def cmd_resistance(args, sys_):
    g = _graph(args, sys_, args.level)
    sa, sb = _selector(args.set_a, sys_), _selector(args.set_b, sys_)
    t0 = time.perf_counter()
    r = effective_resistance(EnergyForm.from_graph(g, args.corner_edges), select(g, sa), select(g, sb), tol=args.tol)
    secs = time.perf_counter() - t0 if args.timing else 0
    sol = r.solution
    row = csv_row(
        sys_.name, g.level, args.rule.label, "resistance", sa, sb, r.R, r.energy,
        sol.residual if sol else 0.0, sol.iterations if sol else 0, secs,
    )
    _emit(args, CSV_HEADER + "\n" + row + "\n")
    return 0


def cmd_poincare(args, sys_):
    g = _graph(args, sys_, args.level)
    t0 = time.perf_counter()
    p = poincare_constant(EnergyForm.from_graph(g, args.corner_edges), args.weighting)
    secs = time.perf_counter() - t0 if args.timing else 0
    row = csv_row(sys_.name, g.level, args.rule.label, "poincare", args.weighting, "", p.lam, p.eigenvalue, p.residual, p.iterations, secs)
    _emit(args, CSV_HEADER + "\n" + row + "\n")
    return 0


def cmd_capacity(args, sys_):
    g = _graph(args, sys_, args.level)
    sa = _selector(args.set_a, sys_)
    form = EnergyForm.from_graph(g, args.corner_edges)
    if args.masses == "measure":
        m = vertex_masses(form, "hausdorff")
    elif args.masses == "uniform":
        m = vertex_masses(form, "uniform")
    else:
        m = np.ones(form.n)
    t0 = time.perf_counter()
    c = capacity(form, m, select(g, sa), tol=args.tol)
    secs = time.perf_counter() - t0 if args.timing else 0
    row = csv_row(
        sys_.name, g.level, args.rule.label, f"capacity({args.masses})", sa, "", c.value,
        form.energy(c.potentials), c.residual, c.iterations, secs,
    )
    _emit(args, CSV_HEADER + "\n" + row + "\n")
    return 0


def cmd_rnconst(args, sys_):
    n, m = args.level, args.m
    cap = _budget_for(args, sys_)
    if n + m > cap:
        raise UsageError(f"level {n + m} exceeds budget {cap} for {sys_.name}")
    t0 = time.perf_counter()
    rc = resistance_constant(sys_, n, m, args.rule, args.corner_edges, args.tol)
    secs = time.perf_counter() - t0 if args.timing else 0
    row = csv_row(
        sys_.name, n, args.rule.label, f"rnconst(m={m})", format_word(rc.argmin), "C_w", rc.value,
        1.0 / rc.value, rc.max_residual, rc.total_iterations, secs,
    )
    _emit(args, CSV_HEADER + "\n" + row + "\n")
    sys.stdout.write(f"# {rc.note}; {len(rc.orbits)} orbit representatives solved\n")
    return 0


def cmd_claims(args, sys_):
    from .claims import certify, claim1_upper_bound, claim2_lower_bound

    up = claim1_upper_bound(sys_)
    lo = claim2_lower_bound(sys_)
    cert = certify(up, lo)
    log = ["# upper bound"] + up.steps + ["# lower bound"] + lo.steps + ["# comparison"] + cert.chain
    sys.stdout.write("\n".join(log) + "\n")
    if args.out:
        _emit(args, cert.text())
    else:
        sys.stdout.write(cert.text())
    return 0


def cmd_scan(args, sys_):
    plan = ExperimentPlan(
        sys_,
        args.levels,
        [p.strip() for p in args.problems.split(",") if p.strip()],
        args.rule,
        args.corner_edges,
        args.tol,
        args.weighting,
        _budget_for(args, sys_),
        args.timing,
    )
    rep = run_experiment(plan)
    _emit(args, rep.csv())
    lines = []
    for f in rep.fits:
        lines += f.lines()
    lines += rep.notes
    if args.probe:
        pr = probe_scaling_constants(sys_, rule=args.rule, tol=args.tol)
        lines.append("probe lambda " + " ".join(f"{k}:{fmt(v)}" for k, v in sorted(pr["lambda"].items())))
        lines.append("probe R " + " ".join(f"{k}:{fmt(v)}" for k, v in sorted(pr["R"].items())) + " (m = 1)")
        lines.append(f"probe C_lower {fmt(pr['C_lower'])} C_upper {fmt(pr['C_upper'])}")
    if lines:
        sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_export_ifs(args, sys_):
    _emit(args, dump_ifs(sys_))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "dim": cmd_dim,
    "graph": cmd_graph,
    "resistance": cmd_resistance,
    "poincare": cmd_poincare,
    "rnconst": cmd_rnconst,
    "capacity": cmd_capacity,
    "claims": cmd_claims,
    "scan": cmd_scan,
    "export-ifs": cmd_export_ifs,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sys_ = load_system(args)
        return COMMANDS[args.command](args, sys_)
    except (UsageError, IFSFormatError, BudgetExceededError, FileNotFoundError) as e:
        where = f"{args.ifs}: " if isinstance(e, IFSFormatError) else ""
        print(f"carpetbench: {where}{e}", file=sys.stderr)
        return 2
    except (
        ConvergenceError,
        DisconnectedGraphError,
        DimensionError,
        MalformedSystemError,
        UnvalidatedSystemError,
        ArithmeticError,
        RuntimeError,
        ValueError,
    ) as e:
        print(f"carpetbench: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
