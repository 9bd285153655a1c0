"""Quadratic energies on weighted graphs and their extremal quantities."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .cellgraph import CellGraph, ConductanceRule, UNIT, build_graph, complement_nonneighbors, format_word, index_to_word
from .geometry import IFSystem

DENSE_LIMIT = 4000


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None, iterations=None):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class DisconnectedGraphError(ValueError):
    pass


@dataclass
class EnergyForm:
    """``E(f) = sum_e c_e (f(u) - f(v))**2`` over an edge list.

    Parallel edges are allowed and add up.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    c: np.ndarray
    graph: CellGraph | None = None
    _lap: sp.csr_matrix | None = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, n, edges, conductances=None) -> "EnergyForm":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        c = np.ones(len(e)) if conductances is None else np.asarray(conductances, dtype=np.float64)
        if np.any(c <= 0):
            raise ValueError("conductances must be positive")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        return cls(int(n), e[:, 0].copy(), e[:, 1].copy(), c)

    @classmethod
    def from_graph(cls, g: CellGraph, corner_edges: bool = False) -> "EnergyForm":
        m = g.edge_mask(corner_edges)
        return cls(g.n_vertices, g.edges[m, 0].copy(), g.edges[m, 1].copy(), g.conductance[m].copy(), g)

    @property
    def laplacian(self) -> sp.csr_matrix:
        if self._lap is None:
            n = self.n
            w = sp.coo_matrix(
                (np.concatenate([self.c, self.c]), (np.concatenate([self.u, self.v]), np.concatenate([self.v, self.u]))),
                shape=(n, n),
            ).tocsr()
            deg = np.asarray(w.sum(axis=1)).ravel()
            self._lap = (sp.diags(deg) - w).tocsr()
        return self._lap

    def energy(self, f) -> float:
        f = np.asarray(f, dtype=np.float64)
        d = f[self.u] - f[self.v]
        return float(np.sum(self.c * d * d))

    def components(self) -> np.ndarray:
        adj = sp.coo_matrix((np.ones(len(self.u)), (self.u, self.v)), shape=(self.n, self.n))
        return connected_components(adj, directed=False)[1]

    def without_edge(self, k: int) -> "EnergyForm":
        keep = np.ones(len(self.u), dtype=bool)
        keep[k] = False
        return EnergyForm(self.n, self.u[keep], self.v[keep], self.c[keep])


# ---------------------------------------------------------------------------
# linear solver
# ---------------------------------------------------------------------------


def pcg(A, b, tol=1e-10, maxiter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients for SPD ``A``.

    Returns ``(x, iterations, relative_residual)``; raises ConvergenceError if
    the relative residual is still above ``tol`` after ``maxiter`` steps.
    """
    n = len(b)
    if maxiter is None:
        maxiter = max(int(math.ceil(50 * math.sqrt(n))), 1)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    dinv = 1.0 / A.diagonal()
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - A @ x
    z = dinv * r
    p = z.copy()
    tmp = np.empty(n)
    rz = float(r @ z)
    res = float(np.linalg.norm(r)) / bnorm
    it = 0
    # in-place updates: at 10^6 unknowns the temporaries dominate the cost
    while res > tol and it < maxiter:
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        np.multiply(p, alpha, out=tmp)
        x += tmp
        np.multiply(Ap, alpha, out=tmp)
        r -= tmp
        np.multiply(dinv, r, out=z)
        rz_new = float(r @ z)
        p *= rz_new / rz
        p += z
        rz = rz_new
        it += 1
        res = math.sqrt(float(r @ r)) / bnorm
    if res > tol:
        # recompute the true residual before giving up; recurrences drift
        res = float(np.linalg.norm(b - A @ x)) / bnorm
        if res > tol:
            raise ConvergenceError(f"CG stopped at relative residual {res:.3e} after {it} iterations", res, it)
    return x, it, res


# ---------------------------------------------------------------------------
# effective resistance
# ---------------------------------------------------------------------------


@dataclass
class HarmonicSolution:
    potentials: np.ndarray
    A: np.ndarray
    B: np.ndarray
    energy: float
    residual: float
    iterations: int


@dataclass
class ResistanceResult:
    R: float  # math.inf when A and B are not connected
    solution: HarmonicSolution | None
    connected: bool = True

    @property
    def energy(self) -> float:
        return self.solution.energy if self.solution else 0.0


def _as_index_set(s, n, name):
    arr = np.unique(np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64))
    if len(arr) == 0:
        raise ValueError(f"{name} is empty")
    if arr[0] < 0 or arr[-1] >= n:
        raise ValueError(f"{name} has vertices out of range")
    return arr


def _dirichlet_setup(form: EnergyForm, A, B):
    A = _as_index_set(A, form.n, "A")
    B = _as_index_set(B, form.n, "B")
    if len(np.intersect1d(A, B)):
        raise ValueError("A and B overlap")
    comp = form.components()
    both = np.intersect1d(comp[A], comp[B])
    f = np.zeros(form.n)
    f[B] = 1.0
    fixed = np.zeros(form.n, dtype=bool)
    fixed[A] = fixed[B] = True
    # components that contain no boundary vertex have no harmonic extension; leave them at 0
    touched = np.isin(comp, np.union1d(comp[A], comp[B]))
    free = np.nonzero(~fixed & touched)[0]
    return A, B, f, free, len(both) > 0


def effective_resistance(form: EnergyForm, A, B, tol: float = 1e-10, maxiter=None) -> ResistanceResult:
    """Resistance between vertex sets via the Dirichlet problem f|A = 0, f|B = 1.

    Constraints are eliminated; the reduced system is solved by Jacobi-PCG.
    """
    A, B, f, free, connected = _dirichlet_setup(form, A, B)
    if not connected:
        return ResistanceResult(math.inf, None, False)
    L = form.laplacian
    it, res = 0, 0.0
    if len(free):
        Lff = L[free][:, free].tocsr()
        rhs = -np.asarray(L[free][:, B].sum(axis=1)).ravel()
        x, it, res = pcg(Lff, rhs, tol=tol, maxiter=maxiter)
        f[free] = x
    e = form.energy(f)
    sol = HarmonicSolution(f, A, B, e, res, it)
    return ResistanceResult(1.0 / e, sol, True)


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------


@dataclass
class CapacityResult:
    value: float
    potentials: np.ndarray
    residual: float
    iterations: int


def capacity(form: EnergyForm, masses, A, tol: float = 1e-10, maxiter=None) -> CapacityResult:
    """``min E(f) + sum_v m_v f(v)**2`` subject to ``f = 1`` on A."""
    m = np.asarray(masses, dtype=np.float64)
    if m.shape != (form.n,) or np.any(m <= 0):
        raise ValueError("masses must be positive, one per vertex")
    A = _as_index_set(A, form.n, "A")
    f = np.zeros(form.n)
    f[A] = 1.0
    free = np.setdiff1d(np.arange(form.n), A)
    L = form.laplacian
    it, res = 0, 0.0
    if len(free):
        K = (L[free][:, free] + sp.diags(m[free])).tocsr()
        rhs = -np.asarray(L[free][:, A].sum(axis=1)).ravel()
        x, it, res = pcg(K, rhs, tol=tol, maxiter=maxiter)
        f[free] = x
    value = form.energy(f) + float(np.sum(m * f * f))
    return CapacityResult(value, f, res, it)


# ---------------------------------------------------------------------------
# Poincare constant
# ---------------------------------------------------------------------------


@dataclass
class PoincareResult:
    lam: float
    vector: np.ndarray
    weighting: str
    residual: float
    eigenvalue: float  # smallest nonzero generalized eigenvalue
    iterations: int = 0


def vertex_masses(form: EnergyForm, weighting: str = "uniform", d_h: float | None = None) -> np.ndarray:
    """Probability weights on vertices: uniform, or self-similar measure of each cell."""
    if weighting == "uniform":
        return np.full(form.n, 1.0 / form.n)
    if weighting == "hausdorff":
        if form.graph is None:
            raise ValueError("hausdorff weighting needs a cell graph")
        if d_h is None:
            from .geometry import hausdorff_dimension

            d_h = hausdorff_dimension(form.graph.system).dimension
        w = form.graph.sides() ** d_h
        return w / w.sum()
    raise ValueError(f"unknown weighting {weighting!r}")


def _check_connected(form: EnergyForm):
    if form.n < 2:
        raise DisconnectedGraphError("need at least two vertices")
    comp = form.components()
    if comp.max() != 0:
        raise DisconnectedGraphError(f"graph has {comp.max() + 1} components")


def poincare_constant(
    form: EnergyForm,
    weighting: str = "uniform",
    masses=None,
    tol: float = 1e-10,
    block: int = 4,
    maxiter: int = 500,
) -> PoincareResult:
    """``sup Var_m(f) / E(f)`` = 1 / (smallest nonzero eigenvalue of L x = t M x).

    Inverse subspace iteration with the constants deflated in the M inner
    product; the inner solves use a sparse LU of the Laplacian grounded at
    vertex 0.  With uniform weights this is ``1 / (n * lambda_2(L))``.
    """
    _check_connected(form)
    m = vertex_masses(form, weighting) if masses is None else np.asarray(masses, dtype=np.float64)
    m = m / m.sum()
    n = form.n
    L = form.laplacian.tocsc()
    p = min(block, n - 1)
    lu = splu(L[1:, 1:].tocsc())

    def lplus(b):
        # b has zero sum, so the grounded solve satisfies the dropped row too
        x = np.zeros_like(b)
        x[1:] = lu.solve(np.ascontiguousarray(b[1:]))
        return x

    def deflate(X):
        return X - np.outer(np.ones(n), m @ X)

    rng = np.random.default_rng(0)
    X = deflate(rng.standard_normal((n, p)))
    theta, res, it = None, math.inf, 0
    for it in range(1, maxiter + 1):
        X = deflate(lplus((m[:, None] * X)))
        LX = L @ X
        MX = m[:, None] * X
        a = X.T @ LX
        bm = X.T @ MX
        vals, vecs = la.eigh((a + a.T) / 2, (bm + bm.T) / 2)
        X = X @ vecs
        LX = LX @ vecs
        MX = MX @ vecs
        theta = float(vals[0])
        x = X[:, 0]
        r = LX[:, 0] - theta * MX[:, 0]
        res = float(np.linalg.norm(r) / (theta * np.linalg.norm(MX[:, 0])))
        if res <= tol:
            break
        X = X / np.linalg.norm(X, axis=0)
    else:
        if res > 1e-8:
            raise ConvergenceError(f"inverse iteration stalled at residual {res:.2e}", res, it)
    x = X[:, 0]
    x = x / math.sqrt(float(m @ (x * x)))
    return PoincareResult(1.0 / theta, x, weighting if masses is None else "custom", res, theta, it)


# ---------------------------------------------------------------------------
# dense oracles
# ---------------------------------------------------------------------------


def _dense_check(form: EnergyForm):
    if form.n > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_LIMIT} vertices, got {form.n}")


def dense_resistance(form: EnergyForm, A, B) -> float:
    _dense_check(form)
    A, B, f, free, connected = _dirichlet_setup(form, A, B)
    if not connected:
        return math.inf
    L = form.laplacian.toarray()
    if len(free):
        f[free] = np.linalg.solve(L[np.ix_(free, free)], -L[np.ix_(free, B)].sum(axis=1))
    return 1.0 / form.energy(f)


def dense_capacity(form: EnergyForm, masses, A) -> float:
    _dense_check(form)
    m = np.asarray(masses, dtype=np.float64)
    A = _as_index_set(A, form.n, "A")
    K = form.laplacian.toarray() + np.diag(m)
    free = np.setdiff1d(np.arange(form.n), A)
    f = np.ones(form.n)
    if len(free):
        f[free] = np.linalg.solve(K[np.ix_(free, free)], -K[np.ix_(free, A)].sum(axis=1))
    return float(f @ K @ f)


def dense_poincare(form: EnergyForm, masses=None) -> float:
    _dense_check(form)
    _check_connected(form)
    m = np.full(form.n, 1.0 / form.n) if masses is None else np.asarray(masses, dtype=np.float64)
    m = m / m.sum()
    vals = la.eigh(form.laplacian.toarray(), np.diag(m), eigvals_only=True)
    return 1.0 / float(vals[1])


def dense_oracle(form: EnergyForm, problem: str, **kw):
    """Ground-truth by direct factorization: ``resistance``, ``capacity``, ``poincare``."""
    if problem == "resistance":
        return dense_resistance(form, kw["A"], kw["B"])
    if problem == "capacity":
        return dense_capacity(form, kw["masses"], kw["A"])
    if problem == "poincare":
        return dense_poincare(form, kw.get("masses"))
    raise ValueError(f"unknown problem {problem!r}")


# ---------------------------------------------------------------------------
# resistance constant
# ---------------------------------------------------------------------------


@dataclass
class ResistanceConstant:
    value: float
    argmin: tuple
    n: int
    m: int
    per_word: dict  # orbit representative -> resistance
    orbits: list
    skipped: list
    note: str = ""
    max_residual: float = 0.0
    total_iterations: int = 0


def word_orbits(sys: IFSystem, m: int) -> list:
    """Orbits of the symmetry group on ``W_m`` as sorted lists of global indices."""
    perms = sys.validation.permutations
    N = sys.n_maps
    size = N**m
    digits = np.array(np.unravel_index(np.arange(size), (N,) * m)).T if m > 0 else np.zeros((1, 0), dtype=np.int64)
    images = []
    for tag, perm in sorted(perms.items()):
        sigma = np.asarray(perm)
        img = np.zeros(size, dtype=np.int64)
        for k in range(m):
            img = img * N + sigma[digits[:, k]]
        images.append(img)
    seen = np.full(size, -1, dtype=np.int64)
    orbits = []
    for w in range(size):
        if seen[w] >= 0:
            continue
        orbit = sorted({int(img[w]) for img in images})
        for o in orbit:
            seen[o] = len(orbits)
        orbits.append(orbit)
    return orbits


def resistance_constant(
    sys: IFSystem,
    n: int,
    m: int,
    rule: ConductanceRule = UNIT,
    corner_edges: bool = False,
    tol: float = 1e-10,
    use_symmetry: bool = True,
    max_cells: int | None = 2_000_000,
) -> ResistanceConstant:
    """``min_w R_{m+n}(w.W_n, C_w.W_n)`` over ``w`` in ``W_m`` at one fixed ``m``.

    The infimum over all ``m >= 1`` is truncated to the given ``m``.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    N = sys.n_maps
    gm = build_graph(sys, m, rule, max_cells=max_cells)
    g = build_graph(sys, m + n, rule, max_cells=max_cells)
    form = EnergyForm.from_graph(g, corner_edges)
    block = N**n
    if use_symmetry:
        orbits = word_orbits(sys, m)
    else:
        orbits = [[w] for w in range(N**m)]
    per, skipped = {}, []
    best, arg = math.inf, None
    max_res, iters = 0.0, 0
    for orbit in orbits:
        w = orbit[0]
        word = index_to_word(w, N, m)
        C = complement_nonneighbors(gm, word)
        if len(C) == 0:
            warnings.warn(f"C_w empty for w = {format_word(word)}; skipped")
            skipped.append(word)
            continue
        A = np.arange(w * block, (w + 1) * block)
        B = (gm.cells[C][:, None] * block + np.arange(block)[None, :]).ravel()
        r = effective_resistance(form, A, B, tol=tol)
        per[word] = r.R
        if r.solution is not None:
            max_res = max(max_res, r.solution.residual)
            iters += r.solution.iterations
        if r.R < best:
            best, arg = r.R, word
    note = f"infimum over m truncated at m = {m}"
    return ResistanceConstant(best, arg, n, m, per, orbits, skipped, note, max_res, iters)
