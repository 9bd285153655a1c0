import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carpetbench.catalog import sc8
from carpetbench.cellgraph import build_graph, complement_nonneighbors, select
from carpetbench.geometry import Isometry
from carpetbench.potential import (
    ConvergenceError,
    DisconnectedGraphError,
    EnergyForm,
    capacity,
    dense_capacity,
    dense_oracle,
    dense_poincare,
    dense_resistance,
    effective_resistance,
    poincare_constant,
    resistance_constant,
    vertex_masses,
    word_orbits,
)


def path(n):
    return EnergyForm.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(rng, n, extra=None):
    """Connected: random spanning tree plus extra random edges."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(0, i)])) for i in range(1, n)]
    for _ in range(extra if extra is not None else n):
        u, v = rng.choice(n, 2, replace=False)
        edges.append((int(u), int(v)))
    cond = rng.uniform(0.2, 5.0, len(edges))
    return EnergyForm.from_edges(n, edges, cond)


# -- closed forms --------------------------------------------------------------


def test_series_and_parallel():
    assert effective_resistance(path(4), [0], [3]).R == pytest.approx(3, abs=1e-10)
    assert effective_resistance(path(6), [0], [5]).R == pytest.approx(5, abs=1e-10)
    two = EnergyForm.from_edges(2, [(0, 1), (0, 1)])
    assert effective_resistance(two, [0], [1]).R == pytest.approx(0.5, abs=1e-10)
    # two parallel paths of lengths 2 and 3: 2*3/5
    ring = EnergyForm.from_edges(5, [(0, 1), (1, 2), (0, 3), (3, 4), (4, 2)])
    assert effective_resistance(ring, [0], [2]).R == pytest.approx(6 / 5, abs=1e-10)
    # series of conductances 2 and 3
    w = EnergyForm.from_edges(3, [(0, 1), (1, 2)], [2.0, 3.0])
    assert effective_resistance(w, [0], [2]).R == pytest.approx(1 / 2 + 1 / 3, abs=1e-10)


def test_dense_oracle_closed_forms():
    assert dense_oracle(path(6), "resistance", A=[0], B=[5]) == pytest.approx(5, abs=1e-12)
    k2 = EnergyForm.from_edges(2, [(0, 1)])
    assert dense_oracle(k2, "poincare") == pytest.approx(0.25, abs=1e-12)
    assert dense_oracle(k2, "capacity", masses=[1, 1], A=[0]) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(ValueError):
        dense_oracle(path(4001), "poincare")


def test_bad_sets():
    with pytest.raises(ValueError):
        effective_resistance(path(4), [0, 1], [1])
    with pytest.raises(ValueError):
        effective_resistance(path(4), [], [1])
    with pytest.raises(ValueError):
        effective_resistance(path(4), [0], [9])


def test_disconnected_gives_inf():
    f = EnergyForm.from_edges(4, [(0, 1), (2, 3)])
    r = effective_resistance(f, [0], [3])
    assert r.R == math.inf and not r.connected
    assert dense_resistance(f, [0], [3]) == math.inf


def test_nonconvergence_is_reported():
    rng = np.random.default_rng(0)
    f = random_graph(rng, 400, extra=10)
    with pytest.raises(ConvergenceError) as e:
        effective_resistance(f, [0], [1], maxiter=2)
    assert e.value.iterations == 2 and e.value.residual > 1e-10


# -- sparse vs dense on random graphs, with per-solve invariants -----------------


def check_solution(form, r, tol=1e-10):
    sol = r.solution
    f = sol.potentials
    assert np.all(f[sol.A] == 0) and np.all(f[sol.B] == 1)
    assert f.min() >= -tol and f.max() <= 1 + tol
    assert abs(r.R * form.energy(f) - 1) <= 1e-8
    free = np.setdiff1d(np.arange(form.n), np.union1d(sol.A, sol.B))
    flux = form.laplacian @ f
    assert np.max(np.abs(flux[free]), initial=0.0) <= 1e-8


def test_random_graphs_match_dense():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(5, 201))
        f = random_graph(rng, n)
        A = rng.choice(n, int(rng.integers(1, 4)), replace=False)
        rest = np.setdiff1d(np.arange(n), A)
        B = rng.choice(rest, int(rng.integers(1, 4)), replace=False)
        r = effective_resistance(f, A, B)
        check_solution(f, r)
        assert abs(r.R - dense_resistance(f, A, B)) <= 1e-10 * max(1.0, r.R)


def test_rayleigh_monotonicity():
    rng = np.random.default_rng(1)
    f = random_graph(rng, 60, extra=80)
    base = effective_resistance(f, [0], [59]).R
    for k in rng.choice(len(f.u), 20, replace=False):
        r = effective_resistance(f.without_edge(int(k)), [0], [59]).R
        assert r >= base - 1e-10


def test_resistance_triangle_inequality():
    rng = np.random.default_rng(2)
    f = random_graph(rng, 40, extra=30)
    for _ in range(30):
        a, b, c = (int(x) for x in rng.choice(40, 3, replace=False))
        rab = effective_resistance(f, [a], [b]).R
        rbc = effective_resistance(f, [b], [c]).R
        rac = effective_resistance(f, [a], [c]).R
        assert rac <= rab + rbc + 1e-9


@given(st.integers(0, 2**31), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_energy_properties(seed, shift):
    rng = np.random.default_rng(seed)
    f = random_graph(rng, 20)
    x = rng.standard_normal(20)
    e = f.energy(x)
    assert e >= 0
    assert f.energy(x + shift) == pytest.approx(e, rel=1e-9, abs=1e-12)
    assert f.energy(np.full(20, shift)) == 0
    assert e == pytest.approx(float(x @ (f.laplacian @ x)), rel=1e-9, abs=1e-12)


# -- capacity -------------------------------------------------------------------


def test_capacity_closed_forms():
    k2 = EnergyForm.from_edges(2, [(0, 1)])
    assert capacity(k2, [1, 1], [0]).value == pytest.approx(1.5, abs=1e-12)
    f = path(5)
    m = np.array([0.5, 1, 2, 1, 0.25])
    assert capacity(f, m, range(5)).value == pytest.approx(m.sum(), abs=1e-12)
    with pytest.raises(ValueError):
        capacity(f, m, [])
    with pytest.raises(ValueError):
        capacity(f, -m, [0])


def test_capacity_against_dense_and_monotone(carpet):
    g = build_graph(carpet, 1)
    form = EnergyForm.from_graph(g)
    m = vertex_masses(form, "hausdorff")
    bottom = select(g, "edge:bottom")
    edges = np.unique(np.concatenate([select(g, f"edge:{e}") for e in ("bottom", "right", "top", "left")]))
    cb = capacity(form, m, bottom).value
    ce = capacity(form, m, edges).value
    assert 0 < cb < ce
    assert cb == pytest.approx(dense_capacity(form, m, bottom), abs=1e-10)


# -- Poincare constant ---------------------------------------------------------------


def test_poincare_closed_forms():
    assert poincare_constant(EnergyForm.from_edges(2, [(0, 1)])).lam == pytest.approx(0.25, abs=1e-10)
    assert poincare_constant(path(3)).lam == pytest.approx(1 / 3, abs=1e-10)


def test_poincare_random_graphs():
    rng = np.random.default_rng(9)
    for _ in range(15):
        n = int(rng.integers(3, 201))
        f = random_graph(rng, n)
        p = poincare_constant(f)
        dense = dense_poincare(f)
        assert abs(p.lam - dense) <= 1e-8 * max(1.0, dense)
        assert p.residual <= 1e-8
        lap = np.linalg.eigvalsh(f.laplacian.toarray())
        assert p.lam * n * lap[1] == pytest.approx(1, abs=1e-6)
        assert abs(np.mean(p.vector)) < 1e-9


def test_poincare_extremal_ratio():
    rng = np.random.default_rng(4)
    f = random_graph(rng, 30)
    p = poincare_constant(f)
    x = p.vector
    var = np.mean((x - x.mean()) ** 2)
    assert var / f.energy(x) == pytest.approx(p.lam, rel=1e-8)


def test_poincare_hausdorff_weighting(carpet):
    form = EnergyForm.from_graph(build_graph(carpet, 1))
    m = vertex_masses(form, "hausdorff")
    assert m.sum() == pytest.approx(1)
    p = poincare_constant(form, "hausdorff")
    assert p.lam == pytest.approx(dense_poincare(form, m), rel=1e-8)
    assert abs(float(m @ p.vector)) < 1e-9


def test_poincare_sc8_level2_matches_dense():
    form = EnergyForm.from_graph(build_graph(sc8(), 2))
    assert poincare_constant(form).lam == pytest.approx(dense_poincare(form), abs=1e-8)


def test_poincare_disconnected():
    with pytest.raises(DisconnectedGraphError):
        poincare_constant(EnergyForm.from_edges(4, [(0, 1), (2, 3)]))


# -- cell-graph problems ---------------------------------------------------------------


def test_sc8_crossing_matches_dense():
    g = build_graph(sc8(), 1)
    form = EnergyForm.from_graph(g)
    A, B = select(g, "edge:left"), select(g, "edge:right")
    r = effective_resistance(form, A, B)
    assert r.R > 0
    assert abs(r.R - dense_resistance(form, A, B)) <= 1e-10


@pytest.mark.parametrize("name,level", [("carpet104", 2), ("sc8", 3)])
def test_crossing_antisymmetry(carpet, name, level):
    s = carpet if name == "carpet104" else sc8()
    g = build_graph(s, level)
    form = EnergyForm.from_graph(g)
    r = effective_resistance(form, select(g, "edge:left"), select(g, "edge:right"))
    f = r.solution.potentials
    ph = g.automorphism(Isometry("h"))
    pv = g.automorphism(Isometry("v"))
    assert np.max(np.abs(f + f[ph] - 1)) <= 1e-6
    assert np.max(np.abs(f - f[pv])) <= 1e-6


def test_corner_problem_symmetric_under_h(carpet):
    g = build_graph(carpet, 2)
    form = EnergyForm.from_graph(g)
    r = effective_resistance(form, select(g, "prefix:1"), select(g, "prefix:26"))
    f = r.solution.potentials
    ph = g.automorphism(Isometry("h"))
    assert np.max(np.abs(f + f[ph] - 1)) <= 1e-6


# -- resistance constant ----------------------------------------------------------------


def test_sc8_orbits():
    orbits = word_orbits(sc8(), 1)
    assert sorted(len(o) for o in orbits) == [4, 4]
    assert [o[0] for o in orbits] == [0, 1]


def test_rn_sc8_matches_brute_force():
    s = sc8()
    rc = resistance_constant(s, 1, 1)
    assert len(rc.per_word) == 2
    assert 0 < rc.value < math.inf
    g1 = build_graph(s, 1)
    g2 = build_graph(s, 2)
    form = EnergyForm.from_graph(g2)
    brute = []
    for w in range(8):
        A = np.arange(8 * w, 8 * w + 8)
        C = complement_nonneighbors(g1, (w + 1,))
        B = np.concatenate([np.arange(8 * c, 8 * c + 8) for c in C])
        brute.append(dense_resistance(form, A, B))
    assert rc.value == pytest.approx(min(brute), abs=1e-10)
    full = resistance_constant(s, 1, 1, use_symmetry=False)
    assert full.value == pytest.approx(rc.value, abs=1e-12)
    assert "truncated" in rc.note


def test_rn_carpet_positive(carpet):
    rc = resistance_constant(carpet, 1, 1)
    assert 0 < rc.value < math.inf
    assert len(rc.orbits) < 104
