import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sgform.energy import (
    CellFunction, EnergyProfile, An_Dn, Bn, VertexFunction, cell_averages, energy_profile,
    graph_energy, mean_value, restrict, scaled_energy, vertex_function, weak_mono_ratio,
)
from sgform.geometry import CORNERS, all_words, build_graph, cell_vertices, edge_between, vertex_set
from sgform.good import GoodFunction, closed_form_energies
from sgform.providers import Composed, Mapped, PiecewiseHarmonic, PointFunction, Product

F = Fraction
finite = st.floats(-1e3, 1e3, allow_nan=False)


def cells(level):
    return arrays(np.float64, 3**level, elements=finite).map(lambda v: CellFunction(level, v))


def brute_energy(u):
    # pairwise scan of all cell pairs, no graph object involved
    total = 0
    for w1, w2 in itertools.combinations(all_words(u.level), 2):
        if edge_between(w1, w2) is not None:
            total += (u[w1] - u[w2]) ** 2
    return total


def test_cell_function_validation():
    with pytest.raises(ValueError):
        CellFunction(1, [1.0, 2.0])
    with pytest.raises(ValueError):
        CellFunction(1, [1.0, np.nan, 0.0])


def test_graph_energy_examples():
    assert graph_energy(CellFunction(2, np.full(9, 3.5))) == 0
    assert graph_energy(CellFunction(1, np.array([1.0, 0.0, 0.0]))) == 2
    with pytest.raises(ValueError):
        graph_energy(CellFunction(2, np.zeros(9)), build_graph(1))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_graph_energy_against_pairwise_scan(n):
    rng = np.random.default_rng(n)
    vals = np.array([F(int(v)) for v in rng.integers(-9, 10, size=3**n)], dtype=object)
    u = CellFunction(n, vals)
    assert graph_energy(u) == brute_energy(u)
    uf = CellFunction(n, vals.astype(float))
    assert graph_energy(uf) == pytest.approx(float(brute_energy(u)), rel=1e-14)


@given(cells(3), finite, st.floats(-10, 10, allow_nan=False))
def test_energy_shift_and_scale(u, c, lam):
    e = graph_energy(u)
    assert graph_energy(CellFunction(3, u.values + c)) == pytest.approx(e, rel=1e-9, abs=1e-6)
    assert graph_energy(CellFunction(3, lam * u.values)) == pytest.approx(lam**2 * e, rel=1e-9, abs=1e-6)
    assert e >= 0


def test_mean_value_examples():
    u = CellFunction(2, np.array([1.0, 0, 0, 0, 0, 0, 0, 0, 0]))
    assert np.allclose(mean_value(u, 1).values, [1 / 3, 0, 0])
    assert np.all(mean_value(CellFunction(3, np.full(27, 2.0)), 1).values == 2.0)
    with pytest.raises(ValueError):
        mean_value(u, 2)


@given(cells(4), st.integers(2, 3))
def test_mean_value_chain(u, n):
    assert np.allclose(mean_value(mean_value(u, n), n - 1).values, mean_value(u, n - 1).values, atol=1e-9)


def test_cell_averages_consistency_and_errors():
    f = PointFunction(lambda x, y: np.exp(x) * np.sin(4 * y))
    fine = cell_averages(f, 4, 7)
    assert np.allclose(cell_averages(f, 2, 7).values, mean_value(fine, 2).values, rtol=0, atol=1e-14)
    c = cell_averages(PointFunction(lambda x, y: 0 * x + 5.0), 3, 5)
    assert np.allclose(c.values, 5.0)
    with pytest.raises(ValueError):
        cell_averages(f, 4, 3)
    with pytest.raises(ValueError):
        cell_averages(f, 2)


def test_An_Dn_examples():
    U = GoodFunction(1, 0, 0)
    avg = cell_averages(U, 1)
    assert list(avg.values) == [F(3, 5), F(1, 5), F(1, 5)]
    # two edges of X_1 carry difference 2/5, the third none
    assert An_Dn(U, 1) == (2 * F(2, 5) ** 2, F(5, 3) * 2 * F(2, 5) ** 2)
    assert An_Dn(U, 1)[0] == closed_form_energies(U, 1)[0]
    assert An_Dn(GoodFunction(2, 2, 2), 3) == (0, 0)
    for n in range(1, 7):
        assert An_Dn(U, n)[1] == F(4, 3) * (1 - F(3, 5) ** n)


def test_Bn_examples():
    v0 = VertexFunction(0, {CORNERS[0]: 1, CORNERS[1]: 0, CORNERS[2]: 0})
    assert Bn(v0) == 2
    assert Bn(vertex_function(GoodFunction(1, 0, 0), 1)) == F(6, 5)
    assert Bn(VertexFunction(2, {p: 7 for p in vertex_set(2)})) == 0
    with pytest.raises(ValueError):
        Bn(VertexFunction(1, {p: 1 for p in vertex_set(0)}))


def brute_Bn(U, n):
    # every cell, its three corners evaluated separately, unordered pairs
    from sgform.good import evaluate
    total = 0
    for w in all_words(n):
        vals = [evaluate(U, w + (i,)) for i in range(3)]
        total += sum((a - b) ** 2 for a, b in itertools.combinations(vals, 2))
    return total


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_Bn_against_pointwise_evaluation(n):
    U = GoodFunction(F(1, 3), -2, F(5, 4))
    assert Bn(vertex_function(U, n)) == brute_Bn(U, n)


def test_restrict_examples():
    u = CellFunction(2, np.arange(9.0))
    assert np.array_equal(restrict(u, ()).values, u.values)
    assert np.array_equal(restrict(u, "0").values, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        restrict(u, "012")


@given(cells(4), st.integers(1, 3))
def test_restriction_energy_decomposition(u, n):
    inner = sum(graph_energy(restrict(u, w)) for w in all_words(n))
    assert inner <= graph_energy(u) * (1 + 1e-12) + 1e-9


def test_restrict_represents_composition():
    P = PiecewiseHarmonic.random(3, np.random.default_rng(3), exact=True)
    u = cell_averages(P, 4)
    for w in all_words(2):
        assert list(restrict(u, w).values) == list(cell_averages(Composed(P, w), 2).values)


def test_weak_mono_ratio():
    with pytest.raises(ValueError):
        weak_mono_ratio(CellFunction(3, np.ones(27)), 1)
    rng = np.random.default_rng(11)
    for n in range(1, 5):
        for m in range(1, 5):
            for _ in range(8):
                u = CellFunction(n + m, rng.uniform(-1, 1, 3 ** (n + m)))
                assert 0 <= weak_mono_ratio(u, n) <= 36


def test_D_monotone_via_chain():
    P = PiecewiseHarmonic.random(2, np.random.default_rng(5))
    u = cell_averages(P, 6)
    for n in range(1, 6):
        for m in range(1, 7 - n):
            Dn = An_Dn(u, n)[1]
            Dnm = An_Dn(u, n + m)[1]
            assert Dn <= 36 * Dnm
            assert Dn == pytest.approx(scaled_energy(mean_value(u, n)))


@pytest.mark.parametrize("level, seed", [(1, 0), (2, 1), (3, 2), (0, 3)])
def test_profile_tail_against_direct(level, seed):
    rng = np.random.default_rng(seed)
    P = PiecewiseHarmonic.random(level, rng) if level else GoodFunction(*rng.uniform(-1, 1, 3))
    prof = energy_profile(P, 2)
    direct = np.array([float(An_Dn(P, n)[1]) for n in range(1, 10)])
    assert np.allclose(prof.d(np.arange(1, 10)), direct, rtol=1e-12, atol=1e-14)
    assert prof.sup_exact and prof.sup_D >= direct.max() * (1 - 1e-12)
    far = prof.d(np.array([200]))[0]
    assert prof.sup_D == pytest.approx(max(far, direct.max()), rel=1e-12)


def test_profile_of_cell_function_and_csv():
    u = cell_averages(PointFunction(lambda x, y: x * y), 5, 7)
    prof = energy_profile(u, 5)
    assert prof.depth == 5 and not prof.infinite
    assert prof.sup_D == prof.D.max()
    with pytest.raises(ValueError):
        prof.d(np.array([6]))
    lines = prof.to_csv().splitlines()
    assert lines[0] == "n,A_n,D_n" and len(lines) == 6
    assert isinstance(prof, EnergyProfile)


def test_cell_function_csv_round_trip():
    exact = CellFunction(2, np.array([F(i, 7) for i in range(9)], dtype=object))
    text = exact.to_csv()
    assert text.splitlines()[0] == "level,word,value"
    back = CellFunction.from_csv(text)
    assert back.exact and list(back.values) == list(exact.values)
    flt = CellFunction(2, np.linspace(0, 1, 9))
    assert np.array_equal(CellFunction.from_csv(flt.to_csv()).values, flt.values)


# providers ------------------------------------------------------------------

def test_piecewise_harmonic_is_continuous_and_consistent():
    P = PiecewiseHarmonic.random(3, np.random.default_rng(2), exact=True)
    for m in range(0, 6):
        vertex_function(P, m)  # raises on a mismatch at a junction point
    coarse = vertex_function(P, 1).values
    fine = vertex_function(P, 3).values
    assert all(fine[p] == v for p, v in coarse.items())


def test_product_and_composed_providers():
    U, V = GoodFunction(1.0, 0.0, 0.0), GoodFunction(0.0, 1.0, 0.0)
    prod = Product(U, V)
    assert prod.harmonic_level is None
    assert np.allclose(prod.vertex_values(3), U.vertex_values(3) * V.vertex_values(3))
    C = Composed(U, "21")
    top = U.vertex_values(4)
    start = 7 * 9
    assert np.array_equal(C.vertex_values(2), top[start:start + 9])
    assert C.harmonic_level == 0


def test_mapped_provider_stays_in_the_domain():
    U = GoodFunction(0.0, 1.0, -1.0)
    E = Mapped(U, np.exp, "exp")
    assert E.harmonic_level is None
    assert np.allclose(E.vertex_values(3), np.exp(U.vertex_values(3)))
    vertex_function(E, 3)
    # g o u with g Lipschitz keeps D_n bounded, unlike smooth planar functions
    D = np.array([An_Dn(E, n, n + 3)[1] for n in range(1, 8)])
    assert D.max() < np.e**2 * (2 / 3) * U.S
    steps = np.diff(D)
    ratios = steps[1:] / steps[:-1]
    assert np.all(steps > 0) and np.all(np.diff(ratios) < 0) and ratios[-1] < 0.65


def test_point_function_samples_corners():
    f = PointFunction(lambda x, y: x + 10 * y)
    vals = f.vertex_values(1)
    for idx, w in enumerate(all_words(1)):
        for i, p in enumerate(cell_vertices(w)):
            x, y = p.xy()
            assert vals[idx, i] == pytest.approx(x + 10 * y)
