from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgform.geometry import build_graph, word_from_index
from sgform.resistance import (
    ResistorNetwork, StarTriple, cell_network, corner_bound_audit, corner_resistance_closed_form,
    corner_resistance_r, cut, delta_to_star, effective_resistance, pair_resistance, short, star_to_delta,
)

F = Fraction
positive = st.fractions(min_value=F(1, 40), max_value=50, max_denominator=40)


def test_delta_to_star_examples():
    assert delta_to_star(F(1), F(1), F(1)) == StarTriple(F(1, 3), F(1, 3), F(1, 3))
    assert delta_to_star(F(2), F(2), F(2)) == StarTriple(F(2, 3), F(2, 3), F(2, 3))
    with pytest.raises(ValueError):
        delta_to_star(1, 0, 1)


@given(positive, positive, positive)
def test_delta_star_round_trip(a, b, c):
    assert star_to_delta(delta_to_star(a, b, c)) == (a, b, c)
    s = StarTriple(a, b, c)
    assert delta_to_star(*star_to_delta(s)) == s


@given(positive, positive, positive)
def test_delta_star_equivalent_between_terminals(a, b, c):
    # terminal-pair resistance: R12 in parallel with R23 + R31, against two star arms in series
    star = delta_to_star(a, b, c)
    assert a * (b + c) / (a + b + c) == star.R1 + star.R2


def test_corner_resistance_examples():
    assert corner_resistance_r(1) == F(1, 3)
    assert corner_resistance_r(2) == F(8, 9)
    for n in range(1, 17):
        assert corner_resistance_r(n) == corner_resistance_closed_form(n)
        assert 2 * corner_resistance_r(n) == F(5, 3) ** n - 1
    with pytest.raises(ValueError):
        corner_resistance_r(0)


def test_small_networks():
    assert effective_resistance(ResistorNetwork(2, [(0, 1, 1)]), 0, 1) == pytest.approx(1.0)
    tri = [(0, 1, 1), (1, 2, 1), (0, 2, 1)]
    assert effective_resistance(ResistorNetwork(3, tri), 0, 2) == pytest.approx(2 / 3, rel=1e-14)
    assert effective_resistance(ResistorNetwork(3, tri, exact=True), 1, 2) == F(2, 3)


def test_network_errors():
    with pytest.raises(ValueError):
        ResistorNetwork(2, [(0, 0, 1)])
    with pytest.raises(ValueError):
        ResistorNetwork(2, [(0, 1, -1)])
    with pytest.raises(ValueError):
        effective_resistance(ResistorNetwork(4, [(0, 1, 1), (2, 3, 1)]), 0, 3)
    with pytest.raises(ValueError):
        effective_resistance(ResistorNetwork(2, [(0, 1, 1)]), 1, 1)


@pytest.mark.parametrize("n", range(1, 8))
def test_corner_pair_on_cell_graph(n):
    R = pair_resistance(n, (0,) * n, (1,) * n)
    assert R == pytest.approx((5 / 3) ** n - 1, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_exact_small_network_matches_float(n):
    exact = ResistorNetwork.from_cell_graph(build_graph(n), exact=True)
    R = effective_resistance(exact, 0, 3**n - 1)
    assert isinstance(R, Fraction)
    assert float(R) == pytest.approx(pair_resistance(n, (0,) * n, (2,) * n), rel=1e-12)


def energy_minimum(n, a, b):
    """min E_n(u) with u(a)=1, u(b)=0 by solving the normal equations of the interior values."""
    ei, ej = build_graph(n).edge_index
    N = 3**n
    free = [v for v in range(N) if v not in (a, b)]
    # E(u) = |D u|^2 with D the edge-difference operator; minimise over free entries
    D = np.zeros((len(ei), N))
    D[np.arange(len(ei)), ei] = 1
    D[np.arange(len(ei)), ej] = -1
    fixed = np.zeros(N)
    fixed[a] = 1.0
    x, *_ = np.linalg.lstsq(D[:, free], -D @ fixed, rcond=None)
    u = fixed.copy()
    u[free] = x
    return float(np.sum((D @ u) ** 2))


def test_R2_against_energy_minimisation():
    R = pair_resistance(2, "00", "01")
    assert R == pytest.approx(1 / energy_minimum(2, 0, 1), rel=1e-10, abs=1e-10)


def test_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(4)
    for _ in range(500):
        n = int(rng.integers(1, 6))
        a, b, c = (word_from_index(int(i), n) for i in rng.choice(3**n, size=3, replace=False))
        rab, rbc, rac = pair_resistance(n, a, b), pair_resistance(n, b, c), pair_resistance(n, a, c)
        assert rab > 0
        assert rac <= rab + rbc + 1e-9
    assert pair_resistance(3, "012", "210") == pytest.approx(pair_resistance(3, "210", "012"), rel=1e-12)


def test_iterative_solver_agrees_with_direct():
    net = cell_network(5)
    a, b = 17, 200
    assert effective_resistance(net, a, b, method="cg") == pytest.approx(
        effective_resistance(net, a, b, method="direct"), rel=1e-10)


def test_shorting_and_cutting_monotone():
    rng = np.random.default_rng(9)
    net = cell_network(3)
    for _ in range(30):
        a, b = (int(v) for v in rng.choice(net.size, size=2, replace=False))
        base = effective_resistance(net, a, b)
        others = [v for v in range(net.size) if v not in (a, b)]
        group = [int(v) for v in rng.choice(others, size=3, replace=False)]
        shorted, mapping = short(net, group)
        assert effective_resistance(shorted, mapping[a], mapping[b]) <= base + 1e-12
        # cut one edge whose removal keeps the graph connected
        for k in rng.permutation(len(net.edges)):
            trimmed = cut(net, [int(k)])
            if trimmed.is_connected():
                assert effective_resistance(trimmed, a, b) >= base - 1e-12
                break


def test_corner_bound_audit():
    worst, rows = corner_bound_audit(1)
    assert worst == pytest.approx(4 / 25, rel=1e-12)
    assert len(rows) == 6 and set(rows[0]) == {"n", "w", "corner", "R", "bound", "ratio"}
    for n in range(2, 7):
        worst, rows = corner_bound_audit(n)
        assert worst <= 1
        assert len(rows) == 3 * (3**n - 1)
        assert all(r["w"] != str(r["corner"]) * n for r in rows)


def test_network_csv_round_trip():
    net = ResistorNetwork(3, [(0, 1, F(1, 2)), (1, 2, F(3))], exact=True)
    text = net.to_csv()
    assert text.splitlines()[0] == "i,j,conductance"
    back = ResistorNetwork.from_csv(text)
    assert back.exact and back.edges == net.edges
    flt = ResistorNetwork.from_csv(ResistorNetwork(2, [(0, 1, 0.25)]).to_csv())
    assert effective_resistance(flt, 0, 1) == pytest.approx(4.0)
