"""Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are printed
even under output capture.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from sgform import audits
from sgform.besov import BETA_STAR, as_profile
from sgform.good import GoodFunction
from sgform.resistance import corner_resistance_r, pair_resistance

SEED = 0


def report(result, capsys):
    with capsys.disabled():
        print("\n" + result.line())
    for row in result.failing_rows()[:10]:
        print("failing:", row)
    assert result.passed, result.summary


def test_criterion_1_corner_resistance_closed_form(capsys):
    r = audits.criterion_1(16)
    assert all(corner_resistance_r(n) == Fraction(1, 2) * Fraction(5, 3) ** n - Fraction(1, 2) for n in (1, 16))
    assert r.seconds < 1
    report(r, capsys)


def test_criterion_2_numerical_corner_resistance(capsys):
    r = audits.criterion_2(7, rel=1e-8)
    assert len(r.rows) == 7
    assert pair_resistance(7, "0" * 7, "1" * 7) == pytest.approx((5 / 3) ** 7 - 1, rel=1e-8)
    assert r.seconds < 60
    report(r, capsys)


def test_criterion_3_good_function_energies(capsys):
    r = audits.criterion_3(8, count=20, seed=SEED)
    assert r.seconds < 60
    report(r, capsys)


def test_criterion_4_weak_monotonicity(capsys):
    r = audits.criterion_4(samples=1000, levels=4, seed=SEED)
    assert sum(not row["pass"] for row in r.rows) == 0
    report(r, capsys)


def test_criterion_5_corner_resistance_bound(capsys):
    r = audits.criterion_5(6)
    assert r.seconds < 300
    report(r, capsys)


def test_criterion_6_gamma_limit_probe(capsys):
    r = audits.criterion_6(rel=0.02)
    prof = as_profile(GoodFunction(1, 0, 0))
    eps = 1e-3
    n = np.arange(1, 200_000)
    direct = eps * math.fsum((2.0 ** (-eps * n) * prof.d(n)).tolist())
    assert abs(direct / ((4 / 3) / math.log(2)) - 1) < 0.02
    report(r, capsys)


def test_criterion_7_holder_audit(capsys):
    r = audits.criterion_7(pairs=10_000, level=8, seed=SEED)
    report(r, capsys)


def test_criterion_8_sandwich(capsys):
    r = audits.criterion_8(6, chains=100, seed=SEED)
    report(r, capsys)


def test_criterion_9_combinatorial_counts(capsys):
    r = audits.criterion_9(8)
    report(r, capsys)


def test_criterion_10_equivalence_brackets(capsys):
    r = audits.criterion_10(7, stability=0.2, seed=SEED)
    assert r.rows and all(math.isfinite(row["ratio"]) for row in r.rows)
    report(r, capsys)


def test_beta_star_value():
    assert BETA_STAR == pytest.approx(math.log(5) / math.log(2))
