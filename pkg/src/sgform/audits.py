"""The acceptance audits, shared by the CLI and the test suite.

Each ``criterion_k`` returns a ``CriterionResult`` carrying a verdict, a one
line summary and the per-check rows (``check,n,lhs,rhs,ratio,pass``).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from sgform.besov import (
    ALPHA, BETA_STAR, C_WEAK, DEFAULT_EPS, LOG2, PairQuadrature, abel_probe, as_profile,
    hat_energy, hat_energy_self_similar, holder_audit, holder_constant,
)
from sgform.energy import CellFunction, An_Dn, Bn, energy_profile, mean_value, scaled_energy, vertex_function
from sgform.geometry import build_graph, lattice_vertices, vertex_set
from sgform.good import GoodFunction, closed_form_energies
from sgform.providers import Mapped, PiecewiseHarmonic, Product
from sgform.resistance import (
    corner_bound_audit, corner_resistance_closed_form, corner_resistance_r, pair_resistance,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    rows: list = field(default_factory=list, repr=False)
    seconds: float = 0.0
    limit: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        budget = f" / {self.limit:.0f}s" if self.limit else ""
        return f"[{tag}] {self.number:2d} {self.title}: {self.summary} ({self.seconds:.2f}s{budget})"

    def failing_rows(self) -> list:
        return [r for r in self.rows if not r["pass"]]


def _row(check, n, lhs, rhs, ok, ratio=None) -> dict:
    if ratio is None:
        ratio = float(lhs) / float(rhs) if rhs else (0.0 if lhs == 0 else math.inf)
    return {"check": check, "n": n, "lhs": float(lhs), "rhs": float(rhs), "ratio": float(ratio), "pass": bool(ok)}


def _timed(number: int, title: str, limit: float | None, body) -> CriterionResult:
    t0 = time.perf_counter()
    ok, summary, rows = body()
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        ok = False
        summary += f"; over the {limit:.0f}s budget"
    return CriterionResult(number, title, ok, summary, rows, dt, limit)


# ---------------------------------------------------------------------------

def criterion_1(n_max: int = 16) -> CriterionResult:
    def body():
        rows = []
        for n in range(1, n_max + 1):
            r = corner_resistance_r(n)
            closed = corner_resistance_closed_form(n)
            rows.append(_row("r_n recursion = closed form", n, r, closed, r == closed))
        ok = all(r["pass"] for r in rows)
        return ok, f"exact equality for n <= {n_max}", rows
    return _timed(1, "corner resistance closed form", 1.0, body)


def criterion_2(n_max: int = 7, rel: float = 1e-8) -> CriterionResult:
    def body():
        rows = []
        worst = 0.0
        for n in range(1, n_max + 1):
            R = pair_resistance(n, (0,) * n, (1,) * n)
            target = (5.0 / 3.0) ** n - 1
            err = abs(R / target - 1)
            worst = max(worst, err)
            rows.append(_row("R_n(0^n,1^n) vs (5/3)^n - 1", n, R, target, err <= rel))
        ok = all(r["pass"] for r in rows)
        return ok, f"max relative error {worst:.2e} for n <= {n_max}", rows
    return _timed(2, "numerical corner resistance", 60.0, body)


def random_rational_triples(count: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        nums = rng.integers(-20, 21, size=3)
        dens = rng.integers(1, 8, size=3)
        out.append(tuple(Fraction(int(a), int(b)) for a, b in zip(nums, dens)))
    return out


def criterion_3(n_max: int = 8, count: int = 20, seed: int = 0) -> CriterionResult:
    def body():
        rows = []
        for tri in random_rational_triples(count, seed):
            U = GoodFunction(*tri)
            for n in range(1, n_max + 1):
                A_cf, B_cf, D_cf = closed_form_energies(U, n)
                A, D = An_Dn(U, n)
                B = Bn(vertex_function(U, n))
                rows.append(_row("A_n exact", n, A, A_cf, A == A_cf, ratio=1.0 if A == A_cf else 0.0))
                rows.append(_row("B_n exact", n, B, B_cf, B == B_cf, ratio=1.0 if B == B_cf else 0.0))
                rows.append(_row("D_n exact", n, D, D_cf, D == D_cf, ratio=1.0 if D == D_cf else 0.0))
        bad = sum(not r["pass"] for r in rows)
        return bad == 0, f"{len(rows) - bad}/{len(rows)} exact matches, {count} triples, n <= {n_max}", rows
    return _timed(3, "good-function energies", 60.0, body)


def criterion_4(samples: int = 1000, levels: int = 4, seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        combos = [(n, m) for n in range(1, levels + 1) for m in range(1, levels + 1)]
        rows = []
        worst = 0.0
        for k in range(samples):
            n, m = combos[k % len(combos)]
            u = CellFunction(n + m, rng.uniform(-1.0, 1.0, size=3 ** (n + m)))
            lhs = scaled_energy(mean_value(u, n))
            rhs = scaled_energy(u)
            ratio = lhs / rhs
            worst = max(worst, ratio)
            rows.append(_row(f"G_n(Mu) <= 36 G_(n+m)(u), m={m}", n, lhs, C_WEAK * rhs, ratio <= C_WEAK, ratio))
        bad = sum(not r["pass"] for r in rows)
        return bad == 0, f"{bad} violations in {samples} samples, max ratio {worst:.4f}", rows
    return _timed(4, "weak monotonicity", None, body)


def criterion_5(n_max: int = 6) -> CriterionResult:
    def body():
        rows = []
        worst = 0.0
        for n in range(1, n_max + 1):
            ratio, _ = corner_bound_audit(n)
            worst = max(worst, ratio)
            rows.append(_row("max R_n(w,i^n) / ((5/2)(5/3)^n)", n, ratio, 1.0, ratio <= 1.0, ratio))
        ok = all(r["pass"] for r in rows)
        return ok, f"max normalised ratio {worst:.4f} for n <= {n_max}", rows
    return _timed(5, "corner-resistance bound", 300.0, body)


def criterion_6(eps_list=DEFAULT_EPS, rel: float = 0.02) -> CriterionResult:
    def body():
        U = GoodFunction(1, 0, 0)
        limit = (4.0 / 3.0) / LOG2
        probe = abel_probe(U, eps_list)
        rows = []
        for p in probe:
            rows.append(_row(f"value*log2 <= sup D, eps={p['eps']:g}", 0, p["value_times_log2"], p["supD"],
                             p["verdict"] == "pass"))
        final = min(probe, key=lambda p: p["eps"])
        err = abs(final["value"] / limit - 1)
        rows.append(_row(f"Abel value vs (4/3)/ln2, eps={final['eps']:g}", 0, final["value"], limit, err <= rel))
        ok = all(r["pass"] for r in rows)
        return ok, f"value {final['value']:.5f} at eps={final['eps']:g}, {100 * err:.3f}% from {limit:.5f}", rows
    return _timed(6, "Abel probe of the limit form", None, body)


def criterion_7(pairs: int = 10_000, level: int = 8, seed: int = 0) -> CriterionResult:
    def body():
        goods = [GoodFunction(1, 0, 0), GoodFunction(0, 1, -1), GoodFunction(Fraction(3, 2), -2, Fraction(1, 3))]
        betas = [(ALPHA + BETA_STAR) / 2, BETA_STAR]
        rows = []
        worst = 0.0
        for g_idx, U in enumerate(goods):
            for beta in betas:
                ratio, _ = holder_audit(U, beta, pairs, level, seed + g_idx)
                worst = max(worst, ratio)
                rows.append(_row(f"Hölder ratio U{U.boundary} beta={beta:.4f}", level, ratio, 1.0, ratio <= 1.0, ratio))
            # corner pair p0, p1 at beta*: bound c sqrt(F) >= |U(p0) - U(p1)|
            F = as_profile(U).sup_D
            diff = abs(float(U.x0) - float(U.x1))
            bound = holder_constant(BETA_STAR) * math.sqrt(F)
            rows.append(_row(f"corner bound U{U.boundary}", 0, diff, bound, diff <= bound))
        ok = all(r["pass"] for r in rows)
        return ok, f"max ratio {worst:.4f} over {pairs} pairs x {len(betas)} betas x {len(goods)} functions", rows
    return _timed(7, "Hölder audit", None, body)


def criterion_8(n_max: int = 6, chains: int = 100, seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        c2 = holder_constant(BETA_STAR) ** 2
        funcs = [GoodFunction(1, 0, 0), GoodFunction(0, 1, -1), GoodFunction(Fraction(1, 3), Fraction(-2, 5), 2)]
        funcs += [PiecewiseHarmonic.random(1 + k % 4, rng) for k in range(chains)]
        rows = []
        worst_lo = worst_hi = 0.0
        for u in funcs:
            prof = as_profile(u)
            upper_const = 3 * c2 * C_WEAK * prof.sup_D
            for n in range(1, n_max + 1):
                D = float(prof.d(np.array([n]))[0])
                E = float(hat_energy(u, n))
                lo = D / (6 * E) if E else 0.0
                hi = E / upper_const if upper_const else 0.0
                worst_lo, worst_hi = max(worst_lo, lo), max(worst_hi, hi)
                rows.append(_row("D_n <= 6 Ehat_n", n, D, 6 * E, D <= 6 * E * (1 + 1e-12), lo))
                rows.append(_row("Ehat_n <= 3 c^2 36 sup D", n, E, upper_const, E <= upper_const * (1 + 1e-12), hi))
        exact = [GoodFunction(1, 0, 0), GoodFunction(Fraction(1, 3), Fraction(-2, 5), 2),
                 PiecewiseHarmonic.random(2, np.random.default_rng(seed + 1), exact=True)]
        for u in exact:
            for n in range(0, n_max):
                lhs, rhs = hat_energy_self_similar(u, n)
                rows.append(_row("self-similar identity (exact)", n + 1, lhs, rhs, lhs == rhs, 1.0 if lhs == rhs else 0.0))
        bad = sum(not r["pass"] for r in rows)
        summary = (f"{bad} violations; max D_n/(6 Ehat) {worst_lo:.4f}, "
                   f"max Ehat/(3c^2 36 supD) {worst_hi:.2e}; identity exact for {len(exact)} functions")
        return bad == 0, summary, rows
    return _timed(8, "cell-oscillation sandwich", None, body)


def lattice_counts(n: int) -> tuple[int, int]:
    """|V_n| and |H_n| straight from integer vertex coordinates."""
    lat = lattice_vertices(n).reshape(-1, 2)
    _, mult = np.unique(lat, axis=0, return_counts=True)
    # every point shared by two cells is one edge of X_n
    return len(mult), int(np.sum(mult == 2))


def criterion_9(n_max: int = 8) -> CriterionResult:
    def body():
        rows = []
        for n in range(1, n_max + 1):
            v_formula = (3 ** (n + 1) + 3) // 2
            h_formula = (3 ** (n + 1) - 3) // 2
            v_built = len(vertex_set(n))
            h_built = len(build_graph(n).edges)
            v_lat, h_lat = lattice_counts(n)
            rows.append(_row("|V_n|", n, v_built, v_formula, v_built == v_formula == v_lat))
            rows.append(_row("|H_n|", n, h_built, h_formula, h_built == h_formula == h_lat))
        ok = all(r["pass"] for r in rows)
        return ok, f"vertex and edge counts match for n <= {n_max}", rows
    return _timed(9, "combinatorial counts", None, body)


def equivalence_suite(seed: int = 0) -> dict:
    """Ten finite-energy test functions: good functions, random splines, products, a smooth image."""
    rng = np.random.default_rng(seed)
    return {
        "U(1,0,0)": GoodFunction(1.0, 0.0, 0.0),
        "U(0,1,-1)": GoodFunction(0.0, 1.0, -1.0),
        "U(1,2,3)": GoodFunction(1.0, 2.0, 3.0),
        "U(0.3,-1,0.2)": GoodFunction(0.3, -1.0, 0.2),
        "spline L1": PiecewiseHarmonic.random(1, rng),
        "spline L2": PiecewiseHarmonic.random(2, rng),
        "spline L3": PiecewiseHarmonic.random(3, rng),
        "U(1,0,0)*U(0,1,0)": Product(GoodFunction(1.0, 0.0, 0.0), GoodFunction(0.0, 1.0, 0.0)),
        "U(1,2,3)*spline L2": Product(GoodFunction(1.0, 2.0, 3.0), PiecewiseHarmonic.random(2, rng)),
        "exp(U(0,1,-1))": Mapped(GoodFunction(0.0, 1.0, -1.0), np.exp, "exp"),
    }


def beta_grid() -> list[float]:
    return [ALPHA + (BETA_STAR - ALPHA) * f for f in (0.1, 0.3, 0.5, 0.7, 0.9)]


RATIO_NAMES = ("Ebeta_quad/Ebeta_series", "B22/Ebeta_series", "B22/Ebeta_quad")


def equivalence_ratios(provider, m: int, betas) -> np.ndarray:
    """Rows per beta: the three pairwise ratios, all quantities resolved down to scale 2^-m."""
    pq = PairQuadrature(provider, m)
    harmonic = getattr(provider, "harmonic_level", None)
    prof = as_profile(provider) if harmonic is not None else energy_profile(provider, m, m + 3)
    n = np.arange(1, m + 1)
    D = prof.d(n)
    out = []
    for beta in betas:
        series = math.fsum((2.0 ** ((beta - BETA_STAR) * n) * D).tolist())
        quad = pq.ebeta(beta)
        b22 = float(pq.level_terms(beta, m - 1).sum())
        out.append((quad / series, b22 / series, b22 / quad))
    return np.array(out)


def criterion_10(depth: int = 7, stability: float = 0.2, seed: int = 0) -> CriterionResult:
    def body():
        suite = equivalence_suite(seed)
        betas = beta_grid()
        rows = []
        lo = {m: np.full(3, np.inf) for m in (depth, depth + 1)}
        hi = {m: np.zeros(3) for m in (depth, depth + 1)}
        for name, f in suite.items():
            r0 = equivalence_ratios(f, depth, betas)
            r1 = equivalence_ratios(f, depth + 1, betas)
            for m, r in ((depth, r0), (depth + 1, r1)):
                lo[m] = np.minimum(lo[m], r.min(axis=0))
                hi[m] = np.maximum(hi[m], r.max(axis=0))
            for b_idx, beta in enumerate(betas):
                for k, label in enumerate(RATIO_NAMES):
                    change = r1[b_idx, k] / r0[b_idx, k]
                    ok = np.isfinite(change) and abs(change - 1) <= stability
                    rows.append(_row(f"{label} [{name}] beta={beta:.4f} depth {depth}->{depth + 1}",
                                     depth, r1[b_idx, k], r0[b_idx, k], ok, change))
        for k, label in enumerate(RATIO_NAMES):
            for end, a, b in (("min", lo[depth][k], lo[depth + 1][k]), ("max", hi[depth][k], hi[depth + 1][k])):
                change = b / a
                rows.append(_row(f"bracket {end} {label} depth {depth}->{depth + 1}", depth, b, a,
                                 abs(change - 1) <= stability, change))
        kappa = max(max(hi[m].max(), 1 / lo[m].min()) for m in lo)
        brackets = "; ".join(f"{label} in [{lo[depth + 1][k]:.3f}, {hi[depth + 1][k]:.3f}]"
                             for k, label in enumerate(RATIO_NAMES))
        bad = sum(not r["pass"] for r in rows)
        worst = max(abs(r["ratio"] - 1) for r in rows)
        summary = f"kappa {kappa:.3f}; {brackets}; worst depth change {100 * worst:.1f}%"
        return bad == 0, summary, rows
    return _timed(10, "equivalence brackets", None, body)


def run_all(level: int = 8, depth: int = 7, seed: int = 0) -> list[CriterionResult]:
    """All ten criteria; ``level`` caps the graph levels used by the level-indexed checks."""
    return [
        criterion_1(),
        criterion_2(min(7, level)),
        criterion_3(min(8, level), seed=seed),
        criterion_4(seed=seed),
        criterion_5(min(6, level)),
        criterion_6(),
        criterion_7(level=min(8, level), seed=seed),
        criterion_8(min(6, level), seed=seed),
        criterion_9(min(8, level)),
        criterion_10(depth, seed=seed),
    ]
