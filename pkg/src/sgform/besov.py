"""Besov-type energies, the beta-indexed series, Abel probes and Hölder audits."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from sgform import kernels
from sgform.energy import (
    CellFunction, EnergyProfile, An_Dn, cell_averages, energy_profile, graph_energy, restrict,
)
from sgform.geometry import all_words, lattice_anchors, lattice_vertices
from sgform.providers import Composed

ALPHA = math.log(3) / math.log(2)
BETA_STAR = math.log(5) / math.log(2)
C_WEAK = 36
LOG2 = math.log(2)

DEFAULT_EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
PROBE_CSV_HEADER = ["beta", "eps", "value", "value_times_log2", "supD", "verdict"]
AUDIT_CSV_HEADER = ["check", "n", "lhs", "rhs", "ratio", "pass"]

PAIR_BUDGET = 10**8
MAX_SERIES_TERMS = 10**7


def _check_beta(beta: float) -> None:
    if not ALPHA < beta < BETA_STAR:
        raise ValueError(f"beta = {beta} outside ({ALPHA:.6f}, {BETA_STAR:.6f})")


def as_profile(source, N: int | None = None, m: int | None = None) -> EnergyProfile:
    """Accept an EnergyProfile, a CellFunction or a provider."""
    if isinstance(source, EnergyProfile):
        return source
    if isinstance(source, CellFunction):
        return energy_profile(source, source.level if N is None else N)
    harmonic = getattr(source, "harmonic_level", None)
    if harmonic is not None:
        # the exact tail covers every level past the harmonic one
        return energy_profile(source, max(1, harmonic))
    if N is None:
        raise ValueError("a depth N is needed for providers without a harmonic level")
    return energy_profile(source, N, m)


def tail_majorant(profile: EnergyProfile) -> float:
    """Bound on every D_n, n > depth: the exact sup, else 36 x the observed sup."""
    return profile.sup_D if profile.sup_exact else C_WEAK * profile.sup_D


@dataclass
class BetaSeries:
    beta: float
    terms: np.ndarray = field(repr=False)
    tail_bound: float
    value: float

    alpha = ALPHA
    beta_star = BETA_STAR

    @property
    def depth(self) -> int:
        return len(self.terms)


def partial_sums(source, beta: float, N: int) -> np.ndarray:
    """Partial sums of 2^((beta - beta*) n) D_n for n = 1..N; any beta > alpha."""
    if beta <= ALPHA:
        raise ValueError("beta must exceed alpha")
    prof = as_profile(source, N)
    n = np.arange(1, N + 1)
    return np.cumsum(2.0 ** ((beta - BETA_STAR) * n) * prof.d(n))


def diverging(sums: np.ndarray) -> bool:
    """True when the last increment does not shrink: no geometric decay in sight."""
    if len(sums) < 3:
        return False
    inc = np.diff(sums)
    return bool(inc[-1] > 0 and inc[-1] >= inc[-2])


def discrete_Ebeta(source, beta: float, rel_tol: float = 1e-10) -> BetaSeries:
    """Series sum over n of 2^((beta - beta*) n) D_n with a certified truncation."""
    _check_beta(beta)
    prof = as_profile(source)
    lam = 2.0 ** (beta - BETA_STAR)
    M = tail_majorant(prof)
    if M == 0:
        return BetaSeries(beta, np.zeros(1), 0.0, 0.0)
    N = max(prof.depth, 1)
    while True:
        n = np.arange(1, N + 1)
        terms = lam**n * prof.d(n)
        total = math.fsum(terms.tolist())
        tail = M * lam ** (N + 1) / (1 - lam)
        if total > 0 and tail < rel_tol * total:
            return BetaSeries(beta, np.cumsum(terms), tail, total)
        if not prof.infinite:
            raise ValueError(f"profile of depth {prof.depth} cannot certify the tail at beta = {beta}")
        if N >= MAX_SERIES_TERMS:
            raise ValueError("series did not reach the requested tolerance")
        # terms needed for lam^N to fall below the tolerance, padded
        need = math.log(rel_tol * max(total, 1e-300) * (1 - lam) / M) / math.log(lam)
        N = int(min(MAX_SERIES_TERMS, max(2 * N, need + 2)))


# ---------------------------------------------------------------------------
# pair quadrature of the double integral

class PairQuadrature:
    """Beta-independent pair data of a provider on level-m cells.

    Ordered pairs of distinct anchors are histogrammed by the integer squared
    distance q (lattice units 2^-(m+1)). Pairs of cells with the same anchor
    (the diagonal and cells meeting at their common anchor) are refined once
    more; their sub-pairs with distinct anchors are kept separately.
    """

    def __init__(self, provider, m: int, quad_extra: int = 2, budget: int = PAIR_BUDGET):
        if m < 1:
            raise ValueError("quadrature depth must be >= 1")
        if 9**m // 2 > budget:
            raise ValueError(f"depth {m} needs about {9**m // 2} pairs, over the budget {budget}")
        self.m = m
        harmonic = getattr(provider, "harmonic_level", None)
        depth = None if harmonic is not None and harmonic <= m + 1 else m + 1 + quad_extra
        fine = cell_averages(provider, m + 1, depth)
        avg1 = np.asarray(fine.values, dtype=np.float64)
        avg = avg1.reshape(-1, 3).mean(axis=1)
        self.avg = avg

        anchors = lattice_anchors(m)
        self.qscale = 4 ** (m + 1)
        self.hist = kernels.pair_histogram(avg, anchors[:, 0], anchors[:, 1], self.qscale)

        # refine pairs of cells sharing their anchor
        keys = anchors[:, 0] * (1 << (m + 2)) + anchors[:, 1]
        order = np.argsort(keys, kind="stable")
        sk = keys[order]
        v_list, w_list = [np.arange(3**m)], [np.arange(3**m)]
        starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
        ends = np.r_[starts[1:], len(sk)]
        for s, e in zip(starts, ends):
            if e - s > 1:
                group = order[s:e]
                for a in group:
                    for b in group:
                        if a != b:
                            v_list.append(np.array([a]))
                            w_list.append(np.array([b]))
        v = np.concatenate(v_list)
        w = np.concatenate(w_list)
        kid = np.arange(3)
        cv = (3 * v[:, None, None] + kid[None, :, None]).repeat(3, axis=2).ravel()
        cw = (3 * w[:, None, None] + kid[None, None, :]).repeat(3, axis=1).ravel()
        fa = lattice_anchors(m + 1)
        dA = fa[cv, 0] - fa[cw, 0]
        dB = fa[cv, 1] - fa[cw, 1]
        q = dA * dA + 3 * dB * dB
        keep = q > 0
        d = avg1[cv[keep]] - avg1[cw[keep]]
        self.sub_q = q[keep]
        self.sub_w = d * d
        self.sub_qscale = 4 ** (m + 2)

    def ebeta(self, beta: float) -> float:
        """Quadrature of the double integral of (u(x)-u(y))^2 / |x-y|^(alpha+beta)."""
        s = -(ALPHA + beta) / 2
        q = np.arange(1, self.qscale + 1)
        main = math.fsum((self.hist[1:] * (q / self.qscale) ** s).tolist()) * 9.0 ** (-self.m)
        diag = math.fsum((self.sub_w * (self.sub_q / self.sub_qscale) ** s).tolist()) * 9.0 ** (-(self.m + 1))
        return main + diag

    def level_terms(self, beta: float, N_max: int) -> np.ndarray:
        """2^((alpha+beta) n) times the double integral over pairs closer than 2^-n.

        Refined anchors sit on V_m, so no resolved pair is closer than 2^-m and
        scales run up to N_max <= m - 1.
        """
        if not 1 <= N_max < self.m:
            raise ValueError(f"N_max = {N_max} must lie in 1..{self.m - 1} at quadrature depth {self.m}")
        cum = np.cumsum(self.hist)
        sub_order = np.argsort(self.sub_q, kind="stable")
        sq = self.sub_q[sub_order]
        sw = np.cumsum(self.sub_w[sub_order])
        out = np.empty(N_max)
        for n in range(1, N_max + 1):
            # d < 2^-n  <=>  q < 4^(m+1-n) in lattice units
            main = cum[4 ** (self.m + 1 - n) - 1] * 9.0 ** (-self.m)
            k = int(np.searchsorted(sq, 4 ** (self.m + 2 - n)))
            diag = (sw[k - 1] if k else 0.0) * 9.0 ** (-(self.m + 1))
            out[n - 1] = 2.0 ** ((ALPHA + beta) * n) * (main + diag)
        return out


def double_integral_Ebeta(provider, beta: float, m: int) -> float:
    return PairQuadrature(provider, m).ebeta(beta)


def metric_besov_seminorms(provider, beta: float, m: int, N_max: int) -> tuple[float, float]:
    """([u]_{B^{2,2}}, [u]_{B^{2,inf}}) truncated at scale 2^-N_max."""
    terms = PairQuadrature(provider, m).level_terms(beta, N_max)
    return float(terms.sum()), float(terms.max())


# ---------------------------------------------------------------------------
# Abel probe

def abel_value(profile: EnergyProfile, eps: float, rel_tol: float = 1e-12) -> tuple[float, bool]:
    """(beta* - beta) times the series at beta = beta* - eps; flag says certified."""
    beta = BETA_STAR - eps
    try:
        return eps * discrete_Ebeta(profile, beta, rel_tol).value, True
    except ValueError:
        n = np.arange(1, profile.depth + 1)
        return eps * float(np.sum(2.0 ** (-eps * n) * profile.D)), False


def abel_probe(source, eps_list=DEFAULT_EPS, tol: float = 1e-9) -> list[dict]:
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    prof = as_profile(source)
    rows = []
    for eps in eps_list:
        value, certified = abel_value(prof, eps)
        scaled = value * LOG2
        ok = 0 <= scaled <= prof.sup_D * (1 + tol)
        verdict = ("pass" if ok else "fail") if certified else "uncertified"
        rows.append({"beta": BETA_STAR - eps, "eps": eps, "value": value,
                     "value_times_log2": scaled, "supD": prof.sup_D, "verdict": verdict})
    return rows


def weak_mono_corollary(profile: EnergyProfile, N: int, tol: float = 1e-12) -> tuple[float, float]:
    """(max_{n <= N/2} D_n, 36 min_{N/2 <= n <= N} D_n), with N/2 rounded up.

    Weak monotonicity bounds every level by 36 times any later one, so the
    first entry never exceeds the second.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    D = profile.d(np.arange(1, N + 1))
    half = math.ceil(N / 2)
    return float(D[:half].max()), C_WEAK * float(D[half - 1:].min()) + tol


# ---------------------------------------------------------------------------
# Hölder continuity

def holder_constant(beta: float) -> float:
    if beta <= ALPHA:
        raise ValueError("the Hölder constant needs beta > alpha")
    h = (beta - ALPHA) / 2
    t = 2.0**h
    return (2 / math.sqrt(3)) ** h * ((2 * math.sqrt(2) / 3) * t / (t - 1) + t)


def holder_F(profile: EnergyProfile, beta: float) -> float:
    """sup_n 2^((beta - alpha) n) A_n = sup_n 2^((beta - beta*) n) D_n."""
    if beta > BETA_STAR:
        raise ValueError("F is infinite beyond beta* for nonconstant input")
    if beta == BETA_STAR:
        if not profile.sup_exact:
            raise ValueError("F at beta* needs an exact supremum")
        return profile.sup_D
    lam = 2.0 ** (beta - BETA_STAR)
    M = tail_majorant(profile)
    best, n = 0.0, 1
    while True:
        if n > profile.depth and not profile.infinite:
            # terms past the profile are bounded by lam^n M
            return max(best, lam**n * M)
        best = max(best, lam**n * float(profile.d(np.array([n]))[0]))
        if lam ** (n + 1) * M <= best:
            return best
        n += 1


def holder_audit(U, beta: float, pair_count: int = 10_000, level: int = 8, seed: int = 0) -> tuple[float, list]:
    """Max of |U(x) - U(y)| / (c sqrt(F) |x - y|^((beta - alpha)/2)) over sampled vertex pairs.

    Pairs are drawn inside a random cell of random level k < ``level`` so every
    scale down to 2^-level is exercised.
    """
    if beta <= ALPHA:
        raise ValueError("beta must exceed alpha")
    rng = np.random.default_rng(seed)
    c = holder_constant(beta)
    F = holder_F(as_profile(U), beta)
    tri = np.asarray(U.vertex_values(level), dtype=np.float64)
    lat = lattice_vertices(level)
    h = (beta - ALPHA) / 2
    scale = float(1 << (level + 1))
    worst, rows = 0.0, []
    drawn = 0
    while drawn < pair_count:
        k = int(rng.integers(0, level))
        span = 3 ** (level - k)
        base = int(rng.integers(0, 3**k)) * span
        c1, c2 = base + rng.integers(0, span, size=2)
        i1, i2 = rng.integers(0, 3, size=2)
        dA = int(lat[c1, i1, 0] - lat[c2, i2, 0])
        dB = int(lat[c1, i1, 1] - lat[c2, i2, 1])
        q = dA * dA + 3 * dB * dB
        if q == 0:
            continue
        dist = math.sqrt(q) / scale
        diff = abs(tri[c1, i1] - tri[c2, i2])
        bound = c * math.sqrt(F) * dist**h
        ratio = diff / bound if bound > 0 else (0.0 if diff == 0 else math.inf)
        worst = max(worst, ratio)
        rows.append((k, dist, diff, bound, ratio))
        drawn += 1
    return worst, rows


# ---------------------------------------------------------------------------
# the cell-oscillation energy and its sandwich

def hat_energy(provider, n: int, m: int | None = None):
    """(5/3)^n sum over level-n cells of sum_i (u(f_w p_i) - mean of u on K_w)^2."""
    tri = provider.vertex_values(n)
    avg = cell_averages(provider, n, m).values
    d = tri - avg[:, None]
    total = (d * d).sum()
    if tri.dtype == object:
        return Fraction(5, 3) ** n * total
    return (5.0 / 3.0) ** n * float(total)


def hat_energy_self_similar(provider, n: int):
    """(lhs, rhs) of the identity at level n+1 = (5/3) sum_i level n of u o f_i."""
    lhs = hat_energy(provider, n + 1)
    parts = [hat_energy(Composed(provider, (i,)), n) for i in range(3)]
    five_thirds = Fraction(5, 3) if isinstance(lhs, Fraction) else 5.0 / 3.0
    return lhs, five_thirds * sum(parts)


def hat_energy_sandwich(provider, n_max: int, m: int | None = None) -> list[dict]:
    """Audit rows: D_n <= 6 Ehat_n and Ehat_n <= 3 c^2 36 sup D, plus Cesàro means."""
    prof = as_profile(provider, n_max, m)
    c = holder_constant(BETA_STAR)
    upper = 3 * c * c * C_WEAK * prof.sup_D
    rows = []
    hats = []
    for n in range(1, n_max + 1):
        D = float(An_Dn(provider, n, m)[1])
        E = float(hat_energy(provider, n, m))
        hats.append(E)
        rows.append(_audit_row("hat_lower", n, D, 6 * E, tol=1e-12))
        rows.append(_audit_row("hat_upper", n, E, upper, tol=1e-12))
        rows.append({"check": "hat_cesaro", "n": n, "lhs": math.fsum(hats) / n, "rhs": E,
                     "ratio": (math.fsum(hats) / n) / E if E else 0.0, "pass": True})
    return rows


def _audit_row(check: str, n: int, lhs: float, rhs: float, tol: float = 0.0) -> dict:
    ratio = lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf)
    return {"check": check, "n": n, "lhs": float(lhs), "rhs": float(rhs), "ratio": float(ratio),
            "pass": bool(lhs <= rhs + tol * max(1.0, abs(rhs)))}


def self_similar_decomp_audit(u: CellFunction, n: int, k: int):
    """D_{n+k}(u) - (5/3)^n sum over w in W_n of D_k(u restricted to K_w)."""
    if u.level != n + k:
        raise ValueError(f"cell function level {u.level} != {n} + {k}")
    exact = u.exact
    five_thirds = Fraction(5, 3) if exact else 5.0 / 3.0
    parts = [graph_energy(restrict(u, w)) for w in all_words(n)]
    inner = sum(parts, Fraction(0)) if exact else math.fsum(parts)
    whole = graph_energy(u)
    return five_thirds ** (n + k) * (whole - inner)


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
