"""Discrete energies on the cell graphs X_n and the averaging maps between levels."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from sgform import kernels
from sgform.geometry import _vertex_table, build_graph, parse_word, word_index, word_str, word_from_index
from sgform.good import pair_sum_sq

FIVE_THIRDS = Fraction(5, 3)


def _is_exact(values: np.ndarray) -> bool:
    return values.dtype == object


def _scale(level: int, exact: bool):
    return FIVE_THIRDS**level if exact else (5.0 / 3.0) ** level


@dataclass
class CellFunction:
    """Values indexed by W_n in canonical (lexicographic) word order."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype != object:
            vals = vals.astype(np.float64)
            if not np.all(np.isfinite(vals)):
                raise ValueError("cell function has non-finite entries")
        if vals.shape != (3**self.level,):
            raise ValueError(f"level {self.level} needs {3**self.level} values, got {vals.shape}")
        self.values = vals

    @property
    def exact(self) -> bool:
        return _is_exact(self.values)

    def __getitem__(self, w) -> object:
        return self.values[word_index(parse_word(w))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["level", "word", "value"])
        for idx, v in enumerate(self.values):
            if isinstance(v, Fraction):
                text = f"{v.numerator}/{v.denominator}"
            else:
                text = repr(float(v))
            wr.writerow([self.level, word_str(word_from_index(idx, self.level)), text])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> CellFunction:
        rows = list(csv.DictReader(io.StringIO(text)))
        level = int(rows[0]["level"])
        exact = all("/" in r["value"] for r in rows)
        vals = np.empty(3**level, dtype=object if exact else np.float64)
        for r in rows:
            v = Fraction(r["value"]) if exact else float(r["value"])
            vals[word_index(parse_word(r["word"]))] = v
        return cls(level, vals)


@dataclass
class VertexFunction:
    """A function on V_n, keyed by exact DyadicPoint."""

    level: int
    values: dict


@dataclass
class EnergyProfile:
    """D_1..D_N plus, for functions harmonic below some level, the exact tail.

    ``tail(n)`` (vectorised over integer arrays) gives D_n for n > N. ``sup_D``
    is the true supremum over all n when ``sup_exact`` holds, otherwise the
    observed maximum of ``D``.
    """

    D: np.ndarray
    sup_D: float
    sup_exact: bool = False
    tail: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.D)

    @property
    def infinite(self) -> bool:
        return self.tail is not None

    def d(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        out = np.empty(n.shape, dtype=np.float64)
        known = n <= self.depth
        if np.any(n < 1):
            raise ValueError("D_n is defined for n >= 1")
        out[known] = self.D[n[known] - 1]
        if np.any(~known):
            if self.tail is None:
                raise ValueError(f"profile only known up to n = {self.depth}")
            out[~known] = self.tail(n[~known])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "A_n", "D_n"])
        for n, d in enumerate(self.D, start=1):
            wr.writerow([n, repr(float(d) * 0.6**n), repr(float(d))])
        return buf.getvalue()


# ---------------------------------------------------------------------------

def graph_energy(u: CellFunction, g=None):
    """E_n(u, u): sum of squared differences over the edges of X_n."""
    if g is None:
        g = build_graph(u.level)
    if g.level != u.level:
        raise ValueError(f"cell function level {u.level} != graph level {g.level}")
    ei, ej = g.edge_index
    if u.exact:
        d = u.values[ei] - u.values[ej]
        return sum(d * d, Fraction(0))
    return kernels.edge_energy(u.values, ei, ej)


def scaled_energy(u: CellFunction, g=None):
    """G_n(u) = (5/3)^n E_n(u, u)."""
    return _scale(u.level, u.exact) * graph_energy(u, g)


def mean_value(u: CellFunction, n: int) -> CellFunction:
    """M_{n,m} u: each level-n value is the mean of its 3^m descendants."""
    if not 0 <= n < u.level:
        raise ValueError(f"target level {n} must be below {u.level}")
    m = u.level - n
    blocks = u.values.reshape(3**n, 3**m)
    if u.exact:
        return CellFunction(n, blocks.sum(axis=1) / 3**m)
    return CellFunction(n, blocks.mean(axis=1))


def _default_depth(provider, n: int, m: int | None) -> int:
    if m is not None:
        return m
    h = getattr(provider, "harmonic_level", None)
    if h is None:
        raise ValueError(f"{provider!r} is not piecewise harmonic; give a quadrature depth")
    return max(n, h)


def cell_averages(provider, n: int, m: int | None = None) -> CellFunction:
    """P_n u by equal-weight averaging of corner values over level-m cells.

    Exact for providers harmonic from level m on (default depth for them).
    """
    m = _default_depth(provider, n, m)
    if m < n:
        raise ValueError(f"quadrature depth {m} below level {n}")
    tri = provider.vertex_values(m)
    leaf = CellFunction(m, tri.sum(axis=1) / 3)
    return leaf if m == n else mean_value(leaf, n)


def An_Dn(source, n: int, m: int | None = None) -> tuple:
    """(A_n, D_n) from a CellFunction at level >= n or from a provider."""
    if isinstance(source, CellFunction):
        if source.level < n:
            raise ValueError(f"cell function level {source.level} below {n}")
        avg = source if source.level == n else mean_value(source, n)
    else:
        avg = cell_averages(source, n, m)
    A = graph_energy(avg)
    return A, _scale(n, avg.exact) * A


def vertex_function(provider, n: int) -> VertexFunction:
    """Restriction of a provider to V_n; checks agreement at junction points."""
    tri = provider.vertex_values(n)
    values = {}
    for cell, pts in enumerate(_vertex_table(n)):
        for i, p in enumerate(pts):
            v = tri[cell, i]
            old = values.setdefault(p, v)
            if old != v and not (isinstance(v, float) and math.isclose(old, v, rel_tol=1e-12, abs_tol=1e-15)):
                raise ValueError(f"provider is discontinuous at {p}: {old} vs {v}")
    return VertexFunction(n, values)


def Bn(u: VertexFunction, n: int | None = None):
    """Sum over level-n cells of squared differences over unordered corner pairs."""
    n = u.level if n is None else n
    total = None
    for pts in _vertex_table(n):
        try:
            tri = tuple(u.values[p] for p in pts)
        except KeyError as exc:
            raise ValueError(f"missing vertex value at {exc.args[0]}") from None
        s = pair_sum_sq(tri)
        total = s if total is None else total + s
    return total


def restrict(u: CellFunction, w: Sequence[int]) -> CellFunction:
    """Values on cells prefixed by w, reindexed at level N - |w| (P(u o f_w))."""
    w = parse_word(w)
    n = len(w)
    if n > u.level:
        raise ValueError(f"word level {n} exceeds cell function level {u.level}")
    k = u.level - n
    start = word_index(w) * 3**k
    return CellFunction(k, u.values[start:start + 3**k])


def weak_mono_ratio(u: CellFunction, n: int):
    """G_n(M_{n,m} u) / G_{n+m}(u)."""
    denom = scaled_energy(u)
    if denom == 0:
        raise ValueError("G_{n+m}(u) = 0: constant input has no ratio")
    return scaled_energy(mean_value(u, n)) / denom


def energy_profile(source, N: int, m: int | None = None) -> EnergyProfile:
    """D_1..D_N, with an exact tail for piecewise-harmonic providers.

    For a provider harmonic inside every level-H cell, n >= H gives
    D_n = L + (3/5)^(n-H) (D_H - L) with L = (5/3)^H (2/3) sum_v S_v, where S_v
    is the sum of squared corner differences of cell v; interface differences
    across level-H cells shrink by 3/5 per level.
    """
    if isinstance(source, CellFunction):
        top = source if source.level == N else mean_value(source, N)
        D = _profile_from_cells(top)
        return EnergyProfile(D, float(D.max()), sup_exact=False)
    H = getattr(source, "harmonic_level", None)
    if H is None:
        if m is None:
            raise ValueError("quadrature depth required for non-harmonic providers")
        D = _profile_from_cells(_float_cells(cell_averages(source, N, m)))
        return EnergyProfile(D, float(D.max()), sup_exact=False)
    top = max(N, H, 1)
    D = _profile_from_cells(_float_cells(cell_averages(source, top)))
    tri = np.asarray(source.vertex_values(H), dtype=np.float64)
    L = (5.0 / 3.0) ** H * (2.0 / 3.0) * float(pair_sum_sq(tri).sum())
    D_H = D[H - 1] if H >= 1 else 0.0

    def tail(n):
        return L + 0.6 ** (np.asarray(n, dtype=np.float64) - H) * (D_H - L)

    sup = max(float(D.max()), L)
    # keep all computed levels: the tail formula only holds from level H on
    return EnergyProfile(D, sup, sup_exact=True, tail=tail)


def _float_cells(u: CellFunction) -> CellFunction:
    if u.exact:
        return CellFunction(u.level, np.array([float(v) for v in u.values]))
    return u


def _profile_from_cells(u: CellFunction) -> np.ndarray:
    u = _float_cells(u)
    out = np.empty(u.level)
    cur = u
    for n in range(u.level, 0, -1):
        out[n - 1] = (5.0 / 3.0) ** n * graph_energy(cur)
        if n > 1:
            cur = mean_value(cur, n - 1)
    return out
