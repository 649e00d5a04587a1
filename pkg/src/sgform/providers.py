"""Functions on the gasket that can be sampled at the corners of level-m cells.

A provider exposes ``vertex_values(m)`` returning an array of shape (3^m, 3)
whose row ``w`` holds ``(u(f_w p_0), u(f_w p_1), u(f_w p_2))``, and
``harmonic_level``: the level from which the function is harmonic inside every
cell (then the average over a cell is the mean of its three corner values), or
``None`` when no such level exists.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from sgform.geometry import float_coords, lattice_vertices, parse_word, word_index
from sgform.good import extend_triples


class PointFunction:
    """Wraps ``f(x, y)`` acting elementwise on Euclidean coordinate arrays."""

    harmonic_level = None
    exact = False

    def __init__(self, f: Callable[[np.ndarray, np.ndarray], np.ndarray], name: str = "f"):
        self.f = f
        self.name = name

    def vertex_values(self, m: int) -> np.ndarray:
        x, y = float_coords(lattice_vertices(m), m)
        return np.asarray(self.f(x, y), dtype=np.float64).reshape(3**m, 3)

    def __repr__(self):
        return f"PointFunction({self.name})"


class PiecewiseHarmonic:
    """Continuous interpolant of vertex data on V_M, harmonic inside each level-M cell.

    ``triples`` is the (3^M, 3) array of corner values of the level-M cells;
    values at a junction point must agree between the two cells sharing it.
    """

    def __init__(self, level: int, triples: np.ndarray):
        triples = np.asarray(triples)
        if triples.shape != (3**level, 3):
            raise ValueError(f"expected shape {(3**level, 3)}, got {triples.shape}")
        self.level = level
        self.triples = triples
        self.harmonic_level = level
        self.exact = triples.dtype == object

    @classmethod
    def random(cls, level: int, rng: np.random.Generator, exact: bool = False, scale: int = 8):
        """Independent random values on every point of V_level.

        Exact mode draws integers in [-scale, scale] and stores Fractions.
        """
        keys = _vertex_keys(level)
        uniq, inverse = np.unique(keys.reshape(-1), return_inverse=True)
        if exact:
            draws = rng.integers(-scale, scale + 1, size=uniq.size)
            vals = np.array([Fraction(int(v)) for v in draws], dtype=object)
        else:
            vals = rng.uniform(-1.0, 1.0, size=uniq.size)
        return cls(level, vals[inverse].reshape(3**level, 3))

    def vertex_values(self, m: int) -> np.ndarray:
        M = self.level
        if m >= M:
            return extend_triples(self.triples, m - M)
        k = M - m
        base = np.arange(3**m) * 3**k
        out = np.empty((3**m, 3), dtype=self.triples.dtype)
        for i in range(3):
            # corner i of cell w is corner i of its descendant w i^k
            out[:, i] = self.triples[base + i * (3**k - 1) // 2, i]
        return out

    def __repr__(self):
        return f"PiecewiseHarmonic(level={self.level})"


class Product:
    """Pointwise product of two providers (not harmonic in general)."""

    harmonic_level = None

    def __init__(self, p, q):
        self.p, self.q = p, q
        self.exact = getattr(p, "exact", False) and getattr(q, "exact", False)

    def vertex_values(self, m: int) -> np.ndarray:
        return self.p.vertex_values(m) * self.q.vertex_values(m)

    def __repr__(self):
        return f"Product({self.p!r}, {self.q!r})"


class Mapped:
    """The function g o u for a provider u and an elementwise map g."""

    harmonic_level = None
    exact = False

    def __init__(self, base, g: Callable[[np.ndarray], np.ndarray], name: str = "g"):
        self.base = base
        self.g = g
        self.name = name

    def vertex_values(self, m: int) -> np.ndarray:
        return np.asarray(self.g(np.asarray(self.base.vertex_values(m), dtype=np.float64)), dtype=np.float64)

    def __repr__(self):
        return f"Mapped({self.name}, {self.base!r})"


class Composed:
    """The function u o f_w for a provider u and a word w."""

    def __init__(self, base, w: Sequence[int]):
        self.base = base
        self.w = parse_word(w)
        h = base.harmonic_level
        self.harmonic_level = None if h is None else max(h - len(self.w), 0)
        self.exact = getattr(base, "exact", False)

    def vertex_values(self, m: int) -> np.ndarray:
        n = len(self.w)
        start = word_index(self.w) * 3**m
        return self.base.vertex_values(m + n)[start:start + 3**m]

    def __repr__(self):
        return f"Composed({self.base!r}, {''.join(map(str, self.w))})"


def _vertex_keys(level: int) -> np.ndarray:
    """One integer key per point of V_level, laid out like ``vertex_values``."""
    lat = lattice_vertices(level)
    s = 1 << (level + 1)
    return lat[..., 0] * (s + 1) + lat[..., 1]
