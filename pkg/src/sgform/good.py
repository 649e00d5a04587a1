"""Harmonic "good" functions U^(x0,x1,x2) generated by the 1/5-2/5 rule."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from sgform.geometry import Word, cell_anchor, parse_word


def _coerce(values):
    """Integers and Fractions become Fractions; any float makes everything float."""
    if all(isinstance(v, Rational) for v in values):
        return tuple(Fraction(v) for v in values)
    return tuple(float(v) for v in values)


def extend_once(a, b, c):
    """Values at the midpoints (m01, m12, m02) of a cell with corner values a, b, c."""
    return (2 * a + 2 * b + c) / 5, (a + 2 * b + 2 * c) / 5, (2 * a + b + 2 * c) / 5


def child_triple(tri, i: int):
    a, b, c = tri
    m01, m12, m02 = extend_once(a, b, c)
    if i == 0:
        return a, m01, m02
    if i == 1:
        return m01, b, m12
    if i == 2:
        return m02, m12, c
    raise ValueError(f"child index {i} not in {{0, 1, 2}}")


def extend_triples(tri: np.ndarray, levels: int) -> np.ndarray:
    """Refine an (N, 3) array of cell corner values ``levels`` times.

    Children of cell ``k`` land at rows ``3k, 3k+1, 3k+2``. Works on float and
    on object (Fraction) arrays.
    """
    for _ in range(levels):
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        m01 = (2 * a + 2 * b + c) / 5
        m12 = (a + 2 * b + 2 * c) / 5
        m02 = (2 * a + b + 2 * c) / 5
        kids = np.empty((tri.shape[0], 3, 3), dtype=tri.dtype)
        kids[:, 0] = np.stack([a, m01, m02], axis=1)
        kids[:, 1] = np.stack([m01, b, m12], axis=1)
        kids[:, 2] = np.stack([m02, m12, c], axis=1)
        tri = kids.reshape(-1, 3)
    return tri


def pair_sum_sq(tri) -> object:
    """(a-b)^2 + (b-c)^2 + (a-c)^2 for one triple or row-wise for an array."""
    if isinstance(tri, np.ndarray) and tri.ndim == 2:
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    else:
        a, b, c = tri
    return (a - b) ** 2 + (b - c) ** 2 + (a - c) ** 2


@dataclass(frozen=True)
class GoodFunction:
    x0: object
    x1: object
    x2: object

    def __post_init__(self):
        vals = _coerce((self.x0, self.x1, self.x2))
        for name, v in zip(("x0", "x1", "x2"), vals):
            object.__setattr__(self, name, v)

    harmonic_level = 0

    @property
    def boundary(self) -> tuple:
        return self.x0, self.x1, self.x2

    @property
    def exact(self) -> bool:
        return isinstance(self.x0, Fraction)

    @property
    def S(self):
        return pair_sum_sq(self.boundary)

    def __add__(self, other: GoodFunction) -> GoodFunction:
        return GoodFunction(*(s + o for s, o in zip(self.boundary, other.boundary)))

    def scale(self, lam) -> GoodFunction:
        return GoodFunction(*(lam * v for v in self.boundary))

    def vertex_values(self, m: int) -> np.ndarray:
        """Corner values of all level-m cells, shape (3^m, 3)."""
        dtype = object if self.exact else np.float64
        root = np.array([self.boundary], dtype=dtype)
        return extend_triples(root, m)

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, Fraction):
                return {"num": v.numerator, "den": v.denominator}
            return v
        return json.dumps({"x0": enc(self.x0), "x1": enc(self.x1), "x2": enc(self.x2)})

    @classmethod
    def from_json(cls, text: str) -> GoodFunction:
        d = json.loads(text)

        def dec(v):
            if isinstance(v, dict):
                return Fraction(int(v["num"]), int(v["den"]))
            return v
        return cls(dec(d["x0"]), dec(d["x1"]), dec(d["x2"]))


def cell_boundary(U: GoodFunction, w: Sequence[int]) -> tuple:
    """(U(P_w0), U(P_w1), U(P_w2)): the values of U on the corners V_w."""
    tri = U.boundary
    for d in parse_word(w):
        tri = child_triple(tri, d)
    return tri


def evaluate(U: GoodFunction, w: Sequence[int]):
    """U(P_w) for a word of level >= 1."""
    w = parse_word(w)
    if not w:
        raise ValueError("evaluate needs a word of level >= 1")
    return cell_boundary(U, w[:-1])[w[-1]]


def exact_cell_average(U: GoodFunction, w: Sequence[int]):
    """P_n U(w) via the (3, 1, 1)/5 rule on the parent cell's corners."""
    w = parse_word(w)
    if not w:
        raise ValueError("cell average needs a word of level >= 1")
    tri = cell_boundary(U, w[:-1])
    i = w[-1]
    return (2 * tri[i] + tri[0] + tri[1] + tri[2]) / 5


def _consts(S):
    if isinstance(S, Fraction):
        return Fraction(3, 5), Fraction(2, 3)
    return 0.6, 2.0 / 3.0


def closed_form_A(S, n: int):
    if n < 1:
        raise ValueError("A_n needs n >= 1")
    r, two_thirds = _consts(S)
    return two_thirds * (r**n - r ** (2 * n)) * S


def closed_form_B(S, n: int):
    if n < 0:
        raise ValueError("B_n needs n >= 0")
    r, _ = _consts(S)
    return r**n * S


def closed_form_D(S, n: int):
    if n < 1:
        raise ValueError("D_n needs n >= 1")
    r, two_thirds = _consts(S)
    return two_thirds * (1 - r**n) * S


def closed_form_energies(U: GoodFunction, n: int) -> tuple:
    """(A_n, B_n, D_n) of U in closed form; exact when U is rational."""
    S = U.S
    return closed_form_A(S, n), closed_form_B(S, n), closed_form_D(S, n)


def sup_D(U: GoodFunction):
    """sup_n D_n(U) = (2/3) S, approached as n grows."""
    S = U.S
    return _consts(S)[1] * S


# ---------------------------------------------------------------------------
# lifting prescribed corner values to the parent cell

def lift_boundary(case: int, a, b, c) -> tuple:
    """Solve the extension rule backwards for one child cell.

    ``case`` is the child index i of the cell w = w^- i. The child's corner
    values are ``a`` at the shared parent corner i, and ``b``, ``c`` at the
    midpoints towards the remaining parent corners j < k. Returns ``(x, y, z)``:
    the parent corner values at j and k and the value at the midpoint of j, k.
    """
    if case not in (0, 1, 2):
        raise ValueError(f"case {case!r} not in {{0, 1, 2}}")
    a, b, c = _coerce((a, b, c))
    x = (-2 * a + 10 * b - 5 * c) / 3
    y = (-2 * a - 5 * b + 10 * c) / 3
    z = (-a + 2 * b + 2 * c) / 3
    return x, y, z


def lift_to_parent(child: int, tri: Sequence) -> tuple:
    """Parent corner values whose extension gives ``tri`` on child ``child``."""
    j, k = (d for d in range(3) if d != child)
    x, y, _ = lift_boundary(child, tri[child], tri[j], tri[k])
    parent = [None, None, None]
    parent[child] = _coerce(tuple(tri))[child]
    parent[j] = x
    parent[k] = y
    return tuple(parent)


def good_function_with_boundary(w: Sequence[int], tri: Sequence) -> GoodFunction:
    """The good function whose restriction to V_w is ``tri``."""
    w = parse_word(w)
    tri = _coerce(tuple(tri))
    for d in reversed(w):
        tri = lift_to_parent(d, tri)
    return GoodFunction(*tri)


def _addresses(w: Word) -> list:
    """Infinite addresses of the point P_w, as (prefix, repeated digit) pairs."""
    d = w[-1]
    s = w
    while s and s[-1] == d:
        s = s[:-1]
    out = [(w, d)]
    if s:
        e = s[-1]
        out.append((s[:-1] + (d,), e))
    return out


def _digit(addr, k: int) -> int:
    prefix, rep = addr
    return prefix[k] if k < len(prefix) else rep


def separation_witness(x_addr: Sequence[int], y_addr: Sequence[int]) -> GoodFunction:
    """A good function taking different values at P_x and P_y.

    Descends through cells containing both points until they fall into
    different children K_wi, K_wj with neither point in the other's child,
    puts 1 on corner i of V_w and 0 on the others, and lifts that triple up to
    V_0. The result is >= 2/5 on K_wi and < 2/5 off K_wi inside K_w.
    """
    x = parse_word(x_addr)
    y = parse_word(y_addr)
    if not x or not y:
        raise ValueError("addresses must have level >= 1")
    if cell_anchor(x) == cell_anchor(y):
        raise ValueError("the two addresses denote the same point")
    ax, ay = _addresses(x), _addresses(y)
    w: Word = ()
    for k in range(max(len(x), len(y)) + 2):
        sx = {_digit(a, k) for a in ax}
        sy = {_digit(a, k) for a in ay}
        common = sx & sy
        if common:
            c = min(common)
            ax = [a for a in ax if _digit(a, k) == c]
            ay = [a for a in ay if _digit(a, k) == c]
            w = w + (c,)
            continue
        i = min(sx)
        tri = [Fraction(0)] * 3
        tri[i] = Fraction(1)
        U = good_function_with_boundary(w, tri)
        if evaluate(U, x) == evaluate(U, y):  # pragma: no cover - guarded by the 2/5 argument
            raise RuntimeError(f"witness failed to separate {x} and {y}")
        return U
    raise RuntimeError(f"addresses {x} and {y} never separated")  # pragma: no cover
