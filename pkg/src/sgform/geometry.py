"""Words, contraction maps, vertex sets and the cell graph X_n of the gasket.

Points are stored exactly as ``DyadicPoint(a, b)`` meaning the plane point
``(a, b * sqrt(3))``; every vertex of the gasket has dyadic ``a`` and ``b`` so
equality and squared distances are exact.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Word = tuple  # tuple[int, ...] over {0, 1, 2}

GRAPH_CSV_HEADER = [
    "level", "w1", "w2", "kind",
    "shared_a_num", "shared_a_den", "shared_b_num", "shared_b_den",
]


def parse_word(w: str | Iterable[int]) -> Word:
    """Accept ``"012"``, ``[0, 1, 2]`` or a tuple; return a validated tuple."""
    if isinstance(w, str):
        digits = tuple(int(ch) for ch in w)
    else:
        digits = tuple(int(d) for d in w)
    for d in digits:
        if d not in (0, 1, 2):
            raise ValueError(f"word digit {d!r} not in {{0, 1, 2}}")
    return digits


def word_str(w: Word) -> str:
    return "".join(str(d) for d in w)


def word_index(w: Word) -> int:
    """Position of ``w`` in the lexicographic order of W_|w|."""
    idx = 0
    for d in w:
        idx = 3 * idx + d
    return idx


def word_from_index(idx: int, level: int) -> Word:
    if not 0 <= idx < 3**level:
        raise ValueError(f"index {idx} out of range for level {level}")
    digits = []
    for _ in range(level):
        idx, d = divmod(idx, 3)
        digits.append(d)
    return tuple(reversed(digits))


def all_words(level: int) -> list[Word]:
    return [word_from_index(i, level) for i in range(3**level)]


@dataclass(frozen=True)
class DyadicPoint:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def midpoint(self, other: DyadicPoint) -> DyadicPoint:
        return DyadicPoint((self.a + other.a) / 2, (self.b + other.b) / 2)

    def sq_dist(self, other: DyadicPoint) -> Fraction:
        da = self.a - other.a
        db = self.b - other.b
        return da * da + 3 * db * db

    def xy(self) -> tuple[float, float]:
        return float(self.a), float(self.b) * 3**0.5


P0 = DyadicPoint(0, 0)
P1 = DyadicPoint(1, 0)
P2 = DyadicPoint(Fraction(1, 2), Fraction(1, 2))
CORNERS = (P0, P1, P2)


def apply_map(w: Sequence[int], p: DyadicPoint) -> DyadicPoint:
    """f_w(p) = f_{w_1} o ... o f_{w_n}(p), with f_i(x) = (x + p_i) / 2."""
    for d in reversed(parse_word(w)):
        p = p.midpoint(CORNERS[d])
    return p


def cell_anchor(w: Sequence[int]) -> DyadicPoint:
    w = parse_word(w)
    if not w:
        raise ValueError("the anchor P_w needs a word of level >= 1")
    return apply_map(w[:-1], CORNERS[w[-1]])


def cell_vertices(w: Sequence[int]) -> tuple[DyadicPoint, DyadicPoint, DyadicPoint]:
    w = parse_word(w)
    return tuple(apply_map(w, p) for p in CORNERS)


@lru_cache(maxsize=None)
def _vertex_table(level: int) -> tuple:
    """Vertex triples of every level-``level`` cell, in canonical word order."""
    if level == 0:
        return (CORNERS,)
    out = []
    for tri in _vertex_table(level - 1):
        for i in range(3):
            out.append(tuple(tri[j].midpoint(tri[i]) for j in range(3)))
    return tuple(out)


def vertex_set(n: int) -> list[DyadicPoint]:
    """V_n as a deduplicated list sorted by (b, a)."""
    if n < 0:
        raise ValueError("level must be >= 0")
    pts = {p for tri in _vertex_table(n) for p in tri}
    return sorted(pts, key=lambda p: (p.b, p.a))


class EdgeKind(str, enum.Enum):
    TYPE_I = "I"
    TYPE_II = "II"


@dataclass(frozen=True)
class Edge:
    w1: Word
    w2: Word
    kind: EdgeKind
    shared_point: DyadicPoint


@dataclass(eq=False)
class CellGraph:
    level: int
    words: list = field(repr=False)
    edges: list = field(repr=False)

    @cached_property
    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        ei = np.fromiter((word_index(e.w1) for e in self.edges), dtype=np.int64, count=len(self.edges))
        ej = np.fromiter((word_index(e.w2) for e in self.edges), dtype=np.int64, count=len(self.edges))
        return ei, ej

    @cached_property
    def type_ii_mask(self) -> np.ndarray:
        return np.array([e.kind is EdgeKind.TYPE_II for e in self.edges], dtype=bool)

    def counts(self) -> dict:
        n2 = int(self.type_ii_mask.sum())
        return {"edges": len(self.edges), "type_I": len(self.edges) - n2, "type_II": n2}

    def is_connected(self) -> bool:
        n = len(self.words)
        ei, ej = self.edge_index
        adj = coo_matrix((np.ones(len(ei)), (ei, ej)), shape=(n, n))
        ncomp, _ = connected_components(adj, directed=False)
        return ncomp == 1

    def edge_set(self) -> set:
        return {(e.w1, e.w2) for e in self.edges}


@lru_cache(maxsize=None)
def build_graph(n: int) -> CellGraph:
    """The graph X_n: level-n words joined when their cells share a vertex."""
    if n < 1:
        raise ValueError("X_n is defined for n >= 1")
    table = _vertex_table(n)
    words = all_words(n)
    owners: dict[DyadicPoint, list[int]] = {}
    for idx, tri in enumerate(table):
        for p in tri:
            owners.setdefault(p, []).append(idx)
    pairs = []
    for p, cells in owners.items():
        if len(cells) == 1:
            continue
        # same-level cells of the gasket meet in at most one point and every
        # junction point belongs to exactly two of them
        assert len(cells) == 2, (p, cells)
        i, j = sorted(cells)
        pairs.append((i, j, p))
    pairs.sort(key=lambda t: (t[0], t[1]))
    edges = []
    for i, j, p in pairs:
        wi, wj = words[i], words[j]
        anchor_i = table[i][wi[-1]]
        anchor_j = table[j][wj[-1]]
        kind = EdgeKind.TYPE_I if anchor_i != anchor_j else EdgeKind.TYPE_II
        edges.append(Edge(wi, wj, kind, p))
    return CellGraph(level=n, words=words, edges=edges)


def shared_vertices(w1: Sequence[int], w2: Sequence[int]) -> set:
    return set(cell_vertices(w1)) & set(cell_vertices(w2))


def edge_between(w1: Sequence[int], w2: Sequence[int]) -> Edge | None:
    """Classify the pair (w1, w2) directly from cell intersection, or None."""
    w1, w2 = parse_word(w1), parse_word(w2)
    if len(w1) != len(w2) or w1 == w2:
        return None
    common = shared_vertices(w1, w2)
    if not common:
        return None
    (p,) = common
    if w2 < w1:
        w1, w2 = w2, w1
    kind = EdgeKind.TYPE_I if cell_anchor(w1) != cell_anchor(w2) else EdgeKind.TYPE_II
    return Edge(w1, w2, kind, p)


def type2_origin(e: Edge) -> tuple[int, Edge]:
    """The level k < n and type-I edge (v1, v2) that ``e`` pads out.

    A type-II edge at level n has the form ``(v1 j^(n-k), v2 i^(n-k))`` where
    ``i``, ``j`` are the last digits of ``v1``, ``v2``.
    """
    if e.kind is not EdgeKind.TYPE_II:
        raise ValueError("type2_origin expects a type-II edge")
    n = len(e.w1)
    found = []
    for k in range(1, n):
        v1, v2 = e.w1[:k], e.w2[:k]
        i, j = v1[-1], v2[-1]
        if e.w1[k:] != (j,) * (n - k) or e.w2[k:] != (i,) * (n - k):
            continue
        origin = edge_between(v1, v2)
        if origin is not None and origin.kind is EdgeKind.TYPE_I:
            found.append((k, origin))
    if len(found) != 1:
        raise ValueError(f"edge {e} has {len(found)} type-I origins")
    return found[0]


def pad_origin(k: int, origin: Edge, n: int) -> tuple[Word, Word]:
    """Inverse of ``type2_origin``: pad a level-k type-I edge out to level n."""
    i, j = origin.w1[-1], origin.w2[-1]
    return origin.w1 + (j,) * (n - k), origin.w2 + (i,) * (n - k)


# ---------------------------------------------------------------------------
# integer lattice companion used by the numeric code paths

@lru_cache(maxsize=None)
def lattice_vertices(m: int) -> np.ndarray:
    """Vertices of all level-m cells as int64 array of shape (3^m, 3, 2).

    Entry ``[w, i]`` is ``2^(m+1) * (a, b)`` of ``f_w(p_i)``; the scale makes
    every coordinate an integer.
    """
    s = 1 << (m + 1)
    tri = np.array([[[0, 0], [s, 0], [s // 2, s // 2]]], dtype=np.int64)
    for _ in range(m):
        # child i of a cell: vertex j -> midpoint of parent vertices j and i
        kids = (tri[:, None, :, :] + tri[:, :, None, :]) // 2
        tri = kids.reshape(-1, 3, 2)
    tri.setflags(write=False)
    return tri


@lru_cache(maxsize=None)
def lattice_anchors(m: int) -> np.ndarray:
    """Anchors P_w of level-m cells, int64 (3^m, 2) at scale 2^(m+1)."""
    tri = lattice_vertices(m)
    last = np.arange(3**m) % 3
    out = tri[np.arange(3**m), last]
    out.setflags(write=False)
    return out


def float_coords(lattice: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Convert lattice coordinates at scale 2^(m+1) to Euclidean (x, y)."""
    s = float(1 << (m + 1))
    return lattice[..., 0] / s, lattice[..., 1] * (3**0.5 / s)


# ---------------------------------------------------------------------------
# CSV

def graph_to_csv(g: CellGraph) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(GRAPH_CSV_HEADER)
    for e in g.edges:
        p = e.shared_point
        wr.writerow([g.level, word_str(e.w1), word_str(e.w2), e.kind.value,
                     p.a.numerator, p.a.denominator, p.b.numerator, p.b.denominator])
    return buf.getvalue()


def graph_from_csv(text: str) -> CellGraph:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty graph CSV")
    level = int(rows[0]["level"])
    edges = []
    for r in rows:
        if int(r["level"]) != level:
            raise ValueError("mixed levels in graph CSV")
        p = DyadicPoint(Fraction(int(r["shared_a_num"]), int(r["shared_a_den"])),
                        Fraction(int(r["shared_b_num"]), int(r["shared_b_den"])))
        edges.append(Edge(parse_word(r["w1"]), parse_word(r["w2"]), EdgeKind(r["kind"]), p))
    return CellGraph(level=level, words=all_words(level), edges=edges)
