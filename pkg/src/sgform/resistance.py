"""Effective resistance on the cell graphs: Delta-Y reduction and Laplacian solves."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg, splu

from sgform.geometry import CellGraph, build_graph, parse_word, word_index, word_str, word_from_index

RESIDUAL_TOL = 1e-10
EXACT_NODE_LIMIT = 50
DIRECT_NODE_LIMIT = 3**8

AUDIT_CSV_HEADER = ["n", "w", "corner", "R", "bound", "ratio"]


@dataclass(frozen=True)
class StarTriple:
    R1: object
    R2: object
    R3: object

    def __post_init__(self):
        if min(self.R1, self.R2, self.R3) <= 0:
            raise ValueError("star resistances must be positive")


def delta_to_star(R12, R23, R31) -> StarTriple:
    """Y-circuit equivalent to a triangle with the given side resistances."""
    if min(R12, R23, R31) <= 0:
        raise ValueError("resistances must be positive")
    s = R12 + R23 + R31
    return StarTriple(R12 * R31 / s, R12 * R23 / s, R23 * R31 / s)


def star_to_delta(star: StarTriple) -> tuple:
    """Inverse of ``delta_to_star``: returns (R12, R23, R31)."""
    R1, R2, R3 = star.R1, star.R2, star.R3
    p = R1 * R2 + R2 * R3 + R3 * R1
    return p / R3, p / R1, p / R2


def corner_reduction_step(r):
    """Arm resistance of the reduced star one level up.

    Three copies of a star with arms r are joined pairwise by unit edges; the
    inner triangle has sides 2r + 1 and reduces to a star with arms (2r + 1)/3.
    """
    inner = delta_to_star(2 * r + 1, 2 * r + 1, 2 * r + 1)
    return r + inner.R1


def corner_resistance_closed_form(n: int) -> Fraction:
    return Fraction(1, 2) * Fraction(5, 3) ** n - Fraction(1, 2)


def corner_resistance_r(n: int) -> Fraction:
    """Star arm r_n joining each corner cell of X_n to the centre, exactly."""
    if n < 1:
        raise ValueError("r_n is defined for n >= 1")
    r = delta_to_star(Fraction(1), Fraction(1), Fraction(1)).R1
    for _ in range(n - 1):
        r = corner_reduction_step(r)
    closed = corner_resistance_closed_form(n)
    if r != closed:  # pragma: no cover - would mean the reduction is wrong
        raise AssertionError(f"recursion {r} != closed form {closed} at n={n}")
    return r


# ---------------------------------------------------------------------------

class ResistorNetwork:
    """Nodes 0..size-1 joined by conductances; exact (Fraction) or binary64."""

    def __init__(self, size: int, edges: Sequence[tuple], exact: bool = False, labels=None):
        self.size = int(size)
        self.exact = exact
        conv = Fraction if exact else float
        clean = []
        for i, j, g in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.size - 1}")
            g = conv(g)
            if not g > 0:
                raise ValueError(f"conductance on ({i}, {j}) must be positive, got {g}")
            clean.append((i, j, g))
        self.edges = clean
        self.labels = list(labels) if labels is not None else list(range(self.size))

    @classmethod
    def from_cell_graph(cls, g: CellGraph, exact: bool = False) -> ResistorNetwork:
        ei, ej = g.edge_index
        one = Fraction(1) if exact else 1.0
        return cls(3**g.level, [(i, j, one) for i, j in zip(ei.tolist(), ej.tolist())],
                   exact=exact, labels=[word_str(w) for w in g.words])

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no node labelled {label!r}") from None

    def laplacian(self) -> sp.csr_matrix:
        i = np.array([e[0] for e in self.edges], dtype=np.int64)
        j = np.array([e[1] for e in self.edges], dtype=np.int64)
        g = np.array([float(e[2]) for e in self.edges])
        n = self.size
        off = sp.coo_matrix((np.concatenate([-g, -g]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                            shape=(n, n))
        deg = np.bincount(i, weights=g, minlength=n) + np.bincount(j, weights=g, minlength=n)
        return (off + sp.diags(deg)).tocsr()

    def is_connected(self) -> bool:
        if self.size <= 1:
            return True
        ncomp, _ = connected_components(self.laplacian(), directed=False)
        return ncomp == 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["i", "j", "conductance"])
        for i, j, g in self.edges:
            wr.writerow([i, j, f"{g.numerator}/{g.denominator}" if isinstance(g, Fraction) else repr(g)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, size: int | None = None) -> ResistorNetwork:
        rows = list(csv.DictReader(io.StringIO(text)))
        exact = bool(rows) and all("/" in r["conductance"] for r in rows)
        conv = Fraction if exact else float
        edges = [(int(r["i"]), int(r["j"]), conv(r["conductance"])) for r in rows]
        if size is None:
            size = 1 + max(max(i, j) for i, j, _ in edges)
        return cls(size, edges, exact=exact)


def short(net: ResistorNetwork, nodes: Sequence[int]) -> tuple[ResistorNetwork, list[int]]:
    """Merge ``nodes`` into one node; returns the new network and the old->new map."""
    merged = set(int(v) for v in nodes)
    if not merged:
        return net, list(range(net.size))
    rep = min(merged)
    mapping, k = [], 0
    for v in range(net.size):
        if v in merged and v != rep:
            mapping.append(None)
            continue
        mapping.append(k)
        k += 1
    for v in merged:
        mapping[v] = mapping[rep]
    edges = [(mapping[i], mapping[j], g) for i, j, g in net.edges if mapping[i] != mapping[j]]
    return ResistorNetwork(k, edges, exact=net.exact), mapping


def cut(net: ResistorNetwork, edge_ids: Sequence[int]) -> ResistorNetwork:
    """Remove the listed edges (by position in ``net.edges``)."""
    drop = set(int(e) for e in edge_ids)
    return ResistorNetwork(net.size, [e for k, e in enumerate(net.edges) if k not in drop],
                           exact=net.exact, labels=net.labels)


def _grounded(L: sp.csr_matrix, ground: int) -> tuple[sp.csc_matrix, np.ndarray]:
    keep = np.setdiff1d(np.arange(L.shape[0]), [ground])
    return L[keep][:, keep].tocsc(), keep


def _solve_grounded(Lg: sp.csc_matrix, rhs: np.ndarray, method: str) -> np.ndarray:
    if method == "direct":
        x = splu(Lg).solve(rhs)
    elif method == "cg":
        diag = Lg.diagonal()
        precond = sp.diags(1.0 / diag)
        x, info = cg(Lg, rhs, M=precond, rtol=1e-14, atol=0.0, maxiter=20 * Lg.shape[0])
        if info != 0:
            raise RuntimeError(f"conjugate gradient did not converge (info={info})")
    else:
        raise ValueError(f"unknown solver {method!r}")
    res = np.linalg.norm(Lg @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if not res <= RESIDUAL_TOL:
        raise np.linalg.LinAlgError(f"relative residual {res:.3e} above {RESIDUAL_TOL}")
    return x


def _exact_resistance(net: ResistorNetwork, a: int, b: int) -> Fraction:
    n = net.size
    L = [[Fraction(0)] * n for _ in range(n)]
    for i, j, g in net.edges:
        g = Fraction(g)
        L[i][i] += g
        L[j][j] += g
        L[i][j] -= g
        L[j][i] -= g
    keep = [v for v in range(n) if v != b]
    M = [[L[r][c] for c in keep] + [Fraction(int(r == a))] for r in keep]
    size = len(keep)
    for col in range(size):
        piv = next((r for r in range(col, size) if M[r][col] != 0), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular grounded Laplacian")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        for r in range(size):
            if r != col and M[r][col] != 0:
                f = M[r][col] / p
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return M[keep.index(a)][size] / M[keep.index(a)][keep.index(a)]


def effective_resistance(net: ResistorNetwork, a: int, b: int, method: str | None = None):
    """Potential difference for a unit current from a to b (b grounded).

    Exact networks with at most 50 nodes are solved in rational arithmetic.
    """
    a, b = int(a), int(b)
    if a == b:
        raise ValueError("effective resistance needs two distinct nodes")
    if not (0 <= a < net.size and 0 <= b < net.size):
        raise ValueError("node outside the network")
    if not net.is_connected():
        raise ValueError("network is disconnected")
    if net.exact and net.size <= EXACT_NODE_LIMIT and method is None:
        return _exact_resistance(net, a, b)
    if method is None:
        method = "direct" if net.size <= DIRECT_NODE_LIMIT else "cg"
    Lg, keep = _grounded(net.laplacian(), b)
    rhs = np.zeros(len(keep))
    pos = int(np.searchsorted(keep, a))
    rhs[pos] = 1.0
    return float(_solve_grounded(Lg, rhs, method)[pos])


@lru_cache(maxsize=16)
def cell_network(n: int) -> ResistorNetwork:
    return ResistorNetwork.from_cell_graph(build_graph(n))


def pair_resistance(n: int, w1, w2, method: str | None = None) -> float:
    """R_n(w1, w2) on the unit-conductance graph X_n."""
    w1, w2 = parse_word(w1), parse_word(w2)
    if len(w1) != n or len(w2) != n:
        raise ValueError(f"words must have level {n}")
    if w1 == w2:
        raise ValueError("R_n needs distinct words")
    return effective_resistance(cell_network(n), word_index(w1), word_index(w2), method)


def resistances_to(net: ResistorNetwork, ground: int) -> np.ndarray:
    """R(v, ground) for every node v, from one factorization of the grounded Laplacian."""
    Lg, keep = _grounded(net.laplacian(), ground)
    lu = splu(Lg)
    out = np.zeros(net.size)
    block = 256
    for start in range(0, len(keep), block):
        stop = min(len(keep), start + block)
        rhs = np.zeros((len(keep), stop - start))
        rhs[np.arange(start, stop), np.arange(stop - start)] = 1.0
        x = lu.solve(rhs)
        res = np.linalg.norm(Lg @ x - rhs) / np.linalg.norm(rhs)
        if not res <= RESIDUAL_TOL:
            raise np.linalg.LinAlgError(f"relative residual {res:.3e} above {RESIDUAL_TOL}")
        out[keep[start:stop]] = x[np.arange(start, stop), np.arange(stop - start)]
    return out


def corner_bound(n: int) -> float:
    return 2.5 * (5.0 / 3.0) ** n


def corner_bound_audit(n: int) -> tuple[float, list[dict]]:
    """Every R_n(w, i^n) against (5/2)(5/3)^n; returns (max ratio, rows)."""
    if n < 1:
        raise ValueError("audit needs n >= 1")
    net = cell_network(n)
    bound = corner_bound(n)
    rows = []
    worst = 0.0
    for i in range(3):
        corner = word_index((i,) * n)
        R = resistances_to(net, corner)
        for idx in range(net.size):
            if idx == corner:
                continue
            ratio = R[idx] / bound
            worst = max(worst, ratio)
            rows.append({"n": n, "w": word_str(word_from_index(idx, n)), "corner": i,
                         "R": float(R[idx]), "bound": bound, "ratio": float(ratio)})
    return worst, rows
