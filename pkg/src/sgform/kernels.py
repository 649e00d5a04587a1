"""Hot numeric loops, each with a numba version and a pure-numpy version.

The public names (``edge_energy``, ``pair_histogram``) are bound to the numba
kernels when numba is available and not disabled through
``SGFORM_DISABLE_NUMBA``; otherwise to the numpy fallbacks. Both variants stay
importable under ``*_numba`` / ``*_numpy`` for benchmarking and cross-checks.
"""
import math

import numpy as np

from sgform._accel import HAVE_NUMBA, USE_NUMBA, njit

# rows of the pair loop handled per vectorised chunk in the numpy fallback
_PAIR_CHUNK = 1 << 22


def _edge_energy_loop(u, ei, ej):
    # Neumaier-compensated sum of squared edge differences
    total = 0.0
    comp = 0.0
    for k in range(ei.shape[0]):
        d = u[ei[k]] - u[ej[k]]
        x = d * d
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def edge_energy_numpy(u, ei, ej):
    """Sum of ``(u[ei] - u[ej])**2`` with correctly rounded summation."""
    d = u[ei] - u[ej]
    return math.fsum((d * d).tolist())


def _pair_histogram_loop(avg, A, B, qmax):
    hist = np.zeros(qmax + 1)
    n = avg.shape[0]
    for v in range(n - 1):
        av = avg[v]
        Av = A[v]
        Bv = B[v]
        for w in range(v + 1, n):
            da = A[w] - Av
            db = B[w] - Bv
            q = da * da + 3 * db * db
            if q == 0:
                continue
            d = avg[w] - av
            hist[q] += 2.0 * d * d
    return hist


def pair_histogram_numpy(avg, A, B, qmax):
    """Histogram of squared differences over ordered pairs, keyed by squared distance.

    ``A``, ``B`` are integer lattice coordinates of the pair anchors, so the
    squared distance of a pair is the integer ``q = dA**2 + 3 dB**2`` (in lattice
    units). ``hist[q]`` is the sum of ``(avg[v] - avg[w])**2`` over ordered pairs
    ``v != w`` at squared distance ``q``. Pairs with ``q == 0`` are skipped.
    """
    avg = np.asarray(avg, dtype=np.float64)
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    n = avg.shape[0]
    hist = np.zeros(qmax + 1)
    rows_per_chunk = max(1, _PAIR_CHUNK // max(n, 1))
    for start in range(0, n - 1, rows_per_chunk):
        stop = min(n - 1, start + rows_per_chunk)
        qs = []
        ws = []
        for v in range(start, stop):
            da = A[v + 1:] - A[v]
            db = B[v + 1:] - B[v]
            q = da * da + 3 * db * db
            d = avg[v + 1:] - avg[v]
            keep = q > 0
            qs.append(q[keep])
            ws.append(2.0 * (d[keep] * d[keep]))
        if qs:
            hist += np.bincount(np.concatenate(qs), weights=np.concatenate(ws), minlength=qmax + 1)
    return hist


if HAVE_NUMBA:
    _edge_energy_jit = njit(cache=True)(_edge_energy_loop)
    _pair_histogram_jit = njit(cache=True)(_pair_histogram_loop)

    def edge_energy_numba(u, ei, ej):
        return _edge_energy_jit(
            np.ascontiguousarray(u, dtype=np.float64),
            np.ascontiguousarray(ei, dtype=np.int64),
            np.ascontiguousarray(ej, dtype=np.int64),
        )

    def pair_histogram_numba(avg, A, B, qmax):
        return _pair_histogram_jit(
            np.ascontiguousarray(avg, dtype=np.float64),
            np.ascontiguousarray(A, dtype=np.int64),
            np.ascontiguousarray(B, dtype=np.int64),
            int(qmax),
        )
else:  # pragma: no cover - exercised only without numba installed
    edge_energy_numba = edge_energy_numpy
    pair_histogram_numba = pair_histogram_numpy


if USE_NUMBA:
    edge_energy = edge_energy_numba
    pair_histogram = pair_histogram_numba
else:
    edge_energy = edge_energy_numpy
    pair_histogram = pair_histogram_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
