"""Compare the numba and numpy kernels on realistic sizes.

Run: python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from sgform import kernels
from sgform.energy import cell_averages
from sgform.geometry import build_graph, lattice_anchors
from sgform.providers import PointFunction


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_edge_energy(level, repeat):
    ei, ej = build_graph(level).edge_index
    u = np.random.default_rng(0).standard_normal(3**level)
    kernels.edge_energy_numba(u, ei, ej)  # compile outside the timing
    t_jit, e_jit = best_of(lambda: kernels.edge_energy_numba(u, ei, ej), repeat)
    t_np, e_np = best_of(lambda: kernels.edge_energy_numpy(u, ei, ej), repeat)
    return t_jit, t_np, abs(e_jit - e_np) / abs(e_np)


def bench_pair_histogram(m, repeat):
    f = PointFunction(lambda x, y: np.sin(3 * x) * np.cos(2 * y))
    avg = cell_averages(f, m, m + 2).values
    anchors = lattice_anchors(m)
    A, B = anchors[:, 0], anchors[:, 1]
    qmax = 4 ** (m + 1)
    kernels.pair_histogram_numba(avg[:10], A[:10], B[:10], qmax)
    t_jit, h_jit = best_of(lambda: kernels.pair_histogram_numba(avg, A, B, qmax), repeat)
    t_np, h_np = best_of(lambda: kernels.pair_histogram_numpy(avg, A, B, qmax), repeat)
    return t_jit, t_np, np.abs(h_jit - h_np).max() / np.abs(h_np).max()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"numba available: {kernels.HAVE_NUMBA}, active backend: {kernels.BACKEND}")
    print(f"{'kernel':<22}{'size':>10}{'numba s':>12}{'numpy s':>12}{'speedup':>10}{'rel diff':>12}")
    for level in (6, 7, 8):
        t_jit, t_np, diff = bench_edge_energy(level, args.repeat)
        print(f"{'edge_energy':<22}{'n=' + str(level):>10}{t_jit:12.5f}{t_np:12.5f}{t_np / t_jit:10.1f}{diff:12.1e}")
    for m in (5, 6, 7):
        t_jit, t_np, diff = bench_pair_histogram(m, args.repeat)
        print(f"{'pair_histogram':<22}{'m=' + str(m):>10}{t_jit:12.5f}{t_np:12.5f}{t_np / t_jit:10.1f}{diff:12.1e}")


if __name__ == "__main__":
    main()
