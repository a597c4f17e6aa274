"""Compare the compiled permutation kernels against their pure-Python twins.

Run from a checkout with the package installed:

    python3 benchmarks/bench_kernels.py [--repeat N] [--degree N]

Each workload is timed best-of-N per backend; the table reports wall time
and the compiled/pure ratio.  Without the extension built, only the pure
rows are shown.
"""

from __future__ import annotations

import argparse
import random
import time

from toposforge._kernels import pure

try:
    from toposforge._kernels import _fast
except ImportError:  # extension not built; report pure numbers only
    _fast = None


def random_perm(rng: random.Random, n: int) -> bytes:
    p = list(range(n))
    rng.shuffle(p)
    return bytes(p)


def bench_close(kernel, degree: int):
    # transposition plus full cycle: generates the whole symmetric group
    swap = bytes([1, 0] + list(range(2, degree)))
    cycle = bytes(list(range(1, degree)) + [0])

    def run():
        els, capped = kernel.close([swap, cycle], degree, 1_000_000)
        assert not capped
        return len(els)

    return run


def bench_compose(kernel, count: int = 100_000, n: int = 64):
    rng = random.Random(11)
    perms = [random_perm(rng, n) for _ in range(32)]

    def run():
        acc = kernel.identity(n)
        for k in range(count):
            acc = kernel.compose(acc, perms[k % 32])
        return acc

    return run


def bench_walks(kernel, n_vertices: int = 12, fiber: int = 6):
    twist = bytes(list(range(1, fiber)) + [0])
    back = bytes([(i - 1) % fiber for i in range(fiber)])
    ident = bytes(range(fiber))
    edges = []
    for a in range(n_vertices):
        b = (a + 1) % n_vertices
        t, s = (twist, back) if a == n_vertices - 1 else (ident, ident)
        edges.append((a, b, t))
        edges.append((b, a, s))

    def run():
        perms = kernel.closed_walk_perms(n_vertices, 0, 2 * n_vertices + 4, edges, fiber)
        return len(perms)

    return run


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5, help="runs per cell, best kept")
    ap.add_argument("--degree", type=int, default=7, help="symmetric group degree for the closure row")
    args = ap.parse_args()

    backends = [("pure", pure)]
    if _fast is not None:
        backends.append(("compiled", _fast))
    workloads = [
        (f"close S{args.degree}", bench_close, (args.degree,)),
        ("compose 100k @ n=64", bench_compose, ()),
        ("closed walks 12x6", bench_walks, ()),
    ]

    width = max(len(name) for name, _, _ in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'ratio':>9}"
    print(header)
    print("-" * len(header))
    for name, factory, extra in workloads:
        cells = []
        for _, kernel in backends:
            cells.append(best_of(factory(kernel, *extra), args.repeat))
        row = f"{name:<{width}}  " + "".join(f"{c * 1000:>10.2f}ms" for c in cells)
        if len(cells) == 2 and cells[1] > 0:
            row += f"{cells[0] / cells[1]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
