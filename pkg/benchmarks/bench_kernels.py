"""Compare the compiled and python kernels on closure, lookup and fixed-point counts.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import timeit

import numpy as np

from treegroups import kernels
from treegroups.constructions import GSSpec, all_taus, g_tau
from treegroups.engine import vertex_generators, _generator_rows


def workloads():
    """(name, callable) pairs, each built against the currently active backend."""
    lemma_gens = GSSpec(2).generators(5) + [g_tau(2, tau, 5) for tau in all_taus(2)]
    lemma_rows = _generator_rows(lemma_gens, 2, 5)
    aut_rows = _generator_rows(vertex_generators(3, 2), 3, 2)
    group, _ = kernels.closure(lemma_rows, 10**7)
    rng = np.random.default_rng(0x5EED)
    probe = group[rng.integers(0, len(group), 200_000)]
    index = kernels.RowIndex(group.shape[1], group)
    return [
        ("closure lemma d=2 n=5 (131072)", lambda: kernels.closure(lemma_rows, 10**7)),
        ("closure Aut T^2 d=3 (1296)", lambda: kernels.closure(aut_rows, 10**7)),
        ("lookup 200k rows", lambda: index.lookup(probe)),
        ("fixed_counts 131072 x 5", lambda: kernels.fixed_counts(group, 2, 5)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    results = {}
    for name in kernels.available_backends():
        kernels.use_backend(name)
        for label, fn in workloads():
            results.setdefault(label, {})[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    backends = kernels.available_backends()
    print(f"{'workload':34s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for label, times in results.items():
        line = f"{label:34s}" + "".join(f"{times[b]:11.4f}s" for b in backends)
        if len(backends) == 2:
            line += f"   {times['python'] / times['compiled']:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
