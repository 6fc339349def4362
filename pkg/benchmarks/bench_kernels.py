"""Time matrix assembly with the numba loop kernel and the numpy kernel.

    python3 benchmarks/bench_kernels.py [--repeats 1000] [--K 8 16 32]

The loop kernel is the compiled version only when numba is importable and
ECGFIELD_DISABLE_NUMBA is unset; otherwise both rows time numpy code paths.
"""
import argparse
import time

import numpy as np

from ecgfield import kernels
from ecgfield.basis import seed_basis
from ecgfield.system import ParticleSystem, hydrogen, internal_hamiltonian


def bench(fn, args, repeats):
    fn(*args)  # compile / warm caches
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeats", type=int, default=1000)
    ap.add_argument("--K", type=int, nargs="+", default=[8, 16, 32])
    args = ap.parse_args()

    systems = {
        "H (N=2)": internal_hamiltonian(hydrogen()),
        "3-body (N=3)": internal_hamiltonian(ParticleSystem.from_particles([(5.0, 2.0), (1.0, -1.0), (1.2, -1.0)])),
    }
    print(f"backend in use: {kernels.BACKEND}")
    print(f"{'system':<14}{'K':>5}{'loops [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for label, spec in systems.items():
        for K in args.K:
            A, s = seed_basis(spec, K, "random", seed=K).stacked()
            a = (A, s, spec.lam, spec.pair_weights, spec.pair_charges, spec.dipole_vector)
            reps = max(10, args.repeats * 8 // K)
            t_loop = bench(kernels.assemble_loops, a, reps)
            t_vec = bench(kernels.assemble_vectorized, a, reps)
            print(f"{label:<14}{K:>5}{1e3 * t_loop:>14.4f}{1e3 * t_vec:>14.4f}{t_vec / t_loop:>10.1f}")


if __name__ == "__main__":
    main()
