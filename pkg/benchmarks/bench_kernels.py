"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the twist-series contraction (special conformal commutator of two
coordinates through order 3) and second quantization on the default Fock
grid, and checks that both backends give identical results.
"""
import argparse
import time

import numpy as np

from warpfield import _kernels
from warpfield.conformal import Metric
from warpfield.fock import FockSpace, MomentumGrid, random_involution
from warpfield.warped import deformed_commutator, special_conformal_config


def twist_case():
    m = Metric(4)
    cfg = special_conformal_config(maxOrder=3)  # fresh config: no chain cache carried over
    return deformed_commutator(m.x_lower(0), m.x_lower(1), cfg).value


def fock_case():
    space = FockSpace(MomentumGrid.auto(1), 3)
    V = random_involution(space.grid, np.random.default_rng(0))
    return space.second_quantize_op(V)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    prev = _kernels.backend()
    results = {}
    try:
        for name in ("numba", "numpy"):
            _kernels.set_backend(name)
            twist_case(), fock_case()  # warm-up (jit compile or cache load)
            results[name] = (best_of(twist_case, args.repeat), best_of(fock_case, args.repeat))
    finally:
        _kernels.set_backend(prev)
    (tn, pn), (fn_, gn) = results["numba"]
    (tp, pp), (fp, gp) = results["numpy"]
    print(f"{'case':<28}{'numba':>10}{'numpy':>10}{'ratio':>8}")
    print(f"{'twist contraction (K, k<=3)':<28}{tn:>9.3f}s{tp:>9.3f}s{tp / tn:>8.2f}")
    print(f"{'second quantization (165)':<28}{fn_:>9.3f}s{fp:>9.3f}s{fp / fn_:>8.2f}")
    print(f"twist results identical: {pn == pp}")
    print(f"second quantization max |diff|: {np.max(np.abs(gn - gp)):.2e}")


if __name__ == "__main__":
    main()
