"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 20]

Also times one full network realization through whichever backend the
``RULASIM_DISABLE_NUMBA`` flag selects.
"""
import argparse
import time

import numpy as np

from rulasim import kernels
from rulasim.channel import RfConfig, noise_power
from rulasim.sim import Scenario, run_network_realization


def best_of(fn, repeat):
    fn()  # warm-up (numba compile / cache load)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rf = RfConfig()
    noise = noise_power(rf)
    n, M, K = 250, 16, 10
    h = (rng.standard_normal((n, M, K)) + 1j * rng.standard_normal((n, M, K))) * 1e-4
    e = h + 1e-7 * rng.standard_normal(h.shape)
    thetas = rng.uniform(0, np.pi, (50, 4))
    az = rng.uniform(-np.pi, np.pi, (4, K))
    beta = rng.uniform(1e-7, 1e-5, (4, K))

    cases = {
        f"zf_sinr {n}x{M}x{K}": (
            lambda: kernels.zf_sinr_numpy(h, e, rf.tx_power, noise, 1e8),
            lambda: kernels.zf_sinr_numba(h, e, rf.tx_power, noise, 1e8),
        ),
        "swarm_scores 50 particles, Q=4 S=4": (
            lambda: kernels.swarm_scores_numpy(thetas, az, beta, 4, 0.5, rf.tx_power, noise, 1e8),
            lambda: kernels.swarm_scores_numba(thetas, az, beta, 4, 0.5, rf.tx_power, noise, 1e8),
        ),
    }
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':40s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, (np_fn, nb_fn) in cases.items():
        t_np = best_of(np_fn, args.repeat)
        if kernels.BACKEND == "numba":
            t_nb = best_of(nb_fn, args.repeat)
            print(f"{name:40s} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.2f}")
        else:
            print(f"{name:40s} {1e3 * t_np:10.2f} {'n/a':>10s} {'n/a':>8s}")

    scen = Scenario()
    t = best_of(lambda: run_network_realization(scen, 0, 0, 250), max(1, args.repeat // 5))
    print(f"one rotary network realization (Q=4, S=4, 250 draws): {1e3 * t:.1f} ms")


if __name__ == "__main__":
    main()
