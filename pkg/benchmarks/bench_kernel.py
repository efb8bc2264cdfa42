#!/usr/bin/env python3
"""Benchmark the chain-stepping kernels: compiled extension vs pure Python.

Runs identical workloads through both backends, verifies the outputs are
bit-identical, and reports step throughput and speedup. Usage:

    python benchmarks/bench_kernel.py [--steps N] [--repeat K]
"""

import argparse
import time

import numpy as np

from qmemsim import (
    ChainConfig,
    DetectionModel,
    MemristorParams,
    SamplingGrid,
    SignalSpec,
    Waveform,
    available_backends,
    run_chain,
)

T_OSC = 400.0


def make_case(name, n_nodes, n_steps, shot_noise):
    dt = 1600.0 / n_steps
    tau = 200 * dt
    nodes = tuple(
        MemristorParams(((i % 9) + 1) * 0.1 * T_OSC, tau, latency_s=2 * dt)
        for i in range(n_nodes)
    )
    det = DetectionModel(efficiency=0.1275, shot_noise=shot_noise, seed=99)
    return (
        name,
        ChainConfig(nodes=nodes, detection=det),
        SignalSpec(Waveform.SIN_SQUARED, period_s=T_OSC),
        SamplingGrid(dt_s=dt, duration_s=1600.0),
    )


def bench(config, drive, grid, backend, repeat):
    best = float("inf")
    trace = None
    for _ in range(repeat):
        start = time.perf_counter()
        trace = run_chain(config, drive, grid, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=100_000, help="steps per run")
    parser.add_argument("--repeat", type=int, default=3, help="timing repeats (best-of)")
    args = parser.parse_args()

    if "cython" not in available_backends():
        print("compiled kernel not available; rebuild with the extension to compare")
        return

    cases = [
        make_case("1 node, noise-free", 1, args.steps, False),
        make_case("2 nodes, shot noise", 2, args.steps, True),
        make_case("9-node staircase, noise-free", 9, args.steps, False),
    ]
    print(f"{'case':<30} {'python':>12} {'cython':>12} {'speedup':>9}  parity")
    for name, config, drive, grid in cases:
        t_py, tr_py = bench(config, drive, grid, "python", args.repeat)
        t_cy, tr_cy = bench(config, drive, grid, "cython", args.repeat)
        identical = (
            np.array_equal(tr_py.reflectivity, tr_cy.reflectivity)
            and np.array_equal(tr_py.n_transmitted, tr_cy.n_transmitted)
            and np.array_equal(tr_py.n_reflected, tr_cy.n_reflected)
        )
        n = tr_py.n_steps * config.n_nodes
        print(
            f"{name:<30} {n / t_py:>10.2e}/s {n / t_cy:>10.2e}/s "
            f"{t_py / t_cy:>8.1f}x  {'bit-identical' if identical else 'MISMATCH'}"
        )
        if not identical:
            raise SystemExit(f"backend outputs differ for case {name!r}")


if __name__ == "__main__":
    main()
