"""
Time the Euler core in-process: plain batches, coupled coarse/fine legs and
mollified evaluation. Measures each layer independently.
"""
import sys, os
import time
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import numpy as np

M_PATHS = 20_000
STEPS = 64
REFINEMENT = 16


def timed(label: str, paths: int, steps: int, elapsed: float):
    per_step_ns = elapsed / (paths * steps) * 1e9
    print(f"  {label:<45} {elapsed * 1e3:>9.1f} ms   {per_step_ns:>7.1f} ns/path-step")


def main():
    from ewel.coefficients import make_model
    from ewel.euler import GridSchedule, SimulationConfig, coupled_terminal_states, simulate_batch
    from ewel.mollifier import mollify

    grid = GridSchedule(horizon=1.0, steps=STEPS)
    inline = SimulationConfig(jobs=1)
    pooled = SimulationConfig(jobs=os.cpu_count() or 1)

    models = {
        "constant": make_model("constant", {"drift": 0.3}),
        "tanh_drift": make_model("tanh_drift"),
        "weierstrass_sigma": make_model("weierstrass_sigma"),
        "sign_drift": make_model("sign_drift"),
    }

    print("\n" + "═" * 75)
    print(f"  EULER CORE MICRO-BENCHMARKS  (M={M_PATHS:,}, N={STEPS}, refinement={REFINEMENT})")
    print("═" * 75)

    print("\n  simulate_batch (terminal states only)")
    for name, field in models.items():
        t0 = time.perf_counter()
        simulate_batch(field, 0.0, grid, M_PATHS, seed=1, store="terminal", config=inline)
        timed(name, M_PATHS, STEPS, time.perf_counter() - t0)

    print("\n  simulate_batch, full storage")
    t0 = time.perf_counter()
    batch = simulate_batch(models["tanh_drift"], 0.0, grid, M_PATHS, seed=1, store="full", config=inline)
    timed("tanh_drift", M_PATHS, STEPS, time.perf_counter() - t0)
    print(f"  {'buffer':<45} {batch.states.nbytes / 2**20:>9.1f} MiB")

    print(f"\n  simulate_batch with {pooled.jobs} worker(s)")
    t0 = time.perf_counter()
    again = simulate_batch(models["tanh_drift"], 0.0, grid, M_PATHS, seed=1, store="full", config=pooled)
    timed("tanh_drift", M_PATHS, STEPS, time.perf_counter() - t0)
    print(f"  {'bit-identical to inline run':<45} {np.array_equal(again.states, batch.states)}")

    print("\n  coupled coarse/fine legs on one Brownian path")
    for name in ("tanh_drift", "weierstrass_sigma"):
        field = models[name]
        t0 = time.perf_counter()
        coupled_terminal_states(
            [(field, 1), (field, REFINEMENT)], 0.0, grid, M_PATHS, seed=1, refinement=REFINEMENT, config=inline
        )
        timed(name, M_PATHS, STEPS * (REFINEMENT + 1), time.perf_counter() - t0)

    print("\n  mollified fields (eps = 0.05)")
    for name in ("weierstrass_sigma", "sign_drift"):
        t0 = time.perf_counter()
        smooth = mollify(models[name], 0.05)
        build = time.perf_counter() - t0
        t0 = time.perf_counter()
        simulate_batch(smooth, 0.0, grid, M_PATHS, seed=1, store="terminal", config=inline)
        timed(f"{name} (built in {build * 1e3:.0f} ms)", M_PATHS, STEPS, time.perf_counter() - t0)

    print()


if __name__ == "__main__":
    main()
