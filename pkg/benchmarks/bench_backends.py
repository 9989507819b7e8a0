"""Benchmark the compiled integrator core against the numpy fallback.

Runs the fixed-step integrators over a realistic workload (a two-level
system stepped at dt = 1e-3) and reports per-trajectory timings plus the
speedup.  The exact-exponential propagator is timed as context: it is the
default method, the stepped integrators are the hot path for
cross-validation and direct integration.

Usage: python benchmarks/bench_backends.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from nhq._accel import _fallback
from nhq.evolution import propagate_linear
from nhq.tls import TlsScenario, build_model, scenario_state

try:
    from nhq._accel import _core
except ImportError:
    _core = None


def time_call(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=5000,
                        help="integration steps per trajectory")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (best is reported)")
    args = parser.parse_args()

    # on-shell state: the normalized flow stays bounded over long spans
    sc = TlsScenario(model="ed", a2=0.5, gamma_param=0.3, init="z", nu=0.0)
    ham, rho0 = build_model(sc), scenario_state(sc)
    y0 = np.array(rho0.matrix)
    h, g = ham.h_plus, ham.gamma
    span = args.steps * 1e-3

    rows = []
    for label, kernel in (("linear", "rk4_linear"),
                          ("nonlinear", "rk4_nonlinear")):
        py = time_call(lambda: getattr(_fallback, kernel)(
            y0, h, g, span, args.steps), args.repeats)
        rows.append((f"{kernel} (python)", py, ""))
        if _core is not None:
            cy = time_call(lambda: getattr(_core, kernel)(
                y0, h, g, span, args.steps), args.repeats)
            rows.append((f"{kernel} (compiled)", cy, f"{py / cy:.1f}x"))
            ref = getattr(_fallback, kernel)(y0, h, g, span, args.steps)
            out = getattr(_core, kernel)(y0, h, g, span, args.steps)
            assert np.max(np.abs(out - ref)) <= 1e-12, label

    exact = time_call(lambda: propagate_linear(rho0, ham, 0.0, span),
                      args.repeats)
    rows.append(("exact-exponential (one span)", exact, ""))

    width = max(len(r[0]) for r in rows)
    print(f"workload: {args.steps} steps of dt=1e-3, 2x2 complex state")
    if _core is None:
        print("compiled core not built: showing the python fallback only")
    for label, seconds, speedup in rows:
        print(f"  {label:<{width}}  {seconds * 1e3:9.3f} ms  {speedup}")


if __name__ == "__main__":
    main()
