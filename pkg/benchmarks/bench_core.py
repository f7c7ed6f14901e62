"""Compare the Cython core with the pure-Python fallback.

Times map iteration, run-length labelling and the separation estimate on
shipped presets, checks both backends agree bit for bit, and prints a table.

    python3 benchmarks/bench_core.py [--steps N] [--repeat R]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hetnet import core
from hetnet.dynamics import default_init
from hetnet.presets import load_preset


def _timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench(name: str, steps: int, repeat: int) -> list[tuple]:
    spec = load_preset(name)
    c = core.compile_spec(spec)
    x0, y0 = default_init(spec)
    armed = np.ones(len(c.Q), dtype=np.uint8)
    jobs = {
        "simulate": lambda be: be.simulate(c.P, c.Q, c.box, c.dt, x0, y0, steps, armed.copy()),
        "visits": lambda be: be.visits(c.P, c.Q, c.box, c.dt, x0, y0, steps, 10**9,
                                       spec.min_visit, c.D, c.T, armed.copy()),
        "lyapunov": lambda be: be.lyapunov(c.P, c.Q, c.box, c.dt, x0, y0, 1e-9, steps, 10),
    }
    py, cy = core.get_backend("python"), core.get_backend("cython")
    rows = []
    for job, fn in jobs.items():
        tp, op = _timed(lambda: fn(py), repeat)
        tc, oc = _timed(lambda: fn(cy), repeat)
        same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(op, oc))
        rows.append((name, job, steps, tp, tc, tp / tc, same))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--presets", nargs="*", default=["fig1-cycle3", "fig2-twosaddle-sine",
                                                    "nichols4", "linderman8"])
    args = ap.parse_args(argv)
    try:
        core.get_backend("cython")
    except ImportError:
        raise SystemExit("the Cython extension is not built; run pip install -e . first")
    print(f"{'preset':24} {'kernel':9} {'steps':>7} {'python s':>9} {'cython s':>9} "
          f"{'speedup':>8}  identical")
    for name in args.presets:
        for row in bench(name, args.steps, args.repeat):
            print("{:24} {:9} {:7d} {:9.3f} {:9.4f} {:7.0f}x  {}".format(*row))


if __name__ == "__main__":
    main()
