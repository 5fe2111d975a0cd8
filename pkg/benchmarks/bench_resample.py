"""Times the compiled bilinear kernel against its pure-numpy twin.

Run from the repo root:

    python3 benchmarks/bench_resample.py
    python3 benchmarks/bench_resample.py --src 4096 --repeats 9

The two paths must agree bit for bit; the run aborts loudly if they
ever diverge.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from cxrboard._kernels import _bilinear_numpy, _get_compiled


def _time(fn, args, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--src", type=int, default=2048, help="square source edge")
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    src = rng.integers(0, 4096, size=(args.src, args.src)).astype(np.float64)

    start = time.perf_counter()
    compiled = _get_compiled()
    compiled(src[:4, :4].copy(), 2, 2)  # pay the JIT cost up front
    print(f"source {args.src}x{args.src}, jit warm-up {time.perf_counter() - start:.2f} s")
    print(f"{'output':>12}  {'numpy':>10}  {'compiled':>10}  {'speedup':>8}")

    for out_h, out_w in ((256, 256), (512, 512), (1024, 768), (2048, 2048)):
        if compiled(src, out_h, out_w).tobytes() != _bilinear_numpy(src, out_h, out_w).tobytes():
            raise SystemExit(f"kernel mismatch at {out_w}x{out_h}")
        t_numpy = _time(_bilinear_numpy, (src, out_h, out_w), args.repeats)
        t_compiled = _time(compiled, (src, out_h, out_w), args.repeats)
        print(
            f"{out_w:>5}x{out_h:<6}  {t_numpy * 1000:>8.2f}ms  "
            f"{t_compiled * 1000:>8.2f}ms  {t_numpy / t_compiled:>7.2f}x"
        )


if __name__ == "__main__":
    main()
