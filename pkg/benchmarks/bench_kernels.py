"""Time the hot kernels on both backends and report the speedup.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from cyclebench.backend import get_backend
from cyclebench.builder import BuildConfig, build_scene
from cyclebench.engine import materialize, pack
from cyclebench.relations import DEAD_ZONE


def timeit(fn, repeats):
    fn()  # warm up caches and JIT-free code paths alike
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench_scene(graph, backends, repeats):
    packed = pack(graph)
    config = BuildConfig()
    temporal = materialize(graph)
    rb = temporal.bound_radii()
    right = np.asarray(graph.camera.right, dtype=np.float64)
    forward = np.asarray(graph.camera.forward, dtype=np.float64)

    rows = []
    for kernel, make_call in (
        ("eval_states", lambda be: lambda: be.eval_states(packed)),
        ("margin_scan", lambda be: lambda: be.margin_scan(
            temporal.positions, rb, config.bounds.x, config.bounds.y,
            config.object_margin, config.boundary_margin, -1)),
        ("relation_table", lambda be: lambda: be.relation_table(
            temporal.positions, right, forward, DEAD_ZONE)),
    ):
        timings = {name: timeit(make_call(be), repeats)
                   for name, be in backends.items()}
        rows.append((kernel, timings))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    backends = {"python": get_backend("python")}
    try:
        backends["compiled"] = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; timing python only")

    scenes = {
        "L1 (sparse)": build_scene(3, "L1"),
        "L2 (cluttered)": build_scene(3, "L2"),
        "L4 (three cyclers)": build_scene(3, "L4"),
    }

    width = max(len(k) for k in scenes) + 2
    for label, graph in scenes.items():
        print(f"\n{label}: {len(graph.objects)} objects x "
              f"{graph.frame_count} frames, median of {args.repeats}")
        for kernel, timings in bench_scene(graph, backends, args.repeats):
            line = f"  {kernel:<16}"
            for name in ("python", "compiled"):
                if name in timings:
                    line += f" {name} {timings[name] * 1e6:9.1f} us"
            if "compiled" in timings:
                line += f"   x{timings['python'] / timings['compiled']:.1f}"
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
