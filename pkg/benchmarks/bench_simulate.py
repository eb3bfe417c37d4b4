#!/usr/bin/env python3
"""Benchmark the two simulation cores on the same stream.

Builds the reference 180-tap structure (configurable), runs an identical
random sample stream through the compiled int64 core and the pure-Python
core, verifies the outputs are bit-identical, and reports throughput.
"""

import argparse
import random
import sys
import time

import systolicfir as sf


def build_graph(taps: int) -> tuple[sf.StructureGraph, sf.WidthConfig]:
    widths = sf.WidthConfig(15, 15, 16, 18, 34, 36)
    spec = sf.FilterSpec(f_pass=0.1, f_stop=0.125, a_stop=102.0, taps=taps)
    half = sf.design_lowpass(spec).folded_half()
    plan = sf.build_shift_plan(
        half, 18, widths.input_width, widths.w_c, mode="paper_faithful"
    )
    return sf.build_structure(plan, breaks=sf.BreakSpec.full(1)), widths


def bench(backend: str, graph, widths, samples, repeats: int):
    best = None
    outputs = events = None
    for _ in range(repeats):
        sim = sf.Simulator(graph, widths, backend=backend)
        t0 = time.perf_counter()
        outputs, events = sim.process(samples)
        elapsed = time.perf_counter() - t0
        best = elapsed if best is None else min(best, elapsed)
    return best, outputs, events


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--taps", type=int, default=180, help="filter length (default 180)")
    parser.add_argument(
        "--samples", type=int, default=20_000, help="stream length (default 20000)"
    )
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats (default 3)")
    parser.add_argument("--seed", type=int, default=1, help="stream RNG seed")
    args = parser.parse_args(argv)

    graph, widths = build_graph(args.taps)
    rng = random.Random(args.seed)
    lo, hi = -(2 ** (widths.input_width - 1)), 2 ** (widths.input_width - 1) - 1
    samples = [rng.randint(lo, hi) for _ in range(args.samples)]

    print(
        f"{graph.taps}-tap structure, {len(graph.elements)} elements, "
        f"{args.samples} samples, best of {args.repeats}"
    )

    t_py, out_py, ev_py = bench("python", graph, widths, samples, args.repeats)
    rows = [("python", t_py)]
    try:
        t_c, out_c, ev_c = bench("compiled", graph, widths, samples, args.repeats)
    except sf.SimulationError as exc:
        print(f"compiled core unavailable: {exc}")
        t_c = None
    else:
        if out_c != out_py or ev_c != ev_py:
            print("FATAL: backends disagree", file=sys.stderr)
            return 1
        rows.append(("compiled", t_c))

    print(f"{'backend':<10} {'best':>10} {'samples/s':>14} {'speedup':>9}")
    for name, t in rows:
        print(f"{name:<10} {t:>9.4f}s {args.samples / t:>14,.0f} {t_py / t:>8.1f}x")
    if t_c is not None:
        print(f"outputs identical across backends ({len(out_py)} values, "
              f"{len(ev_py)} overflow flags)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
