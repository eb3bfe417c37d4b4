"""Bit-accurate, cycle-accurate simulation of structure graphs.

Internal arithmetic is unbounded-integer. `check` mode compares every node
result against its declared width and reports violations without altering
values; `wrap` mode stores each result as its two's-complement residue, the
way fixed hardware would.

Two interchangeable kernels exist: a compiled int64 core (`_simcore`) and a
pure-Python unbounded core (`_simcore_py`). The compiled core is used only
when an exact worst-case bound analysis proves no intermediate can leave
int64; setting SYSTOLICFIR_PURE=1 forces the pure core.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from operator import index
from typing import Iterable, Sequence

import numpy as np

from ._simcore_py import PythonCore
from .errors import SimulationError, StructureError
from .structure import StructureGraph, WidthConfig

try:
    from . import _simcore
except ImportError:  # extension not built; pure Python still covers everything
    _simcore = None

MODES = ("check", "wrap")
NODES = ("pre_adder", "multiplier", "accumulator")

_INT64_HEADROOM = 2**62


@dataclass(frozen=True)
class OverflowEvent:
    """One check-mode width violation at a single node and cycle."""

    cycle: int
    element: int
    node: str
    value: int
    width: int


@dataclass(frozen=True)
class DspResult:
    """One element evaluation: pre-adder, multiplier, post-adder results."""

    c: int
    e: int
    y: int
    flags: tuple[tuple[str, int], ...]


def _signed_range(width: int) -> tuple[int, int]:
    return -(2 ** (width - 1)), 2 ** (width - 1) - 1


def _wrap(value: int, width: int) -> int:
    span = 1 << width
    value &= span - 1
    return value - span if value >= span >> 1 else value


def dsp_eval(a: int, b: int, d: int, f: int, widths: WidthConfig, mode: str = "check") -> DspResult:
    """Evaluate one DSP element: c = a + b, e = c * d, y = e + f.

    Port inputs outside their declared widths are hard errors; internal
    results are flagged (check) or wrapped (wrap).
    """
    if mode not in MODES:
        raise SimulationError(f"unknown mode {mode!r}, expected one of {MODES}")
    for name, value, width in (("a", a, widths.w_a), ("b", b, widths.w_b),
                               ("d", d, widths.w_d), ("f", f, widths.w_f)):
        lo, hi = _signed_range(width)
        if not lo <= value <= hi:
            raise SimulationError(
                f"input {name}={value} outside signed {width}-bit range [{lo}, {hi}]"
            )
    flags = []
    c = a + b
    if mode == "wrap":
        c = _wrap(c, widths.w_c)
    elif not _signed_range(widths.w_c)[0] <= c <= _signed_range(widths.w_c)[1]:
        flags.append(("pre_adder", c))
    e = c * d
    if mode == "wrap":
        e = _wrap(e, widths.w_e)
    elif not _signed_range(widths.w_e)[0] <= e <= _signed_range(widths.w_e)[1]:
        flags.append(("multiplier", e))
    y = e + f
    if mode == "wrap":
        y = _wrap(y, widths.w_f)
    elif not _signed_range(widths.w_f)[0] <= y <= _signed_range(widths.w_f)[1]:
        flags.append(("accumulator", y))
    return DspResult(c=c, e=e, y=y, flags=tuple(flags))


def _int64_safe(graph: StructureGraph, widths: WidthConfig, mode: str) -> bool:
    """True when every intermediate provably fits int64 for this graph."""
    w_in = widths.input_width
    if w_in > 62:
        return False
    in_mag = 2 ** (w_in - 1)
    if mode == "wrap":
        if max(widths.w_c, widths.w_e, widths.w_f) > 62:
            return False
        c_raw = max(2 * in_mag * 2**e.input_shift for e in graph.elements)
        e_raw = 2 ** (widths.w_c - 1) * max((abs(e.coefficient) for e in graph.elements), default=0)
        y_raw = 2 ** (widths.w_e - 1) + 2 ** (widths.w_f - 1)
        return max(c_raw, e_raw, y_raw) <= _INT64_HEADROOM
    acc = 0
    worst = 0
    for e in graph.elements:
        c_raw = 2 * in_mag * 2**e.input_shift
        e_raw = c_raw * abs(e.coefficient)
        acc += e_raw
        worst = max(worst, c_raw, e_raw, acc)
    return worst <= _INT64_HEADROOM


class Simulator:
    """Streaming simulator; state persists across `process` calls."""

    def __init__(self, graph: StructureGraph, widths: WidthConfig, mode: str = "check",
                 backend: str | None = None):
        if mode not in MODES:
            raise SimulationError(f"unknown mode {mode!r}, expected one of {MODES}")
        coeff_lo, coeff_hi = _signed_range(widths.w_d)
        for e in graph.elements:
            if not coeff_lo <= e.coefficient <= coeff_hi:
                raise StructureError(
                    f"coefficient {e.coefficient} does not fit the declared "
                    f"{widths.w_d}-bit coefficient port"
                )
        self.graph = graph
        self.widths = widths
        self.mode = mode
        self._cycle = 0
        self._in_lo, self._in_hi = _signed_range(widths.input_width)

        if backend not in (None, "compiled", "python"):
            raise SimulationError(f"unknown backend {backend!r}")
        want_compiled = backend == "compiled" or (
            backend is None
            and _simcore is not None
            and os.environ.get("SYSTOLICFIR_PURE", "") != "1"
            and _int64_safe(graph, widths, mode)
        )
        if backend == "compiled":
            if _simcore is None:
                raise SimulationError("compiled core requested but the extension is not built")
            if not _int64_safe(graph, widths, mode):
                raise SimulationError(
                    "compiled core requested but this configuration can exceed int64"
                )
        self.backend = "compiled" if want_compiled else "python"

        n_elem = graph.n_elements
        tap_size = graph.max_tap_delay + 1
        coeffs = [e.coefficient for e in graph.elements]
        scales = [2**e.input_shift for e in graph.elements]
        taps_a = [e.tap_delay_a for e in graph.elements]
        taps_b = [e.tap_delay_b for e in graph.elements]
        acc_lens = [e.accumulate_registers for e in graph.elements]
        bounds = (
            _signed_range(widths.w_c),
            _signed_range(widths.w_e),
            _signed_range(widths.w_f),
        )
        spans = (1 << widths.w_c, 1 << widths.w_e, 1 << widths.w_f)

        if self.backend == "compiled":
            self._tap_line = np.zeros(tap_size, dtype=np.int64)
            self._head = 0
            self._acc_regs = np.zeros(sum(acc_lens), dtype=np.int64)
            offs = np.cumsum([0] + acc_lens[:-1])
            self._coeff = np.asarray(coeffs, dtype=np.int64)
            self._scale = np.asarray(scales, dtype=np.int64)
            self._tap_a = np.asarray(taps_a, dtype=np.int64)
            self._tap_b = np.asarray(taps_b, dtype=np.int64)
            self._acc_off = np.asarray(offs, dtype=np.int64)
            self._acc_len = np.asarray(acc_lens, dtype=np.int64)
            self._bounds = bounds
            self._spans = spans
        else:
            self._core = PythonCore(
                tap_size, coeffs, scales, taps_a, taps_b, acc_lens,
                mode == "wrap", bounds, spans,
            )

    def reset(self) -> None:
        self._cycle = 0
        if self.backend == "compiled":
            self._tap_line[:] = 0
            self._acc_regs[:] = 0
            self._head = 0
        else:
            self._core.reset()

    def process(self, samples: Iterable[int]) -> tuple[list[int], list[OverflowEvent]]:
        """Feed a block of samples; returns (outputs, overflow events)."""
        raw_events: list[tuple] = []
        if self.backend == "compiled":
            x = np.asarray(samples if isinstance(samples, np.ndarray) else list(samples))
            if x.size == 0:
                return [], []
            if x.dtype.kind not in "iu":
                raise SimulationError(
                    "sample stream must contain integers within the input width"
                )
            x = x.astype(np.int64, copy=False)
            if x.ndim != 1:
                raise SimulationError("sample stream must be one-dimensional")
            if x.size:
                lo, hi = int(x.min()), int(x.max())
                if lo < self._in_lo or hi > self._in_hi:
                    bad = lo if lo < self._in_lo else hi
                    raise SimulationError(
                        f"input sample {bad} outside signed {self.widths.input_width}-bit "
                        f"range [{self._in_lo}, {self._in_hi}]"
                    )
            out = np.empty(x.size, dtype=np.int64)
            (c_lo, c_hi), (e_lo, e_hi), (y_lo, y_hi) = self._bounds
            c_span, e_span, y_span = self._spans
            self._head = _simcore.run_block(
                x, out, self._tap_line, self._head, self._acc_regs,
                self._coeff, self._scale, self._tap_a, self._tap_b,
                self._acc_off, self._acc_len,
                self.mode == "wrap",
                c_lo, c_hi, e_lo, e_hi, y_lo, y_hi,
                c_span, e_span, y_span,
                self._cycle, raw_events,
            )
            outputs = out.tolist()
            count = x.size
        else:
            block = [index(v) for v in samples]
            for i, v in enumerate(block):
                if not self._in_lo <= v <= self._in_hi:
                    raise SimulationError(
                        f"input sample {v} at cycle {self._cycle + i} outside signed "
                        f"{self.widths.input_width}-bit range [{self._in_lo}, {self._in_hi}]"
                    )
            outputs = self._core.run(block, self._cycle, raw_events)
            count = len(block)
        self._cycle += count
        node_widths = (self.widths.w_c, self.widths.w_e, self.widths.w_f)
        events = [
            OverflowEvent(cycle=cy, element=el, node=NODES[nd], value=int(val),
                          width=node_widths[nd])
            for cy, el, nd, val in raw_events
        ]
        return outputs, events


def simulate(graph: StructureGraph, samples: Iterable[int], widths: WidthConfig,
             mode: str = "check", backend: str | None = None
             ) -> tuple[list[int], list[OverflowEvent]]:
    """One-shot simulation from zeroed state."""
    return Simulator(graph, widths, mode=mode, backend=backend).process(samples)


def impulse_response(graph: StructureGraph, widths: WidthConfig, amplitude: int = 1) -> list[int]:
    """Integer impulse response, long enough to flush latency plus all taps."""
    length = graph.model_latency + graph.taps
    stream = [int(amplitude)] + [0] * (length - 1)
    outputs, _ = simulate(graph, stream, widths, mode="check")
    return outputs


def write_diagnostics_jsonl(events: Sequence[OverflowEvent], fh) -> None:
    """One JSON object per line: {cycle, element, node, value, width}."""
    for ev in events:
        fh.write(json.dumps(
            {"cycle": ev.cycle, "element": ev.element, "node": ev.node,
             "value": ev.value, "width": ev.width},
            sort_keys=True,
        ) + "\n")
