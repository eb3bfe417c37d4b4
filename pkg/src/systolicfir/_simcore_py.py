"""Pure-Python streaming kernel for the systolic chain.

Arithmetic is unbounded-integer, so any width configuration is exact. The
compiled twin (`_simcore`) implements the same state layout on int64 and is
selected only when a worst-case bound analysis proves that sufficient.
"""

from __future__ import annotations


class PythonCore:
    """Cycle-accurate evaluation of one structure graph."""

    def __init__(self, tap_size, coeffs, shift_factors, taps_a, taps_b, acc_lens,
                 wrap, node_bounds, node_spans):
        self._size = tap_size
        self._coeffs = list(coeffs)
        self._scales = list(shift_factors)
        self._taps_a = list(taps_a)
        self._taps_b = list(taps_b)
        self._acc = [[0] * r for r in acc_lens]
        self._wrap = wrap
        # node_bounds: ((c_lo, c_hi), (e_lo, e_hi), (y_lo, y_hi))
        self._bounds = node_bounds
        self._spans = node_spans
        self._line = [0] * tap_size
        self._head = 0

    def reset(self):
        self._line = [0] * self._size
        self._head = 0
        for regs in self._acc:
            for i in range(len(regs)):
                regs[i] = 0

    def run(self, samples, cycle0, events):
        """Process a block; returns outputs, appending (cycle, element, node,
        value) tuples to `events` for every check-mode range violation."""
        line = self._line
        size = self._size
        head = self._head
        coeffs = self._coeffs
        scales = self._scales
        taps_a = self._taps_a
        taps_b = self._taps_b
        accs = self._acc
        wrap = self._wrap
        (c_lo, c_hi), (e_lo, e_hi), (y_lo, y_hi) = self._bounds
        c_span, e_span, y_span = self._spans
        n_elem = len(coeffs)
        out = []
        for i, x in enumerate(samples):
            head -= 1
            if head < 0:
                head += size
            line[head] = x
            prev = 0
            for k in range(n_elem):
                idx = head + taps_a[k]
                if idx >= size:
                    idx -= size
                a = line[idx]
                idx = head + taps_b[k]
                if idx >= size:
                    idx -= size
                b = line[idx]
                c = (a + b) * scales[k]
                if wrap:
                    c &= c_span - 1
                    if c >= c_span >> 1:
                        c -= c_span
                elif c < c_lo or c > c_hi:
                    events.append((cycle0 + i, k, 0, c))
                e = c * coeffs[k]
                if wrap:
                    e &= e_span - 1
                    if e >= e_span >> 1:
                        e -= e_span
                elif e < e_lo or e > e_hi:
                    events.append((cycle0 + i, k, 1, e))
                regs = accs[k]
                acc = regs[-1]
                if len(regs) > 1:
                    regs[1:] = regs[:-1]
                regs[0] = prev
                y = e + acc
                if wrap:
                    y &= y_span - 1
                    if y >= y_span >> 1:
                        y -= y_span
                elif y < y_lo or y > y_hi:
                    events.append((cycle0 + i, k, 2, y))
                prev = y
            out.append(prev)
        self._head = head
        return out
