# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled streaming kernel for the systolic chain (int64 fast path).

Mirrors `_simcore_py.PythonCore.run` exactly; callers guarantee via bound
analysis that no intermediate can leave int64 and that wrap spans fit.
"""

from libc.stdint cimport int64_t


def run_block(
    const int64_t[::1] x,
    int64_t[::1] out,
    int64_t[::1] tap_line,
    Py_ssize_t head,
    int64_t[::1] acc_regs,
    const int64_t[::1] coeff,
    const int64_t[::1] scale,
    const int64_t[::1] tap_a,
    const int64_t[::1] tap_b,
    const int64_t[::1] acc_off,
    const int64_t[::1] acc_len,
    bint wrap,
    int64_t c_lo, int64_t c_hi,
    int64_t e_lo, int64_t e_hi,
    int64_t y_lo, int64_t y_hi,
    int64_t c_span, int64_t e_span, int64_t y_span,
    long long cycle0,
    list events,
):
    """Process one block of samples; returns the new tap-line head index.

    Outputs land in `out`; every check-mode range violation appends a
    (cycle, element, node, value) tuple to `events`.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t size = tap_line.shape[0]
    cdef Py_ssize_t n_elem = coeff.shape[0]
    cdef Py_ssize_t i, k, idx, off, r, j
    cdef int64_t a, b, c, e, y, prev, acc

    for i in range(n):
        head -= 1
        if head < 0:
            head += size
        tap_line[head] = x[i]
        prev = 0
        for k in range(n_elem):
            idx = head + tap_a[k]
            if idx >= size:
                idx -= size
            a = tap_line[idx]
            idx = head + tap_b[k]
            if idx >= size:
                idx -= size
            b = tap_line[idx]
            c = (a + b) * scale[k]
            if wrap:
                c = c & (c_span - 1)
                if c >= (c_span >> 1):
                    c -= c_span
            elif c < c_lo or c > c_hi:
                events.append((cycle0 + i, k, 0, c))
            e = c * coeff[k]
            if wrap:
                e = e & (e_span - 1)
                if e >= (e_span >> 1):
                    e -= e_span
            elif e < e_lo or e > e_hi:
                events.append((cycle0 + i, k, 1, e))
            off = acc_off[k]
            r = acc_len[k]
            acc = acc_regs[off + r - 1]
            for j in range(r - 1, 0, -1):
                acc_regs[off + j] = acc_regs[off + j - 1]
            acc_regs[off] = prev
            y = e + acc
            if wrap:
                y = y & (y_span - 1)
                if y >= (y_span >> 1):
                    y -= y_span
            elif y < y_lo or y > y_hi:
                events.append((cycle0 + i, k, 2, y))
            prev = y
        out[i] = prev
    return head
