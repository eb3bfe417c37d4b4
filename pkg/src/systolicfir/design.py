"""Lowpass FIR design: band spec, tap estimation, windowed-sinc coefficients.

Designs are kept exactly symmetric (h[k] == h[M-k] bit for bit) because every
downstream stage folds the coefficient set in half around that symmetry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BandError

WINDOWS = ("nuttall", "rectangular")

# Minimum-sidelobe 4-term cosine window coefficients.
_NUTTALL_A = (0.355768, 0.487396, 0.144232, 0.012604)


@dataclass(frozen=True)
class FilterSpec:
    """Lowpass band specification.

    Frequencies are in cycles per sample (0.5 = Nyquist). `taps` may be None,
    in which case callers estimate it with `estimate_taps`.
    """

    f_pass: float
    f_stop: float
    a_stop: float
    taps: int | None = None
    window: str = "nuttall"

    def __post_init__(self):
        if not (0.0 < self.f_pass < self.f_stop <= 0.5):
            raise BandError(
                "band edges must satisfy 0 < f_pass < f_stop <= 0.5, got "
                f"f_pass={self.f_pass}, f_stop={self.f_stop}"
            )
        if self.a_stop <= 0.0:
            raise BandError(f"stopband attenuation must be positive, got {self.a_stop}")
        if self.taps is not None:
            if self.taps < 2 or self.taps % 2 != 0:
                raise BandError(f"tap count must be a positive even integer, got {self.taps}")
        if self.window not in WINDOWS:
            raise BandError(f"unknown window {self.window!r}, expected one of {WINDOWS}")

    @property
    def cutoff(self) -> float:
        """Ideal-lowpass cutoff: midpoint of the transition band."""
        return (self.f_pass + self.f_stop) / 2.0


@dataclass(frozen=True)
class CoefficientSet:
    """An immutable FIR coefficient sequence with its symmetry spelled out."""

    h: tuple[float, ...]
    symmetric: bool

    def __post_init__(self):
        if len(self.h) < 1:
            raise BandError("coefficient set must not be empty")
        if self.symmetric:
            m = self.order
            for k in range(len(self.h)):
                if self.h[k] != self.h[m - k]:
                    raise BandError(f"coefficients are not symmetric at index {k}")

    @property
    def taps(self) -> int:
        return len(self.h)

    @property
    def order(self) -> int:
        return len(self.h) - 1

    def folded_half(self) -> tuple[float, ...]:
        """First half h[0..(M-1)/2] of an even-length symmetric set."""
        if not self.symmetric or self.taps % 2 != 0:
            raise BandError("folding requires an even-length symmetric coefficient set")
        return self.h[: self.taps // 2]


def estimate_taps(a_stop: float, f_pass: float, f_stop: float) -> int:
    """Estimate the tap count needed for `a_stop` dB over the given transition.

    Uses the classic attenuation/(22 * transition width) rule, rounded up.
    Arguments are taken at their shortest-decimal value so that decimal band
    widths divide exactly (0.25 - 0.2 must be 1/20, not its binary error).
    """
    if not (0.0 < f_pass < f_stop <= 0.5):
        raise BandError(
            f"band edges must satisfy 0 < f_pass < f_stop <= 0.5, got {f_pass}, {f_stop}"
        )
    if a_stop <= 0.0:
        raise BandError(f"stopband attenuation must be positive, got {a_stop}")
    width = Fraction(repr(float(f_stop))) - Fraction(repr(float(f_pass)))
    return math.ceil(Fraction(repr(float(a_stop))) / (22 * width))


def nuttall_window(n: int, taps: int) -> float:
    """Minimum-sidelobe 4-term cosine window value at index n of `taps` points."""
    if taps < 2:
        raise BandError(f"window needs at least 2 points, got {taps}")
    if not 0 <= n < taps:
        raise IndexError(f"window index {n} outside [0, {taps})")
    a0, a1, a2, a3 = _NUTTALL_A
    x = 2.0 * math.pi * n / (taps - 1)
    return a0 - a1 * math.cos(x) + a2 * math.cos(2.0 * x) - a3 * math.cos(3.0 * x)


def rectangular_window(n: int, taps: int) -> float:
    if taps < 2:
        raise BandError(f"window needs at least 2 points, got {taps}")
    if not 0 <= n < taps:
        raise IndexError(f"window index {n} outside [0, {taps})")
    return 1.0


_WINDOW_FUNCS = {"nuttall": nuttall_window, "rectangular": rectangular_window}


def _sinc(x: float) -> float:
    if x == 0.0:
        return 1.0
    return math.sin(math.pi * x) / (math.pi * x)


def design_lowpass(spec: FilterSpec) -> CoefficientSet:
    """Design a windowed-sinc lowpass for `spec`.

    h[k] = 2 f_c sinc(2 f_c (k - M/2)) w(k), evaluated for the first half and
    mirrored, so the result is exactly symmetric. Requires spec.taps set (use
    estimate_taps upstream otherwise).
    """
    if spec.taps is None:
        raise BandError("design_lowpass needs spec.taps; estimate it first")
    n = spec.taps
    m = n - 1
    fc = spec.cutoff
    window = _WINDOW_FUNCS[spec.window]
    half = [2.0 * fc * _sinc(2.0 * fc * (k - m / 2.0)) * window(k, n) for k in range(n // 2)]
    h = tuple(half) + tuple(reversed(half))
    if max(abs(v) for v in h) >= 1.0:
        raise BandError("designed coefficients must stay below unit magnitude")
    return CoefficientSet(h=h, symmetric=True)


def save_coefficients(coeffs: CoefficientSet, path: str, fmt: str = "json") -> None:
    """Write coefficients as a JSON array or as plain text, one per line."""
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(list(coeffs.h), indent=0) + "\n")
    elif fmt == "text":
        with open(path, "w", encoding="utf-8") as fh:
            for v in coeffs.h:
                fh.write(repr(v) + "\n")
    else:
        raise BandError(f"unknown coefficient format {fmt!r}, expected 'json' or 'text'")


def load_coefficients(path: str) -> CoefficientSet:
    """Read a coefficient file written by `save_coefficients` (either format)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("["):
        values = [float(v) for v in json.loads(text)]
    else:
        values = [float(line) for line in text.split() if line]
    if not values:
        raise BandError(f"no coefficients found in {path}")
    h = tuple(values)
    m = len(h) - 1
    symmetric = all(h[k] == h[m - k] for k in range(len(h)))
    return CoefficientSet(h=h, symmetric=symmetric)
