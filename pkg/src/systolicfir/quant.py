"""Fixed-point coefficient quantization and shift-normalization planning.

A plain quantizer maps h to round(h * 2^(b-1)). The shift-normalized plan
additionally strips redundant sign bits from small coefficients: each entry
gets a compression exponent Q so its integer uses the full b-bit range, and an
input shift d = C - Q (C = max Q) realigns every partial product to the shared
scale 2^(b-1+C) before accumulation.

All roundings go through exact rational arithmetic; ties round away from zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import QuantizationError, ShiftPlanError

Q_LIMIT_MODES = ("safe", "paper_faithful")


def _round_half_away(value: Fraction) -> int:
    t = abs(value) + Fraction(1, 2)
    magnitude = t.numerator // t.denominator
    return magnitude if value >= 0 else -magnitude


def quantize_plain(h: float, bit_width: int, saturate: bool = False) -> int:
    """round(h * 2^(b-1)), erroring (or saturating) outside signed b-bit range."""
    if bit_width < 2:
        raise QuantizationError(f"bit width must be at least 2, got {bit_width}")
    value = _round_half_away(Fraction(h) * 2 ** (bit_width - 1))
    lo, hi = -(2 ** (bit_width - 1)), 2 ** (bit_width - 1) - 1
    if lo <= value <= hi:
        return value
    if saturate:
        return hi if value > hi else lo
    raise QuantizationError(
        f"coefficient {h!r} does not fit signed {bit_width}-bit at scale 2^{bit_width - 1}"
    )


def dequantize(integer: int, bit_width: int, q: int = 0) -> float:
    """Exact real value integer / 2^(b-1+q)."""
    return math.ldexp(integer, -(bit_width - 1 + q))


def compression_exponent(h: float, bit_width: int, shift_limit: int) -> int:
    """Largest usable extra scaling exponent for h: min(floor(-log2|h|), limit).

    Computed from the float's exact binary exponent, so powers of two land on
    the correct side (|h| in (2^-q-1, 2^-q] maps to q). Zero coefficients take
    the full limit. Negative results (|h| > 1) are returned as-is.
    """
    if bit_width < 2:
        raise QuantizationError(f"bit width must be at least 2, got {bit_width}")
    if shift_limit < 0:
        raise QuantizationError(f"shift limit must be non-negative, got {shift_limit}")
    if h == 0.0:
        return shift_limit
    mantissa, exponent = math.frexp(abs(h))
    raw = (1 - exponent) if mantissa == 0.5 else -exponent
    return min(raw, shift_limit)


def _raw_exponent(h: float) -> int:
    mantissa, exponent = math.frexp(abs(h))
    return (1 - exponent) if mantissa == 0.5 else -exponent


@dataclass(frozen=True)
class PlanEntry:
    """One coefficient's quantization: h -> I at scale 2^(b-1+q), input shift d."""

    real: float
    integer: int
    q_raw: int
    q: int
    shift: int


@dataclass(frozen=True)
class QuantizationPlan:
    bit_width: int
    shift_limit: int
    common_base: int
    entries: tuple[PlanEntry, ...]

    @property
    def integers(self) -> tuple[int, ...]:
        return tuple(e.integer for e in self.entries)

    @property
    def shifts(self) -> tuple[int, ...]:
        return tuple(e.shift for e in self.entries)

    def has_negative_q(self) -> bool:
        """True when some coefficient needed magnitude above unity (q < 0)."""
        return any(e.q < 0 for e in self.entries)


def shift_limit_for(w_c: int, input_width: int, mode: str = "safe") -> int:
    """Pre-adder headroom available for normalization shifts.

    `safe` reserves the pre-adder's carry bit (w_c - input_width - 1);
    `paper_faithful` spends it (w_c - input_width), trusting width validation
    to catch genuine overflow.
    """
    if mode not in Q_LIMIT_MODES:
        raise QuantizationError(f"unknown shift-limit mode {mode!r}, expected {Q_LIMIT_MODES}")
    limit = w_c - input_width - (1 if mode == "safe" else 0)
    if limit < 0:
        raise QuantizationError(
            f"pre-adder width {w_c} leaves no headroom for {input_width}-bit inputs"
        )
    return limit


def build_shift_plan(
    coeffs: Iterable[float],
    bit_width: int,
    input_width: int,
    w_c: int,
    mode: str = "safe",
) -> QuantizationPlan:
    """Build the shift-normalized plan for one folded coefficient half.

    Every coefficient is quantized at its own enlarged scale 2^(b-1+q); if the
    rounded integer overflows signed b bits (exact powers of two do), q is
    decremented until it fits. Input shifts d = C - q realign all products to
    the common base; an entry whose d exceeds the pre-adder headroom is a hard
    error (possible only for q < 0, i.e. coefficients above unit magnitude).
    """
    if bit_width < 2:
        raise QuantizationError(f"bit width must be at least 2, got {bit_width}")
    if input_width < 2:
        raise QuantizationError(f"input width must be at least 2, got {input_width}")
    limit = shift_limit_for(w_c, input_width, mode)
    lo, hi = -(2 ** (bit_width - 1)), 2 ** (bit_width - 1) - 1

    quantized: list[tuple] = []
    for h in coeffs:
        h = float(h)
        if h == 0.0:
            # A zero contributes nothing at any scale; align it later to the
            # common base so it never inflates anyone's input shift.
            quantized.append((h, 0, limit, None))
            continue
        q_raw = _raw_exponent(h)
        q = min(q_raw, limit)
        integer = _round_half_away(Fraction(h) * 2 ** (bit_width - 1 + q))
        while not lo <= integer <= hi:
            q -= 1
            integer = _round_half_away(Fraction(h) * 2 ** (bit_width - 1 + q))
        quantized.append((h, integer, q_raw, q))
    if not quantized:
        raise QuantizationError("cannot build a plan for an empty coefficient set")

    nonzero_q = [q for _, _, _, q in quantized if q is not None]
    common_base = max(nonzero_q) if nonzero_q else 0
    entries = []
    for h, integer, q_raw, q in quantized:
        if q is None:
            q = common_base
        shift = common_base - q
        if shift > limit:
            raise ShiftPlanError(
                f"coefficient {h!r} needs input shift {shift}, beyond the "
                f"pre-adder headroom of {limit}"
            )
        entries.append(PlanEntry(real=h, integer=integer, q_raw=q_raw, q=q, shift=shift))
    return QuantizationPlan(
        bit_width=bit_width,
        shift_limit=limit,
        common_base=common_base,
        entries=tuple(entries),
    )


def build_plain_plan(coeffs: Iterable[float], bit_width: int) -> QuantizationPlan:
    """Plan with no normalization: every entry at scale 2^(b-1), no shifts."""
    entries = []
    for h in coeffs:
        h = float(h)
        integer = quantize_plain(h, bit_width)
        q_raw = 0 if h == 0.0 else _raw_exponent(h)
        entries.append(PlanEntry(real=h, integer=integer, q_raw=q_raw, q=0, shift=0))
    if not entries:
        raise QuantizationError("cannot build a plan for an empty coefficient set")
    return QuantizationPlan(bit_width=bit_width, shift_limit=0, common_base=0, entries=tuple(entries))


def plan_to_json(plan: QuantizationPlan) -> str:
    doc = {
        "b": plan.bit_width,
        "q_limit": plan.shift_limit,
        "common_base": plan.common_base,
        "entries": [
            {"h": e.real, "I": e.integer, "Q_raw": e.q_raw, "Q_clamped": e.q, "d": e.shift}
            for e in plan.entries
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def plan_from_json(text: str) -> QuantizationPlan:
    doc = json.loads(text)
    try:
        entries = tuple(
            PlanEntry(
                real=float(e["h"]),
                integer=int(e["I"]),
                q_raw=int(e["Q_raw"]),
                q=int(e["Q_clamped"]),
                shift=int(e["d"]),
            )
            for e in doc["entries"]
        )
        return QuantizationPlan(
            bit_width=int(doc["b"]),
            shift_limit=int(doc["q_limit"]),
            common_base=int(doc["common_base"]),
            entries=entries,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise QuantizationError(f"malformed plan document: {exc}") from exc


def effective_values(plan: QuantizationPlan) -> tuple[Fraction, ...]:
    """Exact rational value I / 2^(b-1+q) realized by each entry."""
    b = plan.bit_width
    return tuple(Fraction(e.integer, 1) / Fraction(2) ** (b - 1 + e.q) for e in plan.entries)
