"""Frequency-domain measurement and representation comparison.

The response evaluator is a direct summation over an arbitrary frequency
grid. Its kernel works in half-turns (arguments to sin/cos are reduced
modulo 2 before scaling by pi), so DC and Nyquist come out bit-clean: a
symmetric pair summing to an exact null really produces 0, not 1e-17.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .design import FilterSpec, design_lowpass
from .errors import BandError, SystolicFirError
from .quant import QuantizationPlan, build_plain_plan, build_shift_plan
from .sim import impulse_response
from .structure import WidthConfig, build_structure

DEFAULT_GRID_SIZE = 4096
ATTENUATION_CAP_DB = 400.0


def default_grid(size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Strictly increasing grid over [0, 0.5] inclusive."""
    if size < 2:
        raise BandError(f"frequency grid needs at least 2 points, got {size}")
    return np.linspace(0.0, 0.5, size)


def _sinpi(r: np.ndarray) -> np.ndarray:
    r = np.mod(r, 2.0)
    sign = np.where(r > 1.0, -1.0, 1.0)
    r = np.where(r > 1.0, r - 1.0, r)
    r = np.where(r > 0.5, 1.0 - r, r)
    return sign * np.sin(np.pi * r)


def _cospi(r: np.ndarray) -> np.ndarray:
    return _sinpi(np.asarray(r) + 0.5)


@dataclass(frozen=True)
class FrequencyResponse:
    grid: np.ndarray
    values: np.ndarray
    reference_gain: float


def frequency_response(h: Sequence[float], grid: np.ndarray | None = None) -> FrequencyResponse:
    """H(f) = sum_k h[k] exp(-2 pi i f k) over the grid (cycles/sample)."""
    coeffs = np.asarray(list(h), dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise BandError("frequency_response needs a non-empty coefficient sequence")
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise BandError("frequency grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0.0):
        raise BandError("frequency grid must be strictly increasing")
    half_turns = 2.0 * np.outer(grid, np.arange(coeffs.size))
    kernel = _cospi(half_turns) - 1j * _sinpi(half_turns)
    values = kernel @ coeffs
    return FrequencyResponse(grid=grid, values=values,
                             reference_gain=abs(math.fsum(coeffs)))


def stopband_attenuation(response: FrequencyResponse, f_stop: float) -> float:
    """dB ratio of DC gain to the worst stopband magnitude, capped at 400."""
    mask = response.grid >= f_stop
    if not np.any(mask):
        raise BandError(f"no grid points at or above f_stop={f_stop}")
    worst = float(np.max(np.abs(response.values[mask])))
    if response.reference_gain == 0.0:
        raise BandError("zero DC gain leaves attenuation undefined")
    if worst == 0.0:
        return ATTENUATION_CAP_DB
    return min(ATTENUATION_CAP_DB, 20.0 * math.log10(response.reference_gain / worst))


def passband_ripple(response: FrequencyResponse, f_pass: float) -> float:
    """Largest absolute dB deviation from the DC reference up to f_pass."""
    mask = response.grid <= f_pass
    if not np.any(mask):
        raise BandError(f"no grid points at or below f_pass={f_pass}")
    if response.reference_gain == 0.0:
        raise BandError("zero DC gain leaves ripple undefined")
    mags = np.abs(response.values[mask]) / response.reference_gain
    mags = np.maximum(mags, 1e-300)
    return float(np.max(np.abs(20.0 * np.log10(mags))))


def direct_form_reference(h: Sequence[float], x: Sequence[float]) -> list[float]:
    """Real-arithmetic folded FIR oracle with zero initial state.

    y[n] = sum_{k<=order/2} h[k] (x[n-k] + x[n-order+k]); requires an exactly
    symmetric even-length coefficient sequence.
    """
    coeffs = list(h)
    n = len(coeffs)
    if n < 2 or n % 2 != 0:
        raise BandError("folded reference needs an even number of taps")
    order = n - 1
    for k in range(n):
        if coeffs[k] != coeffs[order - k]:
            raise BandError(f"coefficients are not symmetric at index {k}")
    xs = np.asarray(list(x), dtype=float)
    out = np.zeros(xs.size, dtype=float)
    for k in range(n // 2):
        for delay in (k, order - k):
            if delay < xs.size:
                out[delay:] += coeffs[k] * xs[: xs.size - delay]
    return out.tolist()


def effective_coefficients(plan: QuantizationPlan) -> list[float]:
    """Direct-form coefficient sequence the plan realizes (exact in double)."""
    half = [math.ldexp(e.integer, -(plan.bit_width - 1 + e.q)) for e in plan.entries]
    return half + half[::-1]


def _effective_rationals(plan: QuantizationPlan) -> list[Fraction]:
    half = [Fraction(e.integer) / Fraction(2) ** (plan.bit_width - 1 + e.q)
            for e in plan.entries]
    return half + half[::-1]


@dataclass(frozen=True)
class RepresentationMetrics:
    label: str
    attenuation_db: float
    passband_ripple_db: float
    max_coefficient_error: float


@dataclass(frozen=True)
class ComparisonReport:
    taps: int
    elements: int
    bit_width: int
    shift_limit: int
    grid_size: int
    f_pass: float
    f_stop: float
    metrics: tuple[RepresentationMetrics, ...]
    margin_shift_minus_plain_db: float
    grid: np.ndarray
    curves_db: dict

    def to_json(self) -> str:
        doc = {
            "taps": self.taps,
            "elements": self.elements,
            "bit_width": self.bit_width,
            "q_limit": self.shift_limit,
            "grid_size": self.grid_size,
            "f_pass": self.f_pass,
            "f_stop": self.f_stop,
            "representations": [
                {
                    "label": m.label,
                    "stopband_attenuation_db": m.attenuation_db,
                    "passband_ripple_db": m.passband_ripple_db,
                    "max_coefficient_error": m.max_coefficient_error,
                }
                for m in self.metrics
            ],
            "margin_shift_minus_plain_db": self.margin_shift_minus_plain_db,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _verify_plan_against_simulator(plan: QuantizationPlan, widths: WidthConfig) -> None:
    """Gate: the graph's impulse response must reproduce the plan exactly."""
    graph = build_structure(plan)
    ir = impulse_response(graph, widths)
    lat = graph.model_latency
    scale = Fraction(2) ** (plan.bit_width - 1 + plan.common_base)
    expected = _effective_rationals(plan)
    got = [Fraction(v) / scale for v in ir[lat:lat + graph.taps]]
    if got != expected or any(v != 0 for v in ir[:lat]):
        raise SystolicFirError(
            "simulator impulse response disagrees with the quantization plan; "
            "refusing to report inconsistent curves"
        )


def compare_representations(
    spec: FilterSpec,
    bit_width: int,
    widths: WidthConfig,
    mode: str = "paper_faithful",
    grid_size: int = DEFAULT_GRID_SIZE,
) -> ComparisonReport:
    """Measure double-precision vs plain vs shift-normalized realizations.

    The two fixed-point plans are checked against the bit-exact simulator
    (impulse response re-scaled by the common base must reproduce the plan's
    effective coefficients exactly) before anything is reported.
    """
    coeffs = design_lowpass(spec)
    half = coeffs.folded_half()
    plain = build_plain_plan(half, bit_width)
    shifted = build_shift_plan(half, bit_width, widths.input_width, widths.w_c, mode=mode)
    _verify_plan_against_simulator(plain, widths)
    _verify_plan_against_simulator(shifted, widths)

    grid = default_grid(grid_size)
    sequences = {
        "double_precision": list(coeffs.h),
        "plain_fixed": effective_coefficients(plain),
        "shift_normalized": effective_coefficients(shifted),
    }
    metrics = []
    curves_db = {}
    attenuations = {}
    exact_h = [Fraction(v) for v in coeffs.h]
    for label, seq in sequences.items():
        resp = frequency_response(seq, grid)
        att = stopband_attenuation(resp, spec.f_stop)
        ripple = passband_ripple(resp, spec.f_pass)
        err = max(abs(Fraction(v) - hv) for v, hv in zip(seq, exact_h))
        metrics.append(RepresentationMetrics(
            label=label,
            attenuation_db=att,
            passband_ripple_db=ripple,
            max_coefficient_error=float(err),
        ))
        attenuations[label] = att
        mags = np.abs(resp.values) / resp.reference_gain
        curves_db[label] = 20.0 * np.log10(np.maximum(mags, 1e-300))
    return ComparisonReport(
        taps=coeffs.taps,
        elements=coeffs.taps // 2,
        bit_width=bit_width,
        shift_limit=shifted.shift_limit,
        grid_size=grid_size,
        f_pass=spec.f_pass,
        f_stop=spec.f_stop,
        metrics=tuple(metrics),
        margin_shift_minus_plain_db=attenuations["shift_normalized"] - attenuations["plain_fixed"],
        grid=grid,
        curves_db=curves_db,
    )


def write_response_csv(response: FrequencyResponse, fh) -> None:
    """freq,mag_db,phase_rad rows; magnitudes relative to the DC reference."""
    fh.write("freq,mag_db,phase_rad\n")
    ref = response.reference_gain
    for f, v in zip(response.grid, response.values):
        mag = abs(v)
        mag_db = -ATTENUATION_CAP_DB if mag == 0.0 or ref == 0.0 else max(
            -ATTENUATION_CAP_DB, 20.0 * math.log10(mag / ref))
        fh.write(f"{float(f)!r},{float(mag_db)!r},{math.atan2(v.imag, v.real)!r}\n")


def write_comparison_csv(report: ComparisonReport, fh) -> None:
    labels = ("double_precision", "plain_fixed", "shift_normalized")
    fh.write("freq," + ",".join(f"mag_db_{label}" for label in labels) + "\n")
    for i, f in enumerate(report.grid):
        row = [repr(float(f))] + [repr(float(report.curves_db[label][i])) for label in labels]
        fh.write(",".join(row) + "\n")
