import dataclasses
import io
import math
import random

import numpy as np
import pytest

import systolicfir as sf
from systolicfir.analysis import ATTENUATION_CAP_DB, _verify_plan_against_simulator


@pytest.fixture(scope="module")
def reference_report(reference_spec, reference_widths):
    return sf.compare_representations(
        reference_spec, 18, reference_widths, mode="paper_faithful", grid_size=4096
    )


# ---------------------------------------------------------------------------
# Response evaluator


def test_default_grid_shape_and_endpoints():
    grid = sf.default_grid(4096)
    assert len(grid) == 4096
    assert grid[0] == 0.0 and grid[-1] == 0.5
    assert np.all(np.diff(grid) > 0)
    with pytest.raises(sf.BandError):
        sf.default_grid(1)


def test_response_matches_naive_dtft():
    rng = random.Random(1)
    h = [rng.uniform(-1, 1) for _ in range(23)]
    grid = np.sort(np.asarray([rng.uniform(0.001, 0.499) for _ in range(64)]))
    resp = sf.frequency_response(h, grid)
    naive = np.asarray(
        [sum(c * np.exp(-2j * np.pi * f * k) for k, c in enumerate(h)) for f in grid]
    )
    assert np.max(np.abs(resp.values - naive)) < 1e-12 * sum(abs(c) for c in h)


def test_dc_point_is_coefficient_sum():
    rng = random.Random(2)
    h = [rng.uniform(-1, 1) for _ in range(50)]
    resp = sf.frequency_response(h, np.asarray([0.0, 0.25]))
    assert resp.values[0].imag == 0.0
    assert resp.values[0].real == pytest.approx(math.fsum(h), rel=1e-14)
    assert resp.reference_gain == abs(math.fsum(h))


def test_exact_nyquist_null_hits_attenuation_cap():
    resp = sf.frequency_response([0.5, 0.5], np.asarray([0.0, 0.5]))
    assert resp.values[-1] == 0.0  # bit-clean null, not 1e-17
    assert sf.stopband_attenuation(resp, 0.5) == ATTENUATION_CAP_DB == 400.0


def test_allpass_has_zero_attenuation_and_ripple():
    resp = sf.frequency_response([1.0])
    assert sf.stopband_attenuation(resp, 0.25) == 0.0
    assert sf.passband_ripple(resp, 0.25) == 0.0


def test_symmetric_coefficients_give_linear_phase():
    rng = random.Random(3)
    half = [rng.uniform(-1, 1) for _ in range(9)]
    h = half + half[::-1]
    grid = sf.default_grid(257)
    resp = sf.frequency_response(h, grid)
    # H(f) * e^{i pi f (N-1)} must be purely real for a symmetric sequence.
    rotated = resp.values * np.exp(1j * np.pi * grid * (len(h) - 1))
    assert np.max(np.abs(rotated.imag)) < 1e-10 * sum(abs(c) for c in h)


def test_band_edges_must_intersect_grid():
    resp = sf.frequency_response([1.0, 2.0, 1.0])
    with pytest.raises(sf.BandError):
        sf.stopband_attenuation(resp, 0.6)
    with pytest.raises(sf.BandError):
        sf.passband_ripple(resp, -0.1)


def test_grid_validation():
    with pytest.raises(sf.BandError):
        sf.frequency_response([], None)
    with pytest.raises(sf.BandError):
        sf.frequency_response([1.0], np.asarray([0.2, 0.1]))
    with pytest.raises(sf.BandError):
        sf.frequency_response([1.0], np.asarray([0.1, 0.1]))


# ---------------------------------------------------------------------------
# Real-arithmetic oracle


def test_direct_form_reference_matches_convolution():
    rng = random.Random(4)
    half = [rng.uniform(-1, 1) for _ in range(7)]
    h = half + half[::-1]
    x = [rng.uniform(-1, 1) for _ in range(60)]
    got = sf.direct_form_reference(h, x)
    ref = np.convolve(x, h)[: len(x)]
    assert np.max(np.abs(np.asarray(got) - ref)) < 1e-12


def test_direct_form_reference_rejects_bad_sequences():
    with pytest.raises(sf.BandError):
        sf.direct_form_reference([1.0, 2.0, 1.0], [1.0])  # odd length
    with pytest.raises(sf.BandError):
        sf.direct_form_reference([1.0, 2.0, 3.0, 1.0], [1.0])  # asymmetric


# ---------------------------------------------------------------------------
# Effective coefficients


def test_effective_coefficients_mirror_and_scale():
    plan = sf.build_shift_plan([0.8, 0.2, 0.05], 18, 16, 25, mode="safe")
    eff = sf.effective_coefficients(plan)
    assert len(eff) == 6
    assert eff == eff[::-1]
    assert eff[:3] == [
        math.ldexp(104858, -17),
        math.ldexp(104858, -19),
        math.ldexp(104858, -21),
    ]


def test_wide_bit_width_reproduces_doubles(reference_coeffs):
    half = reference_coeffs.folded_half()
    plan = sf.build_plain_plan(half, 53)
    eff = sf.effective_coefficients(plan)
    full = list(reference_coeffs.h)
    assert max(abs(a - b) for a, b in zip(eff, full)) <= 2.0**-53


def test_plain_plan_error_bound(reference_coeffs):
    half = reference_coeffs.folded_half()
    for bits in (8, 12, 18):
        eff = sf.effective_coefficients(sf.build_plain_plan(half, bits))
        err = max(abs(a - b) for a, b in zip(eff, reference_coeffs.h))
        assert err <= 2.0 ** -bits


# ---------------------------------------------------------------------------
# Representation comparison (frozen measurements)


def test_reference_attenuations(reference_report):
    atts = {m.label: m.attenuation_db for m in reference_report.metrics}
    assert atts["double_precision"] == pytest.approx(34.97188764251276, rel=1e-12)
    assert atts["plain_fixed"] == pytest.approx(34.947658469370715, rel=1e-12)
    assert atts["shift_normalized"] == pytest.approx(34.963184283422486, rel=1e-12)


def test_reference_ripples(reference_report):
    ripples = {m.label: m.passband_ripple_db for m in reference_report.metrics}
    assert ripples["double_precision"] == pytest.approx(0.15859099904864327, rel=1e-12)
    assert ripples["plain_fixed"] == pytest.approx(0.15834782937291492, rel=1e-12)
    assert ripples["shift_normalized"] == pytest.approx(0.15864366778848962, rel=1e-12)


def test_reference_margin_and_ordering(reference_report):
    atts = {m.label: m.attenuation_db for m in reference_report.metrics}
    assert atts["double_precision"] >= atts["shift_normalized"] > atts["plain_fixed"]
    assert reference_report.margin_shift_minus_plain_db == pytest.approx(
        0.015525814051770226, rel=1e-9
    )
    assert reference_report.margin_shift_minus_plain_db > 0


def test_reference_coefficient_errors(reference_report):
    errs = {m.label: m.max_coefficient_error for m in reference_report.metrics}
    assert errs["double_precision"] == 0.0
    assert errs["plain_fixed"] == pytest.approx(3.7110628630941583e-06, rel=1e-12)
    assert errs["shift_normalized"] == pytest.approx(1.9028953010785232e-06, rel=1e-12)
    # one extra precision bit available to every coefficient here
    assert errs["shift_normalized"] <= 2.0**-18
    assert errs["plain_fixed"] <= 2.0**-17


def test_report_structure(reference_report):
    assert reference_report.taps == 180
    assert reference_report.elements == 90
    assert reference_report.bit_width == 18
    assert reference_report.shift_limit == 1
    assert reference_report.grid_size == 4096
    assert set(reference_report.curves_db) == {
        "double_precision", "plain_fixed", "shift_normalized",
    }
    doc_text = reference_report.to_json()
    assert doc_text.endswith("\n")
    assert "curves" not in doc_text  # curves live in the CSV, not the JSON


def test_simulator_gate_rejects_inconsistent_plan(reference_shift_plan, reference_widths):
    entries = list(reference_shift_plan.entries)
    victim = next(i for i, e in enumerate(entries) if e.integer != 0)
    entries[victim] = dataclasses.replace(entries[victim], shift=entries[victim].shift + 1)
    tampered = dataclasses.replace(reference_shift_plan, entries=tuple(entries))
    with pytest.raises(sf.SystolicFirError):
        _verify_plan_against_simulator(tampered, reference_widths)


# ---------------------------------------------------------------------------
# CSV writers


def test_response_csv_layout():
    resp = sf.frequency_response([0.5, 0.5], np.asarray([0.0, 0.25, 0.5]))
    buf = io.StringIO()
    sf.write_response_csv(resp, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "freq,mag_db,phase_rad"
    assert len(lines) == 4
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    assert rows[0][0] == 0.0 and rows[-1][0] == 0.5
    assert rows[0][1] == pytest.approx(0.0, abs=1e-12)
    assert rows[-1][1] == -400.0  # exact null floors at the cap


def test_comparison_csv_layout(reference_report):
    buf = io.StringIO()
    sf.write_comparison_csv(reference_report, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == (
        "freq,mag_db_double_precision,mag_db_plain_fixed,mag_db_shift_normalized"
    )
    assert len(lines) == 1 + 4096
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == 0.0
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 0.5
