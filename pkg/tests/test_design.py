import json
import math

import pytest

import systolicfir as sf
from systolicfir.design import nuttall_window, rectangular_window


def test_estimate_taps_reference_point():
    assert sf.estimate_taps(102.0, 0.1, 0.125) == 186


def test_estimate_taps_exact_boundary():
    # 11 / (22 * 0.05) is exactly 10 under decimal-intent arithmetic; naive
    # binary floating point lands a few ulp above and would ceil to 11.
    assert sf.estimate_taps(11.0, 0.2, 0.25) == 10


def test_estimate_taps_third_point():
    assert sf.estimate_taps(60.0, 0.1, 0.15) == 55


def test_estimate_taps_rejects_bad_bands():
    with pytest.raises(sf.BandError):
        sf.estimate_taps(60.0, 0.2, 0.2)
    with pytest.raises(sf.BandError):
        sf.estimate_taps(-3.0, 0.1, 0.2)


def test_filter_spec_validation():
    with pytest.raises(sf.BandError):
        sf.FilterSpec(f_pass=0.3, f_stop=0.2, a_stop=60.0)
    with pytest.raises(sf.BandError):
        sf.FilterSpec(f_pass=0.1, f_stop=0.6, a_stop=60.0)
    with pytest.raises(sf.BandError):
        sf.FilterSpec(f_pass=0.1, f_stop=0.2, a_stop=60.0, taps=181)
    with pytest.raises(sf.BandError):
        sf.FilterSpec(f_pass=0.1, f_stop=0.2, a_stop=60.0, window="hann")
    spec = sf.FilterSpec(f_pass=0.1, f_stop=0.2, a_stop=60.0, taps=64)
    assert spec.cutoff == pytest.approx(0.15)


def test_nuttall_window_endpoints_and_symmetry():
    n = 64
    # Endpoints of this Nuttall variant sit at the tiny positive pedestal
    # a0 - a1 + a2 - a3 = 0.0 exactly by coefficient construction.
    pedestal = 0.355768 - 0.487396 + 0.144232 - 0.012604
    assert nuttall_window(0, n) == pytest.approx(pedestal, abs=1e-12)
    assert nuttall_window(n - 1, n) == pytest.approx(pedestal, abs=1e-12)
    # Symmetry across the center.
    for k in range(n // 2):
        assert nuttall_window(k, n) == pytest.approx(nuttall_window(n - 1 - k, n), abs=1e-12)
    with pytest.raises(IndexError):
        nuttall_window(n, n)
    with pytest.raises(IndexError):
        nuttall_window(-1, n)


def test_rectangular_window_is_flat():
    assert all(rectangular_window(k, 10) == 1.0 for k in range(10))


def test_two_tap_rectangular_half_band_value():
    # Closed-form check: h[0] = 2*0.25*sinc(2*0.25*(0-0.5)) = 0.5*sinc(-0.25),
    # evaluated in double precision.
    spec = sf.FilterSpec(f_pass=0.2, f_stop=0.3, a_stop=20.0, taps=2, window="rectangular")
    coeffs = sf.design_lowpass(spec)
    assert coeffs.h[0] == pytest.approx(0.45015815807855303, abs=0.0)
    assert coeffs.h[0] == coeffs.h[1]


def test_design_is_exactly_symmetric(reference_coeffs):
    h = reference_coeffs.h
    m = len(h) - 1
    assert len(h) == 180
    for k in range(len(h) // 2):
        assert h[k] == h[m - k]  # bit-exact, not approximate


def test_design_dc_gain_near_unity(reference_coeffs):
    dc = math.fsum(reference_coeffs.h)
    assert abs(dc - 1.0) < 1e-3


def test_design_magnitude_stays_below_unity(reference_coeffs):
    assert max(abs(v) for v in reference_coeffs.h) < 1.0


def test_folded_half_matches_front_half(reference_coeffs):
    half = reference_coeffs.folded_half()
    assert len(half) == 90
    assert half == reference_coeffs.h[:90]


def test_design_needs_tap_count():
    with pytest.raises(sf.BandError):
        sf.design_lowpass(sf.FilterSpec(f_pass=0.1, f_stop=0.2, a_stop=40.0))


def test_save_load_roundtrip_json(tmp_path, reference_coeffs):
    path = tmp_path / "coeffs.json"
    sf.save_coefficients(reference_coeffs, str(path))
    loaded = sf.load_coefficients(str(path))
    assert loaded.h == reference_coeffs.h
    assert loaded.symmetric


def test_save_load_roundtrip_text(tmp_path, reference_coeffs):
    path = tmp_path / "coeffs.txt"
    sf.save_coefficients(reference_coeffs, str(path), fmt="text")
    loaded = sf.load_coefficients(str(path))
    assert loaded.h == reference_coeffs.h


def test_saved_json_is_plain_array(tmp_path, reference_coeffs):
    path = tmp_path / "coeffs.json"
    sf.save_coefficients(reference_coeffs, str(path))
    doc = json.loads(path.read_text())
    assert isinstance(doc, list)
    assert doc == list(reference_coeffs.h)
