import pytest

import systolicfir as sf

# The reference design point used throughout: a 180-tap Nuttall-windowed
# lowpass (f_pass 0.1, f_stop 0.125, 102 dB target) with the 18-bit
# quantization and the (15,15,16,18,34,36) datapath width vector.


@pytest.fixture(scope="session")
def reference_spec() -> sf.FilterSpec:
    return sf.FilterSpec(f_pass=0.1, f_stop=0.125, a_stop=102.0, taps=180)


@pytest.fixture(scope="session")
def reference_widths() -> sf.WidthConfig:
    return sf.WidthConfig(w_a=15, w_b=15, w_c=16, w_d=18, w_e=34, w_f=36)


@pytest.fixture(scope="session")
def reference_coeffs(reference_spec) -> sf.CoefficientSet:
    return sf.design_lowpass(reference_spec)


@pytest.fixture(scope="session")
def reference_shift_plan(reference_coeffs, reference_widths) -> sf.QuantizationPlan:
    return sf.build_shift_plan(
        reference_coeffs.folded_half(),
        bit_width=18,
        input_width=reference_widths.input_width,
        w_c=reference_widths.w_c,
        mode="paper_faithful",
    )


@pytest.fixture(scope="session")
def reference_plain_plan(reference_coeffs) -> sf.QuantizationPlan:
    return sf.build_plain_plan(reference_coeffs.folded_half(), bit_width=18)
