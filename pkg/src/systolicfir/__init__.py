"""systolicfir: symmetric-FIR systolic structure compiler and bit-exact simulator.

The pipeline: design a symmetric lowpass (`design`), quantize its folded half
(`quant`), compile it into a systolic DSP-chain graph (`structure`), simulate
the graph bit-exactly (`sim`), measure frequency behaviour (`analysis`), and
emit a structural netlist plus HDL (`hdlgen`). The `cli` module drives all of
it from configuration files.

The simulator's inner loop has a compiled core (`_simcore`, built from
Cython) with a pure-Python fallback; selection happens per simulator instance
based on an exact overflow bound analysis.
"""

from .analysis import (
    ComparisonReport,
    FrequencyResponse,
    RepresentationMetrics,
    compare_representations,
    default_grid,
    direct_form_reference,
    effective_coefficients,
    frequency_response,
    passband_ripple,
    stopband_attenuation,
    write_comparison_csv,
    write_response_csv,
)
from .config import CONFIG_VERSION, ProjectConfig, load_config, parse_config
from .design import (
    CoefficientSet,
    FilterSpec,
    design_lowpass,
    estimate_taps,
    load_coefficients,
    nuttall_window,
    rectangular_window,
    save_coefficients,
)
from .errors import (
    BandError,
    ConfigError,
    InsufficientDspError,
    NetlistError,
    QuantizationError,
    ShiftPlanError,
    SimulationError,
    StructureError,
    SystolicFirError,
)
from .quant import (
    PlanEntry,
    QuantizationPlan,
    build_plain_plan,
    build_shift_plan,
    compression_exponent,
    dequantize,
    plan_from_json,
    plan_to_json,
    quantize_plain,
    shift_limit_for,
)
from .hdlgen import (
    DIALECTS,
    Instance,
    Netlist,
    build_netlist,
    check_netlist,
    emit_hdl,
    netlist_from_json,
    netlist_to_json,
)
from .sim import (
    DspResult,
    OverflowEvent,
    Simulator,
    dsp_eval,
    impulse_response,
    simulate,
    write_diagnostics_jsonl,
)
from .structure import (
    BreakSpec,
    DeviceProfile,
    ResourceSummary,
    StructureGraph,
    SystolicElement,
    WidthConfig,
    WidthReport,
    build_structure,
    graph_from_json,
    graph_to_json,
    latency,
    map_to_device,
    resource_summary,
    validate_widths,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
