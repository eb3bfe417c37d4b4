"""Command-line front end: config-driven, file-based, deterministic.

Every subcommand is a pure function of (config, input files): repeated runs
produce byte-identical artifact trees (no timestamps, sorted keys, repr float
formatting). Failures leave one machine-readable JSON object on stderr and
exit with a distinct code per failure class: 2 for invalid configuration or
usage, 3 for file I/O, 4 for errors propagated from the library modules.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import struct
import sys
from dataclasses import replace
from importlib import resources as importlib_resources

from . import __version__
from .analysis import (
    compare_representations,
    default_grid,
    frequency_response,
    passband_ripple,
    stopband_attenuation,
    write_comparison_csv,
    write_response_csv,
)
from .config import ProjectConfig, load_config, parse_config
from .design import CoefficientSet, FilterSpec, design_lowpass, estimate_taps, save_coefficients
from .errors import ConfigError, SimulationError, SystolicFirError
from .hdlgen import DIALECTS, build_netlist, emit_hdl, netlist_to_json
from .quant import QuantizationPlan, build_plain_plan, build_shift_plan, plan_to_json
from .sim import MODES, Simulator, write_diagnostics_jsonl
from .structure import (
    BreakSpec,
    DeviceProfile,
    StructureGraph,
    WidthConfig,
    build_structure,
    graph_to_json,
    map_to_device,
    resource_summary,
    validate_widths,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FILE_IO = 3
EXIT_MODULE = 4

_HDL_EXTENSION = {"vhdl": ".vhd", "verilog": ".v"}

# Reference-run expectations: the published design point this tool set
# reproduces end to end (tap estimate, chosen tap count, DSP element count).
_REFERENCE_TAP_ESTIMATE = 186
_REFERENCE_TAPS = 180
_REFERENCE_DSP_ELEMENTS = 90
_WIDE_PREADDER_WIDTHS = WidthConfig(w_a=16, w_b=16, w_c=25, w_d=18, w_e=43, w_f=48)
_WIDE_PREADDER_BIT_WIDTH = 18

log = logging.getLogger("systolicfir.cli")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as machine-readable JSON."""

    def error(self, message):
        sys.stderr.write(
            json.dumps({"error": {"kind": "config-invalid", "message": message}}, sort_keys=True)
            + "\n"
        )
        raise SystemExit(EXIT_CONFIG)


def _configure_logging() -> None:
    level_name = os.environ.get("SYSTOLICFIR_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, kind: str, message: str, error_type: str | None = None) -> int:
    doc = {"error": {"kind": kind, "message": message}}
    if error_type is not None:
        doc["error"]["type"] = error_type
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


# ---------------------------------------------------------------------------
# Shared pipeline pieces


def _require_config(args) -> ProjectConfig:
    if not args.config:
        raise ConfigError("this subcommand requires --config PATH")
    return load_config(args.config)


def _bundled_text(name: str) -> str:
    return importlib_resources.files("systolicfir").joinpath("data", name).read_text("utf-8")


def _bundled_reference_config() -> ProjectConfig:
    return parse_config(json.loads(_bundled_text("reference_config.json")))


def _bundled_profile(name: str) -> DeviceProfile:
    return DeviceProfile.from_json(_bundled_text(name))


def _resolved_spec(cfg: ProjectConfig) -> FilterSpec:
    """Fill in the tap count when the config leaves it to the estimator."""
    if cfg.spec.taps is not None:
        return cfg.spec
    est = estimate_taps(cfg.spec.a_stop, cfg.spec.f_pass, cfg.spec.f_stop)
    return replace(cfg.spec, taps=est + est % 2)


def _design(cfg: ProjectConfig) -> CoefficientSet:
    return design_lowpass(_resolved_spec(cfg))


def _plan(cfg: ProjectConfig, coeffs: CoefficientSet) -> QuantizationPlan:
    half = coeffs.folded_half()
    if cfg.shift_normalization:
        return build_shift_plan(
            half, cfg.bit_width, cfg.widths.input_width, cfg.widths.w_c, mode=cfg.q_limit_mode
        )
    return build_plain_plan(half, cfg.bit_width)


def _graph(cfg: ProjectConfig, plan: QuantizationPlan) -> StructureGraph:
    graph = build_structure(plan, variant=cfg.variant, breaks=cfg.break_spec)
    if cfg.device_profile is not None:
        graph = map_to_device(graph, cfg.device_profile)
    return graph


def _out_dir(args, cfg: ProjectConfig) -> str:
    out = args.output or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _write(out: str, name: str, text: str) -> str:
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)
    return path


def _graph_resources_doc(graph: StructureGraph) -> dict:
    rs = resource_summary(graph)
    return {
        "variant": graph.variant,
        "taps": graph.taps,
        "latency": graph.model_latency,
        **rs.to_doc(),
    }


# ---------------------------------------------------------------------------
# Sample stream I/O


def _read_samples(source: str, binary: bool) -> list[int]:
    if source == "-":
        data = sys.stdin.buffer.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if binary:
        if len(data) % 8:
            raise SimulationError(
                f"binary input holds {len(data)} bytes, not a whole number of "
                "8-byte little-endian frames"
            )
        return [v for (v,) in struct.iter_unpack("<q", data)]
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SimulationError(
            "input stream is not UTF-8 text; pass --binary for 64-bit frames"
        ) from exc
    samples = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            samples.append(int(line))
        except ValueError as exc:
            raise SimulationError(f"input line {ln} is not an integer: {line!r}") from exc
    return samples


def _write_samples(outputs: list[int], binary: bool) -> None:
    if binary:
        try:
            frames = b"".join(struct.pack("<q", v) for v in outputs)
        except struct.error as exc:
            raise SimulationError("an output value does not fit a 64-bit frame") from exc
        sys.stdout.buffer.write(frames)
        sys.stdout.buffer.flush()
    else:
        sys.stdout.write("".join(f"{v}\n" for v in outputs))
        sys.stdout.flush()


# ---------------------------------------------------------------------------
# Subcommands


def cmd_design(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    coeffs = _design(cfg)
    path = os.path.join(out, "coefficients.json")
    save_coefficients(coeffs, path)
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_quantize(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    plan = _plan(cfg, _design(cfg))
    _write(out, "quantization_plan.json", plan_to_json(plan))
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    graph = _graph(cfg, _plan(cfg, _design(cfg)))
    _write(out, "structure_graph.json", graph_to_json(graph))
    _write(
        out,
        "resources.json",
        json.dumps(_graph_resources_doc(graph), indent=2, sort_keys=True) + "\n",
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    graph = _graph(cfg, _plan(cfg, _design(cfg)))
    samples = _read_samples(args.input, args.binary)
    sim = Simulator(graph, cfg.widths, mode=args.mode)
    outputs, events = sim.process(samples)
    _write_samples(outputs, args.binary)
    with open(os.path.join(out, "diagnostics.jsonl"), "w", encoding="utf-8", newline="") as fh:
        write_diagnostics_jsonl(events, fh)
    log.info("simulated %d samples, %d diagnostics", len(samples), len(events))
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    spec = _resolved_spec(cfg)
    coeffs = design_lowpass(spec)
    grid_size = args.grid or cfg.grid_size
    response = frequency_response(coeffs.h, default_grid(grid_size))
    with open(os.path.join(out, "response.csv"), "w", encoding="utf-8", newline="") as fh:
        write_response_csv(response, fh)
    metrics = {
        "taps": spec.taps,
        "grid_size": grid_size,
        "f_pass": spec.f_pass,
        "f_stop": spec.f_stop,
        "reference_gain": response.reference_gain,
        "stopband_attenuation_db": stopband_attenuation(response, spec.f_stop),
        "passband_ripple_db": passband_ripple(response, spec.f_pass),
    }
    _write(out, "metrics.json", json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    report = compare_representations(
        _resolved_spec(cfg),
        cfg.bit_width,
        cfg.widths,
        mode=cfg.q_limit_mode,
        grid_size=args.grid or cfg.grid_size,
    )
    _write(out, "comparison.json", report.to_json())
    with open(os.path.join(out, "comparison.csv"), "w", encoding="utf-8", newline="") as fh:
        write_comparison_csv(report, fh)
    return EXIT_OK


def cmd_emit_hdl(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    graph = _graph(cfg, _plan(cfg, _design(cfg)))
    netlist = build_netlist(graph, cfg.widths, name=args.name)
    _write(out, "netlist.json", netlist_to_json(netlist))
    _write(out, args.name + _HDL_EXTENSION[args.dialect], emit_hdl(netlist, args.dialect))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    graph = _graph(cfg, _plan(cfg, _design(cfg)))
    report = validate_widths(graph, cfg.widths)
    _write(out, "width_report.json", report.to_json())
    log.info("width validation %s", "passed" if report.ok else "FAILED (see report)")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    cfg = load_config(args.config) if args.config else _bundled_reference_config()
    out = _out_dir(args, cfg)
    checks: list[dict] = []

    def check(name: str, expected, actual, ok: bool | None = None) -> None:
        passed = (expected == actual) if ok is None else bool(ok)
        checks.append({"name": name, "expected": expected, "actual": actual, "pass": passed})

    estimate = estimate_taps(cfg.spec.a_stop, cfg.spec.f_pass, cfg.spec.f_stop)
    check("tap_estimate", _REFERENCE_TAP_ESTIMATE, estimate)
    spec = _resolved_spec(cfg)
    check("configured_taps", _REFERENCE_TAPS, spec.taps)

    coeffs = design_lowpass(spec)
    half = coeffs.folded_half()
    path = os.path.join(out, "coefficients.json")
    save_coefficients(coeffs, path)

    plan_plain = build_plain_plan(half, cfg.bit_width)
    plan_shift = build_shift_plan(
        half, cfg.bit_width, cfg.widths.input_width, cfg.widths.w_c, mode=cfg.q_limit_mode
    )
    _write(out, "plan_plain.json", plan_to_json(plan_plain))
    _write(out, "plan_shift.json", plan_to_json(plan_shift))
    selected = plan_shift if cfg.shift_normalization else plan_plain

    two_column = _bundled_profile("device_two_column_45x2.json")
    single_chain = _bundled_profile("device_single_chain_90.json")
    straight = build_structure(selected, "min_delay", BreakSpec.none())
    graphs = {
        "min_delay_none": straight,
        "min_delay_partial_two_column": map_to_device(straight, two_column),
        "min_delay_full_stride1": build_structure(selected, "min_delay", BreakSpec.full(1)),
        "min_delay_full_stride2": build_structure(selected, "min_delay", BreakSpec.full(2)),
        "max_delay_none": build_structure(selected, "max_delay"),
    }
    check("single_chain_mapping_is_identity", True, map_to_device(straight, single_chain) == straight)
    for label in sorted(graphs):
        _write(out, f"structure_{label}.json", graph_to_json(graphs[label]))
        check(
            f"dsp_elements_{label}",
            _REFERENCE_DSP_ELEMENTS,
            resource_summary(graphs[label]).dsp_elements,
        )
    _write(
        out,
        "resources.json",
        json.dumps(
            {label: _graph_resources_doc(g) for label, g in graphs.items()},
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )

    primary = _graph(cfg, selected)
    _write(out, "structure_graph.json", graph_to_json(primary))
    width_report = validate_widths(primary, cfg.widths)
    _write(out, "width_report.json", width_report.to_json())
    check("width_validation", True, width_report.ok)

    response = frequency_response(coeffs.h, default_grid(cfg.grid_size))
    with open(os.path.join(out, "response.csv"), "w", encoding="utf-8", newline="") as fh:
        write_response_csv(response, fh)

    comparison = compare_representations(
        spec, cfg.bit_width, cfg.widths, mode=cfg.q_limit_mode, grid_size=cfg.grid_size
    )
    _write(out, "comparison.json", comparison.to_json())
    with open(os.path.join(out, "comparison.csv"), "w", encoding="utf-8", newline="") as fh:
        write_comparison_csv(comparison, fh)
    atts = {m.label: m.attenuation_db for m in comparison.metrics}
    check(
        "attenuation_ordering_double_ge_shift",
        True,
        atts["double_precision"] >= atts["shift_normalized"],
    )
    check(
        "attenuation_margin_shift_over_plain_positive",
        True,
        comparison.margin_shift_minus_plain_db > 0.0,
    )

    wide = compare_representations(
        spec,
        _WIDE_PREADDER_BIT_WIDTH,
        _WIDE_PREADDER_WIDTHS,
        mode=cfg.q_limit_mode,
        grid_size=cfg.grid_size,
    )
    _write(out, "comparison_wide_preadder.json", wide.to_json())

    netlist = build_netlist(primary, cfg.widths, name="systolic_fir")
    _write(out, "netlist.json", netlist_to_json(netlist))
    _write(out, "systolic_fir.vhd", emit_hdl(netlist, "vhdl"))
    _write(out, "systolic_fir.v", emit_hdl(netlist, "verilog"))

    all_pass = all(c["pass"] for c in checks)
    report_doc = {
        "all_pass": all_pass,
        "checks": checks,
        "tap_estimate": estimate,
        "taps": spec.taps,
        "dsp_elements": resource_summary(primary).dsp_elements,
        "latency": {label: g.model_latency for label, g in graphs.items()},
        "q_limit": comparison.shift_limit,
        "stopband_attenuation_db": atts,
        "margin_shift_minus_plain_db": comparison.margin_shift_minus_plain_db,
    }
    _write(out, "report.json", json.dumps(report_doc, indent=2, sort_keys=True) + "\n")
    if not all_pass:
        failed = ", ".join(c["name"] for c in checks if not c["pass"])
        raise SystolicFirError(f"reference reproduction failed checks: {failed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="systolicfir",
        description="Symmetric-FIR systolic structure compiler, bit-exact simulator, "
        "and HDL emitter.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="project configuration JSON")
    common.add_argument(
        "--output", metavar="DIR", help="artifact directory (default: the config's output_dir)"
    )

    p = sub.add_parser("design", parents=[common], help="design coefficients → coefficients.json")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser(
        "quantize", parents=[common], help="quantize the design → quantization_plan.json"
    )
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser(
        "build", parents=[common], help="compile the systolic graph → structure_graph.json"
    )
    p.set_defaults(func=cmd_build)

    p = sub.add_parser(
        "simulate",
        parents=[common],
        help="run a sample stream through the graph (stdout) + diagnostics.jsonl",
    )
    p.add_argument("--input", metavar="PATH|-", default="-", help="sample stream (default stdin)")
    p.add_argument("--mode", choices=MODES, default="check", help="overflow handling (default check)")
    p.add_argument(
        "--binary",
        action="store_true",
        help="streams are little-endian signed 64-bit frames instead of text lines",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "analyze", parents=[common], help="frequency response → response.csv + metrics.json"
    )
    p.add_argument("--grid", type=int, metavar="F", help="frequency grid size (default: config)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser(
        "compare",
        parents=[common],
        help="double vs plain vs shift-normalized → comparison.csv + comparison.json",
    )
    p.add_argument("--grid", type=int, metavar="F", help="frequency grid size (default: config)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(
        "emit-hdl", parents=[common], help="structural netlist + HDL → netlist.json + unit file"
    )
    p.add_argument("--dialect", choices=DIALECTS, default="vhdl", help="HDL dialect (default vhdl)")
    p.add_argument("--name", default="systolic_fir", help="HDL unit name (default systolic_fir)")
    p.set_defaults(func=cmd_emit_hdl)

    p = sub.add_parser(
        "validate", parents=[common], help="worst-case width analysis → width_report.json"
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "reproduce-paper",
        parents=[common],
        help="end-to-end reference pipeline; --config defaults to the bundled reference",
    )
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help/--version/usage errors
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config-invalid", str(exc))
    except OSError as exc:
        return _fail(EXIT_FILE_IO, "file-io", str(exc))
    except SystolicFirError as exc:
        return _fail(EXIT_MODULE, "module-error", str(exc), error_type=type(exc).__name__)


if __name__ == "__main__":
    sys.exit(main())
