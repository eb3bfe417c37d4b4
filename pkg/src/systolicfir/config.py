"""Project configuration: one JSON document drives every CLI subcommand.

The format is strict by design: a `version` field is mandatory, unknown keys
are rejected, and the quantization bit width and datapath widths must always
be spelled out — reference values ship as an example config, not as silent
defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .design import FilterSpec
from .errors import ConfigError, SystolicFirError
from .quant import Q_LIMIT_MODES
from .structure import VARIANTS, BreakSpec, DeviceProfile, WidthConfig

CONFIG_VERSION = 1

_TOP_LEVEL_KEYS = {
    "version", "filter", "bit_width", "widths", "variant", "break_spec",
    "device_profile", "shift_normalization", "q_limit_mode", "grid_size",
    "output_dir",
}
_FILTER_KEYS = {"f_pass", "f_stop", "a_stop", "taps", "window"}


@dataclass(frozen=True)
class ProjectConfig:
    spec: FilterSpec
    bit_width: int
    widths: WidthConfig
    variant: str = "min_delay"
    break_spec: BreakSpec = field(default_factory=BreakSpec.none)
    device_profile: DeviceProfile | None = None
    shift_normalization: bool = True
    q_limit_mode: str = "safe"
    grid_size: int = 4096
    output_dir: str = "outputs"

    def __post_init__(self):
        if self.bit_width < 2:
            raise ConfigError(f"bit_width must be at least 2, got {self.bit_width}")
        if self.widths.w_d != self.bit_width:
            raise ConfigError(
                f"coefficient port width w_d={self.widths.w_d} must equal "
                f"bit_width={self.bit_width}"
            )
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.q_limit_mode not in Q_LIMIT_MODES:
            raise ConfigError(
                f"q_limit_mode must be one of {Q_LIMIT_MODES}, got {self.q_limit_mode!r}"
            )
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be at least 2, got {self.grid_size}")


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(f"config is missing required key {key!r}")
    return doc[key]


def _int_field(doc: dict, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
    return value


def parse_config(doc, base_dir: str = ".") -> ProjectConfig:
    """Validate a parsed JSON document into a ProjectConfig.

    `base_dir` anchors relative paths referenced by the config (the device
    profile). Referenced files are loaded here, so a missing profile fails at
    config time, not mid-pipeline.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    version = _int_field(doc, "version", _require(doc, "version"))
    if version != CONFIG_VERSION:
        raise ConfigError(
            f"unsupported config version {version}, this build reads version {CONFIG_VERSION}"
        )

    filt = _require(doc, "filter")
    if not isinstance(filt, dict):
        raise ConfigError("config key 'filter' must be an object")
    unknown = set(filt) - _FILTER_KEYS
    if unknown:
        raise ConfigError(f"unknown filter keys: {', '.join(sorted(unknown))}")
    try:
        spec = FilterSpec(
            f_pass=float(_require(filt, "f_pass")),
            f_stop=float(_require(filt, "f_stop")),
            a_stop=float(_require(filt, "a_stop")),
            taps=None if filt.get("taps") is None else _int_field(filt, "taps", filt["taps"]),
            window=str(filt.get("window", "nuttall")),
        )
    except SystolicFirError as exc:
        raise ConfigError(f"invalid filter specification: {exc}") from exc

    bit_width = _int_field(doc, "bit_width", _require(doc, "bit_width"))
    widths_doc = _require(doc, "widths")
    if not isinstance(widths_doc, dict):
        raise ConfigError("config key 'widths' must be an object")
    try:
        widths = WidthConfig.from_doc(widths_doc)
    except SystolicFirError as exc:
        raise ConfigError(f"invalid widths: {exc}") from exc

    break_doc = doc.get("break_spec", {"kind": "none"})
    if not isinstance(break_doc, dict):
        raise ConfigError("config key 'break_spec' must be an object")
    try:
        break_spec = BreakSpec.from_doc(break_doc)
    except SystolicFirError as exc:
        raise ConfigError(f"invalid break_spec: {exc}") from exc

    profile = None
    profile_path = doc.get("device_profile")
    if profile_path is not None:
        if not isinstance(profile_path, str):
            raise ConfigError("config key 'device_profile' must be a path string")
        resolved = os.path.join(base_dir, profile_path)
        if not os.path.isfile(resolved):
            raise ConfigError(f"device profile {resolved!r} does not exist")
        try:
            with open(resolved, "r", encoding="utf-8") as fh:
                profile = DeviceProfile.from_json(fh.read())
        except (SystolicFirError, ValueError) as exc:
            raise ConfigError(f"invalid device profile {resolved!r}: {exc}") from exc

    shift_normalization = doc.get("shift_normalization", True)
    if not isinstance(shift_normalization, bool):
        raise ConfigError("config key 'shift_normalization' must be a boolean")

    try:
        return ProjectConfig(
            spec=spec,
            bit_width=bit_width,
            widths=widths,
            variant=str(doc.get("variant", "min_delay")),
            break_spec=break_spec,
            device_profile=profile,
            shift_normalization=shift_normalization,
            q_limit_mode=str(doc.get("q_limit_mode", "safe")),
            grid_size=_int_field(doc, "grid_size", doc.get("grid_size", 4096)),
            output_dir=str(doc.get("output_dir", "outputs")),
        )
    except SystolicFirError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ProjectConfig:
    """Read and validate a config file. I/O errors propagate as OSError."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return parse_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))
