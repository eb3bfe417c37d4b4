"""Exception hierarchy shared by all systolicfir modules."""


class SystolicFirError(Exception):
    """Base class for every error raised by this package."""


class BandError(SystolicFirError):
    """Invalid filter band specification (edges, attenuation, tap count)."""


class QuantizationError(SystolicFirError):
    """A coefficient cannot be represented at the requested scale."""


class ShiftPlanError(QuantizationError):
    """A normalization shift exceeds the pre-adder headroom."""


class StructureError(SystolicFirError):
    """Invalid structure request (variant, break positions, coefficients)."""


class InsufficientDspError(StructureError):
    """The device profile has fewer DSP elements than the structure needs."""


class SimulationError(SystolicFirError):
    """Hard simulation failure (e.g. an input sample outside its port width)."""


class NetlistError(SystolicFirError):
    """Inconsistent netlist (width mismatch, dangling connection, bad dialect)."""


class ConfigError(SystolicFirError):
    """Malformed or incomplete project configuration."""
