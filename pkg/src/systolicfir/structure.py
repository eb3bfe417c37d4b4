"""Systolic structure graphs for even-length symmetric FIR filters.

A graph is a chain of N/2 identical DSP elements sharing one tapped delay
line. Element k folds the two samples that share a coefficient through the
pre-adder, multiplies once, and adds the previous element's partial sum after
`accumulate_registers` pipeline registers (1 baseline + any injected break
registers). Two chain orientations are supported:

* min_delay: element k carries coefficient (M-1)/2 - k and taps the line at
  (b_k, 1 + 2k + b_k); the ideal response appears after b_last cycles.
* max_delay: element k carries coefficient k and taps (2k, M); the response
  appears after (M-1)/2 cycles. Break injection is rejected here because the
  tap alignment admits no extra accumulation delay.

Graphs are immutable; construction and validation are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InsufficientDspError, StructureError
from .quant import QuantizationPlan

VARIANTS = ("min_delay", "max_delay")

_NODE_NAMES = ("pre_adder", "multiplier", "accumulator")


@dataclass(frozen=True)
class BreakSpec:
    """Where extra accumulation registers are injected.

    b_k = number of injected registers before position k (cumulative,
    non-decreasing, b_0 = 0). Constructors:

    * none(): b_k = 0
    * partial(p): one register before position p (1 <= p <= last element)
    * full(stride): stride registers before every position (b_k = stride * k)
    * explicit(seq): any valid cumulative sequence
    """

    kind: str
    position: int | None = None
    stride: int | None = None
    sequence: tuple[int, ...] | None = None

    @staticmethod
    def none() -> "BreakSpec":
        return BreakSpec(kind="none")

    @staticmethod
    def partial(position: int) -> "BreakSpec":
        if position < 1:
            raise StructureError(f"partial break position must be >= 1, got {position}")
        return BreakSpec(kind="partial", position=position)

    @staticmethod
    def full(stride: int) -> "BreakSpec":
        if stride < 1:
            raise StructureError(f"full break stride must be >= 1, got {stride}")
        return BreakSpec(kind="full", stride=stride)

    @staticmethod
    def explicit(sequence: Iterable[int]) -> "BreakSpec":
        return BreakSpec(kind="explicit", sequence=tuple(int(v) for v in sequence))

    def cumulative(self, n_elements: int) -> tuple[int, ...]:
        """Resolve to the cumulative sequence b_0..b_{n-1} and validate it."""
        if self.kind == "none":
            b = (0,) * n_elements
        elif self.kind == "partial":
            if self.position is None or not 1 <= self.position < n_elements:
                raise StructureError(
                    f"partial break position must lie in [1, {n_elements - 1}], "
                    f"got {self.position}"
                )
            b = tuple(1 if k >= self.position else 0 for k in range(n_elements))
        elif self.kind == "full":
            b = tuple(self.stride * k for k in range(n_elements))
        elif self.kind == "explicit":
            b = self.sequence or ()
            if len(b) != n_elements:
                raise StructureError(
                    f"explicit break sequence has {len(b)} entries, need {n_elements}"
                )
        else:
            raise StructureError(f"unknown break kind {self.kind!r}")
        if not b or b[0] != 0:
            raise StructureError("break sequence must start at 0")
        for k in range(1, len(b)):
            if b[k] < b[k - 1]:
                raise StructureError("break sequence must be non-decreasing")
        if any(v < 0 for v in b):
            raise StructureError("break counts must be non-negative")
        return b

    def to_doc(self) -> dict:
        doc = {"kind": self.kind}
        if self.position is not None:
            doc["position"] = self.position
        if self.stride is not None:
            doc["stride"] = self.stride
        if self.sequence is not None:
            doc["sequence"] = list(self.sequence)
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "BreakSpec":
        kind = doc.get("kind")
        if kind == "none":
            return BreakSpec.none()
        if kind == "partial":
            return BreakSpec.partial(int(doc["position"]))
        if kind == "full":
            return BreakSpec.full(int(doc["stride"]))
        if kind == "explicit":
            return BreakSpec.explicit(doc["sequence"])
        raise StructureError(f"unknown break kind {kind!r}")


@dataclass(frozen=True)
class SystolicElement:
    """One DSP stage: which coefficient it carries and where it reads/delays."""

    coeff_index: int
    coefficient: int
    input_shift: int
    tap_delay_a: int
    tap_delay_b: int
    accumulate_registers: int

    def __post_init__(self):
        if self.tap_delay_a >= self.tap_delay_b:
            raise StructureError("tap_delay_a must be strictly below tap_delay_b")
        if self.tap_delay_a < 0:
            raise StructureError("tap delays must be non-negative")
        if self.input_shift < 0:
            raise StructureError("input shift must be non-negative")
        if self.accumulate_registers < 1:
            raise StructureError("each element delays its accumulation input at least once")


@dataclass(frozen=True)
class StructureGraph:
    variant: str
    taps: int
    elements: tuple[SystolicElement, ...]
    model_latency: int

    @property
    def order(self) -> int:
        return self.taps - 1

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def max_tap_delay(self) -> int:
        return max(e.tap_delay_b for e in self.elements)


@dataclass(frozen=True)
class WidthConfig:
    """Declared signed bit widths of every datapath node.

    w_a/w_b: pre-adder operands, w_c: pre-adder result, w_d: coefficient,
    w_e: multiplier result, w_f: accumulator.
    """

    w_a: int
    w_b: int
    w_c: int
    w_d: int
    w_e: int
    w_f: int

    def __post_init__(self):
        for name in ("w_a", "w_b", "w_c", "w_d", "w_e", "w_f"):
            if getattr(self, name) < 2:
                raise StructureError(f"width {name} must be at least 2")

    @property
    def input_width(self) -> int:
        return min(self.w_a, self.w_b)

    def to_doc(self) -> dict:
        return {
            "w_a": self.w_a, "w_b": self.w_b, "w_c": self.w_c,
            "w_d": self.w_d, "w_e": self.w_e, "w_f": self.w_f,
        }

    @staticmethod
    def from_doc(doc: dict) -> "WidthConfig":
        try:
            return WidthConfig(**{k: int(doc[k]) for k in ("w_a", "w_b", "w_c", "w_d", "w_e", "w_f")})
        except KeyError as exc:
            raise StructureError(f"width config missing field {exc}") from exc


@dataclass(frozen=True)
class DeviceProfile:
    """A device's hardened multiply-accumulate layout, as chain lengths."""

    name: str
    chain_lengths: tuple[int, ...]

    def __post_init__(self):
        if not self.chain_lengths or any(c < 1 for c in self.chain_lengths):
            raise StructureError("device profile needs positive chain lengths")

    @property
    def total_dsp(self) -> int:
        return sum(self.chain_lengths)

    def to_json(self) -> str:
        doc = {"name": self.name, "chain_lengths": list(self.chain_lengths)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "DeviceProfile":
        doc = json.loads(text)
        try:
            return DeviceProfile(name=str(doc["name"]), chain_lengths=tuple(int(c) for c in doc["chain_lengths"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"malformed device profile: {exc}") from exc


class _IntegerHalf:
    """Internal adapter: folded integers + shifts masquerading as a plan."""

    def __init__(self, integers: Sequence[int], shifts: Sequence[int]):
        self.integers = tuple(integers)
        self.shifts = tuple(shifts)


def _coefficients_and_shifts(coeffs_or_plan) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if isinstance(coeffs_or_plan, (QuantizationPlan, _IntegerHalf)):
        return coeffs_or_plan.integers, coeffs_or_plan.shifts
    values = tuple(coeffs_or_plan)
    if not values:
        raise StructureError("cannot build a structure with no coefficients")
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool):
            raise StructureError(
                "structure coefficients must be integers or a quantization plan; "
                f"got {type(v).__name__}"
            )
    return values, (0,) * len(values)


def build_structure(
    coeffs_or_plan,
    variant: str = "min_delay",
    breaks: BreakSpec | None = None,
) -> StructureGraph:
    """Build the systolic graph for one folded coefficient half.

    `coeffs_or_plan` is either a QuantizationPlan or a sequence of integer
    coefficients (folded half h[0..(M-1)/2] of an even-tap symmetric filter).
    """
    if variant not in VARIANTS:
        raise StructureError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    coefficients, shifts = _coefficients_and_shifts(coeffs_or_plan)
    n_elem = len(coefficients)
    taps = 2 * n_elem
    order = taps - 1
    breaks = breaks or BreakSpec.none()

    if variant == "max_delay":
        b = breaks.cumulative(n_elem)
        if any(v != 0 for v in b):
            raise StructureError(
                "break registers cannot be injected into the max_delay variant; "
                "its tap alignment admits no extra accumulation delay"
            )
        elements = tuple(
            SystolicElement(
                coeff_index=k,
                coefficient=coefficients[k],
                input_shift=shifts[k],
                tap_delay_a=2 * k,
                tap_delay_b=order,
                accumulate_registers=1,
            )
            for k in range(n_elem)
        )
        return StructureGraph(
            variant=variant, taps=taps, elements=elements, model_latency=(order - 1) // 2
        )

    b = breaks.cumulative(n_elem)
    elements = []
    for k in range(n_elem):
        j = (order - 1) // 2 - k
        injected = b[k] - (b[k - 1] if k > 0 else 0)
        elements.append(
            SystolicElement(
                coeff_index=j,
                coefficient=coefficients[j],
                input_shift=shifts[j],
                tap_delay_a=b[k],
                tap_delay_b=1 + 2 * k + b[k],
                accumulate_registers=1 + injected,
            )
        )
    return StructureGraph(
        variant=variant, taps=taps, elements=tuple(elements), model_latency=b[-1]
    )


def latency(graph: StructureGraph) -> int:
    """Cycles by which the output lags the ideal response."""
    return graph.model_latency


def map_to_device(graph: StructureGraph, profile: DeviceProfile) -> StructureGraph:
    """Re-break a graph so every device chain boundary carries a register.

    Injection counts are merged with the graph's existing breaks by
    per-position maximum, so user-requested registers are never removed and
    each boundary ends up with at least one.
    """
    n = graph.n_elements
    if n > profile.total_dsp:
        raise InsufficientDspError(
            f"structure needs {n} DSP elements but device {profile.name!r} "
            f"provides {profile.total_dsp}"
        )
    boundaries = set()
    acc = 0
    for chain in profile.chain_lengths[:-1]:
        acc += chain
        if acc < n:
            boundaries.add(acc)
    existing = [e.accumulate_registers - 1 for e in graph.elements]
    merged = [
        max(existing[k], 1 if k in boundaries else 0) for k in range(n)
    ]
    if merged == existing:
        return graph
    if graph.variant == "max_delay":
        raise StructureError(
            "device mapping would inject break registers, which the max_delay "
            "variant cannot absorb; rebuild as min_delay"
        )
    cumulative = []
    acc = 0
    for k in range(n):
        if k > 0:
            acc += merged[k]
        cumulative.append(acc)
    folded = tuple(
        graph.elements[n - 1 - j].coefficient for j in range(n)
    )  # element n-1-j carries coeff_index j in min_delay order
    shifts = tuple(graph.elements[n - 1 - j].input_shift for j in range(n))
    plan_like = _IntegerHalf(folded, shifts)
    return build_structure(plan_like, variant=graph.variant, breaks=BreakSpec.explicit(cumulative))


@dataclass(frozen=True)
class ResourceSummary:
    dsp_elements: int
    injected_registers: int
    tap_line_registers: int

    def to_doc(self) -> dict:
        return {
            "dsp_elements": self.dsp_elements,
            "injected_registers": self.injected_registers,
            "tap_line_registers": self.tap_line_registers,
        }


def resource_summary(graph: StructureGraph) -> ResourceSummary:
    return ResourceSummary(
        dsp_elements=graph.n_elements,
        injected_registers=sum(e.accumulate_registers - 1 for e in graph.elements),
        tap_line_registers=graph.max_tap_delay,
    )


@dataclass(frozen=True)
class NodeCheck:
    """Worst-case interval of one datapath node vs its declared width."""

    element: int
    node: str
    lowest: int
    highest: int
    width: int
    minimal_width: int
    ok: bool

    def to_doc(self) -> dict:
        return {
            "element": self.element,
            "node": self.node,
            "lowest": self.lowest,
            "highest": self.highest,
            "width": self.width,
            "minimal_width": self.minimal_width,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class WidthReport:
    ok: bool
    input_width: int
    checks: tuple[NodeCheck, ...]
    minimal_widths: WidthConfig

    def to_json(self) -> str:
        doc = {
            "ok": self.ok,
            "input_width": self.input_width,
            "checks": [c.to_doc() for c in self.checks],
            "minimal_widths": self.minimal_widths.to_doc(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fits(lo: int, hi: int, width: int) -> bool:
    return lo >= -(2 ** (width - 1)) and hi <= 2 ** (width - 1) - 1


def _minimal_width(lo: int, hi: int) -> int:
    need = 2
    if hi > 0:
        need = max(need, hi.bit_length() + 1)
    if lo < 0:
        need = max(need, (-lo - 1).bit_length() + 1)
    return need


def validate_widths(graph: StructureGraph, widths: WidthConfig) -> WidthReport:
    """Exact worst-case interval analysis of every node against its width.

    Sound: a passing report guarantees the check-mode simulator never flags
    for any input stream within the input width. Inputs span the full signed
    range, so the pre-adder's negative extreme has magnitude 2^input_width
    while the positive one stops two short of it.
    """
    w_in = widths.input_width
    for e in graph.elements:
        if not _fits(-abs(e.coefficient), abs(e.coefficient), widths.w_d):
            raise StructureError(
                f"coefficient {e.coefficient} of element {e.coeff_index} does not fit "
                f"the declared {widths.w_d}-bit coefficient port"
            )
    in_lo, in_hi = -(2 ** (w_in - 1)), 2 ** (w_in - 1) - 1
    checks: list[NodeCheck] = []
    acc_lo = acc_hi = 0
    need = {"w_c": 2, "w_e": 2, "w_f": 2}
    ok = True
    for k, e in enumerate(graph.elements):
        scale = 2 ** e.input_shift
        c_lo, c_hi = 2 * in_lo * scale, 2 * in_hi * scale
        products = (c_lo * e.coefficient, c_hi * e.coefficient)
        e_lo, e_hi = min(products), max(products)
        acc_lo += e_lo
        acc_hi += e_hi
        for node, lo, hi, width, key in (
            ("pre_adder", c_lo, c_hi, widths.w_c, "w_c"),
            ("multiplier", e_lo, e_hi, widths.w_e, "w_e"),
            ("accumulator", acc_lo, acc_hi, widths.w_f, "w_f"),
        ):
            fits = _fits(lo, hi, width)
            minimal = _minimal_width(lo, hi)
            need[key] = max(need[key], minimal)
            ok = ok and fits
            checks.append(
                NodeCheck(
                    element=k, node=node, lowest=lo, highest=hi,
                    width=width, minimal_width=minimal, ok=fits,
                )
            )
    coeff_need = max(
        (_minimal_width(-abs(e.coefficient), abs(e.coefficient)) for e in graph.elements),
        default=2,
    )
    minimal = WidthConfig(
        w_a=w_in, w_b=w_in, w_c=need["w_c"], w_d=coeff_need, w_e=need["w_e"], w_f=need["w_f"]
    )
    return WidthReport(ok=ok, input_width=w_in, checks=tuple(checks), minimal_widths=minimal)


def graph_to_json(graph: StructureGraph) -> str:
    doc = {
        "variant": graph.variant,
        "taps": graph.taps,
        "elements": [
            {
                "coeff_index": e.coeff_index,
                "I": e.coefficient,
                "d": e.input_shift,
                "tap_delay_a": e.tap_delay_a,
                "tap_delay_b": e.tap_delay_b,
                "accumulate_registers": e.accumulate_registers,
            }
            for e in graph.elements
        ],
        "latency": graph.model_latency,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def graph_from_json(text: str) -> StructureGraph:
    doc = json.loads(text)
    try:
        elements = tuple(
            SystolicElement(
                coeff_index=int(e["coeff_index"]),
                coefficient=int(e["I"]),
                input_shift=int(e["d"]),
                tap_delay_a=int(e["tap_delay_a"]),
                tap_delay_b=int(e["tap_delay_b"]),
                accumulate_registers=int(e["accumulate_registers"]),
            )
            for e in doc["elements"]
        )
        graph = StructureGraph(
            variant=str(doc["variant"]),
            taps=int(doc["taps"]),
            elements=elements,
            model_latency=int(doc["latency"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed graph document: {exc}") from exc
    if graph.variant not in VARIANTS:
        raise StructureError(f"unknown variant {graph.variant!r}")
    if graph.taps != 2 * graph.n_elements:
        raise StructureError("graph tap count must be twice the element count")
    return graph
