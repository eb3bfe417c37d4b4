"""Structural netlist construction and deterministic HDL emission.

The netlist has three instance kinds: `dsp_element` (pre-adder, multiplier,
post-adder, plus its one baseline accumulation register), `register` (tap-line
and injected break registers), and `shifter` (input normalization, emitted
only where the shift is nonzero). Tap-line registers form a single shared
delay line. Emission is a pure function of the netlist: two runs produce
byte-identical text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NetlistError
from .structure import StructureGraph, WidthConfig, resource_summary

DIALECTS = ("vhdl", "verilog")

_SEQUENTIAL_PATHS = {
    # input port -> output port pairs that pass through a register inside the kind
    "register": {("d", "q")},
    "dsp_element": {("f", "y")},
    "shifter": set(),
}
_COMBINATIONAL_PATHS = {
    "register": set(),
    "dsp_element": {("a", "y"), ("b", "y")},
    "shifter": {("d", "q")},
}


@dataclass(frozen=True)
class Instance:
    id: str
    kind: str
    params: dict

    def port_width(self, port: str) -> int:
        if self.kind == "register":
            if port in ("d", "q"):
                return self.params["width"]
        elif self.kind == "shifter":
            if port == "d":
                return self.params["width_in"]
            if port == "q":
                return self.params["width_out"]
        elif self.kind == "dsp_element":
            widths = {"a": self.params["width_a"], "b": self.params["width_b"],
                      "f": self.params["width_acc"], "y": self.params["width_acc"]}
            if port in widths:
                return widths[port]
        raise NetlistError(f"instance {self.id} ({self.kind}) has no port {port!r}")


@dataclass(frozen=True)
class Netlist:
    name: str
    widths: WidthConfig
    instances: tuple[Instance, ...]
    connections: tuple[tuple[str, str], ...]  # ("inst.port", "inst.port")

    @property
    def ports(self) -> tuple[dict, ...]:
        return (
            {"name": "clk", "dir": "in", "width": 1},
            {"name": "x_in", "dir": "in", "width": self.widths.w_a},
            {"name": "y_out", "dir": "out", "width": self.widths.w_f},
        )

    def instance(self, inst_id: str) -> Instance:
        for inst in self.instances:
            if inst.id == inst_id:
                return inst
        raise NetlistError(f"no instance named {inst_id!r}")

    def counts(self) -> dict:
        out = {"dsp_element": 0, "register": 0, "shifter": 0}
        for inst in self.instances:
            out[inst.kind] += 1
        return out


def _endpoint_width(netlist: Netlist, endpoint: str) -> int:
    inst_id, _, port = endpoint.partition(".")
    if not port:
        raise NetlistError(f"malformed endpoint {endpoint!r}, expected 'instance.port'")
    if inst_id == "top":
        if port == "x_in":
            return netlist.widths.w_a
        if port == "y_out":
            return netlist.widths.w_f
        raise NetlistError(f"top-level has no data port {port!r}")
    return netlist.instance(inst_id).port_width(port)


def check_netlist(netlist: Netlist) -> None:
    """Validate connectivity: widths match, sinks driven once, no
    register-free combinational cycles."""
    ids = [inst.id for inst in netlist.instances]
    if len(set(ids)) != len(ids):
        raise NetlistError("duplicate instance ids")
    sinks_seen = set()
    for source, sink in netlist.connections:
        sw = _endpoint_width(netlist, source)
        kw = _endpoint_width(netlist, sink)
        if sw != kw:
            raise NetlistError(
                f"width mismatch on {source} ({sw}) -> {sink} ({kw})"
            )
        if sink in sinks_seen:
            raise NetlistError(f"sink {sink} driven more than once")
        sinks_seen.add(sink)

    # Required inputs: every register/shifter d, every dsp a and b, and the
    # top-level output. A dsp f input may be left undriven (zero-fed head of
    # the accumulate line).
    required = {"top.y_out"}
    for inst in netlist.instances:
        if inst.kind == "dsp_element":
            required.update((f"{inst.id}.a", f"{inst.id}.b"))
        else:
            required.add(f"{inst.id}.d")
    missing = sorted(required - sinks_seen)
    if missing:
        raise NetlistError(f"undriven inputs: {', '.join(missing)}")

    # Combinational cycle check: an edge crosses instance u to instance v when
    # u drives one of v's inputs and that input reaches one of v's outputs
    # without an internal register.
    drives: dict[str, list[str]] = {}
    for source, sink in netlist.connections:
        src_inst = source.partition(".")[0]
        dst_inst, _, dst_port = sink.partition(".")
        if src_inst == "top" or dst_inst == "top":
            continue
        dst = netlist.instance(dst_inst)
        passes = any(p_in == dst_port for p_in, _ in _COMBINATIONAL_PATHS[dst.kind])
        if passes:
            drives.setdefault(src_inst, []).append(dst_inst)
    state: dict[str, int] = {}

    def visit(node: str) -> None:
        state[node] = 1
        for nxt in drives.get(node, ()):
            mark = state.get(nxt, 0)
            if mark == 1:
                raise NetlistError(f"combinational cycle through {nxt}")
            if mark == 0:
                visit(nxt)
        state[node] = 2

    for inst in netlist.instances:
        if state.get(inst.id, 0) == 0:
            visit(inst.id)


def build_netlist(graph: StructureGraph, widths: WidthConfig,
                  name: str = "systolic_fir") -> Netlist:
    """Compile a structure graph into a flat netlist.

    One dsp_element per systolic element with its coefficient as a constant
    parameter; a single shared tap delay line; shifters only where the input
    shift is nonzero; every injected break register an explicit instance on
    the accumulate path.
    """
    if not name.isidentifier() or not name[0].isalpha():
        raise NetlistError(f"HDL unit name {name!r} is not a valid identifier")
    w = widths
    instances: list[Instance] = []
    connections: list[tuple[str, str]] = []

    depth = graph.max_tap_delay
    for t in range(1, depth + 1):
        instances.append(Instance(id=f"tap{t}", kind="register", params={"width": w.w_a}))
        source = "top.x_in" if t == 1 else f"tap{t - 1}.q"
        connections.append((source, f"tap{t}.d"))

    def tap_source(delay: int) -> str:
        return "top.x_in" if delay == 0 else f"tap{delay}.q"

    for k, elem in enumerate(graph.elements):
        d = elem.input_shift
        operand_width = w.w_a + d
        instances.append(Instance(
            id=f"el{k}", kind="dsp_element",
            params={
                "index": k,
                "coefficient": elem.coefficient,
                "width_a": operand_width,
                "width_b": operand_width,
                "width_pre": w.w_c,
                "width_coeff": w.w_d,
                "width_mult": w.w_e,
                "width_acc": w.w_f,
            },
        ))
        for port, delay in (("a", elem.tap_delay_a), ("b", elem.tap_delay_b)):
            if d > 0:
                sh_id = f"el{k}_sh{port}"
                instances.append(Instance(
                    id=sh_id, kind="shifter",
                    params={"width_in": w.w_a, "width_out": operand_width, "shift": d},
                ))
                connections.append((tap_source(delay), f"{sh_id}.d"))
                connections.append((f"{sh_id}.q", f"el{k}.{port}"))
            else:
                connections.append((tap_source(delay), f"el{k}.{port}"))
        if k > 0:
            injected = elem.accumulate_registers - 1
            upstream = f"el{k - 1}.y"
            for m in range(injected):
                brk_id = f"brk{k}_{m}"
                instances.append(Instance(id=brk_id, kind="register", params={"width": w.w_f}))
                connections.append((upstream, f"{brk_id}.d"))
                upstream = f"{brk_id}.q"
            connections.append((upstream, f"el{k}.f"))
    connections.append((f"el{graph.n_elements - 1}.y", "top.y_out"))

    netlist = Netlist(
        name=name, widths=w, instances=tuple(instances), connections=tuple(connections)
    )
    check_netlist(netlist)
    summary = resource_summary(graph)
    counts = netlist.counts()
    if counts["dsp_element"] != summary.dsp_elements or counts["register"] != (
        summary.tap_line_registers + summary.injected_registers
    ):
        raise NetlistError("netlist instance counts disagree with the resource summary")
    return netlist


def netlist_to_json(netlist: Netlist) -> str:
    doc = {
        "name": netlist.name,
        "widths": netlist.widths.to_doc(),
        "ports": list(netlist.ports),
        "instances": [
            {"id": i.id, "kind": i.kind, "params": i.params} for i in netlist.instances
        ],
        "connections": [{"source": s, "sink": k} for s, k in netlist.connections],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def netlist_from_json(text: str) -> Netlist:
    doc = json.loads(text)
    try:
        netlist = Netlist(
            name=str(doc["name"]),
            widths=WidthConfig.from_doc(doc["widths"]),
            instances=tuple(
                Instance(id=str(i["id"]), kind=str(i["kind"]), params=dict(i["params"]))
                for i in doc["instances"]
            ),
            connections=tuple(
                (str(c["source"]), str(c["sink"])) for c in doc["connections"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise NetlistError(f"malformed netlist document: {exc}") from exc
    check_netlist(netlist)
    return netlist


def emit_hdl(netlist: Netlist, dialect: str = "vhdl") -> str:
    if dialect == "vhdl":
        return _emit_vhdl(netlist)
    if dialect == "verilog":
        return _emit_verilog(netlist)
    raise NetlistError(f"unsupported dialect {dialect!r}, expected one of {DIALECTS}")


def _net_name(endpoint: str) -> str:
    """Signal name carrying the value driven at `endpoint`."""
    inst, _, port = endpoint.partition(".")
    if inst == "top":
        return port
    return f"{inst}_{port}" if port != "q" and port != "y" else f"{inst}"


def _collect(netlist: Netlist):
    """Split instances by kind, preserving construction order."""
    taps, breaks, shifters, dsps = [], [], [], []
    for inst in netlist.instances:
        if inst.kind == "register":
            (taps if inst.id.startswith("tap") else breaks).append(inst)
        elif inst.kind == "shifter":
            shifters.append(inst)
        else:
            dsps.append(inst)
    source_of = {sink: source for source, sink in netlist.connections}
    return taps, breaks, shifters, dsps, source_of


def _emit_vhdl(netlist: Netlist) -> str:
    w = netlist.widths
    taps, breaks, shifters, dsps, source_of = _collect(netlist)
    lines: list[str] = []
    add = lines.append
    add("-- generated by systolicfir; structural symmetric-FIR datapath")
    add("library ieee;")
    add("use ieee.std_logic_1164.all;")
    add("use ieee.numeric_std.all;")
    add("")
    add(f"entity {netlist.name} is")
    add("  port (")
    add("    clk   : in  std_logic;")
    add(f"    x_in  : in  signed({w.w_a - 1} downto 0);")
    add(f"    y_out : out signed({w.w_f - 1} downto 0)")
    add("  );")
    add(f"end entity {netlist.name};")
    add("")
    add(f"architecture rtl of {netlist.name} is")
    add("")
    add("  -- take_low: two's-complement wrap when narrowing, sign-extend when widening")
    add("  function take_low(v : signed; n : natural) return signed is")
    add("    variable a : signed(v'length - 1 downto 0) := v;")
    add("  begin")
    add("    if n <= a'length then")
    add("      return a(n - 1 downto 0);")
    add("    end if;")
    add("    return resize(a, n);")
    add("  end function;")
    add("")
    for inst in dsps:
        add(f"  constant COEFF_{inst.params['index']} : signed({w.w_d - 1} downto 0) :="
            f" to_signed({inst.params['coefficient']}, {w.w_d});")
    add("")
    for inst in taps:
        add(f"  signal {inst.id} : signed({w.w_a - 1} downto 0) := (others => '0');")
    for inst in shifters:
        add(f"  signal {inst.id} : signed({inst.params['width_out'] - 1} downto 0);")
    for inst in dsps:
        k = inst.params["index"]
        add(f"  signal el{k}_c : signed({w.w_c - 1} downto 0);")
        add(f"  signal el{k}_e : signed({w.w_e - 1} downto 0);")
        add(f"  signal el{k}_acc : signed({w.w_f - 1} downto 0) := (others => '0');")
        add(f"  signal el{k} : signed({w.w_f - 1} downto 0);")
    for inst in breaks:
        add(f"  signal {inst.id} : signed({w.w_f - 1} downto 0) := (others => '0');")
    add("")
    add("begin")
    add("")
    add("  tap_line : process (clk)")
    add("  begin")
    add("    if rising_edge(clk) then")
    for inst in taps:
        src = _net_name(source_of[f"{inst.id}.d"])
        add(f"      {inst.id} <= {src};")
    add("    end if;")
    add("  end process;")
    add("")
    for inst in shifters:
        src = _net_name(source_of[f"{inst.id}.d"])
        width_out = inst.params["width_out"]
        shift = inst.params["shift"]
        add(f"  {inst.id} <= shift_left(resize({src}, {width_out}), {shift});")
    if shifters:
        add("")
    for inst in dsps:
        k = inst.params["index"]
        a_src = _net_name(source_of[f"el{k}.a"])
        b_src = _net_name(source_of[f"el{k}.b"])
        oper_w = inst.params["width_a"]
        add(f"  -- element {k}")
        add(f"  el{k}_c <= take_low(resize({a_src}, {oper_w + 1}) + resize({b_src}, {oper_w + 1}), {w.w_c});")
        add(f"  el{k}_e <= take_low(el{k}_c * COEFF_{k}, {w.w_e});")
        add(f"  el{k} <= take_low(resize(el{k}_e, {w.w_f + 1}) + resize(el{k}_acc, {w.w_f + 1}), {w.w_f});")
        add("")
    add("  accumulate_line : process (clk)")
    add("  begin")
    add("    if rising_edge(clk) then")
    for inst in breaks:
        src = _net_name(source_of[f"{inst.id}.d"])
        add(f"      {inst.id} <= {src};")
    for inst in dsps:
        k = inst.params["index"]
        f_sink = f"el{k}.f"
        if f_sink in source_of:
            add(f"      el{k}_acc <= {_net_name(source_of[f_sink])};")
        else:
            add(f"      el{k}_acc <= (others => '0');")
    add("    end if;")
    add("  end process;")
    add("")
    add(f"  y_out <= {_net_name(source_of['top.y_out'])};")
    add("")
    add("end architecture rtl;")
    return "\n".join(lines) + "\n"


def _emit_verilog(netlist: Netlist) -> str:
    w = netlist.widths
    taps, breaks, shifters, dsps, source_of = _collect(netlist)
    lines: list[str] = []
    add = lines.append
    add("// generated by systolicfir; structural symmetric-FIR datapath")
    add(f"module {netlist.name} (")
    add("  input  wire clk,")
    add(f"  input  wire signed [{w.w_a - 1}:0] x_in,")
    add(f"  output wire signed [{w.w_f - 1}:0] y_out")
    add(");")
    add("")
    for inst in dsps:
        k = inst.params["index"]
        add(f"  localparam signed [{w.w_d - 1}:0] COEFF_{k} = {inst.params['coefficient']};")
    add("")
    for inst in taps:
        add(f"  reg signed [{w.w_a - 1}:0] {inst.id} = 0;")
    for inst in shifters:
        add(f"  wire signed [{inst.params['width_out'] - 1}:0] {inst.id};")
    for inst in dsps:
        k = inst.params["index"]
        add(f"  wire signed [{w.w_c - 1}:0] el{k}_c;")
        add(f"  wire signed [{w.w_e - 1}:0] el{k}_e;")
        add(f"  reg signed [{w.w_f - 1}:0] el{k}_acc = 0;")
        add(f"  wire signed [{w.w_f - 1}:0] el{k};")
    for inst in breaks:
        add(f"  reg signed [{w.w_f - 1}:0] {inst.id} = 0;")
    add("")
    add("  // tap line")
    add("  always @(posedge clk) begin")
    for inst in taps:
        src = _net_name(source_of[f"{inst.id}.d"])
        add(f"    {inst.id} <= {src};")
    add("  end")
    add("")
    for inst in shifters:
        src = _net_name(source_of[f"{inst.id}.d"])
        add(f"  assign {inst.id} = {src} <<< {inst.params['shift']};")
    if shifters:
        add("")
    for inst in dsps:
        k = inst.params["index"]
        a_src = _net_name(source_of[f"el{k}.a"])
        b_src = _net_name(source_of[f"el{k}.b"])
        add(f"  // element {k}")
        add(f"  assign el{k}_c = {a_src} + {b_src};")
        add(f"  assign el{k}_e = el{k}_c * COEFF_{k};")
        add(f"  assign el{k} = el{k}_e + el{k}_acc;")
        add("")
    add("  // accumulate line")
    add("  always @(posedge clk) begin")
    for inst in breaks:
        src = _net_name(source_of[f"{inst.id}.d"])
        add(f"    {inst.id} <= {src};")
    for inst in dsps:
        k = inst.params["index"]
        f_sink = f"el{k}.f"
        if f_sink in source_of:
            add(f"    el{k}_acc <= {_net_name(source_of[f_sink])};")
        else:
            add(f"    el{k}_acc <= 0;")
    add("  end")
    add("")
    add(f"  assign y_out = {_net_name(source_of['top.y_out'])};")
    add("")
    add("endmodule")
    return "\n".join(lines) + "\n"
