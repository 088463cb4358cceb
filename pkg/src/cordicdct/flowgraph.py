"""Shift-add dataflow graphs.

A :class:`FlowGraph` is an immutable list of nodes in topological order;
every operand refers to an earlier node.  The same graph is evaluated in
real arithmetic (the linear map it implements), in two's-complement fixed
point, and priced by :func:`cost_report`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fxp
from .fxp import FxpFormat, FxpFormatError, FxpOverflowError, FxpValue, Overflow


class Op(str, enum.Enum):
    INPUT = "input"
    ADD = "add"
    SUB = "sub"
    SHR = "shr"
    NOT = "not"
    NEG = "neg"
    MUL = "mul"  # real-valued constant multiply; reference graphs only
    OUTPUT = "output"


ARITY = {Op.INPUT: 0, Op.ADD: 2, Op.SUB: 2, Op.SHR: 1, Op.NOT: 1, Op.NEG: 1, Op.MUL: 1, Op.OUTPUT: 1}
ADDERS = (Op.ADD, Op.SUB, Op.NEG)


@dataclass(frozen=True)
class Node:
    op: Op
    args: tuple[int, ...] = ()
    carry: int = 0
    shift: int = 0
    port: int = -1
    coef: float = 0.0
    tag: str = ""

    def replace(self, **kw) -> "Node":
        d = dict(op=self.op, args=self.args, carry=self.carry, shift=self.shift,
                 port=self.port, coef=self.coef, tag=self.tag)
        d.update(kw)
        return Node(**d)

    def to_dict(self) -> dict:
        d: dict = {"op": self.op.value}
        if self.args:
            d["args"] = list(self.args)
        if self.op is Op.ADD:
            d["carry"] = self.carry
        if self.op is Op.SHR:
            d["shift"] = self.shift
        if self.op in (Op.INPUT, Op.OUTPUT):
            d["port"] = self.port
        if self.op is Op.MUL:
            d["coef"] = self.coef
        if self.tag:
            d["tag"] = self.tag
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Node":
        return cls(op=Op(d["op"]), args=tuple(d.get("args", ())), carry=int(d.get("carry", 0)),
                   shift=int(d.get("shift", 0)), port=int(d.get("port", -1)),
                   coef=float(d.get("coef", 0.0)), tag=d.get("tag", ""))


class GraphError(ValueError):
    pass


class FlowGraph:
    """Immutable DAG of :class:`Node` objects."""

    def __init__(self, nodes: Iterable[Node]):
        self._nodes = tuple(nodes)
        inputs: dict[int, int] = {}
        outputs: dict[int, int] = {}
        for nid, n in enumerate(self._nodes):
            if len(n.args) != ARITY[n.op]:
                raise GraphError(f"node {nid}: {n.op.value} takes {ARITY[n.op]} operands")
            for a in n.args:
                if not 0 <= a < nid:
                    raise GraphError(f"node {nid}: operand {a} is not an earlier node")
                if self._nodes[a].op is Op.OUTPUT:
                    raise GraphError(f"node {nid}: output node {a} used as operand")
            if n.op is Op.ADD and n.carry not in (0, 1):
                raise GraphError(f"node {nid}: carry must be 0 or 1")
            if n.op is Op.SHR and n.shift < 0:
                raise GraphError(f"node {nid}: negative shift")
            if n.op is Op.INPUT:
                if n.port in inputs:
                    raise GraphError(f"duplicate input port {n.port}")
                inputs[n.port] = nid
            elif n.op is Op.OUTPUT:
                if n.port in outputs:
                    raise GraphError(f"duplicate output port {n.port}")
                outputs[n.port] = nid
        if sorted(inputs) != list(range(len(inputs))):
            raise GraphError("input ports must be dense 0..n-1")
        if sorted(outputs) != list(range(len(outputs))):
            raise GraphError("output ports must be dense 0..n-1")
        self._inputs = tuple(inputs[p] for p in range(len(inputs)))
        self._outputs = tuple(outputs[p] for p in range(len(outputs)))

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def input_ids(self) -> tuple[int, ...]:
        return self._inputs

    @property
    def output_ids(self) -> tuple[int, ...]:
        return self._outputs

    @property
    def n_inputs(self) -> int:
        return len(self._inputs)

    @property
    def n_outputs(self) -> int:
        return len(self._outputs)

    def __len__(self):
        return len(self._nodes)

    def __getitem__(self, nid: int) -> Node:
        return self._nodes[nid]

    def __eq__(self, other):
        return isinstance(other, FlowGraph) and self._nodes == other._nodes

    def __hash__(self):
        return hash(self._nodes)

    def __repr__(self):
        return f"FlowGraph({len(self._nodes)} nodes, {self.n_inputs} in, {self.n_outputs} out)"

    def consumers(self) -> list[list[int]]:
        users: list[list[int]] = [[] for _ in self._nodes]
        for nid, n in enumerate(self._nodes):
            for a in n.args:
                users[a].append(nid)
        return users

    def count(self, op: Op) -> int:
        return sum(n.op is op for n in self._nodes)

    def to_dict(self) -> dict:
        return {
            "format": "cordicdct-flowgraph",
            "version": 1,
            "inputs": self.n_inputs,
            "outputs": self.n_outputs,
            "nodes": [dict(id=i, **n.to_dict()) for i, n in enumerate(self._nodes)],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "FlowGraph":
        nodes = d["nodes"]
        for i, nd in enumerate(nodes):
            if nd.get("id", i) != i:
                raise GraphError("node ids must be 0..n-1 in order")
        return cls(Node.from_dict(nd) for nd in nodes)

    @classmethod
    def from_json(cls, text: str) -> "FlowGraph":
        return cls.from_dict(json.loads(text))


class GraphBuilder:
    """Append-only construction helper; every method returns the new node id."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._n_in = 0

    def _push(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def input(self, port: int | None = None, tag: str = "") -> int:
        if port is None:
            port = self._n_in
        self._n_in += 1
        return self._push(Node(Op.INPUT, port=port, tag=tag))

    def add(self, a: int, b: int, carry: int = 0, tag: str = "") -> int:
        return self._push(Node(Op.ADD, (a, b), carry=carry, tag=tag))

    def sub(self, a: int, b: int, tag: str = "") -> int:
        return self._push(Node(Op.SUB, (a, b), tag=tag))

    def shr(self, a: int, k: int, tag: str = "") -> int:
        if k == 0:
            return a
        return self._push(Node(Op.SHR, (a,), shift=k, tag=tag))

    def not_(self, a: int, tag: str = "") -> int:
        return self._push(Node(Op.NOT, (a,), tag=tag))

    def neg(self, a: int, tag: str = "") -> int:
        return self._push(Node(Op.NEG, (a,), tag=tag))

    def mul(self, a: int, coef: float, tag: str = "") -> int:
        return self._push(Node(Op.MUL, (a,), coef=float(coef), tag=tag))

    def output(self, port: int, a: int, tag: str = "") -> int:
        return self._push(Node(Op.OUTPUT, (a,), port=port, tag=tag))

    def build(self) -> FlowGraph:
        return FlowGraph(self.nodes)


def prune(nodes: Sequence[Node]) -> FlowGraph:
    """Drop nodes that no output depends on (inputs are always kept) and renumber."""
    live = [n.op in (Op.INPUT, Op.OUTPUT) for n in nodes]
    for nid in range(len(nodes) - 1, -1, -1):
        if live[nid]:
            for a in nodes[nid].args:
                live[a] = True
    remap: dict[int, int] = {}
    out: list[Node] = []
    for nid, n in enumerate(nodes):
        if live[nid]:
            remap[nid] = len(out)
            out.append(n.replace(args=tuple(remap[a] for a in n.args)))
    return FlowGraph(out)


# --------------------------------------------------------------------------
# real semantics


def eval_real(graph: FlowGraph, inputs) -> np.ndarray:
    """Evaluate with exact real arithmetic.

    ``inputs`` has the input ports on axis 0; any trailing axes are a batch.
    Carries contribute nothing and NOT is treated as exact negation, so the
    graph is a linear map.
    """
    x = np.asarray(inputs, dtype=float)
    if x.shape[:1] != (graph.n_inputs,):
        raise ValueError(f"expected {graph.n_inputs} inputs, got shape {x.shape}")
    vals: list = [None] * len(graph)
    for nid, n in enumerate(graph.nodes):
        op = n.op
        if op is Op.INPUT:
            v = x[n.port]
        elif op is Op.ADD:
            v = vals[n.args[0]] + vals[n.args[1]]
        elif op is Op.SUB:
            v = vals[n.args[0]] - vals[n.args[1]]
        elif op is Op.SHR:
            v = vals[n.args[0]] * 2.0 ** -n.shift
        elif op in (Op.NOT, Op.NEG):
            v = -vals[n.args[0]]
        elif op is Op.MUL:
            v = vals[n.args[0]] * n.coef
        else:
            v = vals[n.args[0]]
        vals[nid] = v
    return np.stack([vals[o] for o in graph.output_ids])


def implied_matrix(graph: FlowGraph) -> np.ndarray:
    """Matrix (outputs x inputs) whose column j is the response to an impulse at input j."""
    return eval_real(graph, np.eye(graph.n_inputs))


def node_matrix(graph: FlowGraph) -> np.ndarray:
    """Linear form of every node: row ``nid`` maps inputs to that node's real value."""
    x = np.eye(graph.n_inputs)
    vals = np.zeros((len(graph), graph.n_inputs))
    for nid, n in enumerate(graph.nodes):
        op = n.op
        if op is Op.INPUT:
            v = x[n.port]
        elif op is Op.ADD:
            v = vals[n.args[0]] + vals[n.args[1]]
        elif op is Op.SUB:
            v = vals[n.args[0]] - vals[n.args[1]]
        elif op is Op.SHR:
            v = vals[n.args[0]] * 2.0 ** -n.shift
        elif op in (Op.NOT, Op.NEG):
            v = -vals[n.args[0]]
        elif op is Op.MUL:
            v = vals[n.args[0]] * n.coef
        else:
            v = vals[n.args[0]]
        vals[nid] = v
    return vals


# --------------------------------------------------------------------------
# fixed-point semantics


@dataclass(frozen=True)
class Formats:
    """Per-node fixed-point format assignment.

    ``input`` is the format callers supply samples in; ``nodes`` holds the
    format of each node's result.  Inputs are widened on entry, outputs
    narrowed on exit by floor.
    """

    input: FxpFormat
    internal: FxpFormat
    output: FxpFormat
    nodes: Mapping[int, FxpFormat]
    bounds: Mapping[int, tuple[int, int]] = field(default_factory=dict)

    def __getitem__(self, nid: int) -> FxpFormat:
        return self.nodes[nid]

    @classmethod
    def uniform(cls, graph: FlowGraph, input: FxpFormat, internal: FxpFormat,
                output: FxpFormat | None = None) -> "Formats":
        output = output or internal
        outs = set(graph.output_ids)
        nodes = {nid: (output if nid in outs else internal) for nid in range(len(graph))}
        return cls(input, internal, output, nodes)


def eval_fxp(graph: FlowGraph, inputs: Sequence[FxpValue], formats: Formats) -> list[FxpValue]:
    """Evaluate node by node with :mod:`fxp` operations.

    NOT is the ``-a - 1`` complement, carries enter through the adder carry
    port and NEG is exact ``~a + 1``.  Operands whose format differs from
    the consuming node's format are resized first.
    """
    if len(inputs) != graph.n_inputs:
        raise ValueError(f"expected {graph.n_inputs} inputs, got {len(inputs)}")
    vals: list[FxpValue | None] = [None] * len(graph)

    def arg(nid: int, i: int) -> FxpValue:
        v = vals[graph[nid].args[i]]
        f = formats[nid]
        return v if v.fmt == f else fxp.resize(v, f)

    for nid, n in enumerate(graph.nodes):
        op = n.op
        if op is Op.INPUT:
            x = inputs[n.port]
            if x.fmt != formats.input:
                raise FxpFormatError(f"input {n.port} has {x.fmt}, expected {formats.input}")
            v = fxp.resize(x, formats[nid])
        elif op is Op.ADD:
            v = fxp.add(arg(nid, 0), arg(nid, 1), n.carry)
        elif op is Op.SUB:
            v = fxp.sub(arg(nid, 0), arg(nid, 1))
        elif op is Op.SHR:
            v = fxp.asr(arg(nid, 0), n.shift)
        elif op is Op.NOT:
            v = fxp.bitnot(arg(nid, 0))
        elif op is Op.NEG:
            v = fxp.negate(arg(nid, 0))
        elif op is Op.MUL:
            raise GraphError("constant multiplies have no fixed-point semantics")
        else:
            v = arg(nid, 0)
        vals[nid] = v
    return [vals[o] for o in graph.output_ids]


def _fit_array(raw: np.ndarray, fmt: FxpFormat) -> np.ndarray:
    lo, hi = fmt.min_raw, fmt.max_raw
    if fmt.overflow is Overflow.WRAP:
        return (raw - lo) % (1 << fmt.width) + lo
    if fmt.overflow is Overflow.SATURATE:
        return np.clip(raw, lo, hi)
    if raw.size and (raw.min() < lo or raw.max() > hi):
        raise FxpOverflowError(f"value out of range for {fmt}")
    return raw


def _resize_array(raw: np.ndarray, src: FxpFormat, dst: FxpFormat) -> np.ndarray:
    d = dst.frac - src.frac
    r = raw << d if d >= 0 else raw >> -d
    return _fit_array(r, dst)


def eval_fxp_batch(graph: FlowGraph, raw_inputs, formats: Formats) -> np.ndarray:
    """Vectorised :func:`eval_fxp` on raw integers.

    ``raw_inputs`` is an integer array with input ports on axis 0 (raw values
    in ``formats.input``); returns raw output values on axis 0.
    """
    x = np.asarray(raw_inputs, dtype=np.int64)
    if x.shape[:1] != (graph.n_inputs,):
        raise ValueError(f"expected {graph.n_inputs} inputs, got shape {x.shape}")
    fin = formats.input
    if x.size and (x.min() < fin.min_raw or x.max() > fin.max_raw):
        raise ValueError(f"input raw values outside {fin}")
    vals: list = [None] * len(graph)
    fmts: list = [None] * len(graph)

    def arg(nid: int, i: int) -> np.ndarray:
        a = graph[nid].args[i]
        f = formats[nid]
        return vals[a] if fmts[a] == f else _resize_array(vals[a], fmts[a], f)

    for nid, n in enumerate(graph.nodes):
        f = formats[nid]
        op = n.op
        if op is Op.INPUT:
            v = _resize_array(x[n.port], fin, f)
        elif op is Op.ADD:
            v = _fit_array(arg(nid, 0) + arg(nid, 1) + n.carry, f)
        elif op is Op.SUB:
            v = _fit_array(arg(nid, 0) - arg(nid, 1), f)
        elif op is Op.SHR:
            v = arg(nid, 0) >> n.shift
        elif op is Op.NOT:
            v = -arg(nid, 0) - 1
        elif op is Op.NEG:
            a = arg(nid, 0)
            if f.overflow is not Overflow.WRAP and np.any(a == f.min_raw):
                raise FxpOverflowError("cannot negate most-negative value")
            v = _fit_array(-a, f)
        elif op is Op.MUL:
            raise GraphError("constant multiplies have no fixed-point semantics")
        else:
            v = arg(nid, 0)
        vals[nid] = v
        fmts[nid] = f
    return np.stack([vals[o] for o in graph.output_ids])


def _error_bounds(graph: FlowGraph) -> list[tuple[float, float]]:
    """Bounds, in LSBs of a uniform internal format, on fixed-point minus real value."""
    err: list[tuple[float, float]] = []
    for n in graph.nodes:
        op = n.op
        if op is Op.INPUT:
            e = (0.0, 0.0)
        elif op is Op.ADD:
            (a0, a1), (b0, b1) = err[n.args[0]], err[n.args[1]]
            e = (a0 + b0 + n.carry, a1 + b1 + n.carry)
        elif op is Op.SUB:
            (a0, a1), (b0, b1) = err[n.args[0]], err[n.args[1]]
            e = (a0 - b1, a1 - b0)
        elif op is Op.SHR:
            a0, a1 = err[n.args[0]]
            s = 2.0 ** -n.shift
            e = (a0 * s - (1 - s), a1 * s)
        elif op is Op.NOT:
            a0, a1 = err[n.args[0]]
            e = (-a1 - 1, -a0 - 1)
        elif op is Op.NEG:
            a0, a1 = err[n.args[0]]
            e = (-a1, -a0)
        elif op is Op.MUL:
            raise GraphError("constant multiplies have no fixed-point semantics")
        else:
            e = err[n.args[0]]
        err.append(e)
    return err


def assign_formats(
    graph: FlowGraph,
    input_format: FxpFormat = FxpFormat(8, 0),
    internal_width: int = 16,
    output_width: int = 12,
    overflow: Overflow | str = Overflow.WRAP,
) -> Formats:
    """Pick formats by interval analysis so that no node can overflow.

    Every internal node shares one format of ``internal_width`` bits whose
    fraction is the largest that keeps all reachable values in range for any
    input in ``input_format``.  Outputs share one ``output_width`` format
    with the largest fraction that still fits every output.
    """
    overflow = Overflow(overflow)
    lin = node_matrix(graph)
    lo_in, hi_in = input_format.min_raw * input_format.ulp, input_format.max_raw * input_format.ulp
    real_hi = np.where(lin > 0, lin * hi_in, lin * lo_in).sum(axis=1)
    real_lo = np.where(lin > 0, lin * lo_in, lin * hi_in).sum(axis=1)
    err = _error_bounds(graph)
    outs = set(graph.output_ids)
    internal = [nid for nid in range(len(graph)) if nid not in outs]

    def raw_range(nid: int, frac: int) -> tuple[int, int]:
        s = 2.0 ** frac
        return (math.floor(real_lo[nid] * s + err[nid][0]), math.ceil(real_hi[nid] * s + err[nid][1]))

    frac = None
    for f in range(internal_width - 1, input_format.frac - 1, -1):
        fmt = FxpFormat(internal_width, f, overflow)
        if all(fmt.contains(r) for nid in internal for r in raw_range(nid, f)):
            frac = f
            break
    if frac is None:
        raise FxpOverflowError(f"{internal_width}-bit datapath cannot hold this graph's range")
    ifmt = FxpFormat(internal_width, frac, overflow)

    ofrac = None
    for g in range(min(frac, output_width - 1), -1, -1):
        fmt = FxpFormat(output_width, g, overflow)
        ok = True
        for o in outs:
            lo, hi = raw_range(o, frac)
            if not (fmt.contains(lo >> (frac - g)) and fmt.contains(hi >> (frac - g))):
                ok = False
                break
        if ok:
            ofrac = g
            break
    if ofrac is None:
        raise FxpOverflowError(f"{output_width}-bit outputs cannot hold this graph's range")
    ofmt = FxpFormat(output_width, ofrac, overflow)

    nodes = {nid: (ofmt if nid in outs else ifmt) for nid in range(len(graph))}
    bounds = {nid: raw_range(nid, frac) for nid in internal}
    return Formats(input_format, ifmt, ofmt, nodes, bounds)


# --------------------------------------------------------------------------
# cost


@dataclass(frozen=True)
class DelayModel:
    """Unit delays used to rank paths.

    Shifts are wiring and always cost nothing.  NEG is priced as an adder
    because that is how it is built; NOT is a single inverter.  The numeric
    values only matter when two paths are incomparable term by term.
    """

    t_add: float = 1.0
    t_not: float = 0.25
    t_mul: float = 4.0

    @property
    def t_shift(self) -> float:
        return 0.0


@dataclass(frozen=True, order=True)
class CriticalPath:
    adds: int = 0
    nots: int = 0
    muls: int = 0

    def __add__(self, other: "CriticalPath") -> "CriticalPath":
        return CriticalPath(self.adds + other.adds, self.nots + other.nots, self.muls + other.muls)

    def dominates(self, other: "CriticalPath") -> bool:
        return self.adds >= other.adds and self.nots >= other.nots and self.muls >= other.muls

    def delay(self, model: DelayModel = DelayModel()) -> float:
        return self.adds * model.t_add + self.nots * model.t_not + self.muls * model.t_mul

    def __str__(self):
        terms = [f"{self.adds}·T_ADD"] if self.adds else []
        for n, sym in ((self.nots, "T_NOT"), (self.muls, "T_MUL")):
            if n:
                terms.append(sym if n == 1 else f"{n}·{sym}")
        return " + ".join(terms) if terms else "0"

    def to_dict(self) -> dict:
        return {"t_add": self.adds, "t_not": self.nots, "t_mul": self.muls}


@dataclass(frozen=True)
class CostReport:
    additions: int
    shifts: int
    bit_inversions: int
    critical_path: CriticalPath
    multiplications: int = 0

    def as_row(self) -> tuple:
        return (self.additions, self.shifts, self.bit_inversions, str(self.critical_path))

    def to_dict(self) -> dict:
        return {
            "additions": self.additions,
            "shifts": self.shifts,
            "bit_inversions": self.bit_inversions,
            "critical_path": str(self.critical_path),
        }


_STEP = {
    Op.ADD: CriticalPath(adds=1),
    Op.SUB: CriticalPath(adds=1),
    Op.NEG: CriticalPath(adds=1),
    Op.NOT: CriticalPath(nots=1),
    Op.MUL: CriticalPath(muls=1),
}


def _pareto(paths: Iterable[CriticalPath]) -> frozenset[CriticalPath]:
    ps = set(paths)
    return frozenset(p for p in ps if not any(q != p and q.dominates(p) for q in ps))


def path_profiles(graph: FlowGraph) -> list[frozenset[CriticalPath]]:
    """Per node, the Pareto-maximal delay vectors over all paths from any input."""
    prof: list[frozenset[CriticalPath]] = []
    zero = CriticalPath()
    for n in graph.nodes:
        if n.op is Op.INPUT:
            prof.append(frozenset({zero}))
            continue
        incoming = set().union(*(prof[a] for a in n.args))
        step = _STEP.get(n.op, zero)
        prof.append(_pareto(p + step for p in incoming))
    return prof


def critical_path(graph: FlowGraph, delays: DelayModel = DelayModel()) -> CriticalPath:
    prof = path_profiles(graph)
    cands = _pareto(p for o in graph.output_ids for p in prof[o])
    if not cands:
        return CriticalPath()
    return max(cands, key=lambda p: (p.delay(delays), p))


def cost_report(graph: FlowGraph, delays: DelayModel = DelayModel()) -> CostReport:
    return CostReport(
        additions=sum(graph.count(op) for op in ADDERS),
        shifts=graph.count(Op.SHR),
        bit_inversions=graph.count(Op.NOT),
        critical_path=critical_path(graph, delays),
        multiplications=graph.count(Op.MUL),
    )
