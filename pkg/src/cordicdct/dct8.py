"""Eight-point DCT flow graphs: the exact Loeffler-style reference and the
multiplierless CORDIC variant C, plus the two adder-saving rewrites.

Wiring (all variants share it, only the three rotations differ)::

    stage 1   s_n = x_n + x_{7-n},  d0 = x0-x7, d1 = x1-x6, d2 = x2-x5, d3 = x4-x3
    even      e0 = s0+s3, e3 = s0-s3, e1 = s1+s2, e2 = s2-s1
              X0 = e0+e1, X4 = e0-e1, (X6, X2) = R(alpha) (e2, e3)
    odd       (u0, u1) = R(gamma) (d1, d2),  (v0, v1) = R(beta) (d3, d0)
    stage 5   X1 = u0+v1, P = u0-v1, X7 = u1+v0, Q = v0-u1,  then -P, -Q
    stage 6   X3 = (-P) - (-Q),  X5 = (-P) + (-Q)

Graph outputs are unscaled; ``out_scale`` carries the butterfly
normalisations and the ``1/K`` CORDIC gains.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .cordic import RotationPlan, expand_to_graph
from .flowgraph import (
    FlowGraph,
    Formats,
    GraphBuilder,
    GraphError,
    Node,
    Op,
    assign_formats,
    eval_fxp_batch,
    eval_real,
    implied_matrix,
    prune,
)
from .fxp import FxpFormat, Overflow

ALPHA = -math.pi / 8
BETA = -math.pi / 16
GAMMA = -3 * math.pi / 16

N = 8
SQRT2 = math.sqrt(2.0)

# variant C microrotation sets; beta and gamma share |indices| so their gains match
PLAN_ALPHA = RotationPlan.from_lists(ALPHA, (1, 4), (-1, 1))
PLAN_BETA = RotationPlan.from_lists(BETA, (1, 2, 4), (-1, 1, 1))
PLAN_GAMMA = RotationPlan.from_lists(GAMMA, (1, 2, 4), (-1, -1, 1))

# the output that loses its +1 when the stage-5 negation becomes a NOT gate
UNCOMPENSATED_PORT = 5


class Variant(str, enum.Enum):
    REFERENCE = "reference"
    C_RAW = "raw"
    C_I = "I"
    C_II = "II"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        t = text.strip()
        for v in cls:
            if t.lower() in (v.value.lower(), v.name.lower()):
                return v
        aliases = {"ref": cls.REFERENCE, "c_raw": cls.C_RAW, "1": cls.C_I, "2": cls.C_II}
        if t.lower() in aliases:
            return aliases[t.lower()]
        raise ValueError(f"unknown variant {text!r}")


@dataclass(frozen=True)
class RotationSpec:
    """One of the three rotations; ``plan`` is None for the exact rotation."""

    angle: float
    plan: RotationPlan | None = None

    def __post_init__(self):
        if not any(math.isclose(self.angle, a, abs_tol=1e-15) for a in (ALPHA, BETA, GAMMA)):
            raise ValueError(f"angle {self.angle} is not one of alpha, beta, gamma")
        if self.plan is not None and not math.isclose(self.plan.target_angle, self.angle, abs_tol=1e-15):
            raise ValueError("plan target does not match rotation angle")

    @property
    def gain(self) -> float:
        return 1.0 if self.plan is None else self.plan.scale_k


@dataclass(frozen=True)
class ScaledTransform:
    """A graph whose output ``k`` times ``out_scale[k]`` is DCT coefficient ``k``."""

    graph: FlowGraph
    out_scale: tuple[float, ...]
    variant: Variant
    rotations: tuple[RotationSpec, RotationSpec, RotationSpec] = field(default=(), compare=False)
    uncompensated: frozenset[int] = frozenset()

    def __post_init__(self):
        if len(self.out_scale) != self.graph.n_outputs:
            raise ValueError("out_scale length must match output count")
        if any(s <= 0 for s in self.out_scale):
            raise ValueError("out_scale entries must be positive")

    @property
    def scale(self) -> np.ndarray:
        return np.asarray(self.out_scale)

    @property
    def scale_grid(self) -> np.ndarray:
        s = self.scale
        return np.outer(s, s)

    def matrix(self) -> np.ndarray:
        """The DCT approximation this transform realises once scaled."""
        return self.scale[:, None] * implied_matrix(self.graph)


def dct2_matrix_exact() -> np.ndarray:
    """Orthonormal 8-point DCT-II, ``C[k, n] = c_k/2 * cos((2n+1) k pi / 16)``."""
    k = np.arange(N)[:, None]
    n = np.arange(N)[None, :]
    c = np.where(k == 0, 1 / SQRT2, 1.0)
    return c * 0.5 * np.cos((2 * n + 1) * k * np.pi / 16)


def _rotate(b: GraphBuilder, spec: RotationSpec, x: int, y: int, tag: str) -> tuple[int, int]:
    if spec.plan is not None:
        return expand_to_graph(spec.plan, b, x, y, tag=tag)
    c, s = math.cos(spec.angle), math.sin(spec.angle)
    xo = b.sub(b.mul(x, c, tag), b.mul(y, s, tag), tag=tag)
    yo = b.add(b.mul(x, s, tag), b.mul(y, c, tag), tag=tag)
    return xo, yo


def _build_graph(alpha: RotationSpec, beta: RotationSpec, gamma: RotationSpec) -> FlowGraph:
    b = GraphBuilder()
    x = [b.input(p, tag=f"x{p}") for p in range(N)]

    s = [b.add(x[n], x[7 - n], tag="s1") for n in range(4)]
    d0 = b.sub(x[0], x[7], tag="s1")
    d1 = b.sub(x[1], x[6], tag="s1")
    d2 = b.sub(x[2], x[5], tag="s1")
    d3 = b.sub(x[4], x[3], tag="s1")

    e0 = b.add(s[0], s[3], tag="even")
    e3 = b.sub(s[0], s[3], tag="even")
    e1 = b.add(s[1], s[2], tag="even")
    e2 = b.sub(s[2], s[1], tag="even")
    X0 = b.add(e0, e1, tag="even")
    X4 = b.sub(e0, e1, tag="even")
    X6, X2 = _rotate(b, alpha, e2, e3, "alpha")

    u0, u1 = _rotate(b, gamma, d1, d2, "gamma")
    v0, v1 = _rotate(b, beta, d3, d0, "beta")
    X1 = b.add(u0, v1, tag="s5")
    p = b.sub(u0, v1, tag="s5")
    X7 = b.add(u1, v0, tag="s5")
    q = b.sub(v0, u1, tag="s5")
    neg_p = b.neg(p, tag="s5.upper")
    neg_q = b.neg(q, tag="s5.lower")
    X3 = b.sub(neg_p, neg_q, tag="s6")
    X5 = b.add(neg_p, neg_q, tag="s6")

    for port, nid in enumerate((X0, X1, X2, X3, X4, X5, X6, X7)):
        b.output(port, nid, tag=f"X{port}")
    return b.build()


def _out_scale(alpha: RotationSpec, beta: RotationSpec, gamma: RotationSpec) -> tuple[float, ...]:
    if not math.isclose(beta.gain, gamma.gain, rel_tol=0, abs_tol=0):
        raise ValueError("beta and gamma rotations must share one gain")
    ka, kb = alpha.gain, beta.gain
    dc = 1 / (2 * SQRT2)
    return (dc, 1 / (2 * kb), 1 / (2 * ka), 1 / (2 * SQRT2 * kb),
            dc, 1 / (2 * SQRT2 * kb), 1 / (2 * ka), 1 / (2 * kb))


class RewriteResult(NamedTuple):
    graph: FlowGraph
    changed: int
    uncompensated: frozenset[int] = frozenset()


def _merge_one(nodes: list[Node], users: list[list[int]], nid: int) -> bool:
    src = nodes[nid].args[0]
    plan = {}
    for u in users[nid]:
        un = nodes[u]
        if un.args.count(nid) != 1:
            return False
        if un.op is Op.ADD and un.carry == 0:
            other = un.args[1] if un.args[0] == nid else un.args[0]
            plan[u] = un.replace(op=Op.SUB, args=(other, src))
        elif un.op is Op.SUB and un.args[1] == nid:
            plan[u] = un.replace(op=Op.ADD, args=(un.args[0], src), carry=0)
        else:
            return False
    if not plan:
        return False
    for u, new in plan.items():
        nodes[u] = new
    return True


def rewrite_merge_neg_into_adder(graph: FlowGraph) -> RewriteResult:
    """Fold negations into the adders that consume them.

    ``x + (-y)`` becomes ``x - y`` and ``x - (-y)`` becomes ``x + y``.  A
    negation is only removed when every consumer can absorb it; one that
    feeds the left side of a subtraction stays.  ``changed`` counts the
    removed NEG nodes (zero means the graph came back untouched).
    """
    nodes = list(graph.nodes)
    merged = 0
    progress = True
    while progress:
        progress = False
        g = FlowGraph(nodes)
        users = g.consumers()
        for nid, n in enumerate(nodes):
            if n.op is Op.NEG and users[nid] and _merge_one(nodes, users, nid):
                nodes = list(prune(nodes).nodes)
                merged += 1
                progress = True
                break
    if not merged:
        return RewriteResult(graph, 0)
    return RewriteResult(FlowGraph(nodes), merged)


def _downstream_outputs(graph: FlowGraph, start: int) -> set[int]:
    reach = {start}
    ports = set()
    for nid in range(start, len(graph)):
        n = graph[nid]
        if nid in reach or any(a in reach for a in n.args):
            reach.add(nid)
            if n.op is Op.OUTPUT:
                ports.add(n.port)
    return ports


def rewrite_neg_to_not_with_carry(graph: FlowGraph,
                                  allow_uncompensated: frozenset[int] | set[int] = frozenset()) -> RewriteResult:
    """Replace each NEG by a NOT gate and move the ``+1`` into a carry input.

    ``-a = ~a + 1``: every consuming ADD with a free carry port gets
    ``carry=1``.  Consumers whose carry is taken (SUB already uses it, or an
    ADD already carrying), and consumers that drive a port listed in
    ``allow_uncompensated``, get no ``+1``; the ports they reach must all be
    in ``allow_uncompensated`` or :class:`GraphError` is raised.
    """
    allow = frozenset(allow_uncompensated)
    users = graph.consumers()
    nodes = list(graph.nodes)
    changed = 0
    short: set[int] = set()
    for nid, n in enumerate(graph.nodes):
        if n.op is not Op.NEG:
            continue
        for u in users[nid]:
            un = nodes[u]
            if un.op is Op.OUTPUT:
                if un.port not in allow:
                    raise GraphError(f"NEG node {nid} drives output {un.port} directly; no carry to use")
                short.add(un.port)
                continue
            if un.op not in (Op.ADD, Op.SUB):
                raise GraphError(f"NEG node {nid} feeds a {un.op.value} node; cannot place the carry")
            drives = {nodes[w].port for w in users[u] if nodes[w].op is Op.OUTPUT}
            free = un.op is Op.ADD and un.carry == 0 and un.args.count(nid) == 1
            if free and not (drives & allow):
                nodes[u] = un.replace(carry=1)
            else:
                reached = _downstream_outputs(graph, u)
                if not reached <= allow:
                    raise GraphError(f"NEG node {nid} would leave outputs {sorted(reached - allow)} uncompensated")
                short |= reached
        nodes[nid] = n.replace(op=Op.NOT)
        changed += 1
    if not changed:
        return RewriteResult(graph, 0)
    return RewriteResult(FlowGraph(nodes), changed, frozenset(short))


def variant_rotations(variant: Variant) -> tuple[RotationSpec, RotationSpec, RotationSpec]:
    if variant is Variant.REFERENCE:
        return RotationSpec(ALPHA), RotationSpec(BETA), RotationSpec(GAMMA)
    return RotationSpec(ALPHA, PLAN_ALPHA), RotationSpec(BETA, PLAN_BETA), RotationSpec(GAMMA, PLAN_GAMMA)


def build_with(alpha: RotationSpec, beta: RotationSpec, gamma: RotationSpec,
               variant: Variant = Variant.C_RAW) -> ScaledTransform:
    """Build the shared wiring with arbitrary rotation implementations."""
    graph = _build_graph(alpha, beta, gamma)
    return ScaledTransform(graph, _out_scale(alpha, beta, gamma), variant, (alpha, beta, gamma))


@functools.lru_cache(maxsize=None)
def build(variant: Variant | str) -> ScaledTransform:
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    rots = variant_rotations(variant)
    if variant in (Variant.REFERENCE, Variant.C_RAW):
        return build_with(*rots, variant=variant)
    raw = build(Variant.C_RAW)
    g1 = rewrite_merge_neg_into_adder(raw.graph).graph
    if variant is Variant.C_I:
        return ScaledTransform(g1, raw.out_scale, variant, rots)
    r2 = rewrite_neg_to_not_with_carry(g1, allow_uncompensated={UNCOMPENSATED_PORT})
    return ScaledTransform(r2.graph, raw.out_scale, variant, rots, r2.uncompensated)


# --------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class FixedPointConfig:
    """Terminal widths plus the internal datapath width."""

    in_width: int = 8
    out_width: int = 12
    internal_width: int = 16
    in_frac: int = 0
    overflow: Overflow = Overflow.WRAP

    def __post_init__(self):
        object.__setattr__(self, "overflow", Overflow(self.overflow))
        FxpFormat(self.in_width, self.in_frac)
        FxpFormat(self.out_width, 0)
        if self.internal_width < self.in_width:
            raise ValueError("internal width must be at least the input width")

    @property
    def input_format(self) -> FxpFormat:
        return FxpFormat(self.in_width, self.in_frac, self.overflow)

    def column_pass(self, row_output: FxpFormat) -> "FixedPointConfig":
        """Config for the second (column) pass of a 2-D transform."""
        grow = 4
        return FixedPointConfig(row_output.width, self.out_width + grow, self.internal_width + grow,
                                row_output.frac, self.overflow)


Mode = Union[str, FixedPointConfig]


@functools.lru_cache(maxsize=64)
def formats_for(graph: FlowGraph, config: FixedPointConfig) -> Formats:
    return assign_formats(graph, config.input_format, config.internal_width, config.out_width, config.overflow)


def _is_real(mode: Mode) -> bool:
    if isinstance(mode, FixedPointConfig):
        return False
    if mode == "real":
        return True
    if mode == "fxp":
        return False
    raise ValueError(f"unknown mode {mode!r}")


def _config(mode: Mode) -> FixedPointConfig:
    return mode if isinstance(mode, FixedPointConfig) else FixedPointConfig()


def transform_1d(t: ScaledTransform, x, mode: Mode = "real") -> tuple[np.ndarray, np.ndarray]:
    """Run the graph on 8 samples (axis 0; trailing axes are a batch).

    Returns the unscaled outputs and ``out_scale``.  In fixed-point mode
    ``x`` holds raw input integers and outputs are the real values of the
    output words.
    """
    x = np.asarray(x)
    if x.shape[:1] != (N,):
        raise ValueError(f"expected {N} samples on axis 0, got shape {x.shape}")
    if _is_real(mode):
        return eval_real(t.graph, x), t.scale
    cfg = _config(mode)
    fm = formats_for(t.graph, cfg)
    raw = eval_fxp_batch(t.graph, x, fm)
    return raw * fm.output.ulp, t.scale


def transform_1d_raw(t: ScaledTransform, raw, config: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """Fixed-point outputs as raw integers of the output format."""
    return eval_fxp_batch(t.graph, np.asarray(raw), formats_for(t.graph, config))


def transform_2d(t: ScaledTransform, block, mode: Mode = "real") -> tuple[np.ndarray, np.ndarray]:
    """Row-column 2-D transform of one block or a stack of blocks (``..., 8, 8``).

    Returns unscaled coefficients and the separable scale grid.
    """
    b = np.asarray(block)
    if b.shape[-2:] != (N, N):
        raise ValueError(f"expected trailing 8x8 blocks, got shape {b.shape}")
    lead = b.shape[:-2]
    flat = b.reshape(-1, N, N)
    # rows: samples on axis 0, (block, row) as batch
    rows_in = np.moveaxis(flat, 2, 0).reshape(N, -1)
    if _is_real(mode):
        r = eval_real(t.graph, rows_in)
        r = r.reshape(N, -1, N)  # (coef, block, row)
        cols_in = r.transpose(2, 1, 0).reshape(N, -1)  # (row, block, coefH)
        c = eval_real(t.graph, cols_in).reshape(N, -1, N)  # (coefV, block, coefH)
        out = np.moveaxis(c, 1, 0)
        return out.reshape(*lead, N, N), t.scale_grid
    cfg = _config(mode)
    f1 = formats_for(t.graph, cfg)
    r = eval_fxp_batch(t.graph, rows_in.astype(np.int64), f1).reshape(N, -1, N)
    cfg2 = cfg.column_pass(f1.output)
    f2 = formats_for(t.graph, cfg2)
    cols_in = r.transpose(2, 1, 0).reshape(N, -1)
    c = eval_fxp_batch(t.graph, cols_in, f2).reshape(N, -1, N)
    out = np.moveaxis(c, 1, 0) * f2.output.ulp
    return out.reshape(*lead, N, N), t.scale_grid


def fxp_difference(a: ScaledTransform, b: ScaledTransform, raw_inputs,
                   config: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """Raw output differences ``b - a`` per port for a batch of inputs."""
    return transform_1d_raw(b, raw_inputs, config) - transform_1d_raw(a, raw_inputs, config)


# --------------------------------------------------------------------------
# accuracy


@dataclass
class AccuracyReport:
    variant: Variant
    matrix_max_abs: float
    matrix_frobenius: float
    trials: int = 0
    seed: int | None = None
    fxp_max_abs: float | None = None
    fxp_rms: float | None = None
    fxp_port_max_abs: list[float] | None = None
    rounding_max_abs: float | None = None
    rounding_rms: float | None = None
    formats: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "matrix_max_abs": self.matrix_max_abs,
            "matrix_frobenius": self.matrix_frobenius,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.fxp_max_abs is not None:
            d.update(
                fxp_max_abs=self.fxp_max_abs,
                fxp_rms=self.fxp_rms,
                fxp_port_max_abs=self.fxp_port_max_abs,
                rounding_max_abs=self.rounding_max_abs,
                rounding_rms=self.rounding_rms,
                formats=self.formats,
            )
        return d


def matrix_error(t: ScaledTransform) -> tuple[float, float]:
    diff = t.matrix() - dct2_matrix_exact()
    return float(np.max(np.abs(diff))), float(np.linalg.norm(diff))


def accuracy_report(variant: Variant | str, trials: int = 1000, seed: int = 0,
                    config: FixedPointConfig = FixedPointConfig()) -> AccuracyReport:
    """Matrix error against the exact DCT, plus fixed-point statistics.

    The fixed-point part draws ``trials`` random 8x8 blocks of full-range
    signed input samples, runs the 2-D fixed-point transform, scales the
    outputs and compares with the exact 2-D DCT (``fxp_*``) and with the
    same graph in real arithmetic (``rounding_*``, datapath rounding only).
    Graphs with real multipliers skip the fixed-point part.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t = build(variant) if not isinstance(variant, ScaledTransform) else variant
    mx, fro = matrix_error(t)
    rep = AccuracyReport(t.variant, mx, fro, trials, seed)
    if t.graph.count(Op.MUL):
        return rep
    rng = np.random.default_rng(seed)
    fin = config.input_format
    blocks = rng.integers(fin.min_raw, fin.max_raw + 1, size=(trials, N, N))
    y_fx, grid = transform_2d(t, blocks, config)
    y_fx = y_fx * grid
    x_real = blocks * fin.ulp
    c = dct2_matrix_exact()
    exact = c @ x_real @ c.T
    y_re, _ = transform_2d(t, x_real, "real")
    y_re = y_re * grid
    err = y_fx - exact
    rnd = y_fx - y_re
    f1 = formats_for(t.graph, config)
    f2 = formats_for(t.graph, config.column_pass(f1.output))
    rep.fxp_max_abs = float(np.max(np.abs(err)))
    rep.fxp_rms = float(np.sqrt(np.mean(err ** 2)))
    rep.fxp_port_max_abs = [float(v) for v in np.max(np.abs(err), axis=(0, 2))]
    rep.rounding_max_abs = float(np.max(np.abs(rnd)))
    rep.rounding_rms = float(np.sqrt(np.mean(rnd ** 2)))
    rep.formats = {
        "input": [fin.width, fin.frac],
        "row_internal": [f1.internal.width, f1.internal.frac],
        "row_output": [f1.output.width, f1.output.frac],
        "column_internal": [f2.internal.width, f2.internal.frac],
        "column_output": [f2.output.width, f2.output.frac],
    }
    return rep
