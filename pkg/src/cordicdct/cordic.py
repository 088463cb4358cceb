"""CORDIC decomposition of plane rotations into shift-add microrotations.

A rotation by ``phi`` is approximated by a sum of arctangent-radix angles
``sigma_i * atan(2**-i)``.  Each microrotation scales the vector by
``sqrt(1 + 2**-2i)``; that gain is not compensated in the datapath but
reported as :attr:`RotationPlan.scale_k` so callers can fold ``1/K`` into
later scaling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .flowgraph import GraphBuilder

# errors closer than this are treated as ties
_TIE_EPS = 1e-12


@dataclass(frozen=True, order=True)
class Microrotation:
    i: int
    sigma: int

    def __post_init__(self):
        if self.i < 0:
            raise ValueError(f"shift index must be >= 0, got {self.i}")
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")

    @property
    def angle(self) -> float:
        return self.sigma * math.atan(2.0 ** -self.i)


@dataclass(frozen=True)
class RotationPlan:
    target_angle: float
    steps: tuple[Microrotation, ...] = ()

    def __post_init__(self):
        steps = tuple(sorted(self.steps, key=lambda s: s.i))
        idx = [s.i for s in steps]
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated shift index in {idx}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_lists(cls, target: float, indices: Sequence[int], sigmas: Sequence[int]) -> "RotationPlan":
        if len(indices) != len(sigmas):
            raise ValueError("indices and sigmas differ in length")
        return cls(target, tuple(Microrotation(i, s) for i, s in zip(indices, sigmas)))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(s.i for s in self.steps)

    @property
    def sigmas(self) -> tuple[int, ...]:
        return tuple(s.sigma for s in self.steps)

    @property
    def achieved_angle(self) -> float:
        return achieved_angle(self)

    @property
    def scale_k(self) -> float:
        return scale_factor(self)

    @property
    def error(self) -> float:
        return abs(self.achieved_angle - self.target_angle)

    def __str__(self):
        body = ", ".join(f"({s.i},{s.sigma:+d})" for s in self.steps)
        return f"[{body}] -> {self.achieved_angle:.7f} rad (target {self.target_angle:.7f})"


def achieved_angle(plan: RotationPlan) -> float:
    return math.fsum(s.angle for s in plan.steps)


def scale_factor(plan: RotationPlan) -> float:
    return math.sqrt(math.prod(1.0 + 4.0 ** -s.i for s in plan.steps))


def rotation_matrix(phi: float) -> np.ndarray:
    """Plane rotation ``[[cos, -sin], [sin, cos]]``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def microrotation_matrix(step: Microrotation) -> np.ndarray:
    t = step.sigma * 2.0 ** -step.i
    return np.array([[1.0, -t], [t, 1.0]])


def rotation_matrix_approx(plan: RotationPlan) -> np.ndarray:
    """``(1/K) * prod`` of the unscaled microrotation matrices, applied in step order."""
    m = np.eye(2)
    for step in plan.steps:
        m = microrotation_matrix(step) @ m
    return m / plan.scale_k


def expand_to_graph(plan: RotationPlan, builder: GraphBuilder, x_in: int, y_in: int,
                    tag: str = "") -> tuple[int, int]:
    """Append the shift-add iterations for ``plan`` and return the new (x, y) nodes.

    Each step adds two shifts and two adders::

        x' = x - sigma * (y >> i)
        y' = y + sigma * (x >> i)

    The result is the rotation scaled by ``K``; no compensation is emitted.
    """
    x, y = x_in, y_in
    for step in plan.steps:
        label = f"{tag}.i{step.i}" if tag else f"i{step.i}"
        ys = builder.shr(y, step.i, tag=label)
        xs = builder.shr(x, step.i, tag=label)
        if step.sigma > 0:
            x, y = builder.sub(x, ys, tag=label), builder.add(y, xs, tag=label)
        else:
            x, y = builder.add(x, ys, tag=label), builder.sub(y, xs, tag=label)
    return x, y


def _plan_key(plan: RotationPlan) -> tuple:
    return (round(plan.error / _TIE_EPS), len(plan.steps), plan.scale_k, plan.indices, plan.sigmas)


def _sign_patterns(indices: Sequence[int]) -> Iterable[RotationPlan]:
    for sig in itertools.product((-1, 1), repeat=len(indices)):
        yield tuple(Microrotation(i, s) for i, s in zip(indices, sig))


def best_signs(target: float, indices: Sequence[int]) -> RotationPlan:
    """Best sign assignment when every index in ``indices`` is used."""
    return min((RotationPlan(target, steps) for steps in _sign_patterns(indices)), key=_plan_key)


def search_atr(target: float, allowed_indices: Iterable[int], max_steps: int,
               use_all: bool = False) -> RotationPlan:
    """Exhaustive search for the microrotation set closest to ``target``.

    Each index is used at most once.  With ``use_all`` only plans containing
    every allowed index are considered.  Ties go to fewer steps, then to the
    smaller scale factor.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    allowed = sorted(set(allowed_indices))
    if any(i < 0 for i in allowed):
        raise ValueError("shift indices must be >= 0")
    if use_all:
        if len(allowed) > max_steps or not allowed:
            raise ValueError("empty search space")
        sizes: Iterable[int] = [len(allowed)]
    else:
        sizes = range(0, min(max_steps, len(allowed)) + 1)
    best = None
    for m in sizes:
        for idx in itertools.combinations(allowed, m):
            cand = best_signs(target, idx)
            if best is None or _plan_key(cand) < _plan_key(best):
                best = cand
    if best is None:
        raise ValueError("empty search space")
    return best


def paired_search(target_a: float, target_b: float, index_budget: int,
                  max_steps: int) -> tuple[RotationPlan, RotationPlan]:
    """Find one index set serving two angles, so both plans share ``K``.

    Signs are chosen independently per plan.  The index set minimises the
    larger of the two angle errors; ties go to fewer steps, then smaller
    ``K``, then the smaller summed error.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if index_budget < 0:
        raise ValueError("empty search space")
    best = None
    best_key = None
    for m in range(1, min(max_steps, index_budget + 1) + 1):
        for idx in itertools.combinations(range(index_budget + 1), m):
            pa, pb = best_signs(target_a, idx), best_signs(target_b, idx)
            worst = max(pa.error, pb.error)
            key = (round(worst / _TIE_EPS), m, pa.scale_k, round((pa.error + pb.error) / _TIE_EPS), idx)
            if best_key is None or key < best_key:
                best, best_key = (pa, pb), key
    if best is None:
        raise ValueError("empty search space")
    return best
