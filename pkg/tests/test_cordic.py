import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cordicdct.cordic import (
    Microrotation,
    RotationPlan,
    achieved_angle,
    expand_to_graph,
    microrotation_matrix,
    paired_search,
    rotation_matrix,
    rotation_matrix_approx,
    scale_factor,
    search_atr,
)
from cordicdct.flowgraph import CriticalPath, GraphBuilder, cost_report, implied_matrix

BETA = RotationPlan.from_lists(-math.pi / 16, (1, 2, 4), (-1, 1, 1))
GAMMA = RotationPlan.from_lists(-3 * math.pi / 16, (1, 2, 4), (-1, -1, 1))
ALPHA = RotationPlan.from_lists(-math.pi / 8, (1, 4), (-1, 1))


def mp_angle(indices, sigmas):
    mpmath.mp.dps = 40
    return float(mpmath.fsum(s * mpmath.atan(mpmath.mpf(2) ** -i) for i, s in zip(indices, sigmas)))


plans = st.lists(st.tuples(st.integers(0, 12), st.sampled_from([-1, 1])), max_size=6,
                 unique_by=lambda t: t[0]).map(
    lambda steps: RotationPlan(0.0, tuple(Microrotation(i, s) for i, s in steps)))


class TestTypes:
    def test_sigma_must_be_unit(self):
        with pytest.raises(ValueError):
            Microrotation(1, 0)

    def test_repeated_index_rejected(self):
        with pytest.raises(ValueError):
            RotationPlan.from_lists(0.0, (1, 1), (1, -1))

    def test_steps_sorted_ascending(self):
        p = RotationPlan.from_lists(0.0, (4, 1, 2), (1, -1, 1))
        assert p.indices == (1, 2, 4) and p.sigmas == (-1, 1, 1)


class TestAngle:
    def test_empty(self):
        assert achieved_angle(RotationPlan(0.3)) == 0.0

    def test_beta(self):
        ref = mp_angle((1, 2, 4), (-1, 1, 1))
        assert achieved_angle(BETA) == pytest.approx(ref, abs=1e-15)
        assert round(ref, 7) == -0.1562501
        assert BETA.error == pytest.approx(0.0400994, abs=5e-8)

    def test_alpha(self):
        ref = mp_angle((1, 4), (-1, 1))
        assert achieved_angle(ALPHA) == pytest.approx(ref, abs=1e-15)
        assert round(ref, 7) == -0.4012288


class TestScale:
    def test_empty(self):
        assert scale_factor(RotationPlan(0.0)) == 1.0

    def test_values(self):
        assert scale_factor(BETA) == pytest.approx(math.sqrt(1.25 * 1.0625 * 1.00390625), abs=1e-15)
        assert scale_factor(BETA) == pytest.approx(1.1546917, abs=5e-8)
        assert scale_factor(ALPHA) == pytest.approx(math.sqrt(1.25 * 1.00390625), abs=1e-15)
        assert scale_factor(ALPHA) == pytest.approx(1.1202155, abs=5e-8)

    def test_beta_gamma_share_gain(self):
        assert scale_factor(BETA) == scale_factor(GAMMA)

    @given(plans, st.randoms())
    def test_sign_invariant(self, plan, rnd):
        flipped = RotationPlan(0.0, tuple(Microrotation(s.i, rnd.choice([-1, 1])) for s in plan.steps))
        assert scale_factor(flipped) == scale_factor(plan)


class TestMatrices:
    def test_empty_is_identity(self):
        np.testing.assert_array_equal(rotation_matrix_approx(RotationPlan(0.0)), np.eye(2))

    def test_45_degrees(self):
        m = rotation_matrix_approx(RotationPlan.from_lists(0.0, (0,), (1,)))
        np.testing.assert_allclose(m, np.array([[1, -1], [1, 1]]) / math.sqrt(2), atol=1e-15)

    def test_beta_distance_matches_angle_error(self):
        m = rotation_matrix_approx(BETA)
        d = np.linalg.norm(m - rotation_matrix(-math.pi / 16))
        # |R(a) - R(b)|_F = 2 sqrt(2) |sin((a - b) / 2)|
        expected = 2 * math.sqrt(2) * abs(math.sin(BETA.error / 2))
        assert d == pytest.approx(expected, abs=1e-12)

    @given(plans)
    def test_equals_rotation_by_achieved_angle(self, plan):
        np.testing.assert_allclose(rotation_matrix_approx(plan), rotation_matrix(plan.achieved_angle), atol=1e-12)

    @given(plans)
    def test_determinants(self, plan):
        k = plan.scale_k
        assert np.linalg.det(k * rotation_matrix_approx(plan)) == pytest.approx(k * k, abs=1e-12)
        for s in plan.steps:
            assert np.linalg.det(microrotation_matrix(s)) == pytest.approx(1 + 4.0 ** -s.i, abs=1e-12)


def rotation_graph(plan):
    b = GraphBuilder()
    x, y = b.input(), b.input()
    xo, yo = expand_to_graph(plan, b, x, y)
    b.output(0, xo)
    b.output(1, yo)
    return b.build()


class TestExpand:
    def test_empty(self):
        b = GraphBuilder()
        x, y = b.input(), b.input()
        assert expand_to_graph(RotationPlan(0.0), b, x, y) == (x, y)
        assert len(b.nodes) == 2

    @pytest.mark.parametrize("plan,m", [(BETA, 3), (GAMMA, 3), (ALPHA, 2)])
    def test_costs(self, plan, m):
        rep = cost_report(rotation_graph(plan))
        assert rep.additions == 2 * m and rep.shifts == 2 * m
        assert rep.critical_path == CriticalPath(adds=m)

    @given(plans.filter(lambda p: all(s.i > 0 for s in p.steps)))
    def test_graph_equals_algebra(self, plan):
        np.testing.assert_allclose(implied_matrix(rotation_graph(plan)), plan.scale_k * rotation_matrix_approx(plan),
                                   atol=1e-12)


def brute_best(target, indices, require_all):
    """Enumerate sigma in {-1, 0, +1} per index; 0 means the step is omitted."""
    best = None
    for sig in itertools.product((-1, 0, 1), repeat=len(indices)):
        if require_all and 0 in sig:
            continue
        err = abs(sum(s * math.atan(2.0 ** -i) for i, s in zip(indices, sig)) - target)
        steps = sum(s != 0 for s in sig)
        key = (round(err, 12), steps)
        if best is None or key < best[0]:
            best = (key, tuple((i, s) for i, s in zip(indices, sig) if s))
    return best[1]


class TestSearch:
    def test_trivial(self):
        p = search_atr(math.atan(0.5), {1}, 1)
        assert (p.indices, p.sigmas) == ((1,), (1,))
        assert p.error == 0

    def test_beta_all(self):
        p = search_atr(-math.pi / 16, {1, 2, 4}, 3, use_all=True)
        assert p.sigmas == (-1, 1, 1)
        assert tuple(zip(p.indices, p.sigmas)) == brute_best(-math.pi / 16, (1, 2, 4), True)

    def test_gamma_all(self):
        p = search_atr(-3 * math.pi / 16, {1, 2, 4}, 3, use_all=True)
        assert p.sigmas == (-1, -1, 1)
        assert tuple(zip(p.indices, p.sigmas)) == brute_best(-3 * math.pi / 16, (1, 2, 4), True)

    def test_alpha(self):
        p = search_atr(-math.pi / 8, {1, 4}, 2)
        assert (p.indices, p.sigmas) == ((1, 4), (-1, 1))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1.5, 1.5), st.sets(st.integers(0, 6), min_size=1, max_size=5))
    def test_matches_brute_force(self, target, idx):
        idx = tuple(sorted(idx))
        p = search_atr(target, idx, len(idx))
        expected = brute_best(target, idx, False)
        assert round(p.error, 12) == round(abs(sum(s * math.atan(2.0 ** -i) for i, s in expected) - target), 12)

    def test_empty_space(self):
        with pytest.raises(ValueError):
            search_atr(0.1, set(), 2, use_all=True)
        with pytest.raises(ValueError):
            search_atr(0.1, {1}, -1)


class TestPairedSearch:
    def test_variant_c(self):
        pb, pg = paired_search(-math.pi / 16, -3 * math.pi / 16, 4, 3)
        assert pb.indices == pg.indices == (1, 2, 4)
        assert pb.sigmas == (-1, 1, 1)
        assert pg.sigmas == (-1, -1, 1)
        assert pb.scale_k == pg.scale_k

    def test_oracle(self):
        # independent min-max enumeration over every index subset
        ta, tb = -math.pi / 16, -3 * math.pi / 16
        best = None
        for m in range(1, 4):
            for idx in itertools.combinations(range(5), m):
                ea = min(abs(sum(s * math.atan(2.0 ** -i) for i, s in zip(idx, sg)) - ta)
                         for sg in itertools.product((1, -1), repeat=m))
                eb = min(abs(sum(s * math.atan(2.0 ** -i) for i, s in zip(idx, sg)) - tb)
                         for sg in itertools.product((1, -1), repeat=m))
                if best is None or max(ea, eb) < best[0] - 1e-12:
                    best = (max(ea, eb), idx)
        pb, pg = paired_search(ta, tb, 4, 3)
        assert pb.indices == best[1]
        assert max(pb.error, pg.error) == pytest.approx(best[0], abs=1e-15)

    def test_identical_targets(self):
        pa, pb = paired_search(0.3, 0.3, 5, 3)
        assert pa == pb

    def test_trivial(self):
        pa, pb = paired_search(math.atan(0.5), -math.atan(0.5), 1, 1)
        assert (pa.indices, pa.sigmas) == ((1,), (1,))
        assert (pb.indices, pb.sigmas) == ((1,), (-1,))
        assert pa.error == pytest.approx(0.0, abs=1e-16)
        assert pb.error == pytest.approx(0.0, abs=1e-16)

    def test_bad_steps(self):
        with pytest.raises(ValueError):
            paired_search(0.1, 0.2, 4, 0)
