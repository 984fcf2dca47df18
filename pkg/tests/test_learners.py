import numpy as np
import pytest

from implicitcoin.learners import (CORNER_RESIDUAL_BAND, CoordinateImplicitCoin,
                                   ImplicitCoin, ProjectedImplicitCoin,
                                   SHRINK_GAIN, SHRINK_THRESHOLD, wealth_update)
from implicitcoin.rootsolve import bisect
from implicitcoin.truncated import TruncatedModel, linear_residual, make_pair


def residual_of(trace):
    m = TruncatedModel(anchor=trace.w, grad=trace.g, loss_at_anchor=trace.loss_value)
    return linear_residual(m, trace.w_next)


def run_absolute_1d(learner, targets):
    """Drive a 1-d learner with |w - c| losses; returns the visited iterates."""
    w = learner.predict()
    path = [float(w[0])]
    for c in targets:
        x = float(w[0])
        loss = abs(x - c)
        g = np.array([0.0 if x == c else (1.0 if x > c else -1.0)])
        w = learner.step(loss, g)
        path.append(float(w[0]))
    return path


def fuzz_rounds(learner, n, seed, loss_hi=10.0):
    rng = np.random.default_rng(seed)
    d = learner.dim
    for _ in range(n):
        g = rng.normal(size=d)
        g *= rng.uniform(0.0, 1.0) / np.linalg.norm(g)
        learner.step(rng.uniform(0.0, loss_hi), g)


class TestHandTraces:
    def test_projected_first_round(self):
        traces = []
        l = ProjectedImplicitCoin(1, trace_cb=traces.append)
        w = l.step(10.0, np.array([-1.0]))
        assert w[0] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert l.beta[0] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert l.wealth == 1.0
        assert traces[0].h == 1.0

    def test_closed_form_first_round_constants(self):
        l = ImplicitCoin(1)
        assert l.inv_eta == 18.0  # eta_1 = 1/(2*gain) with gain 9
        assert SHRINK_GAIN == 9.0
        w = l.step(10.0, np.array([-1.0]))
        assert w[0] == pytest.approx(1.0 / 18.0, abs=1e-15)
        assert l.wealth == 1.0

    def test_coordinate_first_round(self):
        l = CoordinateImplicitCoin(2)
        l.step(10.0, np.array([-1.0, 0.0]))
        np.testing.assert_allclose(l.beta, [1.0 / 18.0, 0.0], atol=1e-15)
        np.testing.assert_array_equal(l.wealth, [1.0, 1.0])

    def test_predict_examples(self):
        l = ProjectedImplicitCoin(1)
        assert l.predict()[0] == 0.0
        l.beta = np.array([1.0 / 3.0])
        assert l.predict()[0] == pytest.approx(1.0 / 3.0)
        c = CoordinateImplicitCoin(2)
        c.beta = np.array([0.1, -0.2])
        c.wealth = np.array([1.0, 2.0])
        np.testing.assert_allclose(c.predict(), [0.1, -0.4], atol=1e-15)


class TestZeroGradient:
    @pytest.mark.parametrize("cls", [ProjectedImplicitCoin, ImplicitCoin,
                                     CoordinateImplicitCoin])
    def test_full_noop(self, cls):
        traces = []
        l = cls(3, trace_cb=traces.append)
        l.step(1.0, np.array([0.3, 0.0, 0.1]))
        beta = l.beta.copy()
        wealth = np.copy(l.wealth)
        inv_eta = np.copy(l.inv_eta)
        w_next = l.step(2.0, np.zeros(3))
        np.testing.assert_array_equal(l.beta, beta)
        np.testing.assert_array_equal(l.wealth, wealth)
        np.testing.assert_array_equal(l.inv_eta, inv_eta)
        np.testing.assert_array_equal(w_next, l.predict())
        assert traces[-1].h == 0.0
        assert traces[-1].t == 2


class TestGradientGuard:
    @pytest.mark.parametrize("cls", [ProjectedImplicitCoin, ImplicitCoin])
    def test_rejects_large_norm(self, cls):
        l = cls(2)
        with pytest.raises(ValueError, match="unit bound"):
            l.step(1.0, np.array([1.0, 1.0]))

    def test_coordinate_bound_is_per_entry(self):
        l = CoordinateImplicitCoin(2)
        l.step(1.0, np.array([1.0, 1.0]))  # max entry 1: fine coordinate-wise
        with pytest.raises(ValueError, match="unit bound"):
            l.step(1.0, np.array([1.5, 0.0]))

    @pytest.mark.parametrize("cls", [ProjectedImplicitCoin, ImplicitCoin,
                                     CoordinateImplicitCoin])
    def test_tiny_excess_renormalized_with_warning(self, cls):
        l = cls(1)
        l.step(1.0, np.array([1.0 + 5e-10]))
        assert l.grad_norm_warnings == 1

    def test_rejects_negative_loss(self):
        with pytest.raises(ValueError, match=">= 0"):
            ImplicitCoin(1).step(-0.5, np.array([1.0]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            ImplicitCoin(2).step(1.0, np.zeros(3))


class TestCornerBehaviour:
    @pytest.mark.parametrize("cls", [ProjectedImplicitCoin, ImplicitCoin,
                                     CoordinateImplicitCoin])
    def test_corner_round_lands_within_band(self, cls):
        traces = []
        l = cls(1, trace_cb=traces.append)
        run_absolute_1d(l, [10.0] * 40)
        corners = [tr for tr in traces if 0.0 < tr.h < 1.0]
        assert corners, "the walk toward 10 must produce a corner round"
        for tr in corners:
            assert abs(residual_of(tr)) <= CORNER_RESIDUAL_BAND

    def test_exactly_at_minimum_and_stays(self):
        l = ImplicitCoin(1)
        path = run_absolute_1d(l, [10.0] * 60)
        hit = next(i for i, x in enumerate(path) if abs(x - 10.0) <= 1e-8)
        assert all(abs(x - 10.0) <= 1e-8 for x in path[hit:])

    def test_h_stays_in_unit_and_full_rounds_are_bit_exact(self):
        traces = []
        l = ImplicitCoin(2, trace_cb=traces.append)
        fuzz_rounds(l, 500, seed=5, loss_hi=0.2)
        assert all(0.0 <= tr.h <= 1.0 for tr in traces)
        for tr in traces:
            if tr.h == 1.0:
                np.testing.assert_array_equal(make_pair(tr.g, tr.h).g_plus, tr.g)

    def test_closed_form_h_matches_bisection_oracle(self):
        rng = np.random.default_rng(17)
        traces = []
        l = ImplicitCoin(2, trace_cb=traces.append)
        checked = 0
        for _ in range(1500):
            state = (l.beta.copy(), float(l.wealth), float(l.inv_eta))
            g = rng.normal(size=2)
            g *= rng.uniform(0.1, 1.0) / np.linalg.norm(g)
            loss = rng.uniform(0.0, 0.02)
            l.step(loss, g)
            tr = traces[-1]
            if not 0.0 < tr.h < 1.0:
                continue
            h_oracle = bisect(_update_map_residual(state, loss, g), 0.0, 1.0, 1e-9)
            assert abs(tr.h - h_oracle) <= 1e-6
            checked += 1
        assert checked > 50
        assert l.corner_fallbacks == 0


def _update_map_residual(state, loss, g):
    """Corner equation built from public pieces only (oracle for the cubic)."""
    beta, wealth, inv_eta = state

    def r(h):
        pair = make_pair(g, h)
        if np.linalg.norm(beta) < SHRINK_THRESHOLD:
            gain = 2.0 * np.linalg.norm(g) * np.linalg.norm(pair.g_plus) \
                - np.linalg.norm(pair.g_plus) ** 2
            beta_next = beta - (pair.g_plus + 2.0 * gain * beta) / inv_eta
        else:
            beta_next = beta * (1.0 - 2.0 * SHRINK_GAIN * np.linalg.norm(pair.g_plus) / inv_eta)
        wealth_next = wealth_update(wealth, beta, pair, beta_next)
        w, w_next = beta * wealth, beta_next * wealth_next
        return loss + float(g @ (w_next - w))

    return r


class TestWealthBookkeeping:
    def test_wealth_update_full_round_is_numerator_only(self):
        beta = np.array([0.2, -0.1])
        g = np.array([0.5, 0.5])
        pair = make_pair(g, 1.0)
        got = wealth_update(2.0, beta, pair, np.array([0.3, 0.0]))
        assert got == pytest.approx(2.0 * (1.0 - g @ beta), abs=1e-15)

    def test_wealth_update_zero_fraction_numerator_is_one(self):
        pair = make_pair(np.array([0.7]), 0.25)
        got = wealth_update(3.0, np.zeros(1), pair, np.array([0.1]))
        assert got == pytest.approx(3.0 / (1.0 + (0.25 - 1.0) * 0.7 * 0.1), abs=1e-14)

    @pytest.mark.parametrize("cls,eps", [(ProjectedImplicitCoin, 1.0),
                                         (ImplicitCoin, 1.0),
                                         (CoordinateImplicitCoin, 3.0)])
    def test_recursion_matches_additive_expansion(self, cls, eps):
        traces = []
        l = cls(3, trace_cb=traces.append)
        fuzz_rounds(l, 2000, seed=29, loss_hi=1.0)
        spent = 0.0
        for tr in traces:
            g_plus = tr.h * tr.g
            spent += float(tr.g @ (tr.w - tr.w_next)) + float(g_plus @ tr.w_next)
            assert abs(tr.wealth_after - (eps - spent)) <= 1e-9 * max(1.0, abs(tr.wealth_after))

    @pytest.mark.parametrize("cls", [ProjectedImplicitCoin, ImplicitCoin])
    def test_wealth_stays_positive(self, cls):
        l = cls(2)
        fuzz_rounds(l, 3000, seed=31, loss_hi=0.5)
        assert l.wealth > 0.0


class TestStateInvariants:
    def test_projected_fraction_inside_half_ball(self):
        l = ProjectedImplicitCoin(3)
        worst = 0.0
        rng = np.random.default_rng(41)
        for _ in range(3000):
            g = rng.normal(size=3)
            g /= np.linalg.norm(g)  # adversarially large coins
            l.step(rng.uniform(0.0, 0.2), g)
            worst = max(worst, float(np.linalg.norm(l.beta)))
        assert worst <= 0.5 + 1e-12

    def test_closed_form_fraction_inside_half_ball_without_projection(self):
        l = ImplicitCoin(1)
        worst = 0.0
        for _ in range(3000):
            l.step(0.01, np.array([-1.0]))  # constant coin drives beta outward
            worst = max(worst, abs(float(l.beta[0])))
        assert worst <= 0.5 + 1e-12

    def test_projected_step_size_lemma(self):
        traces = []
        l = ProjectedImplicitCoin(2, trace_cb=traces.append)
        fuzz_rounds(l, 2000, seed=43, loss_hi=0.5)
        pair_sum = 0.0
        for tr in traces:
            norm_g = float(np.linalg.norm(tr.g))
            norm_gp = tr.h * norm_g
            pair_sum += norm_g * norm_gp
            step = float(np.linalg.norm(tr.beta_next - tr.beta))
            assert step <= 3.0 * norm_gp / (1.0 + 2.0 * pair_sum) + 1e-12

    def test_projected_inv_eta_matches_trace_accumulation(self):
        traces = []
        l = ProjectedImplicitCoin(2, trace_cb=traces.append)
        fuzz_rounds(l, 500, seed=47, loss_hi=0.5)
        acc = 3.0
        for tr in traces:
            gg = float(tr.g @ tr.g)
            acc += 2.0 * gg * tr.h * (2.0 - tr.h)
        assert l.inv_eta == pytest.approx(acc, rel=1e-12)

    def test_closed_form_inv_eta_branches(self):
        # small-fraction branch accumulates 2*||g||^2*h*(2-h); shrink branch 2*gain*||g+||
        l = ImplicitCoin(1)
        l.step(10.0, np.array([-1.0]))  # h=1, small branch
        assert l.inv_eta == pytest.approx(20.0, abs=1e-12)
        l.beta = np.array([0.4])  # force the shrink branch
        l.step(10.0, np.array([-1.0]))
        assert l.inv_eta == pytest.approx(20.0 + 2.0 * SHRINK_GAIN, abs=1e-12)


class TestCoordinateMatchesClosedFormIn1d:
    def test_trajectories_agree(self):
        rng = np.random.default_rng(53)
        a = ImplicitCoin(1)
        b = CoordinateImplicitCoin(1)
        wa = a.predict()
        wb = b.predict()
        for _ in range(500):
            c = float(rng.normal() * 3.0)
            la = abs(float(wa[0]) - c)
            ga = np.array([np.sign(float(wa[0]) - c)])
            lb = abs(float(wb[0]) - c)
            gb = np.array([np.sign(float(wb[0]) - c)])
            wa = a.step(la, ga)
            wb = b.step(lb, gb)
            assert abs(float(wa[0]) - float(wb[0])) <= 1e-12
