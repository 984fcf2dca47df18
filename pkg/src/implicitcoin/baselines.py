"""Comparison algorithms: tuned gradient-descent family and parameter-free coins.

Every algorithm exposes predict() and step(loss_value, g, ex=None) -> w_next
and consumes exactly one subgradient per round, so the benchmark harness can
drive them all through one loop. String names are registered at the bottom.
"""

import math

import numpy as np

from .learners import CoordinateImplicitCoin, ImplicitCoin

COCOB_ALPHA = 100.0
COCOB_EPS = 1e-8


class Sgd:
    """Subgradient descent with the decaying schedule eta0 / sqrt(k)."""

    def __init__(self, dim, eta0):
        if eta0 <= 0:
            raise ValueError(f"eta0 must be positive, got {eta0}")
        self.w = np.zeros(int(dim))
        self.eta0 = float(eta0)
        self.k = 0

    def predict(self):
        return self.w.copy()

    def _eta(self):
        return self.eta0 / math.sqrt(self.k)

    def step(self, loss_value, g, ex=None):
        g = np.asarray(g, dtype=np.float64)
        self.k += 1
        self.w = self.w - self._eta() * g
        return self.w.copy()


class AProx(Sgd):
    """Proximal step on the truncated model: the step length is capped at
    loss / ||g||^2, the exact distance to the model corner, so the iterate
    never crosses it."""

    def step(self, loss_value, g, ex=None):
        g = np.asarray(g, dtype=np.float64)
        self.k += 1
        gg = float(g @ g)
        if gg > 0.0:
            self.w = self.w - min(self._eta(), float(loss_value) / gg) * g
        return self.w.copy()


class ImportanceAwareSgd(Sgd):
    """Closed form of the accumulated-infinitesimal update for hinge and
    absolute losses at unit importance weight.

    Sliding the predictor along -g, both losses stay linear until the point
    where they vanish, so the integrated update stops exactly there; for
    these two losses that is the same cap as the AProx step, which the test
    suite asserts as a cross-check.
    """

    def __init__(self, dim, eta0, loss_kind):
        super().__init__(dim, eta0)
        if loss_kind not in ("hinge", "absolute"):
            raise ValueError(f"unsupported loss kind {loss_kind!r}")
        self.loss_kind = loss_kind

    def step(self, loss_value, g, ex=None):
        g = np.asarray(g, dtype=np.float64)
        self.k += 1
        if ex is None:
            raise ValueError("importance-aware update needs the example")
        xx = float(ex.x @ ex.x)
        if xx > 0.0 and float(loss_value) > 0.0:
            if self.loss_kind == "hinge":
                slack = 1.0 - ex.y * float(self.w @ ex.x)
            else:
                slack = abs(float(self.w @ ex.x) - ex.y)
            if slack > 0.0:
                self.w = self.w - min(self._eta(), slack / xx) * g
        return self.w.copy()


class KtCoin:
    """Coin betting with the classic sequential-probability betting fraction:
    bet (sum of past coins) / (rounds + 1) times the current wealth.

    Zero coins carry no information and would still shrink the fraction
    through the round count, so only betting rounds feed the divisor; that
    keeps g = 0 a true no-op.
    """

    def __init__(self, dim, initial_wealth=1.0):
        self.dim = int(dim)
        self.w = np.zeros(self.dim)
        self.coin_sum = np.zeros(self.dim)
        self.wealth = float(initial_wealth)
        self.k = 0
        self.rounds_bet = 0

    def predict(self):
        return self.w.copy()

    def step(self, loss_value, g, ex=None):
        g = np.asarray(g, dtype=np.float64)
        self.k += 1
        if not np.any(g):
            return self.w.copy()
        self.wealth += float(-g @ self.w)
        self.coin_sum -= g
        self.rounds_bet += 1
        self.w = self.coin_sum / (self.rounds_bet + 1) * self.wealth
        return self.w.copy()


class Cocob:
    """Per-coordinate betting with tracked gradient scale, absolute-gradient
    sum and clipped reward (the backprop-style accumulator recipe)."""

    def __init__(self, dim, alpha=COCOB_ALPHA, eps=COCOB_EPS):
        self.dim = int(dim)
        self.w0 = np.zeros(self.dim)
        self.w = np.zeros(self.dim)
        self.scale = np.full(self.dim, float(eps))
        self.grad_abs_sum = np.zeros(self.dim)
        self.coin_sum = np.zeros(self.dim)
        self.reward = np.zeros(self.dim)
        self.alpha = float(alpha)
        self.k = 0

    def predict(self):
        return self.w.copy()

    def step(self, loss_value, g, ex=None):
        g = np.asarray(g, dtype=np.float64)
        self.k += 1
        ag = np.abs(g)
        self.scale = np.maximum(self.scale, ag)
        self.grad_abs_sum += ag
        self.coin_sum -= g
        self.reward = np.maximum(self.reward + (self.w - self.w0) * (-g), 0.0)
        fraction = self.coin_sum / (
            self.scale * np.maximum(self.grad_abs_sum + self.scale,
                                    self.alpha * self.scale))
        self.w = self.w0 + fraction * (self.scale + self.reward)
        return self.w.copy()


PARAMETER_FREE = frozenset({"coin", "cocob", "implicit-coin", "cw-implicit-coin"})
ALGORITHMS = ("sgd", "aprox", "iwa", "coin", "cocob", "implicit-coin",
              "cw-implicit-coin")


def is_parameter_free(name):
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    return name in PARAMETER_FREE


def make_algorithm(name, dim, eta0=None, loss_kind=None, trace_cb=None):
    """Instantiate a registered algorithm.

    Tuned kinds require eta0; parameter-free kinds reject one. trace_cb is
    honored by the truncated-model learners only.
    """
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    if name in PARAMETER_FREE:
        if eta0 is not None:
            raise ValueError(f"{name} is parameter-free and rejects eta0")
    elif eta0 is None:
        raise ValueError(f"{name} needs eta0")

    if name == "sgd":
        return Sgd(dim, eta0)
    if name == "aprox":
        return AProx(dim, eta0)
    if name == "iwa":
        return ImportanceAwareSgd(dim, eta0, loss_kind)
    if name == "coin":
        return KtCoin(dim)
    if name == "cocob":
        return Cocob(dim)
    if name == "implicit-coin":
        return ImplicitCoin(dim, trace_cb=trace_cb)
    return CoordinateImplicitCoin(dim, trace_cb=trace_cb)
