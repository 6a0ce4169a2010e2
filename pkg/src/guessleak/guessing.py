"""Guessing functions, guesswork under general cost functions, and oblivious guessing."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .prob_core import Distribution, JointSource
from .renyi import arimoto_cond_entropy_array, entropy_array

# Range sums at or below this many terms are evaluated term by term.
EXACT_TERMS = 1 << 20
# Simulated guessing gives up on a trial after this many draws.
MAX_DRAWS = 10**7
SIM_CHUNK = 1 << 16


class TruncationWarning(RuntimeWarning):
    pass


def _log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


@dataclass(frozen=True)
class CostH:
    """Nondecreasing cost h(n) of needing n guesses.

    Build with the class methods: ``power(rho)``, ``log()``,
    ``exp_over_linear()``, ``geometric(a)``, ``table(values)``. Tables extend
    past their end by holding the last value and so do not diverge.
    """

    kind: str
    param: float | None = None
    values: tuple[float, ...] = field(default=())

    @classmethod
    def power(cls, rho: float = 1.0) -> "CostH":
        if not rho > 0:
            raise ValueError("power cost needs rho > 0")
        return cls("power", float(rho))

    @classmethod
    def log(cls) -> "CostH":
        return cls("log")

    @classmethod
    def exp_over_linear(cls) -> "CostH":
        return cls("exp_over_linear")

    @classmethod
    def geometric(cls, a: float = 2.0) -> "CostH":
        if not a > 1:
            raise ValueError("geometric cost needs a > 1")
        return cls("geometric", float(a))

    @classmethod
    def table(cls, values: Sequence[float]) -> "CostH":
        v = tuple(float(x) for x in values)
        if not v or min(v) < 0 or any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("table cost must be nonempty, nonnegative and nondecreasing")
        return cls("table", None, v)

    @classmethod
    def parse(cls, spec: str) -> "CostH":
        """``power:2``, ``log``, ``exp_over_linear``, ``geometric:2``, ``table:1,2,3``."""
        name, _, arg = spec.partition(":")
        if name == "power":
            return cls.power(float(arg) if arg else 1.0)
        if name == "log":
            return cls.log()
        if name == "exp_over_linear":
            return cls.exp_over_linear()
        if name == "geometric":
            return cls.geometric(float(arg) if arg else 2.0)
        if name == "table":
            return cls.table([float(s) for s in arg.split(",")])
        raise ValueError(f"unknown cost function {spec!r}")

    def __str__(self) -> str:
        if self.kind in ("power", "geometric"):
            return f"{self.kind}:{self.param:g}"
        if self.kind == "table":
            return "table:" + ",".join(f"{v:g}" for v in self.values)
        return self.kind

    @property
    def divergent(self) -> bool:
        return self.kind != "table"

    def log_value(self, n) -> np.ndarray:
        """log h(n) for positive integers n (``-inf`` where h(n) = 0)."""
        n = np.asarray(n, dtype=np.float64)
        if self.kind == "power":
            return self.param * np.log(n)
        if self.kind == "log":
            return _log(np.log(n))
        if self.kind == "exp_over_linear":
            return n - np.log1p(n)
        if self.kind == "geometric":
            return n * math.log(self.param)
        idx = np.minimum(n.astype(np.int64), len(self.values)) - 1
        return _log(np.asarray(self.values)[idx])

    def __call__(self, n) -> np.ndarray:
        return np.exp(self.log_value(n))

    def log_range_sum(self, a: int, b: int) -> float:
        """log of sum_{i=a}^{b} h(i), without materializing huge ranges."""
        a, b = int(a), int(b)
        if a < 1 or b < a:
            raise ValueError(f"bad range [{a}, {b}]")
        count = b - a + 1
        if count <= EXACT_TERMS:
            return float(logsumexp(self.log_value(np.arange(a, b + 1))))
        if self.kind == "log":
            return math.log(gammaln(b + 1) - gammaln(a))
        if self.kind == "geometric":
            lg = math.log(self.param)
            x = count * lg
            return a * lg + x + math.log1p(-math.exp(-x)) - math.log(self.param - 1.0)
        if self.kind == "exp_over_linear":
            # earlier terms are below e^-2000 relative to the tail
            return self.log_range_sum(b - 1999, b)
        if self.kind == "table":
            k = len(self.values)
            parts = []
            if a <= k:
                parts.append(self.log_range_sum(a, k))
                a = k + 1
            parts.append(math.log(b - a + 1) + float(self.log_value(k)))
            return float(logsumexp(parts))
        head = self.log_range_sum(a, a + 999)
        return float(np.logaddexp(head, math.log(_power_tail(self.param, a + 1000, b))))


def _power_tail(rho: float, c: int, b: int) -> float:
    """Euler-Maclaurin estimate of sum_{i=c}^{b} i**rho for c >= 1000."""
    f = lambda x: x**rho
    d1 = lambda x: rho * x ** (rho - 1)
    d3 = lambda x: rho * (rho - 1) * (rho - 2) * x ** (rho - 3)
    integral = (float(b) ** (rho + 1) - float(c) ** (rho + 1)) / (rho + 1)
    return integral + (f(c) + f(b)) / 2 + (d1(b) - d1(c)) / 12 - (d3(b) - d3(c)) / 720


@dataclass(frozen=True)
class GuessOrder:
    """A guessing function: ``order[i]`` is guessed at step i + 1."""

    order: tuple[str, ...]

    def check(self, labels: Sequence[str]) -> None:
        if sorted(self.order) != sorted(labels) or len(set(self.order)) != len(self.order):
            raise ValueError("guess order is not a permutation of the alphabet")

    def expected_cost(self, P: Distribution, h: CostH | None = None) -> float:
        self.check(P.labels)
        h = h or CostH.power(1.0)
        probs = np.array([P[x] for x in self.order])
        return float(np.sum(h(np.arange(1, len(probs) + 1)) * probs))


def descending(masses: np.ndarray) -> np.ndarray:
    """Indices sorting masses in non-increasing order, ties by position."""
    return np.argsort(-np.asarray(masses), kind="stable")


def optimal_order(P: Distribution) -> GuessOrder:
    return GuessOrder(tuple(P.labels[i] for i in descending(P.probs)))


def h_guesswork_array(masses: np.ndarray, h: CostH | None = None, axis: int = -1) -> np.ndarray:
    """min over guessing orders of sum_i h(G(u_i)) * masses[u_i], along ``axis``.

    Masses need not be normalized (this is also the extended guesswork of
    nonnegative vectors).
    """
    m = np.moveaxis(np.asarray(masses, dtype=np.float64), axis, -1)
    m = -np.sort(-m, axis=-1)
    n = m.shape[-1]
    if h is None or (h.kind == "power" and h.param == 1.0):
        w = np.arange(1, n + 1, dtype=np.float64)
    else:
        w = h(np.arange(1, n + 1))
    with np.errstate(invalid="ignore"):
        return np.where(m > 0, m * w, 0.0).sum(axis=-1)


def guesswork(P: Distribution) -> float:
    """sum_i i * P(x_(i)) over the non-increasing order."""
    return float(h_guesswork_array(P.probs))


def h_guesswork(P: Distribution, h: CostH) -> float:
    return float(h_guesswork_array(P.probs, h))


def conditional_h_guesswork(j: JointSource, h: CostH | None = None) -> float:
    """sum_y P_Y(y) * min_G E[h(G(X)) | Y=y], one optimal order per output."""
    return float(h_guesswork_array(j.pxy, h, axis=0).sum())


def generalized_binomial(x, y):
    """Gamma(x+1) / (Gamma(y+1) Gamma(x-y+1)) for real arguments."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    args = (x + 1, y + 1, x - y + 1)
    for a in args:
        if np.any((a <= 0) & (a == np.round(a))):
            raise ValueError("generalized binomial at a pole of the gamma function")
    if all(np.all(a > 0) for a in args):
        out = np.exp(gammaln(args[0]) - gammaln(args[1]) - gammaln(args[2]))
    else:
        from scipy.special import gamma

        out = gamma(args[0]) / (gamma(args[1]) * gamma(args[2]))
    return float(out) if out.ndim == 0 else out


def v_rho(g, rho: float) -> np.ndarray:
    """Factorial-moment cost binom(g + rho - 1, rho) of a guessing number g >= 1."""
    g = np.asarray(g, dtype=np.float64)
    return np.exp(gammaln(g + rho) - gammaln(rho + 1.0) - gammaln(g))


def oblivious_cost(P: Distribution, rho: float) -> float:
    """inf over guessing distributions of E[V_rho]: (sum_x P(x)^(1/(1+rho)))^(1+rho)."""
    return math.exp(rho * float(entropy_array(P.probs, 1.0 / (1.0 + rho))))


def oblivious_cost_conditional(j: JointSource, rho: float) -> float:
    """Same infimum when the guessing distribution may depend on Y."""
    return math.exp(rho * float(arimoto_cond_entropy_array(j.pxy, 1.0 / (1.0 + rho))))


def optimal_guessing_distribution(P: Distribution, rho: float) -> Distribution:
    """The minimizer Phat proportional to P^(1/(1+rho))."""
    w = P.probs ** (1.0 / (1.0 + rho))
    return Distribution(P.labels, w / w.sum())


def oblivious_expected_V_exact(P: Distribution, Phat: Distribution, rho: float) -> float:
    """E[V_rho] for guesses drawn i.i.d. from Phat: sum_x P(x) Phat(x)^-rho.

    Given X = x the guessing number is geometric with success probability
    Phat(x), and E[binom(G + rho - 1, rho)] = Phat(x)^-rho.
    """
    P.same_alphabet(Phat)
    s = P.probs > 0
    if np.any(Phat.probs[s] == 0):
        return math.inf
    return float(np.sum(P.probs[s] * Phat.probs[s] ** -rho))


def _simulate_chunk(p_cdf, phat_cdf, n, rho, trials, seed_seq, cap):
    rng = np.random.default_rng(seed_seq)
    x = np.minimum(np.searchsorted(p_cdf, rng.random(trials), side="right"), n - 1)
    g = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)
    k = 0
    while active.size and k < cap:
        k += 1
        guess = np.minimum(np.searchsorted(phat_cdf, rng.random(active.size), side="right"), n - 1)
        hit = guess == x[active]
        g[active[hit]] = k
        active = active[~hit]
    g[active] = cap
    return v_rho(g, rho), active.size


def simulate_memoryless_guessing(
    P: Distribution,
    Phat: Distribution,
    rho: float,
    trials: int,
    seed: int = 0,
    threads: int = 1,
    max_draws: int = MAX_DRAWS,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[V_rho(X, Xhat_1^inf)] with its standard error.

    Draws X ~ P, then i.i.d. guesses from Phat until one equals X. Trials are
    split into fixed chunks seeded by ``(seed, chunk_index)``, so the result does
    not depend on ``threads``.
    """
    P.same_alphabet(Phat)
    if np.any((P.probs > 0) & (Phat.probs == 0)):
        raise ValueError("supp(P) is not contained in supp(Phat); guessing may never stop")
    n = len(P)
    p_cdf, phat_cdf = np.cumsum(P.probs), np.cumsum(Phat.probs)
    sizes = [SIM_CHUNK] * (trials // SIM_CHUNK)
    if trials % SIM_CHUNK:
        sizes.append(trials % SIM_CHUNK)
    jobs = [
        (p_cdf, phat_cdf, n, rho, size, np.random.SeedSequence([seed, i]), max_draws)
        for i, size in enumerate(sizes)
    ]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda a: _simulate_chunk(*a), jobs))
    else:
        results = [_simulate_chunk(*a) for a in jobs]
    v = np.concatenate([r[0] for r in results])
    truncated = sum(r[1] for r in results)
    if truncated:
        warnings.warn(f"{truncated} trials hit the {max_draws}-draw cap", TruncationWarning)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
