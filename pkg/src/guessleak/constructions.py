"""Constructive devices behind the leakage suprema.

* shattering channels, which split one input symbol over a large uniform block
  of U symbols and drive the pointwise ratios to D_inf;
* optimal splits ``A + B = 2 P_U`` of a distribution for the binary erasure
  source, together with the three mass-moving procedures (disjointify,
  balance, alternating swap) that carry any split to the optimal one without
  increasing ``gamma_bar(A)/2 + gamma_bar(B)/2``;
* the explicit interleaved erasure-source construction.

Split procedures work in *rank coordinates*: symbols sorted by non-increasing
``P_U`` with ties broken by label order.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .guessing import CostH, descending, h_guesswork_array
from .prob_core import Channel, Distribution, JointSource, posterior


@dataclass(frozen=True)
class MassVector:
    labels: tuple[str, ...]
    masses: np.ndarray

    def __init__(self, labels: Sequence, masses):
        masses = np.array(masses, dtype=np.float64)
        if masses.shape != (len(labels),) or np.any(masses < 0):
            raise ValueError("mass vector needs one nonnegative mass per label")
        masses.setflags(write=False)
        object.__setattr__(self, "labels", tuple(str(s) for s in labels))
        object.__setattr__(self, "masses", masses)

    @property
    def support(self) -> np.ndarray:
        return self.masses > 0


@dataclass(frozen=True)
class SplitPair:
    a: MassVector
    b: MassVector
    base: Distribution

    def __post_init__(self):
        if not (self.a.labels == self.b.labels == self.base.labels):
            raise ValueError("split pair members must share the base alphabet")
        if not np.allclose(self.a.masses + self.b.masses, 2 * self.base.probs, rtol=0, atol=1e-12):
            raise ValueError("split pair violates a + b = 2 * base")

    @property
    def disjoint(self) -> bool:
        return not np.any(self.a.support & self.b.support)

    def objective(self) -> float:
        """gamma_bar(a)/2 + gamma_bar(b)/2."""
        return 0.5 * gamma_bar(self.a) + 0.5 * gamma_bar(self.b)


# -- shattering ------------------------------------------------------------


def shattering_channel(px: Distribution, x_star: str, m: int) -> Channel:
    """X -> U channel: x* is spread uniformly over m fresh symbols, every other x is kept."""
    if x_star not in px.labels:
        raise ValueError(f"unknown symbol {x_star!r}")
    if px[x_star] <= 0:
        raise ValueError("x* must have positive prior mass")
    if m < 1:
        raise ValueError("block size must be >= 1")
    out: list[str] = []
    for x in px.labels:
        out.extend([f"{x}#{k}" for k in range(m)] if x == x_star else [x])
    rows = np.zeros((len(px), len(out)))
    col = 0
    for i, x in enumerate(px.labels):
        width = m if x == x_star else 1
        rows[i, col : col + width] = 1.0 / width
        col += width
    return Channel(px.labels, out, rows)


def shattering_target(j: JointSource, y: str) -> str:
    """argmax_x P_X(x) / P_{X|Y}(x|y) over supp(P_X), ties by label order."""
    px = j.px
    post = posterior(j, y).probs
    best, arg = -1.0, None
    for x, p, q in zip(j.x_labels, px, post):
        if p <= 0:
            continue
        r = math.inf if q == 0 else p / q
        if r > best:
            best, arg = r, x
    return arg


def _log_shattered_cost(others: np.ndarray, block_mass: float, m: int, h: CostH) -> float:
    """log min_G E[h(G(U))] for point masses ``others`` plus m symbols of ``block_mass``."""
    others = np.sort(others[others > 0])[::-1]
    above = others[others > block_mass]
    below = others[others <= block_mass]
    k = above.size
    terms = [np.log(above) + h.log_value(np.arange(1, k + 1))]
    if block_mass <= 0:
        return float(logsumexp(terms[0]))
    terms.append(np.array([math.log(block_mass) + h.log_range_sum(k + 1, k + m)]))
    if below.size:
        ranks = np.arange(k + m + 1, k + m + 1 + below.size)
        terms.append(np.log(below) + h.log_value(ranks))
    return float(logsumexp(np.concatenate(terms)))


def shattering_log_ratio(j: JointSource, y: str, h: CostH, m: int) -> float:
    """log E[h(G*(U))] - log E[h(G*_y(U))] under the shattering channel with block size m.

    Evaluated from closed sums over the block, never materializing the
    (|X| - 1 + m)-symbol alphabet, so m may be huge. When the posterior of
    x* vanishes the value is finite for each m but grows without bound.
    """
    x_star = shattering_target(j, y)
    i = j.x_labels.index(x_star)
    px = j.px
    post = posterior(j, y).probs
    keep = np.arange(len(px)) != i
    num = _log_shattered_cost(px[keep], px[i] / m, m, h)
    den = _log_shattered_cost(post[keep], post[i] / m, m, h)
    return num - den


def shattering_pointwise_ratio(j: JointSource, y: str, h: CostH, m: int) -> float:
    """The ratio itself; ``inf`` if it overflows a float."""
    v = shattering_log_ratio(j, y, h, m)
    return math.inf if v > 709 else math.exp(v)


def tau_average(h: CostH, offset: int, m: int) -> float:
    """Mean of h over the m consecutive guess indices starting at ``offset``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    v = h.log_range_sum(offset, offset + m - 1) - math.log(m)
    return math.inf if v > 709 else math.exp(v)


# -- splits ----------------------------------------------------------------


def gamma_bar(v: MassVector | np.ndarray) -> float:
    """Guesswork extended to nonnegative vectors: sum_i i * v_(i), descending."""
    masses = v.masses if isinstance(v, MassVector) else np.asarray(v)
    return float(h_guesswork_array(masses))


def _padded(pu: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """Rank-sorted masses, padded with a zero to even length, and the rank permutation."""
    perm = descending(pu.probs)
    p = pu.probs[perm]
    if p.size % 2:
        p = np.append(p, 0.0)
    return p, perm


def _from_ranks(pu: Distribution, perm: np.ndarray, a_r: np.ndarray, b_r: np.ndarray) -> SplitPair:
    n = len(pu)
    a, b = np.zeros(n), np.zeros(n)
    a[perm] = a_r[:n]
    b[perm] = b_r[:n]
    return SplitPair(MassVector(pu.labels, a), MassVector(pu.labels, b), pu)


def _to_ranks(s: SplitPair) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    perm = descending(s.base.probs)
    return s.a.masses[perm].copy(), s.b.masses[perm].copy(), perm


def optimal_split(pu: Distribution) -> SplitPair:
    """A* = 2 P_U on odd ranks, B* = 2 P_U on even ranks."""
    p, perm = _padded(pu)
    a, b = np.zeros_like(p), np.zeros_like(p)
    a[0::2] = 2 * p[0::2]
    b[1::2] = 2 * p[1::2]
    return _from_ranks(pu, perm, a, b)


def claim1_lower_bound(pu: Distribution) -> float:
    """sum_i i * (P_U(u_{2i-1}) + P_U(u_{2i})) over the non-increasing order."""
    p, _ = _padded(pu)
    pairs = p[0::2] + p[1::2]
    return float(np.sum(np.arange(1, pairs.size + 1) * pairs))


def split_objective(s: SplitPair) -> float:
    """(gamma_bar(a)/2 + gamma_bar(b)/2) / gamma(base); at least 1/2 for any split."""
    return s.objective() / gamma_bar(s.base.probs)


def _rank_positions(masses: np.ndarray) -> np.ndarray:
    """pos[k] = position (1-based) of rank-k symbol in the descending order of ``masses``."""
    order = np.argsort(-masses, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(1, masses.size + 1)
    return pos


def _half_gamma(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(h_guesswork_array(a)) + 0.5 * float(h_guesswork_array(b))


def disjointify(s: SplitPair, trace: list[float] | None = None) -> SplitPair:
    """Move each symbol's whole mass 2 P_U(u) to whichever side ranks it earlier.

    Visits symbols in rank order; ``trace`` (if given) receives the objective
    before the first move and after every move.
    """
    a, b, perm = _to_ranks(s)
    if trace is not None:
        trace.append(_half_gamma(a, b))
    for k in range(a.size):
        i_k = _rank_positions(a)[k]
        j_k = _rank_positions(b)[k]
        total = a[k] + b[k]
        if i_k <= j_k:
            a[k], b[k] = total, 0.0
        else:
            a[k], b[k] = 0.0, total
        if trace is not None:
            trace.append(_half_gamma(a, b))
    return _from_ranks(s.base, perm, a, b)


def balance_supports(s: SplitPair, trace: list[float] | None = None) -> SplitPair:
    """Hand the lowest-ranked symbols of the larger support to the smaller one.

    Output supports have sizes ceil((p+q)/2) for ``a`` and floor((p+q)/2) for ``b``.
    """
    if not s.disjoint:
        raise ValueError("balance_supports needs disjoint supports")
    a, b, perm = _to_ranks(s)
    if trace is not None:
        trace.append(_half_gamma(a, b))
    sa, sb = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    p, q = sa.size, sb.size
    want_a = math.ceil((p + q) / 2)
    if p > want_a:
        for k in sa[want_a:]:
            a[k], b[k] = 0.0, a[k]
            if trace is not None:
                trace.append(_half_gamma(a, b))
    elif p < want_a:
        for k in sb[(p + q) // 2 :]:
            a[k], b[k] = b[k], 0.0
            if trace is not None:
                trace.append(_half_gamma(a, b))
    return _from_ranks(s.base, perm, a, b)


def alternate_swap(s: SplitPair, trace: list[float] | None = None) -> SplitPair:
    """Swap symbols until ``a`` holds the odd ranks and ``b`` the even ranks.

    Needs disjoint supports with |supp a| - |supp b| in {0, 1}. Each swap
    exchanges the symbol at the current rank with the one occupying the same
    support position on the other side.
    """
    a, b, perm = _to_ranks(s)
    sa, sb = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    if not s.disjoint or sa.size - sb.size not in (0, 1):
        raise ValueError("alternate_swap needs disjoint, balanced supports")
    if trace is not None:
        trace.append(_half_gamma(a, b))
    live = np.flatnonzero(a + b > 0)
    for t in range(1, live.size):
        u = live[t - 1]
        sa, sb = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
        if t % 2 == 1 and b[u] > 0:
            other = sa[(t + 1) // 2 - 1]
        elif t % 2 == 0 and a[u] > 0:
            other = sb[t // 2 - 1]
        else:
            continue
        a[u], b[u], a[other], b[other] = b[u], a[u], b[other], a[other]
        if trace is not None:
            trace.append(_half_gamma(a, b))
    return _from_ranks(s.base, perm, a, b)


def interleaved_split(n: int) -> SplitPair:
    """Uniform P_U on n symbols with A uniform on odd positions, B on even ones."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    labels = [f"u{i}" for i in range(n)]
    a = np.zeros(n)
    b = np.zeros(n)
    a[0::2] = 2.0 / n
    b[1::2] = 2.0 / n
    return SplitPair(MassVector(labels, a), MassVector(labels, b), Distribution(labels, np.full(n, 1.0 / n)))


def bes_construction_value(n: int, p: float) -> float:
    """Guesswork ratio of the erasure source under the interleaved construction.

    The ratio equals 1 / ((1 - p) * r + p) with r the split objective; for
    this construction it works out to 2(n+1) / (n(1+p) + 2).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    r = _interleaved_objective(n)
    return 1.0 / ((1.0 - p) * r + p)


@functools.lru_cache(maxsize=None)
def _interleaved_objective(n: int) -> float:
    return split_objective(interleaved_split(n))


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    cuts = np.array(list(itertools.combinations(range(total + parts - 1), parts - 1)), dtype=np.int64)
    cuts = cuts.reshape(-1, parts - 1)
    bounds = np.hstack([np.full((len(cuts), 1), -1), cuts, np.full((len(cuts), 1), total + parts - 1)])
    return np.diff(bounds, axis=1) - 1


def brute_force_split_infimum(pu: Distribution, resolution: int = 40) -> float:
    """Grid minimum of gamma(A)/2 + gamma(B)/2 over probability pairs with A + B = 2 P_U.

    A ranges over the simplex grid with spacing 1/resolution; B = 2 P_U - A
    must stay nonnegative.
    """
    n = len(pu)
    if n > 6 or resolution > 50:
        raise ValueError("brute force is limited to |U| <= 6 and resolution <= 50")
    a = _compositions(resolution, n) / resolution
    b = 2 * pu.probs - a
    ok = np.all(b >= -1e-12, axis=1)
    if not ok.any():
        raise ValueError("no feasible grid point")
    a, b = a[ok], np.clip(b[ok], 0.0, None)
    vals = 0.5 * h_guesswork_array(a) + 0.5 * h_guesswork_array(b)
    return float(vals.min())


def split_grid_slack(n: int, resolution: int) -> float:
    return n * (1.0 / resolution) * n
