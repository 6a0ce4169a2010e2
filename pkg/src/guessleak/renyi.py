"""Renyi divergence and entropy, Arimoto conditional entropy and mutual information.

Orders are plain floats: ``1.0`` selects the Shannon/Kullback-Leibler limit
and ``math.inf`` the order-infinity limit. Results are in nats; infinite
values are returned as ``math.inf``.

The ``*_array`` helpers take raw arrays with arbitrary leading batch axes and
are what the optimizers call in their inner loops.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .prob_core import Distribution, JointSource

INF = math.inf


def check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0 or math.isnan(alpha):
        raise ValueError(f"order must be positive, got {alpha}")
    return alpha


def _log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(a)


def renyi_divergence_array(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    s = p > 0
    lp, lq = _log(p[s]), _log(q[s])
    if alpha == INF:
        return float(np.max(lp - lq))
    if alpha == 1.0:
        if np.any(q[s] == 0):
            return INF
        return float(np.sum(p[s] * (lp - lq)))
    with np.errstate(invalid="ignore"):
        # (1 - alpha) * log 0 is +inf for alpha > 1, -inf for alpha < 1
        terms = alpha * lp + (1.0 - alpha) * lq
    total = logsumexp(terms) if terms.size else -INF
    if total == -INF:
        return INF
    d = total / (alpha - 1.0)
    # rounding can leave tiny negatives when p == q
    return max(float(d), 0.0) if math.isfinite(d) else INF


def renyi_divergence(P: Distribution, Q: Distribution, alpha: float) -> float:
    """D_alpha(P || Q) in nats.

    Zero-mass symbols of P contribute nothing at any order; the order-infinity
    maximum runs over supp(P) only.

    >>> renyi_divergence(Distribution.of([.5, .5]), Distribution.of([.25, .75]), math.inf)
    0.6931471805599453
    """
    P.same_alphabet(Q)
    return renyi_divergence_array(P.probs, Q.probs, check_order(alpha))


def entropy_array(p: np.ndarray, alpha: float) -> np.ndarray:
    """H_alpha along the last axis."""
    p = np.asarray(p, dtype=np.float64)
    lp = _log(p)
    if alpha == INF:
        return -np.log(p.max(axis=-1))
    if alpha == 1.0:
        with np.errstate(invalid="ignore"):
            return -np.sum(np.where(p > 0, p * lp, 0.0), axis=-1)
    return logsumexp(alpha * lp, axis=-1) / (1.0 - alpha)


def renyi_entropy(P: Distribution, alpha: float) -> float:
    """H_alpha(P) in nats; Shannon at order 1, min-entropy at infinity."""
    return float(entropy_array(P.probs, check_order(alpha)))


def arimoto_cond_entropy_array(pxy: np.ndarray, alpha: float) -> np.ndarray:
    """H^A_alpha(X|Y) for joints ``pxy[..., x, y]``.

    Uses P_Y(y) * ||P_{X|Y=y}||_alpha = ||P_{XY}(., y)||_alpha so zero-mass
    columns drop out without dividing by P_Y(y).
    """
    pxy = np.asarray(pxy, dtype=np.float64)
    if alpha == INF:
        return -np.log(pxy.max(axis=-2).sum(axis=-1))
    if alpha == 1.0:
        py = pxy.sum(axis=-2, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(pxy > 0, pxy * (np.log(py) - np.log(pxy)), 0.0)
        return t.sum(axis=(-2, -1))
    col_norm = logsumexp(alpha * _log(pxy), axis=-2) / alpha
    return alpha / (1.0 - alpha) * logsumexp(col_norm, axis=-1)


def arimoto_cond_entropy(j: JointSource, alpha: float) -> float:
    """Arimoto conditional entropy, summing over positive-mass outputs only."""
    return float(arimoto_cond_entropy_array(j.pxy, check_order(alpha)))


def arimoto_mi_array(pxy: np.ndarray, alpha: float) -> np.ndarray:
    pxy = np.asarray(pxy, dtype=np.float64)
    return entropy_array(pxy.sum(axis=-1), alpha) - arimoto_cond_entropy_array(pxy, alpha)


def arimoto_mi(j: JointSource, alpha: float) -> float:
    """I^A_alpha(X;Y) = H_alpha(X) - H^A_alpha(X|Y)."""
    return float(arimoto_mi_array(j.pxy, check_order(alpha)))


def sibson_mi_array(prior: np.ndarray, rows: np.ndarray, alpha: float) -> np.ndarray:
    """Sibson's I_alpha for input distribution ``prior[..., x]`` and channel ``rows[x, y]``.

    I^A_alpha evaluated at a prior equals Sibson's I_alpha evaluated at the
    alpha-escort of that prior; :mod:`guessleak.optimize` leans on this.
    """
    lw = _log(rows)
    lq = _log(np.asarray(prior, dtype=np.float64))
    inner = logsumexp(lq[..., :, None] + alpha * lw, axis=-2) / alpha
    return alpha / (alpha - 1.0) * logsumexp(inner, axis=-1)


def escort(prior: np.ndarray, alpha: float) -> np.ndarray:
    """Normalized ``prior ** alpha`` along the last axis."""
    lp = alpha * _log(np.asarray(prior, dtype=np.float64))
    return np.exp(lp - logsumexp(lp, axis=-1, keepdims=True))
