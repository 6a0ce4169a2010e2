"""Leakage measures: closed forms, bounds, and the objectives whose suprema define them.

Every ``*_objective`` evaluates the quantity inside a ``sup over U`` for one
concrete randomization ``P_{U|X}`` (a :class:`Channel` from the x alphabet).
The ``*_array`` variants take a batch of channel matrices ``V[..., x, u]`` and
are what :mod:`guessleak.optimize` drives.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.special import logsumexp

from .guessing import CostH, h_guesswork_array
from .prob_core import Channel, Distribution, JointSource, LabelMismatch, ZeroMassOutput, channel_from_joint, marginal_x, posterior
from .renyi import arimoto_mi_array, renyi_divergence

METHODS = ("closed_form", "bound", "optimized", "empirical")


def maximal_leakage(j: JointSource) -> float:
    """log sum_y max_{x in supp(X)} P(y|x)."""
    ch = channel_from_joint(j)
    return max(float(np.log(ch.rows.max(axis=0).sum())), 0.0)


def pointwise_guesswork_leakage(j: JointSource, y: str) -> float:
    """D_inf(P_X || P_{X|Y=y}); infinite iff some x in supp(X) is ruled out by y.

    This is the pointwise value for every divergent cost h, and also the
    pointwise oblivious value for every rho.
    """
    return renyi_divergence(marginal_x(j), posterior(j, y), math.inf)


def pointwise_oblivious_mgl(j: JointSource, y: str, rho: float) -> float:
    if not rho > 0:
        raise ValueError("rho must be positive")
    return pointwise_guesswork_leakage(j, y)


def mgl_upper_bound(j: JointSource) -> float:
    """-log sum_y min_{x: P_X(x) > 0} P(y|x), the maximal-cost-leakage bound."""
    ch = channel_from_joint(j)
    s = ch.rows.min(axis=0).sum()
    if s <= 0:
        return math.inf
    return max(-math.log(s), 0.0)


def mgl_bes_closed_form(p: float) -> float:
    """Maximal guesswork leakage of the binary erasure source: log(2 / (1 + p))."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1), got {p}")
    return math.log(2.0 / (1.0 + p))


def local_dp_leakage(ch: Channel) -> float:
    """max over x, x', y of log P(y|x) / P(y|x'); infinite if a ratio has a zero denominator."""
    w = ch.rows
    best = 0.0
    for y in range(w.shape[1]):
        col = w[:, y]
        if col.max() == 0:
            continue
        if col.min() == 0:
            return math.inf
        best = max(best, math.log(col.max() / col.min()))
    return best


def alpha_norm_ratio(P: Distribution, Q: Distribution, alpha: float) -> float:
    """log(||P||_alpha / ||Q||_alpha) for alpha in (0, 1)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    P.same_alphabet(Q)
    with np.errstate(divide="ignore"):
        lp, lq = np.log(P.probs), np.log(Q.probs)
    return float((logsumexp(alpha * lp) - logsumexp(alpha * lq)) / alpha)


# -- objectives for a concrete U -------------------------------------------


def induced_uy(pxy: np.ndarray, v: np.ndarray) -> np.ndarray:
    """P_{UY}[..., u, y] = sum_x V[..., x, u] P_{XY}[x, y]."""
    return np.einsum("...xu,xy->...uy", v, pxy)


def _log_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(num) - np.log(den)
    return np.where((num == 0) & (den == 0), 0.0, out)


def guesswork_ratio_array(pxy: np.ndarray, v: np.ndarray, h: CostH | None = None) -> np.ndarray:
    puy = induced_uy(pxy, v)
    num = h_guesswork_array(puy.sum(axis=-1), h)
    den = h_guesswork_array(puy, h, axis=-2).sum(axis=-1)
    return _log_ratio(num, den)


def pointwise_ratio_array(pxy: np.ndarray, v: np.ndarray, y: int, h: CostH | None = None) -> np.ndarray:
    puy = induced_uy(pxy, v)
    py = pxy[:, y].sum()
    num = h_guesswork_array(puy.sum(axis=-1), h)
    den = h_guesswork_array(puy[..., y] / py, h)
    return _log_ratio(num, den)


def oblivious_ratio_array(pxy: np.ndarray, v: np.ndarray, rho: float) -> np.ndarray:
    return rho * arimoto_mi_array(induced_uy(pxy, v), 1.0 / (1.0 + rho))


def _u_matrix(j: JointSource, u_channel: Channel) -> np.ndarray:
    if u_channel.input_labels != j.x_labels:
        raise LabelMismatch("U-channel inputs must be the x alphabet of the source")
    return u_channel.rows


def guesswork_leakage_objective(j: JointSource, u_channel: Channel, h: CostH | None = None) -> float:
    """log of min_G E[h(G(U))] over min_{G_y} E[h(G_Y(U))] for the given P_{U|X}."""
    return float(guesswork_ratio_array(j.pxy, _u_matrix(j, u_channel), h))


def pointwise_guesswork_leakage_objective(
    j: JointSource, u_channel: Channel, y: str, h: CostH | None = None
) -> float:
    k = j.y_index(y)
    if j.py[k] <= 0:
        raise ZeroMassOutput(f"P_Y({y!r}) = 0")
    return float(pointwise_ratio_array(j.pxy, _u_matrix(j, u_channel), k, h))


def oblivious_mgl_objective(j: JointSource, u_channel: Channel, rho: float) -> float:
    """rho * I^A_{1/(1+rho)}(U;Y) on the induced P_{UY}."""
    return float(oblivious_ratio_array(j.pxy, _u_matrix(j, u_channel), rho))


# -- reports --------------------------------------------------------------


@dataclass
class Entry:
    name: str
    value: float
    method: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if isinstance(self.value, float) and math.isnan(self.value):
            raise ValueError(f"{self.name}: NaN value")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {k: _fmt(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_fmt(x) for x in v]
    if isinstance(v, np.ndarray):
        return _fmt(v.tolist())
    if isinstance(v, np.integer):
        return int(v)
    return v


def to_base(value: float, log_base: str | float = "e") -> float:
    """Convert a nat-valued quantity to the requested logarithm base."""
    if log_base in ("e", math.e):
        return value
    return value / math.log(float(log_base))


@dataclass
class LeakageReport:
    source: str
    log_base: str = "e"
    rhos: list[float] = field(default_factory=list)
    entries: list[Entry] = field(default_factory=list)

    def add(self, name: str, value: float, method: str, **parameters) -> Entry:
        e = Entry(name, float(value), method, parameters)
        self.entries.append(e)
        return e

    def get(self, name: str, **match) -> Entry:
        for e in self.entries:
            if e.name == name and all(e.parameters.get(k) == v for k, v in match.items()):
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        """Serializable form; log-valued entries are converted to ``log_base``."""
        out = []
        for e in self.entries:
            d = asdict(e)
            if e.parameters.get("unit", "log") == "log":
                d["value"] = to_base(e.value, self.log_base)
                d["parameters"] = {
                    k: (to_base(v, self.log_base) if k in LOG_VALUED_PARAMS else v)
                    for k, v in e.parameters.items()
                }
            out.append(d)
        return _fmt({"source": self.source, "log_base": self.log_base, "rhos": self.rhos, "entries": out})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


LOG_VALUED_PARAMS = frozenset(
    {"order_1_over_1_plus_rho", "order_rho_over_1_plus_rho", "channel_space", "upper_bound", "gap"}
)


def oblivious_mgl(j: JointSource, rho: float, cfg=None) -> Entry:
    """Oblivious maximal rho-guesswork leakage, three ways.

    Reports rho times the Arimoto capacity (over priors supported on supp(P_X))
    at order 1/(1+rho) and at order rho/(1+rho), plus a direct channel-space
    lower estimate of rho * sup_U I^A_{1/(1+rho)}(U;Y). The entry value is the
    order-1/(1+rho) capacity, which the channel-space search approaches.
    """
    from .optimize import ObliviousRatio, OptimizerConfig, arimoto_capacity, maximize_u_channel

    cfg = cfg or OptimizerConfig()
    ch = channel_from_joint(j)
    a_low, a_high = 1.0 / (1.0 + rho), rho / (1.0 + rho)
    c1 = arimoto_capacity(ch, a_low, cfg)
    c2 = c1 if a_high == a_low else arimoto_capacity(ch, a_high, cfg)
    opt = maximize_u_channel(j, ObliviousRatio(rho), cfg)
    v1, v2 = rho * c1.best_value, rho * c2.best_value
    return Entry(
        "oblivious_mgl",
        v1,
        "optimized",
        {
            "rho": rho,
            "order_1_over_1_plus_rho": v1,
            "order_rho_over_1_plus_rho": v2,
            "channel_space": opt.best_value,
            "orders_disagree": bool(abs(v1 - v2) > 1e-6),
            "converged": bool(c1.converged and c2.converged and opt.converged),
            "restarts": cfg.restarts,
            "u_size": cfg.u_size,
            "best_channel_checksum": opt.checksum,
        },
    )
