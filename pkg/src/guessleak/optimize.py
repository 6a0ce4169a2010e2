"""Numerical suprema: over randomizations P_{U|X}, and over input priors of a channel.

Channel-space searches return *lower estimates* of a supremum whose true
range is every finite U alphabet; the estimate is indexed by ``u_size``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import shattering_target
from .guessing import CostH
from .leakage import (
    guesswork_ratio_array,
    mgl_upper_bound,
    oblivious_ratio_array,
    pointwise_guesswork_leakage,
    pointwise_ratio_array,
)
from .prob_core import Channel, Distribution, JointSource, channel_from_joint
from .renyi import arimoto_mi_array, escort, sibson_mi_array


@dataclass
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 2000
    tol: float = 1e-9
    seed: int = 0
    u_size: int = 8
    step0: float = 0.1
    decay: float = 0.5
    grow: float = 1.5
    fd_step: float = 1e-6
    patience: int = 25
    min_step: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1 or self.tol <= 0 or self.u_size < 1:
            raise ValueError("need restarts >= 1, tol > 0, u_size >= 1")


@dataclass
class OptResult:
    best_value: float
    argument: np.ndarray
    iterations: int
    converged: bool
    trace: list[float] = field(default_factory=list)
    max_evaluated: float = -math.inf
    best_restart: int = 0

    @property
    def checksum(self) -> str:
        return hashlib.sha256(np.round(self.argument, 12).tobytes()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "argument": self.argument.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": self.trace,
            "max_evaluated": self.max_evaluated,
            "best_restart": self.best_restart,
            "checksum": self.checksum,
        }


# -- objectives ------------------------------------------------------------


@dataclass(frozen=True)
class GuessworkRatio:
    h: CostH = CostH.power(1.0)

    def __call__(self, j: JointSource, v: np.ndarray) -> np.ndarray:
        return guesswork_ratio_array(j.pxy, v, self.h)

    def upper_bound(self, j: JointSource) -> float:
        return mgl_upper_bound(j)


@dataclass(frozen=True)
class PointwiseRatio:
    y: str
    h: CostH = CostH.power(1.0)

    def __call__(self, j: JointSource, v: np.ndarray) -> np.ndarray:
        return pointwise_ratio_array(j.pxy, v, j.y_index(self.y), self.h)

    def upper_bound(self, j: JointSource) -> float:
        return pointwise_guesswork_leakage(j, self.y)


@dataclass(frozen=True)
class ObliviousRatio:
    rho: float

    def __call__(self, j: JointSource, v: np.ndarray) -> np.ndarray:
        return oblivious_ratio_array(j.pxy, v, self.rho)

    def upper_bound(self, j: JointSource) -> float:
        c = arimoto_capacity(channel_from_joint(j), 1.0 / (1.0 + self.rho), OptimizerConfig(restarts=4))
        return self.rho * c.best_value


def parse_objective(name: str, h: CostH | None = None, y: str | None = None, rho: float = 1.0):
    h = h or CostH.power(1.0)
    if name == "guesswork_ratio":
        return GuessworkRatio(h)
    if name == "pointwise_ratio":
        if y is None:
            raise ValueError("pointwise_ratio needs an output symbol")
        return PointwiseRatio(str(y), h)
    if name == "oblivious_ratio":
        return ObliviousRatio(rho)
    raise ValueError(f"unknown objective {name!r}")


# -- simplex helpers -------------------------------------------------------


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row (last axis) onto the probability simplex."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    r = n - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, r[..., None], axis=-1) / (r[..., None] + 1.0)
    return np.maximum(v - theta, 0.0)


def random_channels(rng: np.random.Generator, count: int, nx: int, nu: int) -> np.ndarray:
    """Rows drawn uniformly from the simplex."""
    return rng.dirichlet(np.ones(nu), size=(count, nx))


# -- warm starts -----------------------------------------------------------


def seeded_bes_channel(n: int) -> Channel:
    """Rows uniform on interleaved halves of n symbols: x=0 on odd positions, x=1 on even."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    rows = np.zeros((2, n))
    rows[0, 0::2] = 2.0 / n
    rows[1, 1::2] = 2.0 / n
    return Channel(["0", "1"], [f"u{i}" for i in range(n)], rows)


def _pad_columns(rows: np.ndarray, nu: int) -> np.ndarray | None:
    if rows.shape[1] > nu:
        return None
    return np.hstack([rows, np.zeros((rows.shape[0], nu - rows.shape[1]))])


def interleaved_channel(nx: int, nu: int) -> np.ndarray:
    """Row x uniform over the U symbols congruent to x mod |X| (the erasure construction for |X| = 2)."""
    used = nu - nu % nx
    rows = np.zeros((nx, nu))
    for x in range(nx):
        rows[x, x:used:nx] = 1.0 / (used // nx)
    return rows


def block_channel(sizes) -> np.ndarray:
    """Shattering-type channel: input x spread uniformly over its own block of ``sizes[x]`` symbols."""
    rows = np.zeros((len(sizes), int(sum(sizes))))
    start = 0
    for x, m in enumerate(sizes):
        rows[x, start : start + m] = 1.0 / m
        start += m
    return rows


def default_warm_starts(j: JointSource, objective, u_size: int) -> list[np.ndarray]:
    nx = len(j.x_labels)
    starts = []
    if nx <= u_size:
        starts.append(_pad_columns(np.eye(nx), u_size))
    if isinstance(objective, GuessworkRatio) and u_size >= 2 * nx:
        starts.append(interleaved_channel(nx, u_size))
    if isinstance(objective, PointwiseRatio) and u_size >= nx:
        i = j.x_labels.index(shattering_target(j, objective.y))
        sizes = [1] * nx
        sizes[i] = u_size - nx + 1
        starts.append(block_channel(sizes))
    if isinstance(objective, ObliviousRatio) and u_size >= nx:
        starts.extend(_best_block_channels(j, objective, u_size))
    return starts


def _best_block_channels(j: JointSource, objective, u_size: int, limit: int = 20000) -> list[np.ndarray]:
    """Enumerate block sizes summing to at most u_size; keep the best block channel."""
    nx = len(j.x_labels)
    if math.comb(u_size, nx) > limit:
        return []
    best, arg = -math.inf, None
    for sizes in itertools.product(range(1, u_size - nx + 2), repeat=nx):
        if sum(sizes) > u_size:
            continue
        v = _pad_columns(block_channel(sizes), u_size)
        val = float(objective(j, v))
        if val > best:
            best, arg = val, v
    return [arg] if arg is not None else []


# -- channel-space ascent --------------------------------------------------


def maximize_u_channel(
    j: JointSource,
    objective,
    cfg: OptimizerConfig | None = None,
    warm_starts: list | None = None,
) -> OptResult:
    """Multi-restart projected coordinate ascent over row-stochastic P_{U|X}.

    One row at a time: forward finite-difference gradient, a step along it,
    projection back to the simplex; the step halves whenever the move does
    not improve and grows by ``cfg.grow`` when it does. Restarts are warm starts first, then flat-random channels
    seeded by ``(cfg.seed, restart_index)``; all restarts advance together as
    one batch. A restart stops once its value improved by less than
    ``cfg.tol`` over ``cfg.patience`` sweeps.
    """
    cfg = cfg or OptimizerConfig()
    nx, nu = len(j.x_labels), cfg.u_size
    if warm_starts is None:
        warm_starts = default_warm_starts(j, objective, nu)
    inits = []
    for w in warm_starts:
        w = w.rows if isinstance(w, Channel) else np.asarray(w, dtype=np.float64)
        w = _pad_columns(w, nu)
        if w is not None and w.shape == (nx, nu):
            inits.append(w)
    inits = inits[: cfg.restarts]
    for r in range(len(inits), cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, r]))
        inits.append(random_channels(rng, 1, nx, nu)[0])
    v = np.stack(inits)
    R = v.shape[0]

    val = objective(j, v)
    max_eval = float(np.max(val))
    step = np.full(R, cfg.step0)
    active = np.ones(R, dtype=bool)
    history = [val.copy()]
    eye = np.eye(nu) * cfg.fd_step
    it = 0
    for it in range(1, cfg.max_iters + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            it -= 1
            break
        for x in range(nx):
            cur = v[idx]
            probe = np.repeat(cur[:, None], nu, axis=1)
            probe[:, :, x, :] += eye
            fp = objective(j, probe.reshape(-1, nx, nu)).reshape(idx.size, nu)
            grad = (fp - val[idx, None]) / cfg.fd_step
            grad = np.where(np.isfinite(grad), grad, 0.0)
            cand = cur.copy()
            cand[:, x, :] = project_simplex(cur[:, x, :] + step[idx, None] * grad)
            cval = objective(j, cand)
            max_eval = max(max_eval, float(np.max(cval)))
            better = cval > val[idx]
            v[idx[better]] = cand[better]
            val[idx[better]] = cval[better]
            step[idx[~better]] *= cfg.decay
            step[idx[better]] = np.minimum(step[idx[better]] * cfg.grow, cfg.step0 * 10)
        history.append(val.copy())
        if it >= cfg.patience:
            stalled = val - history[-1 - cfg.patience] < cfg.tol
            active &= ~stalled
        active &= step > cfg.min_step
    converged = not active.any()

    best = int(np.argmax(val))  # ties go to the lowest restart index
    arg = v[best].copy()
    return OptResult(
        best_value=float(objective(j, arg)),
        argument=arg,
        iterations=it,
        converged=converged,
        trace=[float(x) for x in val],
        max_evaluated=max_eval,
        best_restart=best,
    )


# -- Arimoto capacity ------------------------------------------------------


def _sibson_grad(q: np.ndarray, w: np.ndarray, alpha: float) -> np.ndarray:
    """Gradient of Sibson's I_alpha with respect to the prior, batched over rows of q."""
    wa = w**alpha
    z = q @ wa
    with np.errstate(divide="ignore"):
        zp = z ** (1.0 / alpha - 1.0)
    f = (z ** (1.0 / alpha)).sum(axis=-1, keepdims=True)
    return (zp @ wa.T) / f / (alpha - 1.0)


def arimoto_capacity(ch: Channel, alpha: float, cfg: OptimizerConfig | None = None) -> OptResult:
    """sup over input priors of I^A_alpha(X;Y) for the channel.

    Maximizes the equivalent Sibson form over the alpha-escort of the prior
    with multiplicative (exponentiated-gradient) updates and a backtracking
    step; a projected-gradient step is tried whenever the multiplicative step
    fails to improve. The returned prior is mapped back from the escort, and
    ``best_value`` is I^A_alpha re-evaluated there.
    """
    if alpha == 1.0 or not alpha > 0:
        raise ValueError("order must be positive and different from 1")
    cfg = cfg or OptimizerConfig()
    w = ch.rows
    nx = w.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    starts = [np.full(nx, 1.0 / nx)]
    starts += list(rng.dirichlet(np.ones(nx), size=min(cfg.restarts, 8) - 1))
    q = np.stack(starts)
    val = sibson_mi_array(q, w, alpha)
    eta = np.ones(len(q))
    history = [val.copy()]
    active = np.ones(len(q), dtype=bool)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if not active.any():
            it -= 1
            break
        g = _sibson_grad(q, w, alpha)
        g = g - g.max(axis=-1, keepdims=True)
        cand = q * np.exp(eta[:, None] * g)
        cand /= cand.sum(axis=-1, keepdims=True)
        cval = sibson_mi_array(cand, w, alpha)
        better = (cval > val) & active
        # fallback: projected gradient
        worse = ~better & active
        if worse.any():
            pg = project_simplex(q[worse] + eta[worse, None] * g[worse])
            pval = sibson_mi_array(pg, w, alpha)
            ok = pval > val[worse]
            sel = np.flatnonzero(worse)[ok]
            q[sel], val[sel] = pg[ok], pval[ok]
            eta[np.flatnonzero(worse)[~ok]] *= cfg.decay
        q[better], val[better] = cand[better], cval[better]
        eta[better] *= 1.25
        history.append(val.copy())
        if it >= cfg.patience:
            active &= ~(val - history[-1 - cfg.patience] < cfg.tol)
        active &= eta > cfg.min_step
    best = int(np.argmax(val))
    prior = escort(q[best], 1.0 / alpha)
    return OptResult(
        best_value=float(arimoto_mi_array(prior[:, None] * w, alpha)),
        argument=prior,
        iterations=it,
        converged=not active.any(),
        trace=[float(x) for x in val],
        max_evaluated=float(np.max(val)),
        best_restart=best,
    )


def simplex_grid(nx: int, resolution: int) -> np.ndarray:
    if nx == 1:
        return np.ones((1, 1))
    if nx == 2:
        t = np.arange(resolution + 1) / resolution
        return np.stack([t, 1 - t], axis=1)
    i, k = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1), indexing="ij")
    keep = i + k <= resolution
    i, k = i[keep], k[keep]
    return np.stack([i, k, resolution - i - k], axis=1) / resolution


def _grid_limits(nx: int, resolution: int | None, binary: int, ternary: int) -> int:
    if nx > 3:
        raise ValueError("grid oracles handle at most 3 channel inputs")
    limit = binary if nx <= 2 else ternary
    resolution = limit if resolution is None else resolution
    if resolution > limit:
        raise ValueError(f"resolution above {limit} for {nx} inputs")
    return resolution


def grid_capacity_oracle(ch: Channel, alpha: float, resolution: int | None = None) -> float:
    """max of I^A_alpha over a regular simplex grid of priors (at most 3 inputs)."""
    w = ch.rows
    resolution = _grid_limits(w.shape[0], resolution, 10**5, 1000)
    priors = simplex_grid(w.shape[0], resolution)
    vals = arimoto_mi_array(priors[:, :, None] * w[None], alpha)
    return float(np.max(vals))


def max_prior_pointwise_leakage(ch: Channel, resolution: int | None = None) -> float:
    """Grid maximum over priors and outputs of D_inf(P_X || P_{X|Y=y}).

    Returns ``inf`` when some output is possible under one input and
    impossible under another (the grid values are then unbounded).
    """
    w = ch.rows
    resolution = _grid_limits(w.shape[0], resolution, 10**5, 1000)
    priors = simplex_grid(w.shape[0], resolution)
    py = priors @ w
    best = 0.0
    for y in range(w.shape[1]):
        col = w[:, y]
        mask = (priors > 0) & (py[:, y : y + 1] > 0)
        if np.any(mask & (col[None, :] == 0)):
            return math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mask, py[:, y : y + 1] / col[None, :], 0.0)
        best = max(best, float(np.log(ratio.max())) if ratio.max() > 0 else 0.0)
    return best
