"""Distributions, channels and joint sources over finite labeled alphabets.

All objects are immutable once built. Probabilities are float64; a vector
whose total mass drifts from 1 by at most ``RENORM_TOL`` is renormalized,
anything further off is rejected.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

SUM_TOL = 1e-12
RENORM_TOL = 1e-9


class ValidationError(ValueError):
    """Malformed probability object or input file."""


class LabelMismatch(ValidationError):
    pass


class ZeroMassOutput(ValueError):
    """Conditioning on an output symbol with P_Y(y) = 0."""


class ZeroMassInput(ValueError):
    """Inverting a joint at an input symbol with P_X(x) = 0."""

    def __init__(self, message: str, labels: Sequence[str] = ()):
        super().__init__(message)
        self.labels = tuple(labels)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_mass(a: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what}: non-finite entry")
    if np.any(a < 0):
        raise ValidationError(f"{what}: negative entry {a.min():.3g}")
    total = a.sum()
    drift = abs(total - 1.0)
    if drift > RENORM_TOL:
        raise ValidationError(f"{what}: total mass {total!r} is not 1")
    if drift > SUM_TOL:
        a = a / total
    return a


def _check_labels(labels: Sequence, what: str) -> tuple[str, ...]:
    labels = tuple(str(s) for s in labels)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{what}: duplicate labels")
    return labels


@dataclass(frozen=True)
class Distribution:
    labels: tuple[str, ...]
    probs: np.ndarray

    def __init__(self, labels: Sequence, probs: Sequence[float]):
        labels = _check_labels(labels, "distribution")
        probs = np.asarray(probs, dtype=np.float64).ravel()
        if probs.shape != (len(labels),):
            raise ValidationError("distribution: labels and probs differ in length")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", _frozen(_check_mass(probs, "distribution")))

    @classmethod
    def of(cls, probs: Sequence[float], labels: Sequence | None = None) -> "Distribution":
        """Build with default labels ``0..n-1``."""
        if labels is None:
            labels = [str(i) for i in range(len(probs))]
        return cls(labels, probs)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls.of(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, at: int = 0) -> "Distribution":
        p = np.zeros(n)
        p[at] = 1.0
        return cls.of(p)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label: str) -> float:
        return float(self.probs[self.labels.index(label)])

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def same_alphabet(self, other: "Distribution") -> None:
        if self.labels != other.labels:
            raise LabelMismatch("distributions are over different alphabets")


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix ``rows[i, j] = P(out_j | in_i)``."""

    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    rows: np.ndarray

    def __init__(self, input_labels: Sequence, output_labels: Sequence, rows):
        inp = _check_labels(input_labels, "channel inputs")
        out = _check_labels(output_labels, "channel outputs")
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape != (len(inp), len(out)):
            raise ValidationError(f"channel: shape {rows.shape} != ({len(inp)}, {len(out)})")
        rows = np.stack([_check_mass(r, f"channel row {x!r}") for x, r in zip(inp, rows)])
        object.__setattr__(self, "input_labels", inp)
        object.__setattr__(self, "output_labels", out)
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def of(cls, rows, inputs: Sequence | None = None, outputs: Sequence | None = None) -> "Channel":
        rows = np.asarray(rows, dtype=np.float64)
        if inputs is None:
            inputs = [str(i) for i in range(rows.shape[0])]
        if outputs is None:
            outputs = [f"y{j}" for j in range(rows.shape[1])]
        return cls(inputs, outputs, rows)

    def row(self, x: str) -> Distribution:
        return Distribution(self.output_labels, self.rows[self.input_labels.index(x)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


@dataclass(frozen=True)
class JointSource:
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    pxy: np.ndarray

    def __init__(self, x_labels: Sequence, y_labels: Sequence, pxy):
        xl = _check_labels(x_labels, "x labels")
        yl = _check_labels(y_labels, "y labels")
        pxy = np.asarray(pxy, dtype=np.float64)
        if pxy.shape != (len(xl), len(yl)):
            raise ValidationError(f"joint: shape {pxy.shape} != ({len(xl)}, {len(yl)})")
        pxy = _check_mass(pxy.ravel(), "joint").reshape(pxy.shape)
        object.__setattr__(self, "x_labels", xl)
        object.__setattr__(self, "y_labels", yl)
        object.__setattr__(self, "pxy", _frozen(pxy))

    @classmethod
    def of(cls, pxy, x_labels: Sequence | None = None, y_labels: Sequence | None = None):
        pxy = np.asarray(pxy, dtype=np.float64)
        if x_labels is None:
            x_labels = [f"x{i}" for i in range(pxy.shape[0])]
        if y_labels is None:
            y_labels = [f"y{j}" for j in range(pxy.shape[1])]
        return cls(x_labels, y_labels, pxy)

    @property
    def px(self) -> np.ndarray:
        return self.pxy.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.pxy.sum(axis=0)

    def y_index(self, y: str) -> int:
        try:
            return self.y_labels.index(str(y))
        except ValueError:
            raise LabelMismatch(f"unknown output symbol {y!r}") from None

    def admissible_outputs(self) -> list[str]:
        """Output symbols with positive mass."""
        return [y for y, m in zip(self.y_labels, self.py) if m > 0]

    def checksum(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(json.dumps([self.x_labels, self.y_labels]).encode())
        h.update(np.ascontiguousarray(self.pxy).tobytes())
        return h.hexdigest()[:16]


def marginal_x(j: JointSource) -> Distribution:
    return Distribution(j.x_labels, j.px)


def marginal_y(j: JointSource) -> Distribution:
    return Distribution(j.y_labels, j.py)


def posterior(j: JointSource, y: str) -> Distribution:
    """P_{X|Y=y}."""
    col = j.pxy[:, j.y_index(y)]
    mass = col.sum()
    if mass <= 0:
        raise ZeroMassOutput(f"P_Y({y!r}) = 0")
    return Distribution(j.x_labels, col / mass)


def joint_from(prior: Distribution, ch: Channel) -> JointSource:
    if prior.labels != ch.input_labels:
        raise LabelMismatch("prior alphabet differs from channel inputs")
    return JointSource(ch.input_labels, ch.output_labels, prior.probs[:, None] * ch.rows)


def channel_from_joint(j: JointSource, strict: bool = False) -> Channel:
    """P_{Y|X} restricted to inputs with positive mass.

    Zero-mass rows are dropped from the returned channel. With ``strict`` they
    raise ``ZeroMassInput`` instead; either way the dropped labels are listed on
    ``ZeroMassInput.labels`` when raised.
    """
    px = j.px
    dead = [x for x, m in zip(j.x_labels, px) if m <= 0]
    if dead and strict:
        raise ZeroMassInput(f"P_X = 0 at {dead}", dead)
    keep = px > 0
    rows = j.pxy[keep] / px[keep, None]
    return Channel([x for x, k in zip(j.x_labels, keep) if k], j.y_labels, rows)


def erasure_source(p: float) -> JointSource:
    """Binary erasure source on {0,1} x {0,e,1}: X uniform, Y = X or erased w.p. p."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1), got {p}")
    a, e = (1.0 - p) / 2.0, p / 2.0
    return JointSource(["0", "1"], ["0", "e", "1"], [[a, e, 0.0], [0.0, e, a]])


def erasure_channel(p: float) -> Channel:
    return Channel(["0", "1"], ["0", "e", "1"], [[1 - p, p, 0.0], [0.0, p, 1 - p]])


def symmetric_channel(q: float, n: int = 2) -> Channel:
    """n-ary symmetric channel: correct w.p. 1-q, otherwise uniform over the rest."""
    off = q / (n - 1)
    rows = np.full((n, n), off)
    np.fill_diagonal(rows, 1.0 - q)
    return Channel.of(rows, outputs=[str(i) for i in range(n)])


def identity_joint(prior: Distribution) -> JointSource:
    return JointSource(prior.labels, prior.labels, np.diag(prior.probs))


def product_joint(px: Distribution, py: Distribution) -> JointSource:
    return JointSource(px.labels, py.labels, np.outer(px.probs, py.probs))


# -- file formats ---------------------------------------------------------


def joint_to_json(j: JointSource) -> str:
    return json.dumps(
        {"x_labels": list(j.x_labels), "y_labels": list(j.y_labels), "pxy": j.pxy.tolist()}
    )


def joint_from_json(text: str) -> JointSource:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"line {e.lineno}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ValidationError("line 1: expected a JSON object")
    for key in ("x_labels", "y_labels", "pxy"):
        if key not in obj:
            raise ValidationError(f"missing key {key!r}")
    try:
        pxy = np.array(obj["pxy"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError("pxy: not a rectangular numeric matrix") from None
    return JointSource(obj["x_labels"], obj["y_labels"], pxy)


def joint_to_csv(j: JointSource) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "p"])
    for i, x in enumerate(j.x_labels):
        for k, y in enumerate(j.y_labels):
            w.writerow([x, y, repr(float(j.pxy[i, k]))])
    return buf.getvalue()


def joint_from_csv(text: str) -> JointSource:
    """Parse ``x,y,p`` triples; label order is order of first appearance, absent cells are 0."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "p"]:
        raise ValidationError("line 1: header must be 'x,y,p'")
    xs: dict[str, int] = {}
    ys: dict[str, int] = {}
    cells: dict[tuple[int, int], float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ValidationError(f"line {lineno}: expected 3 fields, got {len(row)}")
        x, y, p = (c.strip() for c in row)
        try:
            val = float(p)
        except ValueError:
            raise ValidationError(f"line {lineno}: bad probability {p!r}") from None
        key = (xs.setdefault(x, len(xs)), ys.setdefault(y, len(ys)))
        if key in cells:
            raise ValidationError(f"line {lineno}: duplicate cell ({x}, {y})")
        cells[key] = val
    if not cells:
        raise ValidationError("no data rows")
    pxy = np.zeros((len(xs), len(ys)))
    for (i, k), v in cells.items():
        pxy[i, k] = v
    return JointSource(list(xs), list(ys), pxy)


def load_joint(path: str | Path, fmt: str | None = None) -> JointSource:
    path = Path(path)
    text = path.read_text()
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    if fmt == "csv":
        return joint_from_csv(text)
    if fmt == "json":
        return joint_from_json(text)
    raise ValueError(f"unknown format {fmt!r}")
