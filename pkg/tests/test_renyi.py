import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import distributions, joints, masses
from guessleak.prob_core import Distribution, LabelMismatch, channel_from_joint, identity_joint, product_joint
from guessleak.renyi import (
    arimoto_cond_entropy,
    arimoto_mi,
    escort,
    renyi_divergence,
    renyi_entropy,
    sibson_mi_array,
)

ORDERS = [0.3, 0.5, 1.0, 2.0, 5.0, math.inf]


def test_divergence_examples():
    p, q = Distribution.of([0.5, 0.5]), Distribution.of([0.25, 0.75])
    assert renyi_divergence(p, q, math.inf) == pytest.approx(math.log(2))
    assert renyi_divergence(p, p, 2.0) == 0.0
    # KL by hand
    kl = 0.5 * math.log(2) + 0.5 * math.log(0.5 / 0.75)
    assert renyi_divergence(p, q, 1.0) == pytest.approx(kl, abs=1e-15)


def test_divergence_infinite_when_q_misses_support():
    p, q = Distribution.of([0.5, 0.5]), Distribution.of([1.0, 0.0])
    for a in (1.0, 2.0, math.inf):
        assert renyi_divergence(p, q, a) == math.inf
    # below order 1 the divergence stays finite: log 2 at order 1/2
    assert renyi_divergence(p, q, 0.5) == pytest.approx(-2 * math.log(0.5**0.5))


def test_divergence_ignores_zero_mass_of_p():
    p, q = Distribution.of([1.0, 0.0]), Distribution.of([0.5, 0.5])
    assert renyi_divergence(p, q, math.inf) == pytest.approx(math.log(2))


def test_bad_orders_and_alphabets():
    p = Distribution.of([0.5, 0.5])
    for a in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            renyi_divergence(p, p, a)
    with pytest.raises(LabelMismatch):
        renyi_divergence(p, Distribution.of([0.5, 0.5], ["a", "b"]), 2.0)


def test_entropy_examples():
    u = Distribution.uniform(4)
    for a in ORDERS:
        assert renyi_entropy(u, a) == pytest.approx(math.log(4))
    assert renyi_entropy(Distribution.point_mass(3), 2.0) == pytest.approx(0.0, abs=1e-15)


def test_arimoto_identity_and_independence():
    p = Distribution.of([0.1, 0.2, 0.7])
    for a in (0.5, 2.0, math.inf):
        assert arimoto_mi(identity_joint(p), a) == pytest.approx(renyi_entropy(p, a), abs=1e-12)
        assert arimoto_mi(product_joint(p, Distribution.of([0.4, 0.6], ["a", "b"])), a) == pytest.approx(0.0, abs=1e-12)


@given(distributions(), st.sampled_from(ORDERS), st.data())
def test_divergence_matches_oracle(p, alpha, data):
    w = np.array(data.draw(st.lists(masses(), min_size=len(p), max_size=len(p))))
    if w.sum() <= 0:
        w[:] = 1.0
    q = Distribution(p.labels, w / w.sum())
    got = renyi_divergence(p, q, alpha)
    want = oracles.renyi_divergence(list(p.probs), list(q.probs), alpha)
    if math.isinf(want):
        assert math.isinf(got)
    else:
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


@given(distributions(), st.sampled_from(ORDERS))
def test_entropy_matches_oracle(p, alpha):
    assert renyi_entropy(p, alpha) == pytest.approx(oracles.renyi_entropy(list(p.probs), alpha), abs=1e-10)


@given(joints(allow_zeros=True), st.sampled_from([0.3, 0.5, 2.0, 4.0]))
def test_arimoto_matches_oracle(j, alpha):
    want = oracles.arimoto_cond_entropy(j.pxy.tolist(), alpha)
    assert arimoto_cond_entropy(j, alpha) == pytest.approx(want, abs=1e-10)


@given(joints(), st.sampled_from([0.3, 0.5, 1.0, 2.0, math.inf]))
def test_arimoto_mi_bounds(j, alpha):
    i = arimoto_mi(j, alpha)
    h = renyi_entropy(Distribution(j.x_labels, j.px), alpha)
    assert -1e-10 <= i <= h + 1e-10


@given(joints(allow_zeros=False), st.sampled_from([0.3, 0.5, 2.0]))
def test_arimoto_equals_sibson_at_escort(j, alpha):
    ch = channel_from_joint(j)
    q = escort(j.px, alpha)
    assert float(sibson_mi_array(q, ch.rows, alpha)) == pytest.approx(arimoto_mi(j, alpha), abs=1e-10)


@given(distributions(min_size=2, allow_zeros=False), st.data())
def test_divergence_nondecreasing_in_order(p, data):
    w = np.array(data.draw(st.lists(masses(False), min_size=len(p), max_size=len(p))))
    q = Distribution(p.labels, w / w.sum())
    vals = [renyi_divergence(p, q, a) for a in (0.2, 0.5, 0.9, 1.0, 1.5, 3.0, 10.0, math.inf)]
    assert all(v >= -1e-12 for v in vals)
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


@given(distributions(min_size=2, allow_zeros=False), st.data())
def test_divergence_limits(p, data):
    w = np.array(data.draw(st.lists(masses(False), min_size=len(p), max_size=len(p))))
    q = Distribution(p.labels, w / w.sum())
    kl = renyi_divergence(p, q, 1.0)
    for a in (1 - 1e-6, 1 + 1e-6):
        assert renyi_divergence(p, q, a) == pytest.approx(kl, abs=1e-4 * (1 + kl))
    dinf = renyi_divergence(p, q, math.inf)
    # D_a >= D_inf + log(p_min)/(a-1), keeping only the term that attains D_inf
    a = 1e5
    assert dinf + math.log(p.probs.min()) / (a - 1) - 1e-9 <= renyi_divergence(p, q, a) <= dinf + 1e-9
