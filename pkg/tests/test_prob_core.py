import numpy as np
import pytest
from hypothesis import given

from conftest import joints
from guessleak.prob_core import (
    Channel,
    Distribution,
    JointSource,
    LabelMismatch,
    ValidationError,
    ZeroMassInput,
    ZeroMassOutput,
    channel_from_joint,
    erasure_source,
    identity_joint,
    joint_from,
    joint_from_csv,
    joint_from_json,
    joint_to_csv,
    joint_to_json,
    load_joint,
    marginal_x,
    marginal_y,
    posterior,
    product_joint,
    symmetric_channel,
)


def test_distribution_rejects_bad_mass():
    with pytest.raises(ValidationError):
        Distribution.of([0.5, 0.6])
    with pytest.raises(ValidationError):
        Distribution.of([-0.1, 1.1])
    with pytest.raises(ValidationError):
        Distribution.of([np.nan, 1.0])


def test_distribution_renormalizes_small_drift():
    d = Distribution.of([0.5, 0.5 + 1e-10])
    assert abs(d.probs.sum() - 1) < 1e-15


def test_duplicate_labels_rejected():
    with pytest.raises(ValidationError):
        Distribution(["a", "a"], [0.5, 0.5])


def test_distribution_is_immutable():
    d = Distribution.uniform(3)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_channel_rows_must_be_stochastic():
    with pytest.raises(ValidationError):
        Channel.of([[0.5, 0.4], [0.5, 0.5]])


def test_erasure_source_marginals():
    j = erasure_source(0.5)
    np.testing.assert_allclose(j.px, [0.5, 0.5])
    np.testing.assert_allclose(j.py, [0.25, 0.5, 0.25])
    np.testing.assert_allclose(posterior(j, "e").probs, [0.5, 0.5])
    np.testing.assert_allclose(posterior(j, "0").probs, [1.0, 0.0])


def test_erasure_range():
    with pytest.raises(ValueError):
        erasure_source(1.0)


def test_posterior_zero_mass_output():
    j = JointSource.of([[0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(ZeroMassOutput):
        posterior(j, "y1")
    assert j.admissible_outputs() == ["y0"]


def test_unknown_output_label():
    with pytest.raises(LabelMismatch):
        posterior(erasure_source(0.1), "nope")


def test_channel_from_joint_drops_dead_inputs():
    j = JointSource.of([[0.5, 0.5], [0.0, 0.0]])
    ch = channel_from_joint(j)
    assert ch.input_labels == ("x0",)
    with pytest.raises(ZeroMassInput) as e:
        channel_from_joint(j, strict=True)
    assert e.value.labels == ("x1",)


def test_joint_from_roundtrip():
    ch = symmetric_channel(0.2)
    prior = Distribution(ch.input_labels, [0.3, 0.7])
    j = joint_from(prior, ch)
    np.testing.assert_allclose(channel_from_joint(j).rows, ch.rows)
    with pytest.raises(LabelMismatch):
        joint_from(Distribution.of([0.3, 0.7], ["a", "b"]), ch)


def test_identity_and_product():
    p = Distribution.of([0.2, 0.8])
    np.testing.assert_allclose(identity_joint(p).pxy, np.diag([0.2, 0.8]))
    j = product_joint(p, Distribution.of([0.5, 0.5], ["a", "b"]))
    np.testing.assert_allclose(posterior(j, "a").probs, p.probs)


def test_csv_first_appearance_order_and_missing_cells():
    text = "x,y,p\nb,1,0.25\na,0,0.5\nb,0,0.25\n"
    j = joint_from_csv(text)
    assert j.x_labels == ("b", "a")
    assert j.y_labels == ("1", "0")
    np.testing.assert_allclose(j.pxy, [[0.25, 0.25], [0.0, 0.5]])


@pytest.mark.parametrize(
    "text, line",
    [
        ("x,y,q\na,b,1\n", "line 1"),
        ("x,y,p\na,b\n", "line 2"),
        ("x,y,p\na,b,1\na,c,oops\n", "line 3"),
        ("x,y,p\na,b,0.5\na,b,0.5\n", "line 3"),
    ],
)
def test_csv_diagnostics(text, line):
    with pytest.raises(ValidationError, match=line):
        joint_from_csv(text)


def test_json_diagnostics():
    with pytest.raises(ValidationError, match="line 2"):
        joint_from_json('{"x_labels": ["a"],\n "y_labels": [}')
    with pytest.raises(ValidationError, match="pxy"):
        joint_from_json('{"x_labels": ["a"], "y_labels": ["b"]}')


def test_load_joint_by_extension(tmp_path):
    j = erasure_source(0.3)
    (tmp_path / "s.csv").write_text(joint_to_csv(j))
    (tmp_path / "s.json").write_text(joint_to_json(j))
    for name in ("s.csv", "s.json"):
        k = load_joint(tmp_path / name)
        np.testing.assert_array_equal(k.pxy, j.pxy)
        assert k.checksum() == j.checksum()


@given(joints())
def test_serialization_roundtrip(j):
    for k in (joint_from_json(joint_to_json(j)), joint_from_csv(joint_to_csv(j))):
        assert k.x_labels == j.x_labels and k.y_labels == j.y_labels
        np.testing.assert_array_equal(k.pxy, j.pxy)


@given(joints())
def test_marginals_and_posteriors_are_distributions(j):
    assert abs(marginal_x(j).probs.sum() - 1) < 1e-12
    assert abs(marginal_y(j).probs.sum() - 1) < 1e-12
    for y in j.admissible_outputs():
        post = posterior(j, y).probs
        assert abs(post.sum() - 1) < 1e-12
    # total probability: sum_y P_Y(y) P_{X|Y=y} = P_X
    mix = sum(j.py[j.y_index(y)] * posterior(j, y).probs for y in j.admissible_outputs())
    np.testing.assert_allclose(mix, j.px, atol=1e-12)
