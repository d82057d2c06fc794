import numpy as np
import pytest

from conceptviews import (
    KeyMismatchError,
    ManyValuedView,
    Metric,
    UnknownIdError,
    class_vector,
    fidelity,
    load_view,
    logit,
    logit_breakdown,
    logit_matrix,
    nn_classify,
    object_class_distances,
    object_vector,
    save_view,
)
from conceptviews.errors import ConfigError, FormatError

from conftest import random_view
from oracles import cosine_distance_scalar, euclidean_scalar, nn_oracle


def small_view(bias=None, predictions=None):
    return ManyValuedView(
        object_ids=("g1", "g2"),
        class_ids=("c1", "c2"),
        object_view=np.array([[1.0, 2.0], [3.0, 4.0]]),
        class_view=np.array([[3.0, 4.0], [0.0, 1.0]]),
        bias=bias,
        model_predictions=predictions,
    )


def test_view_validation():
    with pytest.raises(ValueError):
        ManyValuedView(("g", "g"), ("c",), np.zeros((2, 2)), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        ManyValuedView(("g",), ("c",), np.zeros((1, 2)), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        ManyValuedView(("g",), ("c",), np.zeros((1, 2)), np.zeros((1, 2)), bias=np.zeros(2))
    with pytest.raises(UnknownIdError):
        ManyValuedView(
            ("g",), ("c",), np.zeros((1, 2)), np.zeros((1, 2)),
            model_predictions={"nope": "c"},
        )
    with pytest.raises(UnknownIdError):
        ManyValuedView(
            ("g",), ("c",), np.zeros((1, 2)), np.zeros((1, 2)),
            model_predictions={"g": "nope"},
        )


def test_row_reads_and_round_trip():
    view = small_view()
    assert object_vector(view, "g1").tolist() == [1.0, 2.0]
    assert class_vector(view, "c2").tolist() == [0.0, 1.0]
    with pytest.raises(UnknownIdError):
        object_vector(view, "missing")
    with pytest.raises(UnknownIdError):
        class_vector(view, "missing")
    rebuilt = np.stack([object_vector(view, g) for g in view.object_ids])
    assert np.array_equal(rebuilt, view.object_view)


def test_logit_examples():
    orthogonal = ManyValuedView(
        ("g",), ("c",), np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])
    )
    assert logit(orthogonal, "g", "c") == 0.0
    view = small_view(bias=np.array([0.5, 0.0]))
    assert logit(view, "g1", "c1") == pytest.approx(11.5)
    breakdown = logit_breakdown(view, "g1", "c1")
    assert not breakdown.bias_missing
    assert breakdown.bias == 0.5
    missing = small_view()
    assert logit_breakdown(missing, "g1", "c1").bias_missing


def test_logit_decomposition_identity(rng):
    for _ in range(200):
        view = random_view(rng, n_obj=3, n_cls=3, h=5, with_bias=True)
        g = view.object_ids[int(rng.integers(3))]
        c = view.class_ids[int(rng.integers(3))]
        b = logit_breakdown(view, g, c)
        assert b.factored_value == pytest.approx(b.value, rel=1e-9)
    matrix = logit_matrix(view)
    for i, g in enumerate(view.object_ids):
        for j, c in enumerate(view.class_ids):
            assert matrix[i, j] == pytest.approx(logit(view, g, c))


def test_distances_match_scalar_oracle(rng):
    for _ in range(40):
        view = random_view(rng, n_obj=3, n_cls=2, h=4)
        for metric, scalar in (
            (Metric.EUCLIDEAN, euclidean_scalar),
            (Metric.COSINE_DISTANCE, cosine_distance_scalar),
        ):
            got = object_class_distances(view, metric)
            assert got.shape == (3, 2)
            assert np.all(got >= 0)
            for i in range(3):
                for j in range(2):
                    want = scalar(view.object_view[i], view.class_view[j])
                    assert got[i, j] == pytest.approx(want, abs=1e-12)


def test_distance_conventions():
    view = ManyValuedView(
        ("g1", "g2"),
        ("c1", "c2"),
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[1.0, 0.0], [0.0, 1.0]]),
    )
    euclid = object_class_distances(view, Metric.EUCLIDEAN)
    assert euclid[0, 0] == 0.0  # identical vectors
    cos = object_class_distances(view, Metric.COSINE_DISTANCE)
    assert cos[0, 1] == pytest.approx(1.0)  # orthogonal
    assert cos[1, 0] == 1.0 and cos[1, 1] == 1.0  # zero vector convention
    assert cos[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_metric_parsing():
    assert Metric.from_name("euclidean") is Metric.EUCLIDEAN
    assert Metric.from_name("COSINE") is Metric.COSINE_DISTANCE
    with pytest.raises(ConfigError):
        Metric.from_name("manhattan")


def test_nn_classify_matches_oracle(rng):
    for _ in range(40):
        view = random_view(rng, n_obj=10, n_cls=4, h=3)
        for metric, scalar in (
            (Metric.EUCLIDEAN, euclidean_scalar),
            (Metric.COSINE_DISTANCE, cosine_distance_scalar),
        ):
            got = nn_classify(view, metric)
            want = nn_oracle(view.object_view, view.class_view, scalar)
            assert got == {
                g: view.class_ids[j] for g, j in zip(view.object_ids, want)
            }


def test_nn_classify_edge_cases():
    # objects equal to class rows map to those classes
    rows = np.array([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    view = ManyValuedView(
        ("g1", "g2", "g3"), ("c1", "c2", "c3"), rows.copy(), rows.copy()
    )
    assert nn_classify(view, Metric.EUCLIDEAN) == {"g1": "c1", "g2": "c2", "g3": "c3"}
    # single class is a constant map
    single = ManyValuedView(("g1", "g2"), ("c1",), rows[:2], rows[:1])
    assert set(nn_classify(single, Metric.EUCLIDEAN).values()) == {"c1"}
    # exact tie: smallest class index wins
    tie = ManyValuedView(
        ("g",), ("c1", "c2"), np.array([[0.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 1.0]])
    )
    assert nn_classify(tie, Metric.EUCLIDEAN) == {"g": "c1"}


def test_nn_invariant_under_neuron_permutation(rng):
    view = random_view(rng, n_obj=12, n_cls=4, h=6)
    perm = rng.permutation(6)
    permuted = ManyValuedView(
        view.object_ids,
        view.class_ids,
        view.object_view[:, perm],
        view.class_view[:, perm],
    )
    for metric in Metric:
        assert nn_classify(view, metric) == nn_classify(permuted, metric)


def test_fidelity():
    a = {"g1": "c1", "g2": "c2"}
    assert fidelity(a, dict(a)) == 1.0
    assert fidelity(a, {"g1": "c2", "g2": "c1"}) == 0.0
    assert fidelity(a, {"g1": "c1", "g2": "c1"}) == 0.5
    with pytest.raises(KeyMismatchError):
        fidelity(a, {"g1": "c1"})
    with pytest.raises(ConfigError):
        fidelity({}, {})


def test_view_round_trip(tmp_path, rng):
    view = random_view(rng, n_obj=5, n_cls=3, h=4, with_bias=True)
    predictions = {g: view.class_ids[i % 3] for i, g in enumerate(view.object_ids)}
    view = ManyValuedView(
        view.object_ids,
        view.class_ids,
        view.object_view,
        view.class_view,
        bias=view.bias,
        model_predictions=predictions,
    )
    save_view(view, tmp_path / "v", activation="tanh", source_model="toy")
    again = load_view(tmp_path / "v")
    assert again.object_ids == view.object_ids
    assert again.class_ids == view.class_ids
    assert np.array_equal(again.object_view, view.object_view)
    assert np.array_equal(again.class_view, view.class_view)
    assert np.array_equal(again.bias, view.bias)
    assert again.model_predictions == predictions


def test_view_format_errors(tmp_path, rng):
    view = random_view(rng, n_obj=2, n_cls=2, h=2)
    save_view(view, tmp_path / "v")
    objects = tmp_path / "v" / "objects.csv"
    original = objects.read_text()

    objects.write_text(original.replace("id,n_1,n_2", "name,n_1,n_2"))
    with pytest.raises(FormatError):
        load_view(tmp_path / "v")

    objects.write_text(original.replace("id,n_1,n_2", "id,n_2,n_1"))
    with pytest.raises(FormatError):
        load_view(tmp_path / "v")

    objects.write_text(original.replace("g0,", "g0,oops,", 1))
    with pytest.raises(FormatError):
        load_view(tmp_path / "v")

    (tmp_path / "v" / "view.json").unlink()
    with pytest.raises(FormatError):
        load_view(tmp_path / "v")
