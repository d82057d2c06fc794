import numpy as np
import pytest

from conceptviews import (
    ManyValuedView,
    Metric,
    SymbolicView,
    Thresholds,
    class_separation,
    compute_thresholds,
    nn_classify,
    restrict_to_positive,
    scale,
    split_statistics,
    symbolic_nn_classify,
)
from conceptviews.errors import ConfigError
from conceptviews.fca import FormalContext

from conftest import random_view
from oracles import nn_oracle, euclidean_scalar


def test_scale_sign_split():
    view = ManyValuedView(
        ("g",), ("c",), np.array([[0.5, -0.5]]), np.array([[1.0, 1.0]])
    )
    sv = scale(view, Thresholds(0.0, 0.0))
    assert sv.object_context.attributes == ("n_1", "n_2", "not_n_1", "not_n_2")
    assert sv.object_context.derive_objects(["g"]) == ("n_1", "not_n_2")


def test_boundary_goes_to_barred():
    view = ManyValuedView(
        ("g",), ("c",), np.array([[0.0, 0.0001]]), np.array([[0.0, 0.0]])
    )
    sv = scale(view, Thresholds(0.0, 0.0))
    assert sv.object_context.derive_objects(["g"]) == ("n_2", "not_n_1")
    # the class row sits exactly on the threshold everywhere
    assert sv.class_context.derive_objects(["c"]) == ("not_n_1", "not_n_2")


def test_scale_matches_scalar_oracle(rng):
    for _ in range(30):
        view = random_view(rng, n_obj=5, n_cls=2, h=3)
        delta_o = float(rng.normal())
        delta_w = float(rng.normal())
        sv = scale(view, Thresholds(delta_o, delta_w))
        dense = sv.object_context.to_dense()
        for i in range(5):
            for j in range(3):
                above = view.object_view[i, j] > delta_o
                assert dense[i, j] == above
                assert dense[i, 3 + j] == (not above)
        dense_c = sv.class_context.to_dense()
        for i in range(2):
            for j in range(3):
                above = view.class_view[i, j] > delta_w
                assert dense_c[i, j] == above
                assert dense_c[i, 3 + j] == (not above)


def test_complementarity_and_validation(rng):
    for _ in range(50):
        h = int(rng.integers(1, 6))
        view = random_view(rng, n_obj=6, n_cls=3, h=h)
        sv = scale(view, Thresholds(float(rng.normal()), float(rng.normal())))
        for ctx in (sv.object_context, sv.class_context):
            dense = ctx.to_dense()
            assert (dense.sum(axis=1) == h).all()
    # a context violating complementarity is rejected
    ctx = FormalContext(["g"], ["n_1", "not_n_1"], np.array([[1, 1]], dtype=bool))
    with pytest.raises(ValueError):
        SymbolicView(object_context=ctx, class_context=ctx)
    # mismatched attribute lists are rejected
    a = FormalContext(["g"], ["n_1", "not_n_1"], np.array([[1, 0]], dtype=bool))
    b = FormalContext(["c"], ["n_2", "not_n_2"], np.array([[1, 0]], dtype=bool))
    with pytest.raises(ValueError):
        SymbolicView(object_context=a, class_context=b)


def test_scaling_monotone_in_threshold(rng):
    view = random_view(rng, n_obj=8, n_cls=3, h=4)
    low = scale(view, Thresholds(-0.5, 0.0)).object_context.to_dense()[:, :4]
    high = scale(view, Thresholds(0.5, 0.0)).object_context.to_dense()[:, :4]
    assert not (high & ~low).any()  # raising delta never adds a positive attribute


def test_split_statistics():
    all_positive = ManyValuedView(
        ("g",), ("c",), np.array([[1.0, 2.0, 3.0]]), np.array([[5.0, 5.0, 5.0]])
    )
    (above, below), (c_above, c_below) = split_statistics(all_positive, Thresholds())
    assert (above, below) == (100.0, 0.0)
    assert (c_above, c_below) == (100.0, 0.0)
    antisymmetric = ManyValuedView(
        ("g1", "g2"),
        ("c",),
        np.array([[1.5, -0.25], [-1.5, 0.25]]),
        np.array([[2.0, -2.0]]),
    )
    (above, below), (c_above, c_below) = split_statistics(antisymmetric, Thresholds())
    assert (above, below) == (50.0, 50.0)
    assert (c_above, c_below) == (50.0, 50.0)


def test_split_statistics_sum_to_100(rng):
    for _ in range(50):
        view = random_view(rng, n_obj=4, n_cls=3, h=3)
        t = Thresholds(float(rng.normal()), float(rng.normal()))
        for above, below in split_statistics(view, t):
            assert above + below == 100.0


def test_threshold_strategies(rng):
    view = random_view(rng, n_obj=10, n_cls=4, h=5)
    t = compute_thresholds(view, "zero")
    assert t.delta_object == 0.0 and t.delta_class == 0.0
    t = compute_thresholds(view, "mean")
    assert t.delta_object == pytest.approx(view.object_view.mean())
    assert t.delta_class == pytest.approx(view.class_view.mean())
    t = compute_thresholds(view, "median")
    assert t.delta_object == pytest.approx(np.median(view.object_view))
    t = compute_thresholds(view, "median-per-neuron")
    assert isinstance(t.delta_object, np.ndarray) and t.delta_object.shape == (5,)
    sv = scale(view, t)
    # per-neuron medians nearly balance each column's split
    dense = sv.object_context.to_dense()[:, :5]
    assert (dense.sum(axis=0) <= 5).all()
    with pytest.raises(ConfigError):
        compute_thresholds(view, "kde")
    with pytest.raises(ValueError):
        Thresholds(float("nan"), 0.0)


def test_class_separation():
    rows = np.array([[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
    view = ManyValuedView(
        ("g",), ("c1", "c2", "c3", "c4"), np.array([[0.0, 0.0]]), rows
    )
    sv = scale(view, Thresholds())
    assert class_separation(sv) == 0.5  # c3 and c4 collide
    distinct = ManyValuedView(
        ("g",), ("c1", "c2"), np.array([[0.0, 0.0]]), rows[:2]
    )
    assert class_separation(scale(distinct, Thresholds())) == 1.0


def test_symbolic_nn_exact_match_and_single_class():
    rows = np.array([[1.0, -1.0], [-1.0, 1.0]])
    view = ManyValuedView(("g1", "g2"), ("c1", "c2"), rows.copy(), rows.copy())
    sv = scale(view, Thresholds())
    assert symbolic_nn_classify(sv, Metric.EUCLIDEAN) == {"g1": "c1", "g2": "c2"}
    single = ManyValuedView(("g1", "g2"), ("c1",), rows, rows[:1])
    got = symbolic_nn_classify(scale(single, Thresholds()), Metric.EUCLIDEAN)
    assert set(got.values()) == {"c1"}


def test_symbolic_metrics_agree(rng):
    for _ in range(100):
        h = int(rng.integers(1, 7))
        view = random_view(
            rng, n_obj=int(rng.integers(2, 9)), n_cls=int(rng.integers(1, 5)), h=h
        )
        sv = scale(view, Thresholds(float(rng.normal(0, 0.3)), float(rng.normal(0, 0.3))))
        euclid = symbolic_nn_classify(sv, Metric.EUCLIDEAN)
        cosine = symbolic_nn_classify(sv, Metric.COSINE_DISTANCE)
        assert euclid == cosine


def test_symbolic_nn_matches_binary_oracle(rng):
    for _ in range(20):
        view = random_view(rng, n_obj=6, n_cls=3, h=4)
        sv = scale(view, Thresholds())
        obj = sv.object_context.to_dense().astype(float)
        cls = sv.class_context.to_dense().astype(float)
        want = nn_oracle(obj, cls, euclidean_scalar)
        got = symbolic_nn_classify(sv, Metric.EUCLIDEAN)
        assert got == {
            g: sv.class_context.objects[j]
            for g, j in zip(sv.object_context.objects, want)
        }


def test_restrict_to_positive(rng):
    view = random_view(rng, n_obj=4, n_cls=2, h=2)
    sv = scale(view, Thresholds())
    obj_pos, cls_pos = restrict_to_positive(sv)
    assert obj_pos.attributes == ("n_1", "n_2")
    assert cls_pos.attributes == ("n_1", "n_2")
    assert np.array_equal(obj_pos.to_dense(), sv.object_context.to_dense()[:, :2])
    # complementarity is gone: rows can be empty now
    all_negative = ManyValuedView(
        ("g",), ("c",), np.array([[-1.0, -1.0]]), np.array([[1.0, 1.0]])
    )
    obj_pos, _ = restrict_to_positive(scale(all_negative, Thresholds()))
    assert obj_pos.to_dense().sum() == 0
