import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foepm import rules
from foepm.config import DEFAULT_ENCODERS
from foepm.dataset import CLASSIFICATION, REGRESSION, Dataset, build_dataset
from foepm.encoding import FeatureVector, fit_vocabulary
from foepm.learners import ModelError, TrainParams, load_model, predict, save_model, train
from foepm.learners.baseline import ConstantModel, fit_mean, fit_priors
from foepm.learners.forest import RandomForest, fit_forest
from foepm.learners.linear import fit_linear
from foepm.learners.tree import DecisionTree, fit_tree
from foepm.synthetic import pingpong_log, remaining_time_log


def toy_dataset(kind, X, y, labels=()):
    X = np.asarray(X, dtype=float)
    n = len(X)
    return Dataset(kind, X, np.asarray(y), tuple(f"t{i}" for i in range(n)), np.full(n, 2),
                   tuple(f"f{j}" for j in range(X.shape[1])), tuple(labels))


def test_mean_baseline():
    m = fit_mean(np.array([1.0, 2.0, 3.0]))
    assert m.value == 2.0
    assert m.predict_value(np.zeros((4, 7))).tolist() == [2.0] * 4


def test_priors_baseline():
    m = fit_priors(np.array([0, 0, 1, 0]), 3)
    assert m.priors == (0.75, 0.25, 0.0)
    assert m.predict_proba(np.zeros((2, 1))).tolist() == [[0.75, 0.25, 0.0]] * 2


def test_tree_separates_a_threshold():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 100)
    y = (x >= 0).astype(np.int64)
    tree = fit_tree(x[:, None], y, n_classes=2, min_samples_leaf=1)
    assert (tree.predict_proba(x[:, None]).argmax(axis=1) == y).all()


def test_single_leaf_scores():
    tree = fit_tree(np.zeros((4, 1)), np.array([0, 0, 0, 1]), n_classes=2)
    assert tree.n_nodes == 1
    ds = toy_dataset(CLASSIFICATION, np.zeros((4, 1)), [0, 0, 0, 1], ("A", "B"))
    pred = predict(train(ds, "decisionTree"), FeatureVector(np.zeros(1), ds.schema))
    assert pred.value == "A" and pred.scores == {"A": 0.75, "B": 0.25}


def test_forest_tie_goes_to_lower_class():
    leaf = lambda counts: DecisionTree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([counts], float))
    forest = RandomForest([leaf([1.0, 0.0]), leaf([0.0, 1.0])], 2)
    scores = forest.predict_proba(np.zeros((1, 1)))
    assert scores.tolist() == [[0.5, 0.5]]
    assert int(scores.argmax(axis=1)[0]) == 0


def test_linear_recovers_a_line():
    x = np.arange(10, dtype=float)
    m = fit_linear(x[:, None], 2 * x + 1)
    assert np.allclose(m.coefficients, [2.0], atol=1e-9)
    assert abs(m.raw_intercept - 1.0) < 1e-9


def test_linear_handles_collinear_columns():
    x = np.arange(6, dtype=float)
    X = np.column_stack([x, x, np.ones(6)])
    m = fit_linear(X, 3 * x)
    assert np.allclose(m.predict_value(X), 3 * x, atol=1e-6)


def test_ols_residuals_orthogonal():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(200, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 0.0]) + 3 + rng.normal(scale=0.1, size=200)
    m = fit_linear(X, y)
    r = y - m.predict_value(X)
    design = np.column_stack([X, np.ones(len(X))])
    assert np.abs(design.T @ r).max() < 1e-6


def test_regression_tree_splits_reduce_error():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 10, (300, 2))
    y = np.where(X[:, 0] > 5, 10.0, 0.0) + X[:, 1]
    tree = fit_tree(X, y, max_depth=4, min_samples_leaf=5)
    sse_root = ((y - y.mean()) ** 2).sum()
    sse_tree = ((y - tree.predict_value(X)) ** 2).sum()
    assert tree.feature[0] == 0 and sse_tree < sse_root / 10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.booleans())
def test_forest_of_one_equals_the_tree(seed, classification):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, (60, 3)).astype(float)
    if classification:
        y = (X[:, 0] + rng.integers(0, 2, 60) > 2).astype(np.int64)
        tree = fit_tree(X, y, 2, 6, 2)
        forest = fit_forest(X, y, 2, n_trees=1, max_depth=6, min_samples_leaf=2, feature_fraction=1.0, bootstrap=False)
        assert np.array_equal(forest.predict_proba(X).argmax(axis=1), tree.predict_proba(X).argmax(axis=1))
    else:
        y = X[:, 1] * 2 + rng.normal(size=60)
        tree = fit_tree(X, y, 0, 6, 2)
        forest = fit_forest(X, y, 0, n_trees=1, max_depth=6, min_samples_leaf=2, feature_fraction=1.0, bootstrap=False)
        assert np.array_equal(forest.predict_value(X), tree.predict_value(X))
    assert forest.trees[0].to_state() == tree.to_state()


def test_forest_seed_and_workers_determinism():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(120, 5))
    y = (X[:, 0] > 0).astype(np.int64)
    a = fit_forest(X, y, 2, n_trees=15, seed=7, workers=1)
    b = fit_forest(X, y, 2, n_trees=15, seed=7, workers=4)
    c = fit_forest(X, y, 2, n_trees=15, seed=8, workers=1)
    assert json.dumps(a.to_state()) == json.dumps(b.to_state())
    assert json.dumps(a.to_state()) != json.dumps(c.to_state())


def test_train_params_validation():
    with pytest.raises(ValueError):
        TrainParams(n_trees=0)
    with pytest.raises(ValueError):
        TrainParams(feature_fraction=1.5)
    with pytest.raises(ValueError):
        TrainParams.from_dict({"depth": 3})
    assert TrainParams.from_dict({"max_depth": 3}).max_depth == 3


@pytest.fixture(scope="module")
def datasets():
    out = {}
    for kind, log, name in (
        (CLASSIFICATION, pingpong_log(30, 4), "pingpong_team"),
        (REGRESSION, remaining_time_log(30, 4), "remaining_time"),
    ):
        vocab = fit_vocabulary(log, DEFAULT_ENCODERS)
        out[kind] = build_dataset(rules.load(name), log, DEFAULT_ENCODERS, vocab)
    return out


CASES = [
    (CLASSIFICATION, "decisionTree"),
    (CLASSIFICATION, "randomForest"),
    (CLASSIFICATION, "meanBaseline"),
    (REGRESSION, "decisionTree"),
    (REGRESSION, "randomForest"),
    (REGRESSION, "linearRegression"),
    (REGRESSION, "meanBaseline"),
]


@pytest.mark.parametrize("kind, algorithm", CASES)
def test_model_round_trip(datasets, kind, algorithm):
    ds = datasets[kind]
    model = train(ds, algorithm, TrainParams(n_trees=10))
    text = save_model(model)
    again = load_model(text)
    assert save_model(again) == text
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 3, (100, len(ds.schema))) * (ds.X.max(axis=0) + 1)
    a, sa = model.predict_matrix(X)
    b, sb = again.predict_matrix(X)
    assert np.array_equal(a, b)
    if sa is not None:
        assert np.array_equal(sa, sb)


def test_model_file_round_trip(datasets, tmp_path):
    model = train(datasets[REGRESSION], "linearRegression")
    p = tmp_path / "m" / "model.json"
    save_model(model, p)
    assert save_model(load_model(p)) == p.read_text()


def test_corrupted_documents_rejected(datasets):
    text = save_model(train(datasets[CLASSIFICATION], "decisionTree"))
    doc = json.loads(text)
    doc["model"]["state"]["threshold"][0] += 1.0
    with pytest.raises(ModelError, match="checksum"):
        load_model(json.dumps(doc))
    with pytest.raises(ModelError):
        load_model(text[: len(text) // 2])
    doc = json.loads(text)
    doc["version"] = 99
    with pytest.raises(ModelError, match="version"):
        load_model(json.dumps(doc))
    with pytest.raises(ModelError):
        load_model('{"format": "something-else"}')


def test_schema_mismatch_rejected(datasets):
    ds = datasets[CLASSIFICATION]
    model = train(ds, "decisionTree")
    fv = FeatureVector(np.zeros(len(ds.schema)), tuple(reversed(ds.schema)))
    with pytest.raises(ModelError, match="schema"):
        predict(model, fv)


def test_linear_needs_regression(datasets):
    with pytest.raises(ModelError):
        train(datasets[CLASSIFICATION], "linearRegression")
    with pytest.raises(ModelError):
        train(datasets[CLASSIFICATION], "svm")


def test_constant_model_prediction():
    ds = toy_dataset(REGRESSION, np.zeros((3, 2)), [1.0, 2.0, 3.0])
    model = train(ds, "meanBaseline")
    assert isinstance(model.estimator, ConstantModel)
    assert predict(model, FeatureVector(np.array([5.0, -1.0]), ds.schema)).value == 2.0
