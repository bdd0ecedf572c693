import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmtnet.baselines import KnnModel, SvmModel, knn_classify, svm_predict, svm_scores, svm_train
from pmtnet.errors import ConfigError, DataError, StateError


def clusters(rng, n_per, centers, sigma=1.0):
    x = np.concatenate([c + sigma * rng.normal(size=(n_per, len(c))) for c in centers])
    y = np.repeat(np.arange(len(centers)), n_per)
    return x, y


CENTERS = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]])


def brute_knn(train, labels, q, k):
    d = np.sum((train - q) ** 2, axis=1)
    idx = sorted(range(len(d)), key=lambda i: (d[i], i))[:k]
    votes = np.bincount(labels[idx], minlength=5)
    best = votes.max()
    return next(int(labels[i]) for i in idx if votes[labels[i]] == best)


# -- k-NN ---------------------------------------------------------------------

def test_single_example_model(rng):
    m = KnnModel.fit(np.ones((1, 192)), [3], k=1)
    assert knn_classify(m, rng.normal(size=192)) == 3
    assert np.all(knn_classify(m, rng.normal(size=(4, 192))) == 3)


def test_exact_match_k1(rng):
    x = rng.normal(size=(30, 192))
    y = rng.integers(0, 5, 30)
    m = KnnModel.fit(x, y, k=1)
    assert knn_classify(m, x[7]) == y[7]
    # k = 1 is perfect on its own unique training set
    assert np.array_equal(knn_classify(m, x), y)


def test_toy_clusters_perfect(rng):
    x, y = clusters(rng, 40, CENTERS)
    q, qy = clusters(rng, 34, CENTERS)
    assert np.array_equal(knn_classify(KnnModel.fit(x, y), q[:100]), qy[:100])


def test_distance_tie_goes_to_lower_index():
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert knn_classify(KnnModel.fit(x, [2, 4], k=1), np.zeros(2)) == 2
    assert knn_classify(KnnModel.fit(x[::-1], [4, 2], k=1), np.zeros(2)) == 4


def test_vote_tie_goes_to_closest_class():
    x = np.array([[3.0], [1.0], [2.0], [4.0]])
    m = KnnModel.fit(x, [0, 1, 0, 1], k=4)
    assert knn_classify(m, np.array([0.0]).reshape(1, 1)) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 3, 5, 7]))
def test_matches_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    # small integer grid so that distance ties actually happen
    x = rng.integers(0, 3, size=(25, 4)).astype(float)
    y = rng.integers(0, 5, 25)
    q = rng.integers(0, 3, size=(10, 4)).astype(float)
    got = knn_classify(KnnModel.fit(x, y, k), q, chunk=3)
    assert got.tolist() == [brute_knn(x, y, qi, k) for qi in q]


def test_knn_errors():
    with pytest.raises(StateError):
        KnnModel.fit(np.zeros((0, 3)), [])
    with pytest.raises(ConfigError):
        KnnModel.fit(np.zeros((2, 3)), [0, 1], k=3)
    with pytest.raises(StateError):
        knn_classify(KnnModel(np.zeros((0, 3)), np.zeros(0, int)), np.zeros(3))


# -- SVM ---------------------------------------------------------------------------------

def separable(rng, n=40):
    # classes on either side of x0 = 0 with a gap of 2 around the boundary
    x = rng.uniform(-3, 3, size=(n, 2))
    x[:, 0] = np.where(np.arange(n) % 2 == 0, 1, -1) * rng.uniform(1, 3, n)
    y = (x[:, 0] < 0).astype(np.int64)
    return x, y


def test_separable_two_class(rng):
    x, y = separable(rng)
    m = svm_train(x, y, lam=1e-3, epochs=50)
    assert np.array_equal(svm_predict(m, x), y)


def test_separable_two_class_stochastic(rng):
    x, y = separable(rng)
    m = svm_train(x, y, lam=1e-3, epochs=50, batch_size=1, seed=3)
    assert np.array_equal(svm_predict(m, x), y)


def test_large_lambda_shrinks_weights(rng):
    x, y = separable(rng)
    m = svm_train(x, y, lam=1e3, epochs=50)
    assert np.linalg.norm(m.weights) < 0.1


def test_duplicated_data_same_decision_function(rng):
    x, y = clusters(rng, 20, CENTERS)
    a = svm_train(x, y, epochs=100)
    b = svm_train(np.concatenate([x, x]), np.concatenate([y, y]), epochs=100)
    q = rng.normal(scale=5, size=(50, 3))
    np.testing.assert_allclose(svm_scores(a, q), svm_scores(b, q), atol=1e-3)


def test_svm_deterministic(rng):
    x, y = clusters(rng, 10, CENTERS)
    a = svm_train(x, y, epochs=5, batch_size=4, seed=11)
    b = svm_train(x, y, epochs=5, batch_size=4, seed=11)
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)


def test_zero_model_predicts_class0():
    m = SvmModel(np.zeros((5, 4)), np.zeros(5))
    assert svm_predict(m, np.ones(4)) == 0


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3))
def test_bias_shift_invariance(seed, c):
    rng = np.random.default_rng(seed)
    m = SvmModel(rng.normal(size=(5, 6)), rng.normal(size=5))
    q = rng.normal(size=(20, 6))
    shifted = SvmModel(m.weights, m.bias + c)
    s = svm_scores(m, q)
    # skip near-ties where adding c may round differently
    srt = np.sort(s, axis=1)
    ok = srt[:, -1] - srt[:, -2] > 1e-9 * (1 + abs(c))
    assert np.array_equal(svm_predict(m, q)[ok], svm_predict(shifted, q)[ok])


def test_svm_single_class():
    with pytest.raises(DataError):
        svm_train(np.zeros((4, 2)), [1, 1, 1, 1])
