import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import cross_val_score

from noisyrnn.estimators import GridERMClassifier, NoisyRecurrentClassifier
from noisyrnn.learning import sign
from noisyrnn.networks import MLPSpec, recurrent_forward


def task(m=60, seed=0):
    gen = np.random.default_rng(seed)
    X = gen.uniform(-0.5, 0.5, (m, 1, 3))
    teacher = MLPSpec((2, 2), [[[1.5, -2.0], [0.5, 4.0]]])
    y = np.where(sign(recurrent_forward(teacher, X)) > 0, "pos", "neg")
    return X, y


class TestNoisyRecurrentClassifier:
    def test_fit_predict(self):
        X, y = task()
        clf = NoisyRecurrentClassifier(sigma=0.0, learning_rate=2.0, epochs=150, gamma=0.2, random_state=0).fit(X, y)
        assert set(clf.predict(X)) <= {"pos", "neg"}
        assert clf.score(X, y) >= 0.8
        assert clf.loss_curve_[-1] <= clf.loss_curve_[0]

    def test_params_roundtrip(self):
        clf = NoisyRecurrentClassifier(hidden=(3,), sigma=0.2)
        assert clone(clf).get_params() == clf.get_params()
        assert clf.set_params(q=3).q == 3

    def test_reproducible(self):
        X, y = task(30)
        a = NoisyRecurrentClassifier(sigma=0.2, epochs=10, random_state=4).fit(X, y).decision_function(X)
        b = NoisyRecurrentClassifier(sigma=0.2, epochs=10, random_state=4).fit(X, y).decision_function(X)
        np.testing.assert_array_equal(a, b)

    def test_rejects_flat_input(self):
        with pytest.raises(ValueError):
            NoisyRecurrentClassifier().fit(np.zeros((4, 3)), [0, 1, 0, 1])

    def test_rejects_multiclass(self):
        with pytest.raises(ValueError):
            NoisyRecurrentClassifier().fit(np.zeros((3, 1, 2)), [0, 1, 2])

    def test_cross_validation(self):
        X, y = task(45)
        scores = cross_val_score(NoisyRecurrentClassifier(sigma=0.0, epochs=20, random_state=0), X, y, cv=3)
        assert scores.shape == (3,)


class TestGridERMClassifier:
    def test_recovers_grid_teacher(self):
        gen = np.random.default_rng(1)
        X = gen.uniform(-0.5, 0.5, (80, 1, 2))
        teacher = MLPSpec((1, 1), [[[-1.0]]])
        y = sign(recurrent_forward(teacher, X))
        clf = GridERMClassifier(gamma=0.01).fit(X, y)
        assert clf.network_ == teacher and clf.score(X, y) == 1.0

    def test_single_class(self):
        X = np.zeros((3, 1, 2))
        assert GridERMClassifier().fit(X, [1, 1, 1]).predict(X).tolist() == [1, 1, 1]
