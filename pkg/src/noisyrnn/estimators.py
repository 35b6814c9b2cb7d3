"""scikit-learn compatible classifiers over input sequences of shape ``(n, p, T)``."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .covers import GridClassSpec, enumerate_grid_class
from .learning import SampleSet, SGDParams, derandomized_predictions, erm_grid, sgd_train
from .networks import MLPSpec, RecurrentConfig, check_sequences
from .numerics import RngStream


def _check_sequences(X) -> np.ndarray:
    X = check_array(X, allow_nd=True, ensure_2d=False, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"X must have shape (n_samples, p, T), got {X.shape}")
    return X


class _RecurrentBase(ClassifierMixin, BaseEstimator):

    def _encode(self, X, y):
        X, y = check_X_y(X, y, allow_nd=True, dtype=np.float64)
        X = _check_sequences(X)
        self.classes_ = unique_labels(y)
        if len(self.classes_) > 2:
            raise ValueError("only binary classification is supported")
        signs = np.where(y == self.classes_[-1], 1.0, -1.0)
        self.n_features_in_ = X.shape[1]
        self.cfg_ = RecurrentConfig(X.shape[1], self.q, X.shape[2])
        return SampleSet(check_sequences(X, self.cfg_), signs)

    def decision_function(self, X) -> np.ndarray:
        """Monte Carlo estimate of the expected network output for each sequence."""
        check_is_fitted(self, "network_")
        X = check_sequences(_check_sequences(X), self.cfg_)
        mean, _ = derandomized_predictions(self.network_, self.sigma, self.cfg_, X, self.n_predict,
                                           RngStream(self._seed(), 1))
        return mean

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if len(self.classes_) == 1:
            return np.full(len(scores), self.classes_[0])
        return np.where(scores >= 0, self.classes_[-1], self.classes_[0])

    def _seed(self) -> int:
        return 0 if self.random_state is None else int(self.random_state)


class NoisyRecurrentClassifier(_RecurrentBase):
    """Noisy sigmoid recurrent network trained by gradient descent on the ramp loss.

    Parameters
    ----------
    hidden : tuple of int
        Hidden widths of the recurring block.
    q : int
        Block output width; the first ``q - 1`` outputs are the recurrent state.
    sigma : float
        Standard deviation of the Gaussian noise injected before every layer.
    gamma : float
        Ramp-loss margin.
    """

    def __init__(self, hidden=(), q=2, sigma=0.1, gamma=0.1, learning_rate=0.5, epochs=200,
                 n_noise=8, n_predict=64, init_scale=0.5, random_state=None):
        self.hidden = hidden
        self.q = q
        self.sigma = sigma
        self.gamma = gamma
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.n_noise = n_noise
        self.n_predict = n_predict
        self.init_scale = init_scale
        self.random_state = random_state

    def fit(self, X, y):
        S = self._encode(X, y)
        dims = (self.cfg_.s,) + tuple(self.hidden) + (self.q,)
        init = MLPSpec.random(dims, RngStream(self._seed(), 0), self.init_scale)
        hyper = SGDParams(self.learning_rate, self.epochs, self.n_noise, self._seed())
        self.network_, self.loss_curve_ = sgd_train(init, self.sigma, self.cfg_, S, self.gamma, hyper,
                                                    return_history=True)
        return self


class GridERMClassifier(_RecurrentBase):
    """Empirical ramp-risk minimizer over every network with weights on a grid."""

    def __init__(self, weight_values=(-1.0, 0.0, 1.0), hidden=(), q=1, sigma=0.0, gamma=0.1,
                 n_noise=1, n_predict=64, random_state=None):
        self.weight_values = weight_values
        self.hidden = hidden
        self.q = q
        self.sigma = sigma
        self.gamma = gamma
        self.n_noise = n_noise
        self.n_predict = n_predict
        self.random_state = random_state

    def fit(self, X, y):
        S = self._encode(X, y)
        dims = (self.cfg_.s,) + tuple(self.hidden) + (self.q,)
        members = list(enumerate_grid_class(GridClassSpec(dims, tuple(self.weight_values))))
        self.best_index_, self.train_risk_ = erm_grid(members, self.sigma, self.cfg_, S, self.gamma,
                                                      self.n_noise, RngStream(self._seed(), 2))
        self.network_ = members[self.best_index_]
        return self
