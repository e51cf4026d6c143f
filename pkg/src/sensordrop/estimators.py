"""scikit-learn style wrappers.

The planners follow the estimator protocol with a :class:`Scenario` in place
of ``X``: ``fit(scenario)`` computes ``plan_`` and ``score(scenario)``
returns the surrogate objective of that plan.  Hyperparameters live in
``__init__`` so ``get_params``/``set_params``/``clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .gp import KernelParams, NoiseParams, gp_posterior
from .planner import Scenario, baseline_deterministic, baseline_random, brute_force, objective, sga


class GPRegressor(RegressorMixin, BaseEstimator):
    """Zero-mean GP regression with a fixed squared-exponential kernel.

    Parameters
    ----------
    signal_variance : float
    length_scales : tuple of two floats
    noise_variance : float
        Observation noise added to the training Gram diagonal.
    """

    def __init__(self, signal_variance=1.0, length_scales=(1.0, 1.0), noise_variance=0.0):
        self.signal_variance = signal_variance
        self.length_scales = length_scales
        self.noise_variance = noise_variance

    def _params(self):
        return KernelParams(self.signal_variance, tuple(self.length_scales)), NoiseParams(self.noise_variance)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 input features, got {X.shape[1]}")
        self.kernel_, self.noise_ = self._params()
        self.X_train_ = X
        self.y_train_ = y.astype(float)
        self.n_features_in_ = 2
        return self

    def predict(self, X, return_std=False, return_cov=False):
        check_is_fitted(self, "X_train_")
        X = check_array(X)
        mean, cov = gp_posterior(self.X_train_, self.y_train_, self.noise_, self.kernel_, X)
        if return_cov:
            return mean, cov
        if return_std:
            return mean, np.sqrt(np.clip(np.diag(cov), 0.0, None))
        return mean


class _PlannerBase(BaseEstimator):
    def _check_scenario(self, scenario):
        if not isinstance(scenario, Scenario):
            raise TypeError(f"expected a Scenario, got {type(scenario).__name__}")
        return scenario

    def fit(self, scenario, y=None):
        self.plan_ = self._plan(self._check_scenario(scenario))
        self.paths_ = self.plan_.paths
        self.objective_ = self.plan_.objective_value
        return self

    def score(self, scenario, y=None):
        check_is_fitted(self, "plan_")
        return objective(self._check_scenario(scenario), self.plan_.drop_vertices)


class SGAPlanner(_PlannerBase):
    """Sequential greedy assignment.

    ``ignore_uncertainty=True`` gives the deterministic baseline, which plans
    on landing means only.
    """

    def __init__(self, ignore_uncertainty=False):
        self.ignore_uncertainty = ignore_uncertainty

    def _plan(self, scenario):
        return baseline_deterministic(scenario) if self.ignore_uncertainty else sga(scenario)


class RandomPlanner(_PlannerBase):
    def __init__(self, random_state=None):
        self.random_state = random_state

    def _plan(self, scenario):
        return baseline_random(scenario, self.random_state)


class BruteForcePlanner(_PlannerBase):
    def __init__(self, max_assignments=50_000, max_subset_size=8):
        self.max_assignments = max_assignments
        self.max_subset_size = max_subset_size

    def _plan(self, scenario):
        return brute_force(scenario, self.max_assignments, self.max_subset_size)
