"""scikit-learn style front ends.

Each row of ``X`` is one configuration flattened row-major to ``n * d``
numbers; the box is a constructor parameter. The estimators are thin
wrappers over the functional modules, so they compose with pipelines,
``clone`` and ``get_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import AmbiguousClassificationError
from .flow import FlowOptions, retract_level
from .geometry import BoxDomain
from .roadmap import DEFAULT_K, connectivity_experiment, local_plan
from .stress import MARGIN_TOL, WEIGHT_FLOOR, classify, max_margin
from .taut import active_set, gradient_matrix, tau


def _configs(X, d):
    X = check_array(X, dtype=float)
    if X.shape[1] % d:
        raise ValueError(f"rows of X must hold n * {d} coordinates, got {X.shape[1]}")
    return X.reshape(X.shape[0], -1, d)


class _BoxMixin:
    def _domain(self):
        return BoxDomain(tuple(self.lengths))

    def _validate(self, X, reset):
        domain = self._domain()
        configs = _configs(X, domain.d)
        if reset:
            self.n_features_in_ = configs.shape[1] * domain.d
        elif configs.shape[1] * domain.d != self.n_features_in_:
            raise ValueError(f"X has {configs.shape[1] * domain.d} features, expected {self.n_features_in_}")
        return domain, configs


class TauTransformer(_BoxMixin, TransformerMixin, BaseEstimator):
    """Map configurations to their ``tau`` value (one output column)."""

    def __init__(self, lengths=(1.0, 1.0)):
        self.lengths = lengths

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        domain, configs = self._validate(X, reset=False)
        return np.array([[tau(domain, c)] for c in configs])


class CriticalityClassifier(_BoxMixin, ClassifierMixin, BaseEstimator):
    """Label configurations ``"regular"`` or ``"balanced"`` via the Farkas alternative.

    Nothing is learned; ``fit`` only records the input width. Undecided
    inputs are labelled ``"ambiguous"`` unless ``on_ambiguous="raise"``.
    """

    def __init__(self, lengths=(1.0, 1.0), eps_act=None, margin_tol=MARGIN_TOL, balance_tol=None,
                 weight_floor=WEIGHT_FLOOR, on_ambiguous="label"):
        self.lengths = lengths
        self.eps_act = eps_act
        self.margin_tol = margin_tol
        self.balance_tol = balance_tol
        self.weight_floor = weight_floor
        self.on_ambiguous = on_ambiguous

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        self.classes_ = np.array(["ambiguous", "balanced", "regular"])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        domain, configs = self._validate(X, reset=False)
        labels = []
        for c in configs:
            try:
                labels.append(classify(domain, c, self.eps_act, self.margin_tol, self.balance_tol,
                                       self.weight_floor).kind)
            except AmbiguousClassificationError:
                if self.on_ambiguous == "raise":
                    raise
                labels.append("ambiguous")
        return np.array(labels)

    def decision_function(self, X):
        """Optimal ascent margin; positive means an ascent direction exists."""
        check_is_fitted(self, "classes_")
        domain, configs = self._validate(X, reset=False)
        out = []
        for c in configs:
            aset = active_set(domain, c, self.eps_act)
            out.append(max_margin(gradient_matrix(aset.constraints, c))[0])
        return np.asarray(out)


class LevelRetractor(_BoxMixin, TransformerMixin, BaseEstimator):
    """Flow every configuration up to ``tau >= target_tau``.

    After ``transform`` the trajectories and the indices of stalled inputs
    are available as ``trajectories_`` and ``stalled_``.
    """

    def __init__(self, lengths=(1.0, 1.0), target_tau=0.1, step0_rel=0.05, max_iter=10_000, n_jobs=1):
        self.lengths = lengths
        self.target_tau = target_tau
        self.step0_rel = step0_rel
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        domain, configs = self._validate(X, reset=False)
        b = self.target_tau
        a = min(min(tau(domain, c) for c in configs), b - 1e-12 * max(1.0, abs(b)))
        opts = FlowOptions(step0_rel=self.step0_rel, max_iter=self.max_iter)
        report = retract_level(domain, configs, a, b, opts, n_jobs=self.n_jobs)
        self.trajectories_ = report.trajectories
        self.stalled_ = report.stalled
        return np.stack([tr.final.reshape(-1) for tr in report.trajectories])


class RoadmapConnectivity(_BoxMixin, BaseEstimator):
    """Probabilistic roadmap of ``Conf(n_balls, r)``; ``predict`` assigns configurations to its components."""

    def __init__(self, lengths=(1.0, 2.0), n_balls=2, r=0.1, n_samples=500, k=DEFAULT_K, seed=0, n_jobs=1):
        self.lengths = lengths
        self.n_balls = n_balls
        self.r = r
        self.n_samples = n_samples
        self.k = k
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        domain = self._domain()
        count, roadmap = connectivity_experiment(domain, self.n_balls, self.r, self.n_samples, self.seed,
                                                 k=self.k, n_jobs=self.n_jobs)
        self.n_components_ = count
        self.roadmap_ = roadmap
        self.n_features_in_ = self.n_balls * domain.d
        return self

    def predict(self, X):
        """Component label of each configuration, or ``-1`` if it reaches none of its nearest nodes."""
        check_is_fitted(self, "roadmap_")
        domain, configs = self._validate(X, reset=False)
        nodes = self.roadmap_.nodes
        flat = nodes.reshape(len(nodes), -1)
        out = []
        for c in configs:
            order = np.argsort(np.linalg.norm(flat - c.reshape(-1), axis=1))[: 3 * self.k]
            label = -1
            for j in order:
                if local_plan(domain, c, nodes[j], self.r, self.roadmap_.resolution):
                    label = int(self.roadmap_.labels[j])
                    break
            out.append(label)
        return np.asarray(out)
