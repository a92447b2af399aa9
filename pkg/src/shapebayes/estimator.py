"""scikit-learn style estimator wrapping the functional train/classify layer.

Samples are whole shapes rather than feature rows: X is a sequence of
:class:`~shapebayes.shapes.Shape` objects or (m, 2) point arrays (ragged
lengths are fine; everything is resampled to ``n_points``).  The usual
conventions hold: ``fit`` returns self, fitted state lives in
trailing-underscore attributes, ``get_params``/``set_params`` work, and
``score`` is accuracy via ClassifierMixin.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .classify import class_log_likelihood, classify, train
from .shapes import as_shape, resample_arclength


class ShapeBayesClassifier(BaseEstimator, ClassifierMixin):
    """Bayesian contour classifier with similarity transforms marginalized out.

    Parameters
    ----------
    n_points : int
        Arc-length resampling density shared by exemplars and inputs.
    reg_b, reg_alpha, reg_zeta : float
        Regulators of the marginalized posterior.  ``reg_zeta=None`` scales
        zeta to the squared diameter of the normalized training exemplars.
    corr_mode : {"marginal", "map"}
        Sum over cyclic correspondences (uniform prior) or take the best one.
    allow_reversal : bool
        Also search the orientation-reversed template.
    aggregate : {"mean", "max"}
        Combine exemplar likelihoods as a mixture or as nearest-exemplar.

    Attributes
    ----------
    classes_ : ndarray of str, lexicographically sorted class labels.
    models_ : list of ClassModel, one per class.
    regs_ : Regulators actually used (with the resolved zeta).
    """

    def __init__(
        self,
        n_points: int = 50,
        reg_b: float = 1e3,
        reg_alpha: float = 1.0,
        reg_zeta: float | None = None,
        corr_mode: str = "marginal",
        allow_reversal: bool = True,
        aggregate: str = "mean",
    ):
        self.n_points = n_points
        self.reg_b = reg_b
        self.reg_alpha = reg_alpha
        self.reg_zeta = reg_zeta
        self.corr_mode = corr_mode
        self.allow_reversal = allow_reversal
        self.aggregate = aggregate

    def fit(self, X, y):
        shapes = [as_shape(x) for x in X]
        labels = [str(label) for label in y]
        if len(shapes) != len(labels):
            raise ValueError(f"X and y lengths differ: {len(shapes)} vs {len(labels)}")
        self.models_ = train(
            list(zip(labels, shapes)),
            n=self.n_points,
            b=self.reg_b,
            alpha=self.reg_alpha,
            zeta=self.reg_zeta,
            corr_mode=self.corr_mode,
            allow_reversal=self.allow_reversal,
        )
        self.regs_ = self.models_[0].regs
        self.classes_ = np.array([m.label for m in self.models_])
        return self

    def _check_fitted(self):
        if not hasattr(self, "models_"):
            raise NotFittedError("this ShapeBayesClassifier instance is not fitted yet")

    def log_likelihoods(self, X) -> np.ndarray:
        """Raw class log-likelihoods, shape (len(X), n_classes)."""
        self._check_fitted()
        out = np.empty((len(X), len(self.models_)))
        for i, x in enumerate(X):
            shape = as_shape(x)
            if shape.n != self.n_points:
                shape = resample_arclength(shape, self.n_points)
            out[i] = [class_log_likelihood(shape, m, aggregate=self.aggregate) for m in self.models_]
        return out

    def predict_log_proba(self, X) -> np.ndarray:
        """Posterior log-probabilities under a uniform class prior."""
        ll = self.log_likelihoods(X)
        m = ll.max(axis=1, keepdims=True)
        log_norm = m + np.log(np.exp(ll - m).sum(axis=1, keepdims=True))
        return ll - log_norm

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(self.predict_log_proba(X))

    def predict(self, X) -> np.ndarray:
        ll = self.log_likelihoods(X)
        return self.classes_[np.argmax(ll, axis=1)]

    def classify_one(self, x):
        """Full ranked result for a single shape."""
        self._check_fitted()
        return classify(as_shape(x), self.models_, aggregate=self.aggregate)
