"""scikit-learn style wrapper: fit a joint system, transform points to basis values."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import mep
from .forms import InnerProductFamily
from .measure import IntervalMeasure


class JointOrthogonalBasis(TransformerMixin, BaseEstimator):
    """Jointly orthogonal polynomials of one degree as a feature map.

    Parameters
    ----------
    measures : list of IntervalMeasure or dict
        One weighted interval per inner product; dicts use the config keys.
    degree : int
        Polynomial degree ``n`` of the system.
    seed : int
        Seed for the Newton solver (unused when ``k = 2``).

    Attributes
    ----------
    system_ : JointSystem
    polynomials_ : list of Polynomial
        Monic basis polynomials in canonical order.
    lambdas_ : ndarray of shape (n_basis, k)
    n_features_in_ : int
        Always 1; inputs are points on the real line.
    """

    def __init__(self, measures=None, degree: int = 1, seed: int = 0):
        self.measures = measures
        self.degree = degree
        self.seed = seed

    def _measures(self):
        if not self.measures:
            raise ValueError("measures must list at least two weighted intervals")
        return [m if isinstance(m, IntervalMeasure) else IntervalMeasure.from_config(m)
                for m in self.measures]

    def fit(self, X=None, y=None):
        if not isinstance(self.degree, (int, np.integer)) or self.degree < 0:
            raise ValueError(f"degree must be a non-negative integer, got {self.degree!r}")
        if X is not None:
            check_array(X, ensure_2d=True)
        fam = InnerProductFamily(self._measures(), int(self.degree))
        self.system_ = mep.solve(fam, int(self.degree), seed=self.seed)
        self.polynomials_ = self.system_.polynomials
        self.lambdas_ = self.system_.lambdas
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Evaluate every basis polynomial at the points in ``X`` (one column)."""
        check_is_fitted(self, "system_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of points, got {X.shape[1]}")
        x = X[:, 0]
        return np.column_stack([p(x) for p in self.polynomials_])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "system_")
        return np.array([f"E_{i}" for i in range(len(self.polynomials_))], dtype=object)
