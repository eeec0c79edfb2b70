"""scikit-learn style wrapper around the two-stage pipeline."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import CountTable, apply_mechanism, distribution_of, histogram_of
from .exceptions import InputError
from .pipeline import PipelineConfig, _baseline, _stage_seeds, construct_mechanism, rule_of_thumb_split
from .privatizers import privatize_distribution, project_to_simplex

__all__ = ["TwoStageCountPrivatizer"]


def _as_counts(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InputError(f"expected a vector of counts or a single column, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError("no counts given")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InputError("counts must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise InputError("counts must be nonnegative")
    return arr.astype(np.int64)


class TwoStageCountPrivatizer(TransformerMixin, BaseEstimator):
    """Privatize per-category counts while keeping their distribution.

    ``fit`` spends ``eps_1`` on a noisy distribution of counts ``z_`` and
    builds a count mechanism ``transition_matrix_`` with fixed point ``z_``
    at ``eps_2``.  ``transform`` passes each count through that mechanism.

    Parameters
    ----------
    epsilon_total : float
    n : int
        Counts are top-coded to ``n - 1``.
    constructor : str
        Any name from :data:`countmech.pipeline.CONSTRUCTORS`.
    split_fraction : float, optional
        Privatizer share of the budget; rule of thumb when ``None``.
    privatizer : str
    sigma : float, optional
        Only for ``cyclic-gaussian``.
    error_kind : {"ead", "mse"}
    seed : int
    numeric_mode : {"float", "rational"}
    floor_z : bool
    lp_method : {"highs", "simplex"}

    Attributes
    ----------
    zeta_ : ndarray
        True distribution of the fitted counts.
    z_ : ndarray or None
        Privatized distribution (``None`` for the unfixed baselines).
    transition_matrix_ : ndarray of shape (n, n)
    selector_ : str or None
    epsilon_1_, epsilon_2_ : float

    Examples
    --------
    >>> import numpy as np
    >>> X = np.random.default_rng(0).binomial(20, 0.5, 500)
    >>> est = TwoStageCountPrivatizer(epsilon_total=1.0, n=21, seed=3).fit(X)
    >>> est.transform(X).shape
    (500,)
    """

    def __init__(self, epsilon_total=1.0, n=21, constructor="heuristic-sandwich", split_fraction=None,
                 privatizer="cyclic-laplace", sigma=None, error_kind="ead", seed=0,
                 numeric_mode="float", floor_z=False, lp_method="highs"):
        self.epsilon_total = epsilon_total
        self.n = n
        self.constructor = constructor
        self.split_fraction = split_fraction
        self.privatizer = privatizer
        self.sigma = sigma
        self.error_kind = error_kind
        self.seed = seed
        self.numeric_mode = numeric_mode
        self.floor_z = floor_z
        self.lp_method = lp_method

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            epsilon_total=self.epsilon_total, n=self.n, constructor=self.constructor,
            split_fraction=self.split_fraction, privatizer=self.privatizer, sigma=self.sigma,
            error_kind=self.error_kind, seed=self.seed, numeric_mode=self.numeric_mode,
            floor_z=self.floor_z, lp_method=self.lp_method)

    def fit(self, X, y=None):
        cfg = self._config()
        table = CountTable.from_counts(_as_counts(X), cfg.n)
        priv_rng, apply_seed = _stage_seeds(cfg.seed)
        self.zeta_ = distribution_of(histogram_of(table))
        self.epsilon_1_ = cfg.epsilon_1
        self.epsilon_2_ = cfg.epsilon_2
        self._apply_seed = apply_seed
        self.selector_ = None
        if cfg.is_baseline:
            self.z_ = None
            _, self.transition_matrix_ = _baseline(table, cfg, apply_seed)
        else:
            v = privatize_distribution(cfg.privatizer, self.zeta_, table.N, seed=priv_rng,
                                       epsilon=cfg.epsilon_1, sigma=cfg.sigma)
            z = project_to_simplex(v)
            if cfg.floor_z:
                z = np.maximum(z, 1.0 / (10 * table.N))
                z = z / z.sum()
            self.z_ = z
            self.transition_matrix_, self.selector_, _ = construct_mechanism(z, cfg)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "transition_matrix_")
        table = CountTable.from_counts(_as_counts(X), self.n)
        return apply_mechanism(table, self.transition_matrix_, self._apply_seed).counts.copy()

    @staticmethod
    def default_split(epsilon_total: float) -> float:
        return rule_of_thumb_split(epsilon_total)
