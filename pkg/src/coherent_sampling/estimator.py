"""scikit-learn style front end for the rejection sampler."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .gaussian import GaussianSuperposition, MeasurementSpec, superposition_model
from .povm import FinitePOVM, FiniteSuperposition, finite_model
from .rejection import (
    SuperpositionModel,
    acceptance_probability,
    mixture_density,
    sample_many,
    sample_with_budget,
    trial_budget,
)

__all__ = ["SuperpositionSampler", "check_outcomes", "as_model"]


def as_model(source, measurement=None) -> SuperpositionModel:
    """Coerce a model-like object into a :class:`SuperpositionModel`.

    Accepts a model, a :class:`GaussianSuperposition` (with ``measurement``,
    default heterodyne) or a ``(FiniteSuperposition, FinitePOVM)`` pair.
    """
    if isinstance(source, SuperpositionModel):
        return source
    if isinstance(source, GaussianSuperposition):
        meas = measurement or MeasurementSpec.heterodyne()
        if not isinstance(meas, MeasurementSpec):
            meas = MeasurementSpec(meas)
        return superposition_model(source, meas)
    if (
        isinstance(source, tuple)
        and len(source) == 2
        and isinstance(source[0], FiniteSuperposition)
        and isinstance(source[1], FinitePOVM)
    ):
        return finite_model(*source)
    raise TypeError(f"cannot build a sampling model from {type(source).__name__}")


def check_outcomes(model: SuperpositionModel, X) -> np.ndarray:
    """Validate a batch of outcomes against the model's outcome shape."""
    if model.outcome_shape == ():
        X = check_array(np.asarray(X).reshape(-1, 1), dtype=model.outcome_dtype).ravel()
        return X
    if len(model.outcome_shape) == 1:
        X = check_array(np.atleast_2d(X), dtype=model.outcome_dtype)
        if X.shape[1] != model.outcome_shape[0]:
            raise ValueError(
                f"X has {X.shape[1]} features, but the model expects {model.outcome_shape[0]}"
            )
        return X
    return model.as_batch(X)


class SuperpositionSampler(BaseEstimator):
    """Sample measurement outcomes of a coherent superposition by rejection.

    Parameters
    ----------
    measurement : str or MeasurementSpec, default=None
        Measurement used when ``fit`` receives a Gaussian superposition.
    delta : float, default=None
        If set, each sample gets a fixed budget of ``ceil(K ln(1/delta))``
        trials and failed draws are reported as ``NaN`` rows by
        :meth:`sample_budgeted`.
    max_trials : int, default=None
        Total trial cap for :meth:`sample`; ``None`` means ``50 K n_samples``.
    block_size : int, default=32768
        Trials per vectorized block.
    n_jobs : int, default=None
        Threads used to evaluate blocks; results do not depend on it.
    random_state : int, default=0
        Seed of the block streams.

    Attributes
    ----------
    model_ : SuperpositionModel
    k_factor_ : float
        ``chi ||c||_2^2``.
    weights_ : ndarray of shape (chi,)
        Component probabilities ``|c_j|^2 / ||c||_2^2``.
    n_components_ : int
    trials_used_ : ndarray
        Trials consumed by each sample of the last :meth:`sample` call.
    """

    def __init__(
        self,
        measurement=None,
        delta=None,
        max_trials=None,
        block_size=1 << 15,
        n_jobs=None,
        random_state=0,
    ):
        self.measurement = measurement
        self.delta = delta
        self.max_trials = max_trials
        self.block_size = block_size
        self.n_jobs = n_jobs
        self.random_state = random_state

    def fit(self, X, y=None):
        """Bind the sampler to a model (``X``); ``y`` is ignored."""
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not isinstance(self.block_size, numbers.Integral) or self.block_size < 1:
            raise ValueError("block_size must be a positive integer")
        self.model_ = as_model(X, self.measurement)
        self.k_factor_ = self.model_.k_factor
        self.weights_ = self.model_.weights
        self.n_components_ = self.model_.chi
        return self

    def _seed(self):
        rs = self.random_state
        if rs is None:
            return int(np.random.SeedSequence().entropy % (1 << 63))
        if isinstance(rs, numbers.Integral):
            return int(rs)
        raise ValueError("random_state must be an int or None")

    def sample(self, n_samples=1):
        """Draw ``n_samples`` exact samples, repeating trials until acceptance.

        Returns
        -------
        X : ndarray of shape (n_samples, *outcome_shape)
        trials_used : ndarray of shape (n_samples,)
        """
        check_is_fitted(self)
        batch = sample_many(
            self.model_,
            int(n_samples),
            seed=self._seed(),
            block_size=self.block_size,
            max_trials=self.max_trials,
            n_jobs=self.n_jobs,
        )
        self.trials_used_ = batch.trials_used
        return batch.samples, batch.trials_used

    def sample_budgeted(self, n_samples=1):
        """Draw samples with the fixed per-sample budget set by ``delta``.

        Returns the outcomes, a boolean mask of failures, and trials used.
        """
        check_is_fitted(self)
        if self.delta is None:
            raise ValueError("sample_budgeted requires delta")
        n = trial_budget(max(1.0, self.k_factor_), self.delta)
        rng = np.random.default_rng(self._seed())
        out, failed, used = [], np.zeros(n_samples, dtype=bool), np.zeros(n_samples, dtype=int)
        for i in range(n_samples):
            res = sample_with_budget(self.model_, n, rng)
            failed[i] = res.failed
            used[i] = res.trials_used
            out.append(np.full(self.model_.outcome_shape, np.nan) if res.failed else res.outcome)
        return np.array(out), failed, used

    def density(self, X):
        """Outcome density of the superposition at ``X``."""
        check_is_fitted(self)
        X = check_outcomes(self.model_, X)
        return np.asarray(self.model_.superposition_density(X), dtype=float)

    def score_samples(self, X):
        """Log-density of the superposition at ``X``."""
        with np.errstate(divide="ignore"):
            return np.log(self.density(X))

    def mixture_density(self, X):
        check_is_fitted(self)
        return mixture_density(self.model_, check_outcomes(self.model_, X))

    def acceptance_probability(self, X):
        check_is_fitted(self)
        return acceptance_probability(self.model_, check_outcomes(self.model_, X))
