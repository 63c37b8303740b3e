"""Rejection sampling from the outcome distribution of a coherent superposition.

A superposition ``Psi = sum_j c_j psi_j`` is described by density oracles and
per-component samplers.  Proposals are drawn from the mixture
``sum_j p(j) mu_j`` with ``p(j) = |c_j|^2 / ||c||_2^2`` and accepted with
probability ``f_Psi(x) / (K * sum_j p(j) f_j(x))``, where ``K = chi ||c||_2^2``
bounds the density ratio uniformly.  Accepted outcomes are exact samples of
the superposition's outcome distribution; one trial is accepted with
probability ``1 / K``.

Oracles are vectorized: every density takes an array of outcomes with a
leading batch axis and returns one value per outcome, and a component sampler
``sampler(j, size, rng)`` returns ``size`` outcomes stacked the same way.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional

import numpy as np
from joblib import Parallel, delayed

from .discrete import PmfOracle, sample_index, sample_indices
from .exceptions import BoundViolation, BudgetExhausted, ContractViolation, DegenerateOutcome

__all__ = [
    "FAIL",
    "SuperpositionModel",
    "TrialRecord",
    "SampleResult",
    "mixture_density",
    "acceptance_probability",
    "draw_trial",
    "sample_with_budget",
    "sample_until_success",
    "trial_budget",
    "run_trials",
    "BatchResult",
    "sample_many",
]

CLAMP_TOL = 1e-9


class _Fail:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAIL"

    def __bool__(self):
        return False


FAIL = _Fail()


@dataclass(frozen=True, eq=False)
class SuperpositionModel:
    """Oracle access to a superposition and the measurement applied to it.

    Parameters
    ----------
    coeffs : array_like of complex, shape (chi,)
        Expansion coefficients ``c_j``.
    superposition_density : callable
        ``f(X) -> (n,)`` density of the superposition's outcome distribution.
    component_density : callable
        ``f(j, X) -> (n,)`` density for component ``j`` alone.
    component_sampler : callable
        ``sampler(j, size, rng) -> (size, ...)`` draws from component ``j``.
    outcome_shape : tuple of int
        Shape of a single outcome (``()`` for scalar outcomes).
    """

    coeffs: np.ndarray
    superposition_density: Callable[[np.ndarray], np.ndarray]
    component_density: Callable[[int, np.ndarray], np.ndarray]
    component_sampler: Callable[[int, int, np.random.Generator], np.ndarray]
    outcome_shape: tuple = ()
    outcome_dtype: Any = float
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        if not np.any(c != 0):
            raise ValueError("at least one coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "outcome_shape", tuple(self.outcome_shape))
        if self.k_factor < 1 - 1e-12:
            warnings.warn(
                f"K = chi * ||c||^2 = {self.k_factor:.6g} < 1; "
                "the coefficients cannot describe a normalized state",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def chi(self) -> int:
        return self.coeffs.size

    @cached_property
    def norm2(self) -> float:
        """``||c||_2^2``."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    @cached_property
    def weights(self) -> np.ndarray:
        """Normalized amplitudes ``p(j) = |c_j|^2 / ||c||_2^2``."""
        w = np.abs(self.coeffs) ** 2
        return w / w.sum()

    @cached_property
    def k_factor(self) -> float:
        """Uniform bound ``K = chi ||c||_2^2`` on the density ratio."""
        return self.chi * self.norm2

    @cached_property
    def pmf(self) -> PmfOracle:
        w = self.weights
        return PmfOracle(self.chi, lambda j: float(w[j]))

    def as_batch(self, x) -> np.ndarray:
        """Return ``x`` with a leading batch axis."""
        x = np.asarray(x, dtype=self.outcome_dtype)
        if x.shape == self.outcome_shape:
            return x[np.newaxis, ...]
        if x.shape[1:] != self.outcome_shape:
            raise ValueError(
                f"outcomes must have shape {self.outcome_shape} or (n, *{self.outcome_shape}), "
                f"got {x.shape}"
            )
        return x


@dataclass(frozen=True)
class TrialRecord:
    """One proposal ``(j, x)``, its acceptance probability and the coin outcome."""

    j: int
    x: Any
    accept_prob: float
    accepted: bool

    def __post_init__(self):
        if not 0.0 <= self.accept_prob <= 1.0:
            raise ValueError(f"accept_prob {self.accept_prob} outside [0, 1]")
        if self.accepted and self.accept_prob <= 0:
            raise ValueError("a trial with zero acceptance probability cannot be accepted")


@dataclass(frozen=True)
class SampleResult:
    outcome: Any
    trials_used: int
    trial_log: Optional[list] = None

    @property
    def failed(self) -> bool:
        return self.outcome is FAIL


def _checked(values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise ContractViolation(f"{what} returned a negative or NaN density")
    return values


def _mixture(model: SuperpositionModel, X: np.ndarray) -> np.ndarray:
    total = np.zeros(X.shape[0])
    for j, pj in enumerate(model.weights):
        total += pj * _checked(model.component_density(j, X), f"component_density({j})")
    return total


def _acceptance(model: SuperpositionModel, X: np.ndarray) -> np.ndarray:
    target = _checked(model.superposition_density(X), "superposition_density")
    mixture = _mixture(model, X)
    if np.any(mixture <= 0):
        bad = int(np.flatnonzero(mixture <= 0)[0])
        raise DegenerateOutcome(f"mixture density is {mixture[bad]} at outcome {X[bad]!r}")
    ratio = target / (model.k_factor * mixture)
    if np.any(ratio > 1 + CLAMP_TOL):
        bad = int(np.argmax(ratio))
        raise BoundViolation(
            f"f_Psi / (K * mixture) = {ratio[bad]!r} > 1 at outcome {X[bad]!r}; "
            "the oracles are inconsistent"
        )
    return np.minimum(ratio, 1.0)


def mixture_density(model: SuperpositionModel, x):
    """Density of the proposal mixture, ``sum_j p(j) f_j(x)``.

    Makes one call to each component density oracle.  Accepts a single
    outcome (returns a float) or a batch (returns an array).
    """
    single = np.shape(x) == model.outcome_shape
    out = _mixture(model, model.as_batch(x))
    return float(out[0]) if single else out


def acceptance_probability(model: SuperpositionModel, x):
    """Acceptance probability ``f_Psi(x) / (K * mixture(x))``, clamped to 1.

    Raises
    ------
    DegenerateOutcome
        If the mixture density is not positive at ``x``.
    BoundViolation
        If the ratio exceeds ``1 + 1e-9``.
    """
    single = np.shape(x) == model.outcome_shape
    out = _acceptance(model, model.as_batch(x))
    return float(out[0]) if single else out


def draw_trial(model: SuperpositionModel, rng: np.random.Generator) -> TrialRecord:
    """Run a single rejection trial.

    The random stream is consumed in a fixed order: the bits of ``J``, then
    the component sample, then exactly one uniform for the acceptance coin.
    """
    j = sample_index(model.pmf, rng)
    x = np.asarray(model.component_sampler(j, 1, rng))[0]
    a = float(_acceptance(model, x[np.newaxis, ...])[0])
    accepted = bool(rng.random() < a)
    return TrialRecord(j, x, a, accepted)


def sample_with_budget(
    model: SuperpositionModel, n: int, rng: np.random.Generator, log: bool = False
) -> SampleResult:
    """Run up to ``n`` trials and return the first accepted outcome.

    If every trial rejects, the outcome is :data:`FAIL`; this happens with
    probability at most ``exp(-n / K)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    records = [] if log else None
    for t in range(1, int(n) + 1):
        rec = draw_trial(model, rng)
        if log:
            records.append(rec)
        if rec.accepted:
            return SampleResult(rec.x, t, records)
    return SampleResult(FAIL, int(n), records)


def sample_until_success(model: SuperpositionModel, max_trials: int, rng: np.random.Generator):
    """Repeat trials until one is accepted; returns ``(outcome, trials_used)``.

    The expected number of trials is ``K``.  ``max_trials`` is a safety cap;
    reaching it raises :class:`BudgetExhausted`.
    """
    res = sample_with_budget(model, max_trials, rng)
    if res.failed:
        raise BudgetExhausted(f"no trial accepted within {max_trials} trials")
    return res.outcome, res.trials_used


def trial_budget(K: float, delta: float) -> int:
    """Smallest ``n`` with ``exp(-n / K) <= delta``, i.e. ``ceil(K ln(1/delta))``."""
    if not K >= 1:
        raise ValueError(f"K must be >= 1, got {K!r}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    n = K * math.log(1.0 / delta)
    # guard against K*ln(1/delta) landing a hair above an integer it should equal
    n_int = math.ceil(n - 1e-12 * n)
    return max(1, n_int)


def run_trials(model: SuperpositionModel, n_trials: int, rng: np.random.Generator):
    """Vectorized batch of ``n_trials`` independent trials.

    Uses the cached-CDF index sampler.  The stream is consumed as: all
    indices, then the component samples grouped by ascending index, then one
    uniform per trial.

    Returns
    -------
    j : ndarray of int, shape (n_trials,)
    x : ndarray, shape (n_trials, *outcome_shape)
    accept_prob : ndarray of float, shape (n_trials,)
    accepted : ndarray of bool, shape (n_trials,)
    """
    j = sample_indices(model.pmf, n_trials, rng)
    x = np.empty((n_trials, *model.outcome_shape), dtype=model.outcome_dtype)
    counts = np.bincount(j, minlength=model.chi)
    for comp in np.flatnonzero(counts):
        x[j == comp] = model.component_sampler(int(comp), int(counts[comp]), rng)
    a = _acceptance(model, x)
    accepted = rng.random(n_trials) < a
    return j, x, a, accepted


def _block_rng(seed, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))


@dataclass(frozen=True)
class BatchResult:
    """Outcome of :func:`sample_many`.

    ``samples[i]`` is meaningful only where ``failed[i]`` is false; failed
    rows hold ``NaN`` (or ``-1`` for integer outcomes).
    """

    samples: np.ndarray
    trials_used: np.ndarray
    failed: np.ndarray

    @property
    def n_failed(self) -> int:
        return int(self.failed.sum())


def sample_many(
    model: SuperpositionModel,
    n_samples: int,
    seed: int = 0,
    block_size: int = 1 << 15,
    per_sample_cap: Optional[int] = None,
    max_trials: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> BatchResult:
    """Draw ``n_samples`` outcomes with repeat-until-success semantics.

    Trials are generated in blocks of ``block_size``; block ``b`` uses its
    own stream derived from ``(seed, b)``, so the output does not depend on
    ``n_jobs``.  The samples partition the trial sequence exactly as repeated
    calls of :func:`sample_until_success` would: sample ``i`` consumes trials
    up to and including the next acceptance.  With ``per_sample_cap`` set, a
    sample that sees ``per_sample_cap`` consecutive rejections is marked
    failed and the next sample starts afresh.

    ``max_trials`` caps the total work (default ``50 K n_samples`` plus one
    block) and raises :class:`BudgetExhausted` when reached.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be nonnegative")
    if per_sample_cap is not None and per_sample_cap < 1:
        raise ValueError("per_sample_cap must be positive")
    if max_trials is None:
        max_trials = int(np.ceil(50 * model.k_factor * max(n_samples, 1)))
        if per_sample_cap is not None:
            max_trials = max(max_trials, n_samples * per_sample_cap)
        max_trials += block_size
    seed = int(seed)
    if n_jobs is None or n_jobs == 1:
        per_round = 1
    else:
        per_round = n_jobs if n_jobs > 0 else (os.cpu_count() or 1)

    def block(b):
        _, x, _, acc = run_trials(model, block_size, _block_rng(seed, b))
        return x[acc], np.flatnonzero(acc) + b * block_size

    accepted_x, positions = [], []
    n_blocks = 0

    def more():
        nonlocal n_blocks
        if n_blocks * block_size >= max_trials:
            raise BudgetExhausted(f"total trial cap {max_trials} reached")
        if per_round == 1:
            results = [block(n_blocks)]
        else:
            results = Parallel(n_jobs=per_round, prefer="threads")(
                delayed(block)(n_blocks + k) for k in range(per_round)
            )
        n_blocks += len(results)
        for xs, pos in results:
            accepted_x.append(xs)
            positions.append(pos)

    if per_sample_cap is None:
        have = 0
        while have < n_samples:
            more()
            have = sum(len(p) for p in positions)
        pos = np.concatenate(positions)[:n_samples] if positions else np.zeros(0, dtype=int)
        xs = (
            np.concatenate(accepted_x)[:n_samples]
            if accepted_x
            else np.empty((0, *model.outcome_shape), dtype=model.outcome_dtype)
        )
        trials = np.diff(pos, prepend=-1)
        return BatchResult(xs, trials, np.zeros(n_samples, dtype=bool))

    fill = -1 if np.issubdtype(np.dtype(model.outcome_dtype), np.integer) else np.nan
    out = np.full((n_samples, *model.outcome_shape), fill, dtype=model.outcome_dtype)
    trials = np.zeros(n_samples, dtype=np.int64)
    failed = np.zeros(n_samples, dtype=bool)
    start = 0  # first trial index of the current sample
    cursor = 0  # next unread acceptance
    flat_pos = np.zeros(0, dtype=np.int64)
    flat_x = np.empty((0, *model.outcome_shape), dtype=model.outcome_dtype)
    for i in range(n_samples):
        # need to know the trial stream up to start + cap - 1
        while n_blocks * block_size < start + per_sample_cap and (
            cursor >= len(flat_pos) or flat_pos[-1] < start
        ):
            more()
            flat_pos = np.concatenate(positions)
            flat_x = np.concatenate(accepted_x)
        while cursor < len(flat_pos) and flat_pos[cursor] < start:
            cursor += 1
        if cursor < len(flat_pos) and flat_pos[cursor] < start + per_sample_cap:
            out[i] = flat_x[cursor]
            trials[i] = flat_pos[cursor] - start + 1
            start = int(flat_pos[cursor]) + 1
            cursor += 1
        else:
            failed[i] = True
            trials[i] = per_sample_cap
            start += per_sample_cap
    return BatchResult(out, trials, failed)
