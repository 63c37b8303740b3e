"""Sparsification of long Gaussian decompositions.

Given ``Psi = sum_k c_k omega_k``, draw ``chi`` indices ``k ~ |c_k| / ||c||_1``
and form ``Omega = (||c||_1 / chi) sum_j e^{i arg c_{k_j}} omega_{k_j}``.
``Omega`` is an unbiased estimate of ``Psi`` with
``E ||Psi - Omega||^2 <= ||c||_1^2 / chi``, so for ``chi`` of order
``||c||_1^2 / eps^2`` the normalized ``Psi' = Omega / ||Omega||`` is within
``2 eps`` of ``Psi`` with constant probability while its coefficients all have
magnitude ``||c||_1 / (chi ||Omega||)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import MaxAttemptsExceeded, ZeroNorm
from .gaussian import GaussianSuperposition, MeasurementSpec, k_factor, superposition_model
from .rejection import sample_with_budget, trial_budget

__all__ = [
    "Decomposition",
    "Draw",
    "Sparsification",
    "l1_sq",
    "sparsify_once",
    "sparsify_verified",
    "sample_with_extent",
]

MAX_ATTEMPTS = 64


class Decomposition(GaussianSuperposition):
    """A normalized Gaussian decomposition ``Psi = sum_k c_k omega_k``."""

    def __post_init__(self):
        super().__post_init__()
        self.check_normalized()

    @classmethod
    def from_superposition(cls, sup: GaussianSuperposition) -> "Decomposition":
        return cls(sup.components, sup.coeffs, sup.label)


def l1_sq(decomp: GaussianSuperposition) -> float:
    """``||c||_1^2``; an upper bound on the Gaussian extent of the state."""
    return float(np.sum(np.abs(decomp.coeffs))) ** 2


@dataclass(frozen=True, eq=False)
class Draw:
    """One random sparse approximation.

    ``indices[j]`` is the source component behind the ``j``-th term; the
    term's phase ``e^{i arg c_k}`` is carried in ``superposition.coeffs``.
    """

    superposition: GaussianSuperposition
    indices: np.ndarray
    omega_norm: float
    # coefficients of Psi' and of the unnormalized Omega in the source basis
    psi_coeffs: np.ndarray
    omega_coeffs: np.ndarray


def sparsify_once(decomp: GaussianSuperposition, chi: int, rng: np.random.Generator) -> Draw:
    """Draw ``Omega`` with ``chi`` terms and return its normalization ``Psi'``.

    Raises
    ------
    ZeroNorm
        If the drawn terms cancel exactly; callers retry.
    """
    if int(chi) != chi or chi < 1:
        raise ValueError(f"chi must be a positive integer, got {chi!r}")
    chi = int(chi)
    c = decomp.coeffs
    l1 = float(np.sum(np.abs(c)))
    idx = rng.choice(c.size, size=chi, p=np.abs(c) / l1)
    phases = np.exp(1j * np.angle(c))
    counts = np.bincount(idx, minlength=c.size)
    omega_coeffs = (l1 / chi) * counts * phases
    omega_norm2 = float(np.real(np.conj(omega_coeffs) @ decomp.gram @ omega_coeffs))
    # exact cancellation leaves only round-off of relative size ~1e-16
    if omega_norm2 <= 1e-14 * l1**2:
        raise ZeroNorm("sparse approximation cancelled to zero norm")
    omega_norm = math.sqrt(omega_norm2)
    term = l1 / (chi * omega_norm)
    sup = GaussianSuperposition(
        tuple(decomp.components[k] for k in idx), term * phases[idx], label="sparsified"
    )
    return Draw(sup, idx, omega_norm, omega_coeffs / omega_norm, omega_coeffs)


def _distance(decomp: GaussianSuperposition, coeffs: np.ndarray) -> float:
    diff = decomp.coeffs - coeffs
    return math.sqrt(max(0.0, float(np.real(np.conj(diff) @ decomp.gram @ diff))))


@dataclass(frozen=True, eq=False)
class Sparsification:
    source: GaussianSuperposition
    epsilon: float
    chi: int
    result: GaussianSuperposition
    distance: float
    omega_distance: float
    omega_norm: float
    attempts: int
    indices: np.ndarray

    @property
    def coeff_norm(self) -> float:
        """``||c'||_2`` of the sparsified state."""
        return float(np.linalg.norm(self.result.coeffs))


def sparsify_verified(
    decomp: GaussianSuperposition,
    epsilon: float,
    rng: np.random.Generator,
    max_attempts: int = MAX_ATTEMPTS,
) -> Sparsification:
    """Redraw until ``||Psi - Psi'|| <= 2 eps`` and ``||c'||_2 <= sqrt(2) eps``.

    Uses ``chi = ceil(3 ||c||_1^2 / eps^2)``.  Distances are exact, computed
    from the Gram matrix of the source components.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    chi = math.ceil(3 * l1_sq(decomp) / epsilon**2)
    for attempt in range(1, max_attempts + 1):
        try:
            draw = sparsify_once(decomp, chi, rng)
        except ZeroNorm:
            continue
        dist = _distance(decomp, draw.psi_coeffs)
        cnorm = float(np.linalg.norm(draw.superposition.coeffs))
        if dist <= 2 * epsilon and cnorm <= math.sqrt(2) * epsilon:
            return Sparsification(
                source=decomp,
                epsilon=epsilon,
                chi=chi,
                result=draw.superposition,
                distance=dist,
                omega_distance=_distance(decomp, draw.omega_coeffs),
                omega_norm=draw.omega_norm,
                attempts=attempt,
                indices=draw.indices,
            )
    raise MaxAttemptsExceeded(
        f"no acceptable sparsification in {max_attempts} attempts at epsilon={epsilon}"
    )


def sample_with_extent(
    decomp: GaussianSuperposition,
    epsilon: float,
    delta: float,
    meas: MeasurementSpec,
    rng: np.random.Generator,
    sparsification: Sparsification | None = None,
):
    """Sample from a distribution within ``8 eps`` (L1) of the outcome distribution of ``decomp``.

    Sparsifies first (unless a sparsification is passed in), then runs the
    rejection sampler on the sparse state with ``n = ceil(K ln(1/delta))``
    trials.  Returns a :class:`~coherent_sampling.rejection.SampleResult`;
    its outcome is ``FAIL`` with probability at most ``delta``.
    """
    sp = sparsification or sparsify_verified(decomp, epsilon, rng)
    model = superposition_model(sp.result, meas)
    n = trial_budget(max(1.0, k_factor(sp.result)), delta)
    return sample_with_budget(model, n, rng)
