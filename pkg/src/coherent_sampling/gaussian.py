"""Gaussian pure states, Gaussian-dyne measurements and their superpositions.

Conventions
-----------
Quadratures are ordered ``(x_1, p_1, ..., x_N, p_N)``.  The vacuum has
covariance matrix ``I`` and a coherent state ``|alpha>`` has displacement
``sqrt(2) (Re alpha, Im alpha)``, so ``beta_k = (m_{x,k} + i m_{p,k}) / sqrt(2)``
relates a heterodyne outcome ``m`` to the coherent-state label ``beta``.

Densities of ``2N``-dimensional outcomes (heterodyne and general-dyne) are
taken with respect to ``d^2 beta = dm / 2^N``, so the vacuum heterodyne
density at the origin is ``1 / pi``.  Homodyne outcomes are the ``N``
position quadratures with Lebesgue measure ``dx``.

Every state carries the global phase that makes its overlap with the vacuum
positive.  Single-mode wavefunctions are kept as complex quadratic exponents
``psi(x) = exp(-a x^2 + b x + c)``; overlaps between them are Gaussian
integrals in closed form.  Multimode amplitudes and overlaps are supported
for product states (block-diagonal covariance), which covers every model the
package builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .exceptions import (
    NonSymmetric,
    NotPositiveDefinite,
    NotPure,
    NumericalError,
    TailMassError,
    UnsupportedOverlap,
)
from .rejection import SuperpositionModel

__all__ = [
    "GaussianPureState",
    "MeasurementSpec",
    "GaussianSuperposition",
    "symplectic_form",
    "validate_state",
    "vacuum",
    "coherent",
    "displaced_squeezed",
    "product_state",
    "random_gaussian_state",
    "het_amplitude",
    "amplitude",
    "position_wavefunction",
    "single_density",
    "component_sample",
    "gram_matrix",
    "norm_squared",
    "superposition_density",
    "superposition_model",
    "k_factor",
    "make_cat",
    "make_gkp",
    "gkp_weights",
    "gkp_k_factor",
    "scan_gkp_truncation",
]

PURITY_TOL = 1e-9
NORM_TOL = 1e-9
PINV_RTOL = 1e-12
_LOG_PI = math.log(math.pi)
# vacuum exponent: exp(-x^2/2) / pi^(1/4)
_VAC = (0.5, 0.0, -0.25 * _LOG_PI)


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


# -- quadratic exponents ---------------------------------------------------------


def _overlap(bra, ket):
    """``<bra, ket>`` for exponents ``exp(-a x^2 + b x + c)``; broadcasts."""
    a1, b1, c1 = bra
    a2, b2, c2 = ket
    s = np.conj(a1) + a2
    t = np.conj(b1) + b2
    return np.sqrt(np.pi / s) * np.exp(t * t / (4 * s) + np.conj(c1) + c2)


def _exponent(A, x0, p0):
    """Exponent of ``(Re A / pi)^(1/4) exp(-A (x - x0)^2 / 2 + i p0 x)`` with vacuum-positive phase."""
    A = np.asarray(A, dtype=complex)
    a = A / 2
    b = A * x0 + 1j * p0
    c = -A * x0**2 / 2 + 0.25 * np.log(A.real / np.pi)
    phase = np.angle(_overlap(_VAC, (a, b, c)))
    return a, b, c - 1j * phase


def _block_exponent(g: np.ndarray, d: np.ndarray):
    # a pure single-mode state with covariance g has A = (1 - i g_xp) / g_xx
    A = (1.0 - 1j * g[0, 1]) / g[0, 0]
    a, b, c = _exponent(A, d[0], d[1])
    return complex(a), complex(b), complex(c)


def _measurement_exponent(z: float, mx, mp):
    """Exponents of the projector ``S(z)|alpha>`` displaced to outcome ``(mx, mp)``."""
    mx, mp = np.broadcast_arrays(np.asarray(mx, dtype=float), np.asarray(mp, dtype=float))
    return _exponent(np.full(mx.shape, 1.0 / z**2), mx, mp)


# -- states and measurements ------------------------------------------------------


def validate_state(gamma, disp, atol: float = PURITY_TOL) -> "GaussianPureState":
    """Check ``(gamma, disp)`` and return the corresponding pure state.

    Raises
    ------
    NonSymmetric, NotPositiveDefinite, NotPure
        When the corresponding invariant fails; the message reports the
        size of the violation.
    ValueError
        On inconsistent dimensions or non-finite entries.
    """
    gamma = np.array(gamma, dtype=float)
    disp = np.array(disp, dtype=float).reshape(-1)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2N x 2N, got shape {gamma.shape}")
    if disp.shape != (gamma.shape[0],):
        raise ValueError(f"displacement must have length {gamma.shape[0]}, got {disp.shape[0]}")
    if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(disp))):
        raise ValueError("covariance matrix and displacement must be finite")
    scale = max(1.0, float(np.max(np.abs(gamma))))
    asym = float(np.max(np.abs(gamma - gamma.T)))
    if asym > atol * scale:
        raise NonSymmetric(f"covariance matrix is not symmetric (max |G - G^T| = {asym:.3g})")
    gamma = (gamma + gamma.T) / 2
    try:
        np.linalg.cholesky(gamma)
    except np.linalg.LinAlgError:
        lam = float(np.linalg.eigvalsh(gamma)[0])
        raise NotPositiveDefinite(
            f"covariance matrix is not positive definite (min eigenvalue {lam:.3g})"
        ) from None
    omega = symplectic_form(gamma.shape[0] // 2)
    defect = float(np.max(np.abs(gamma @ omega @ gamma.T - omega)))
    if defect > atol * scale**2:
        raise NotPure(
            f"covariance matrix is not symplectic (max |G W G^T - W| = {defect:.3g}, "
            f"det = {np.linalg.det(gamma):.6g})"
        )
    state = object.__new__(GaussianPureState)
    object.__setattr__(state, "gamma", gamma)
    object.__setattr__(state, "disp", disp)
    return state


@dataclass(frozen=True, eq=False)
class GaussianPureState:
    """Pure Gaussian state ``psi_{Gamma, d}`` on ``N`` modes.

    Construction validates symmetry, positive definiteness and purity
    (``Gamma Omega Gamma^T = Omega``).
    """

    gamma: np.ndarray
    disp: np.ndarray

    def __post_init__(self):
        checked = validate_state(self.gamma, self.disp)
        object.__setattr__(self, "gamma", checked.gamma)
        object.__setattr__(self, "disp", checked.disp)

    @property
    def modes(self) -> int:
        return self.gamma.shape[0] // 2

    def __repr__(self):
        return f"GaussianPureState(modes={self.modes}, disp={self.disp.tolist()})"

    @cached_property
    def is_product(self) -> bool:
        n = self.modes
        mask = np.kron(np.eye(n), np.ones((2, 2))) == 0
        return bool(np.all(np.abs(self.gamma[mask]) <= 1e-12 * max(1.0, np.abs(self.gamma).max())))

    @cached_property
    def exponents(self):
        """Per-mode wavefunction exponents ``(a, b, c)``, each of shape ``(N,)``."""
        if not self.is_product:
            raise UnsupportedOverlap(
                "amplitudes are only available for product states (block-diagonal covariance)"
            )
        parts = [
            _block_exponent(self.gamma[2 * k : 2 * k + 2, 2 * k : 2 * k + 2], self.disp[2 * k : 2 * k + 2])
            for k in range(self.modes)
        ]
        return tuple(np.array(v) for v in zip(*parts))

    @cached_property
    def _cache(self) -> dict:
        return {}


@dataclass(frozen=True)
class MeasurementSpec:
    """Gaussian-dyne measurement applied to every mode.

    ``kind`` is ``"heterodyne"``, ``"homodyne"`` or ``"general"``; the general
    kind projects onto squeezed coherent states with squeezing ``z_k`` on mode
    ``k``.  Heterodyne is the general kind with ``z = 1`` and homodyne is its
    ``z -> 0`` limit.
    """

    kind: str = "heterodyne"
    squeeze: Optional[tuple] = None

    _ALIASES = {"het": "heterodyne", "hom": "homodyne"}

    def __post_init__(self):
        kind = self._ALIASES.get(self.kind, self.kind)
        if kind not in ("heterodyne", "homodyne", "general"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "general":
            if self.squeeze is None:
                raise ValueError("general measurements need a squeezing vector")
            z = tuple(float(v) for v in np.atleast_1d(self.squeeze))
            if not all(v > 0 and math.isfinite(v) for v in z):
                raise ValueError(f"squeezing parameters must be positive, got {z}")
            object.__setattr__(self, "squeeze", z)
        elif self.squeeze is not None:
            raise ValueError(f"{kind} measurements take no squeezing vector")

    @classmethod
    def heterodyne(cls):
        return cls("heterodyne")

    @classmethod
    def homodyne(cls):
        return cls("homodyne")

    @classmethod
    def general(cls, z):
        return cls("general", tuple(np.atleast_1d(z)))

    def squeeze_vector(self, modes: int) -> np.ndarray:
        if self.kind == "heterodyne":
            return np.ones(modes)
        if self.kind == "homodyne":
            raise ValueError("homodyne has no finite squeezing vector")
        z = np.asarray(self.squeeze, dtype=float)
        if z.size == 1:
            return np.full(modes, z[0])
        if z.size != modes:
            raise ValueError(f"squeezing vector has length {z.size}, state has {modes} modes")
        return z

    def outcome_dim(self, modes: int) -> int:
        return modes if self.kind == "homodyne" else 2 * modes


# -- constructors -------------------------------------------------------------------


def vacuum(modes: int = 1) -> GaussianPureState:
    return GaussianPureState(np.eye(2 * modes), np.zeros(2 * modes))


def coherent(alpha) -> GaussianPureState:
    """Coherent state; a sequence of amplitudes gives a multimode product state."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    d = np.sqrt(2) * np.column_stack([alpha.real, alpha.imag]).reshape(-1)
    return GaussianPureState(np.eye(2 * alpha.size), d)


def displaced_squeezed(z: float, delta: float) -> GaussianPureState:
    """Wavefunction ``exp(-(x - z)^2 / (2 delta^2)) / (pi delta^2)^(1/4)``."""
    return GaussianPureState(np.diag([delta**2, 1.0 / delta**2]), [z, 0.0])


def product_state(*states: GaussianPureState) -> GaussianPureState:
    gamma = linalg.block_diag(*(s.gamma for s in states))
    return GaussianPureState(gamma, np.concatenate([s.disp for s in states]))


def random_gaussian_state(
    rng: np.random.Generator, modes: int = 1, max_squeeze: float = 1.0, max_disp: float = 2.0
) -> GaussianPureState:
    """Random product state: rotated squeezed vacuum with a random displacement per mode."""
    blocks = []
    for _ in range(modes):
        r = rng.uniform(-max_squeeze, max_squeeze)
        th = rng.uniform(0, np.pi)
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        blocks.append(R @ np.diag([np.exp(2 * r), np.exp(-2 * r)]) @ R.T)
    gamma = linalg.block_diag(*blocks)
    return GaussianPureState(gamma, rng.uniform(-max_disp, max_disp, size=2 * modes))


# -- single-state quantities --------------------------------------------------------


def _as_outcomes(m, dim: int):
    m = np.asarray(m, dtype=float)
    single = m.ndim == 1
    m = np.atleast_2d(m)
    if m.shape[-1] != dim:
        raise ValueError(f"outcomes must have {dim} coordinates, got {m.shape[-1]}")
    return m, single


def amplitude(state: GaussianPureState, meas: MeasurementSpec, m):
    """Overlap of the measurement projector at outcome ``m`` with ``state``.

    For heterodyne this is ``<beta, psi>``; for a general measurement the
    projector is the squeezed coherent state ``S(z)|alpha>`` with displacement
    ``m``; for homodyne it is the position wavefunction.  In all cases
    ``|amplitude|^2`` equals the outcome density up to the factor ``pi^N``
    for the ``2N``-dimensional kinds.
    """
    if meas.kind == "homodyne":
        return position_wavefunction(state, m)
    N = state.modes
    m, single = _as_outcomes(m, 2 * N)
    z = meas.squeeze_vector(N)
    a, b, c = state.exponents
    out = np.ones(m.shape[0], dtype=complex)
    for k in range(N):
        proj = _measurement_exponent(z[k], m[:, 2 * k], m[:, 2 * k + 1])
        out *= _overlap(proj, (a[k], b[k], c[k]))
    return complex(out[0]) if single else out


def het_amplitude(state: GaussianPureState, m):
    """Coherent-state overlap ``<beta, psi>`` at outcome ``m`` (``beta = (m_x + i m_p)/sqrt 2``)."""
    return amplitude(state, MeasurementSpec.heterodyne(), m)


def position_wavefunction(state: GaussianPureState, x):
    """``psi_{Gamma,d}(x)`` for ``x`` of shape ``(N,)`` or ``(n, N)``."""
    x, single = _as_outcomes(x, state.modes)
    a, b, c = state.exponents
    out = np.exp(np.sum(-a * x**2 + b * x + c, axis=1))
    return complex(out[0]) if single else out


def _homodyne_params(state: GaussianPureState):
    cache = state._cache
    if "hom" not in cache:
        N = state.modes
        proj = np.zeros((2 * N, 2 * N))
        proj[::2, ::2] = np.eye(N)
        xgx = proj @ state.gamma @ proj
        # Moore-Penrose inverse of the rank-N projected covariance
        w, v = np.linalg.eigh(xgx)
        keep = w > PINV_RTOL * np.max(np.abs(w))
        pinv = (v[:, keep] / w[keep]) @ v[:, keep].T
        logdet_x = float(np.sum(np.log(w[keep])))
        cache["hom"] = (pinv, logdet_x)
    return cache["hom"]


def _dyne_params(state: GaussianPureState, z: np.ndarray):
    key = ("dyne", tuple(z))
    cache = state._cache
    if key not in cache:
        s2 = np.ravel(np.column_stack([z**2, 1.0 / z**2]))
        sigma = state.gamma + np.diag(s2)
        try:
            factor = linalg.cho_factor(sigma, lower=True)
        except linalg.LinAlgError as exc:
            raise NumericalError(f"Gamma + S S^T is not positive definite: {exc}") from None
        logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
        cache[key] = (factor, logdet)
    return cache[key]


def single_density(state: GaussianPureState, meas: MeasurementSpec, m):
    """Outcome density of ``meas`` applied to ``state``.

    Heterodyne / general::

        exp(-(m - d)^T (Gamma + S S^T)^{-1} (m - d)) / (pi^N sqrt(det((Gamma + S S^T) / 2)))

    Homodyne uses the Moore-Penrose inverse of ``X Gamma X`` with
    ``X = diag(1, 0, 1, 0, ...)`` on the embedded outcome ``(x_1, 0, ..., x_N, 0)``,
    normalized over the position quadratures.
    """
    N = state.modes
    if meas.kind == "homodyne":
        x, single = _as_outcomes(m, N)
        pinv, logdet_x = _homodyne_params(state)
        full = np.zeros((x.shape[0], 2 * N))
        full[:, ::2] = x
        diff = full - state.disp
        q = np.einsum("ni,ij,nj->n", diff, pinv, diff)
        out = np.exp(-q - 0.5 * N * _LOG_PI - 0.5 * logdet_x)
    else:
        m, single = _as_outcomes(m, 2 * N)
        factor, logdet = _dyne_params(state, meas.squeeze_vector(N))
        diff = m - state.disp
        q = np.einsum("ni,in->n", diff, linalg.cho_solve(factor, diff.T))
        out = np.exp(-q - N * _LOG_PI - 0.5 * (logdet - 2 * N * math.log(2)))
    return float(out[0]) if single else out


def component_sample(
    state: GaussianPureState,
    meas: MeasurementSpec,
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """Draw outcomes of ``meas`` on ``state``.

    Heterodyne / general outcomes are normal with mean ``d`` and covariance
    ``(Gamma + S S^T) / 2``; homodyne outcomes are normal with the position
    part of ``d`` as mean and the position block of ``Gamma / 2`` as
    covariance.  Uses a Cholesky factor of the covariance.
    """
    N = state.modes
    if meas.kind == "homodyne":
        mean = state.disp[::2]
        cov = state.gamma[::2, ::2] / 2
    else:
        z = meas.squeeze_vector(N)
        mean = state.disp
        cov = (state.gamma + np.diag(np.ravel(np.column_stack([z**2, 1.0 / z**2])))) / 2
    key = ("chol", meas)
    if key not in state._cache:
        try:
            state._cache[key] = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"sampling covariance is not positive definite: {exc}") from None
    L = state._cache[key]
    n = 1 if size is None else int(size)
    out = mean + rng.standard_normal((n, mean.size)) @ L.T
    return out[0] if size is None else out


# -- superpositions ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianSuperposition:
    """``Psi = sum_j c_j psi_j`` over Gaussian pure states with a common mode count."""

    components: tuple
    coeffs: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if not comps:
            raise ValueError("a superposition needs at least one component")
        if c.shape != (len(comps),):
            raise ValueError(f"{len(comps)} components but {c.size} coefficients")
        if len({s.modes for s in comps}) != 1:
            raise ValueError("all components must act on the same number of modes")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "coeffs", c)

    @property
    def chi(self) -> int:
        return len(self.components)

    @property
    def modes(self) -> int:
        return self.components[0].modes

    @cached_property
    def stacked_exponents(self):
        """Arrays ``(a, b, c)`` of shape ``(chi, N)``."""
        parts = [s.exponents for s in self.components]
        return tuple(np.stack([p[i] for p in parts]) for i in range(3))

    @cached_property
    def gram(self) -> np.ndarray:
        return gram_matrix(self)

    @cached_property
    def norm_squared(self) -> float:
        return norm_squared(self)

    def normalized(self) -> "GaussianSuperposition":
        return GaussianSuperposition(self.components, self.coeffs / np.sqrt(self.norm_squared), self.label)

    def check_normalized(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm_squared - 1.0) > tol:
            raise ValueError(f"superposition has squared norm {self.norm_squared!r}, expected 1")


def gram_matrix(sup: GaussianSuperposition) -> np.ndarray:
    """``G[j, k] = <psi_j, psi_k>`` under the vacuum-positive phase convention."""
    a, b, c = sup.stacked_exponents
    bra = (a[:, None, :], b[:, None, :], c[:, None, :])
    ket = (a[None, :, :], b[None, :, :], c[None, :, :])
    return np.prod(_overlap(bra, ket), axis=-1)


def norm_squared(sup: GaussianSuperposition) -> float:
    """``||Psi||^2 = c^dagger G c``."""
    c = sup.coeffs
    return float(np.real(np.conj(c) @ sup.gram @ c))


def k_factor(sup: GaussianSuperposition) -> float:
    """``chi ||c||_2^2``, the expected number of rejection trials per sample."""
    return sup.chi * float(np.sum(np.abs(sup.coeffs) ** 2))


_CHUNK_ELEMS = 1 << 21


def superposition_density(sup: GaussianSuperposition, meas: MeasurementSpec, m):
    """Outcome density ``|sum_j c_j amplitude_j(m)|^2`` (divided by ``pi^N`` for 2N-dim outcomes)."""
    N = sup.modes
    a, b, c = sup.stacked_exponents
    coeffs = sup.coeffs
    hom = meas.kind == "homodyne"
    m, single = _as_outcomes(m, N if hom else 2 * N)
    if not hom:
        z = meas.squeeze_vector(N)
    out = np.empty(m.shape[0])
    step = max(1, _CHUNK_ELEMS // sup.chi)
    for lo in range(0, m.shape[0], step):
        chunk = m[lo : lo + step]
        amp = np.ones((chunk.shape[0], sup.chi), dtype=complex)
        for k in range(N):
            if hom:
                x = chunk[:, k : k + 1]
                amp *= np.exp(-a[:, k] * x**2 + b[:, k] * x + c[:, k])
            else:
                pa, pb, pc = _measurement_exponent(z[k], chunk[:, 2 * k], chunk[:, 2 * k + 1])
                proj = (pa[:, None], pb[:, None], pc[:, None])
                amp *= _overlap(proj, (a[:, k], b[:, k], c[:, k]))
        out[lo : lo + step] = np.abs(amp @ coeffs) ** 2
    if not hom:
        out /= np.pi**N
    return float(out[0]) if single else out


def superposition_model(sup: GaussianSuperposition, meas: MeasurementSpec) -> SuperpositionModel:
    """Wire density and sampling oracles of ``sup`` under ``meas`` for the rejection sampler."""
    sup.check_normalized()
    comps = sup.components
    dim = meas.outcome_dim(sup.modes)
    return SuperpositionModel(
        coeffs=sup.coeffs,
        superposition_density=lambda X: superposition_density(sup, meas, X),
        component_density=lambda j, X: single_density(comps[j], meas, X),
        component_sampler=lambda j, size, rng: component_sample(comps[j], meas, rng, size),
        outcome_shape=(dim,),
        info={"source": sup, "measurement": meas},
    )


# -- example models -----------------------------------------------------------------------


def make_cat(alpha: complex, meas: Optional[MeasurementSpec] = None):
    """Cat state ``|alpha> + |-alpha>`` (normalized) and its heterodyne model.

    Returns ``(superposition, model)``.
    """
    alpha = complex(alpha)
    norm2 = 2.0 * (1.0 + math.exp(-2.0 * abs(alpha) ** 2))
    c = 1.0 / math.sqrt(norm2)
    sup = GaussianSuperposition((coherent(alpha), coherent(-alpha)), [c, c], label=f"cat({alpha})")
    return sup, superposition_model(sup, meas or MeasurementSpec.heterodyne())


def gkp_weights(kappa: float, z_max: int) -> tuple[np.ndarray, np.ndarray]:
    z = np.arange(-z_max, z_max + 1)
    return z, np.exp(-(kappa**2) * z.astype(float) ** 2 / 2)


def _gkp_tail_fraction(kappa: float, z_max: int) -> float:
    _, w = gkp_weights(kappa, z_max)
    tail, z = 0.0, z_max + 1
    while True:
        term = 2.0 * math.exp(-(kappa**2) * z * z / 2)
        tail += term
        if term < 1e-18 * max(tail, 1e-300) or term == 0.0:
            break
        z += 1
    return tail / float(w.sum())


def make_gkp(
    kappa: float,
    delta: float,
    z_max: int,
    tail_tol: float = 1e-9,
    meas: Optional[MeasurementSpec] = None,
):
    """Truncated GKP state ``sum_{|z| <= z_max} exp(-kappa^2 z^2 / 2) psi_{z, delta}``.

    The weights discarded beyond ``z_max``, relative to the retained ``l1``
    weight, must not exceed ``tail_tol``.  Returns ``(superposition, model)``
    with homodyne oracles unless ``meas`` is given.
    """
    if kappa <= 0 or delta <= 0:
        raise ValueError("kappa and delta must be positive")
    if int(z_max) != z_max or z_max < 0:
        raise ValueError(f"z_max must be a nonnegative integer, got {z_max!r}")
    tail = _gkp_tail_fraction(kappa, int(z_max))
    if tail > tail_tol:
        raise TailMassError(
            f"truncation at z_max={z_max} drops a relative weight {tail:.3g} > {tail_tol:.3g}"
        )
    z, w = gkp_weights(kappa, int(z_max))
    comps = tuple(displaced_squeezed(float(zz), delta) for zz in z)
    sup = GaussianSuperposition(comps, w, label=f"gkp(kappa={kappa}, delta={delta}, z_max={z_max})")
    sup = sup.normalized()
    return sup, superposition_model(sup, meas or MeasurementSpec.homodyne())


def gkp_k_factor(kappa: float, delta: float, z_max: int) -> float:
    """``K`` of the truncated GKP state, from the closed-form Gram matrix."""
    z, w = gkp_weights(kappa, z_max)
    gram = np.exp(-((z[:, None] - z[None, :]) ** 2) / (4 * delta**2))
    return len(z) * float(w @ w) / float(w @ gram @ w)


def scan_gkp_truncation(kappa: float, delta: float, z_values: Sequence[int] = range(3, 11)):
    """Table of ``(z_max, chi, K)`` for a range of truncations."""
    return [(int(zm), 2 * int(zm) + 1, gkp_k_factor(kappa, delta, int(zm))) for zm in z_values]
