"""Finite-dimensional brute force: Born probabilities, exact sampling and bound checks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .exceptions import InvalidPOVM, NonOrthogonal
from .rejection import SuperpositionModel

__all__ = [
    "FinitePOVM",
    "FiniteSuperposition",
    "born_distribution",
    "sample_exact",
    "check_pinching",
    "check_mixture_bound",
    "random_instance",
    "finite_model",
]

PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FinitePOVM:
    """Effects ``M_0, ..., M_{m-1}``: Hermitian PSD, summing to the identity."""

    effects: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.effects, dtype=complex)
        if E.ndim != 3 or E.shape[1] != E.shape[2] or E.shape[0] < 1:
            raise InvalidPOVM(f"effects must have shape (m, D, D), got {E.shape}")
        herm = np.max(np.abs(E - np.conj(np.transpose(E, (0, 2, 1)))))
        if herm > PSD_TOL:
            raise InvalidPOVM(f"effects are not Hermitian (max deviation {herm:.3g})")
        E = (E + np.conj(np.transpose(E, (0, 2, 1)))) / 2
        lam = min(float(np.linalg.eigvalsh(M)[0]) for M in E)
        if lam < -PSD_TOL:
            raise InvalidPOVM(f"an effect has negative eigenvalue {lam:.3g}")
        defect = float(np.max(np.abs(E.sum(axis=0) - np.eye(E.shape[1]))))
        if defect > COMPLETENESS_TOL:
            raise InvalidPOVM(f"effects do not sum to the identity (max deviation {defect:.3g})")
        object.__setattr__(self, "effects", E)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def __len__(self):
        return self.effects.shape[0]

    @classmethod
    def computational(cls, dim: int) -> "FinitePOVM":
        E = np.zeros((dim, dim, dim))
        E[np.arange(dim), np.arange(dim), np.arange(dim)] = 1.0
        return cls(E)


@dataclass(frozen=True, eq=False)
class FiniteSuperposition:
    """Unit vectors ``psi_j`` (rows of ``components``) and coefficients ``c_j`` with ``||Psi|| = 1``."""

    components: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.components, dtype=complex))
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.shape != (V.shape[0],):
            raise ValueError(f"{V.shape[0]} components but {c.size} coefficients")
        norms = np.linalg.norm(V, axis=1)
        if np.max(np.abs(norms - 1)) > 1e-12:
            raise ValueError(f"components must be unit vectors (norms {norms})")
        object.__setattr__(self, "components", V)
        object.__setattr__(self, "coeffs", c)
        n = np.linalg.norm(self.state)
        if abs(n - 1) > 1e-10:
            raise ValueError(f"superposition has norm {n!r}, expected 1")

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    @property
    def chi(self) -> int:
        return self.components.shape[0]

    @cached_property
    def state(self) -> np.ndarray:
        return self.coeffs @ self.components

    @property
    def k_factor(self) -> float:
        return self.chi * float(np.sum(np.abs(self.coeffs) ** 2))

    @property
    def weights(self) -> np.ndarray:
        w = np.abs(self.coeffs) ** 2
        return w / w.sum()


def _expectations(vectors: np.ndarray, povm: FinitePOVM) -> np.ndarray:
    """``<v, M_k v>`` for each row ``v``; shape ``(n, m)``."""
    return np.real(np.einsum("ni,kij,nj->nk", np.conj(vectors), povm.effects, vectors))


def born_distribution(state, povm: FinitePOVM) -> np.ndarray:
    """Outcome probabilities ``<Psi, M_k Psi>``; round-off negatives are clipped to 0."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (povm.dim,):
        raise ValueError(f"state has dimension {state.shape}, POVM acts on {povm.dim}")
    p = _expectations(state[np.newaxis], povm)[0]
    p[(p < 0) & (p > -1e-12)] = 0.0
    return p


def sample_exact(state, povm: FinitePOVM, rng: np.random.Generator, size=None):
    """Inverse-CDF draw(s) from the Born distribution."""
    cdf = np.cumsum(born_distribution(state, povm))
    u = rng.random(size) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return int(idx) if size is None else idx


def check_pinching(sup: FiniteSuperposition, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of ``chi sum_j P_j rho P_j - rho`` for orthonormal components.

    ``P_j`` projects onto ``psi_j`` and ``rho = |Psi><Psi|``.  The pinching
    inequality says the result is nonnegative.
    """
    V = sup.components
    gram = np.conj(V) @ V.T
    dev = float(np.max(np.abs(gram - np.eye(sup.chi))))
    if dev > tol:
        raise NonOrthogonal(f"components are not orthonormal (max |G - I| = {dev:.3g})")
    psi = sup.state
    rho = np.outer(psi, np.conj(psi))
    proj = np.einsum("ji,jk->jik", V, np.conj(V))
    pinched = np.einsum("jab,bc,jcd->ad", proj, rho, proj)
    return float(np.linalg.eigvalsh(sup.chi * pinched - rho)[0])


def check_mixture_bound(sup: FiniteSuperposition, povm: FinitePOVM) -> float:
    """``max_k f_Psi(k) / (K sum_j p(j) f_j(k))`` over outcomes with positive denominator.

    The bound ``f_Psi <= K * mixture`` holds for arbitrary (non-orthogonal)
    components, so the result never exceeds 1 beyond round-off.
    """
    target = born_distribution(sup.state, povm)
    mixture = sup.weights @ _expectations(sup.components, povm)
    denom = sup.k_factor * mixture
    ok = denom > 0
    if not np.any(ok):
        return 0.0
    return float(np.max(target[ok] / denom[ok]))


def _unit_vectors(rng, n, dim):
    v = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_instance(
    dim: int,
    chi: int,
    m: int,
    rng: np.random.Generator,
    orthogonal: bool = False,
    max_tries: int = 100,
):
    """Random superposition and POVM.

    Components are uniformly distributed unit vectors (orthonormal columns
    of a Haar unitary when ``orthogonal``); coefficients are complex normal,
    then rescaled so ``||Psi|| = 1``.  The POVM is ``T^{-1/2} A_k T^{-1/2}``
    for random PSD ``A_k`` with ``T = sum_k A_k``.
    """
    if dim < 2 or chi < 1 or m < 2:
        raise ValueError("need dim >= 2, chi >= 1, m >= 2")
    if orthogonal and chi > dim:
        raise ValueError("at most dim orthogonal components exist")
    for _ in range(max_tries):
        if orthogonal:
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            q, r = np.linalg.qr(g)
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            V = q.T[:chi]
        else:
            V = _unit_vectors(rng, chi, dim)
        c = rng.standard_normal(chi) + 1j * rng.standard_normal(chi)
        norm = np.linalg.norm(c @ V)
        if norm < 1e-6:
            continue
        c = c / norm
        G = rng.standard_normal((m, dim, dim)) + 1j * rng.standard_normal((m, dim, dim))
        A = G @ np.conj(np.transpose(G, (0, 2, 1)))
        T = A.sum(axis=0)
        if np.linalg.cond(T) > 1e10:
            continue
        T_isqrt = linalg.inv(linalg.sqrtm(T))
        T_isqrt = (T_isqrt + np.conj(T_isqrt.T)) / 2
        E = T_isqrt @ A @ T_isqrt
        # absorb the remaining round-off so completeness holds to machine precision
        defect = E.sum(axis=0) - np.eye(dim)
        E = E - defect / m
        return FiniteSuperposition(V, c), FinitePOVM(E)
    raise RuntimeError("could not draw a well-conditioned instance")


def finite_model(sup: FiniteSuperposition, povm: FinitePOVM) -> SuperpositionModel:
    """Rejection-sampler oracles for a finite instance; outcomes are integer indices."""
    target = born_distribution(sup.state, povm)
    per_comp = np.clip(_expectations(sup.components, povm), 0.0, None)
    cdfs = np.cumsum(per_comp, axis=1)

    def sampler(j, size, rng):
        u = rng.random(size) * cdfs[j, -1]
        return np.minimum(np.searchsorted(cdfs[j], u, side="right"), len(povm) - 1)

    return SuperpositionModel(
        coeffs=sup.coeffs,
        superposition_density=lambda k: target[np.asarray(k)],
        component_density=lambda j, k: per_comp[j, np.asarray(k)],
        component_sampler=sampler,
        outcome_shape=(),
        outcome_dtype=np.intp,
        info={"source": sup, "povm": povm},
    )
