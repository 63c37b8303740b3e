"""Property sweeps used by ``coherent-sampling verify``.

Each suite returns a list of :class:`Check` records carrying the smallest and
largest margin seen; a check passes when its smallest margin is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from .discrete import PmfOracle, n_bits, sample_index
from .gaussian import (
    GaussianSuperposition,
    MeasurementSpec,
    random_gaussian_state,
    single_density,
    superposition_density,
    superposition_model,
)
from .povm import born_distribution, check_mixture_bound, check_pinching, finite_model, random_instance
from .rejection import acceptance_probability, run_trials

__all__ = ["Check", "SUITES", "run_suites", "check_finite_document", "check_gaussian_model"]


@dataclass
class Check:
    name: str
    passed: bool
    min_margin: float
    max_margin: float
    count: int
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _check(name: str, margins, detail: str = "") -> Check:
    m = np.asarray(margins, dtype=float).ravel()
    lo, hi = float(np.min(m)), float(np.max(m))
    return Check(name, bool(lo >= 0), lo, hi, int(m.size), detail)


def pinching_suite(rng, n_instances=200, max_dim=16, tol=1e-9):
    margins = []
    for _ in range(n_instances):
        dim = int(rng.integers(2, max_dim + 1))
        chi = int(rng.integers(1, dim + 1))
        sup, _ = random_instance(dim, chi, 2, rng, orthogonal=True)
        margins.append(check_pinching(sup) + tol)
    return [_check("pinching", margins, f"min eigenvalue + {tol:g}, D <= {max_dim}")]


def mixture_suite(rng, n_instances=200, max_dim=8, max_chi=4, max_effects=8, tol=1e-9):
    margins = []
    for _ in range(n_instances):
        dim = int(rng.integers(2, max_dim + 1))
        chi = int(rng.integers(1, max_chi + 1))
        m = int(rng.integers(2, max_effects + 1))
        sup, povm = random_instance(dim, chi, m, rng)
        margins.append(1 + tol - check_mixture_bound(sup, povm))
    out = [_check("mixture_bound.finite", margins, f"1 + {tol:g} - max ratio")]
    ratios = []
    for _ in range(max(1, n_instances // 20)):
        sup = _random_superposition(rng, int(rng.integers(1, 9)))
        for meas in (MeasurementSpec.heterodyne(), MeasurementSpec.homodyne()):
            model = superposition_model(sup, meas)
            X = _random_outcomes(sup, meas, rng, 500)
            ratios.append(_ratio(model, X))
    out.append(_check("mixture_bound.gaussian", 1 + tol - np.array(ratios), f"1 + {tol:g} - max ratio"))
    return out


def _ratio(model, X) -> float:
    from .rejection import mixture_density

    target = np.asarray(model.superposition_density(X), dtype=float)
    mix = mixture_density(model, X)
    ok = mix > 0
    return float(np.max(target[ok] / (model.k_factor * mix[ok])))


def _random_superposition(rng, chi: int) -> GaussianSuperposition:
    comps = tuple(random_gaussian_state(rng, 1, max_squeeze=1.0, max_disp=2.0) for _ in range(chi))
    c = rng.standard_normal(chi) + 1j * rng.standard_normal(chi)
    return GaussianSuperposition(comps, c).normalized()


def _random_outcomes(sup, meas, rng, n):
    dim = meas.outcome_dim(sup.modes)
    return rng.uniform(-4, 4, size=(n, dim))


def reduction_suite(rng, n_instances=5, n_samples=100_000, tv_tol=0.02):
    tv, acc = [], []
    for _ in range(n_instances):
        dim = int(rng.integers(2, 9))
        chi = int(rng.integers(1, 5))
        m = int(rng.integers(2, 9))
        sup, povm = random_instance(dim, chi, m, rng)
        model = finite_model(sup, povm)
        _, x, _, accepted = run_trials(model, int(math.ceil(n_samples * model.k_factor * 1.2)), rng)
        got = x[accepted][:n_samples]
        emp = np.bincount(got, minlength=len(povm)) / got.size
        tv.append(tv_tol - 0.5 * np.abs(emp - born_distribution(sup.state, povm)).sum())
        p = 1 / model.k_factor
        n = accepted.size
        sigma = math.sqrt(p * (1 - p) / n)
        acc.append(3 * sigma - abs(accepted.mean() - p))
    return [
        _check("reduction.tv", tv, f"{tv_tol} - TV over {n_samples} samples"),
        _check("reduction.acceptance_rate", acc, "3 sigma - |rate - 1/K|"),
    ]


def _integrate(density: Callable, center: np.ndarray, scale: float, dim: int, n=401) -> float:
    half = 12 * scale
    axes = [np.linspace(c - half, c + half, n) for c in center]
    if dim == 1:
        return float(trapezoid(density(axes[0][:, None]), axes[0]))
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    vals = density(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    return float(trapezoid(trapezoid(vals, axes[1], axis=1), axes[0]))


def gaussian_suite(rng, n_states=20, tol=1e-6):
    margins = []
    kinds = [
        MeasurementSpec.heterodyne(),
        MeasurementSpec.homodyne(),
        MeasurementSpec.general(0.5),
        MeasurementSpec.general(2.0),
    ]
    for _ in range(n_states):
        st = random_gaussian_state(rng, 1, max_squeeze=1.0, max_disp=2.0)
        for meas in kinds:
            dim = meas.outcome_dim(1)
            scale = math.sqrt(float(np.linalg.eigvalsh(st.gamma)[-1]) + 4.0)
            if dim == 1:
                f = lambda X, st=st, meas=meas: single_density(st, meas, X)
                total = _integrate(f, st.disp[:1], scale, 1, n=2001)
            else:
                f = lambda X, st=st, meas=meas: single_density(st, meas, X)
                total = _integrate(f, st.disp, scale, 2)
                total /= 2.0  # density is w.r.t. d^2 beta = dm / 2
            margins.append(tol - abs(total - 1))
    return [_check("gaussian.normalization", margins, f"{tol:g} - |integral - 1|")]


def discrete_suite(rng, chis=(2, 3, 5, 8, 16), n_draws=2000, alpha=1e-3):
    calls_margin, pvals = [], []
    for chi in chis:
        w = rng.dirichlet(np.ones(chi))
        counter = {"n": 0}

        def ev(j, w=w):
            counter["n"] += 1
            return float(w[j])

        oracle = PmfOracle(chi, ev)
        oracle.check()
        bound = 2 * chi * n_bits(chi)
        draws = np.empty(n_draws, dtype=int)
        for i in range(n_draws):
            counter["n"] = 0
            draws[i] = sample_index(oracle, rng)
            calls_margin.append(bound - counter["n"])
        obs = np.bincount(draws, minlength=chi)
        pvals.append(stats.chisquare(obs, w * n_draws).pvalue - alpha)
    return [
        _check("discrete.call_budget", calls_margin, "2 chi ceil(log2 chi) - calls per draw"),
        _check("discrete.chi_square", pvals, f"p-value - {alpha:g}"),
    ]


SUITES = {
    "pinching": pinching_suite,
    "mixture": mixture_suite,
    "reduction": reduction_suite,
    "gaussian": gaussian_suite,
    "discrete": discrete_suite,
}


def run_suites(names, seed: int = 0) -> dict:
    """Run the named suites (``"all"`` expands to every suite) and build a report."""
    if "all" in names:
        names = list(SUITES)
    report = {"seed": seed, "suites": {}}
    for name in names:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(list(SUITES).index(name),)))
        report["suites"][name] = [c.as_dict() for c in SUITES[name](rng)]
    report["passed"] = all(c["passed"] for checks in report["suites"].values() for c in checks)
    return report


def check_finite_document(doc: dict, tol: float = 1e-10) -> list:
    """Validate a raw ``finite`` model document without rejecting it outright.

    Reports Hermiticity, positivity and completeness of the effects and the
    normalization of the state as separate checks, then the mixture bound
    (and pinching when the components are orthonormal) if the POVM is valid.
    """
    from .modelspec import _complex_array

    V = _complex_array(doc["components"], "components", 2)
    c = _complex_array(doc["coeffs"], "coeffs", 1)
    E = _complex_array(doc["povm"], "povm", 3)
    herm = float(np.max(np.abs(E - np.conj(np.transpose(E, (0, 2, 1))))))
    Eh = (E + np.conj(np.transpose(E, (0, 2, 1)))) / 2
    lam = min(float(np.linalg.eigvalsh(M)[0]) for M in Eh)
    defect = float(np.max(np.abs(Eh.sum(axis=0) - np.eye(E.shape[1]))))
    state_norm = float(np.linalg.norm(c @ V))
    checks = [
        _check("povm.hermitian", [tol - herm]),
        _check("povm.positive", [lam + tol]),
        _check("povm.completeness", [tol - defect], f"max |sum_k M_k - I| = {defect:.3g}"),
        _check("state.normalized", [tol - abs(state_norm - 1)]),
    ]
    if all(ch.passed for ch in checks):
        from .exceptions import NonOrthogonal
        from .povm import FinitePOVM, FiniteSuperposition

        sup, povm = FiniteSuperposition(V, c), FinitePOVM(E)
        checks.append(_check("mixture_bound", [1 + 1e-9 - check_mixture_bound(sup, povm)]))
        try:
            checks.append(_check("pinching", [check_pinching(sup) + 1e-9]))
        except NonOrthogonal:
            pass
    return [ch.as_dict() for ch in checks]


def check_gaussian_model(sup: GaussianSuperposition, meas: MeasurementSpec, rng, n=10_000) -> list:
    """Mixture bound at random outcomes and, for one mode, normalization by quadrature."""
    model = superposition_model(sup, meas)
    X = _random_outcomes(sup, meas, rng, n)
    checks = [_check("mixture_bound", [1 + 1e-9 - _ratio(model, X)])]
    acceptance_probability(model, X)
    if sup.modes == 1:
        dim = meas.outcome_dim(1)
        f = lambda Y: superposition_density(sup, meas, Y)
        spread = max(float(np.max(np.abs(s.disp))) for s in sup.components)
        scale = math.sqrt(max(float(np.linalg.eigvalsh(s.gamma)[-1]) for s in sup.components) + 4.0)
        total = _integrate(f, np.zeros(dim), scale + spread / 12, dim, n=2001 if dim == 1 else 601)
        if dim == 2:
            total /= 2.0
        checks.append(_check("normalization", [1e-6 - abs(total - 1)], f"integral = {total:.12f}"))
    return [ch.as_dict() for ch in checks]
