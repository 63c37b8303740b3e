"""Exact sampling of measurement outcomes of coherent superpositions of Gaussian states.

The sampler draws from the mixture of the components' outcome distributions
and accepts by rejection, so it needs only per-component samplers and density
oracles for the components and for the superposition.
"""

from .discrete import PmfOracle, bit_probability, sample_index, sample_indices
from .estimator import SuperpositionSampler
from .exceptions import *  # noqa: F401,F403
from .gaussian import (
    GaussianPureState,
    GaussianSuperposition,
    MeasurementSpec,
    amplitude,
    coherent,
    component_sample,
    displaced_squeezed,
    het_amplitude,
    k_factor,
    make_cat,
    make_gkp,
    position_wavefunction,
    scan_gkp_truncation,
    single_density,
    superposition_density,
    superposition_model,
    vacuum,
)
from .modelspec import load_model
from .povm import FinitePOVM, FiniteSuperposition, born_distribution, finite_model
from .rejection import (
    FAIL,
    SuperpositionModel,
    acceptance_probability,
    mixture_density,
    sample_many,
    sample_until_success,
    sample_with_budget,
    trial_budget,
)
from .sparsify import Decomposition, sample_with_extent, sparsify_verified

__version__ = "0.1.0"
