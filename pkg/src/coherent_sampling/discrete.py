"""Drawing an index ``J ~ p`` from a probability oracle.

The reference sampler draws the binary digits of ``J`` one at a time, most
significant first.  Each digit is a biased coin whose bias is the conditional
probability of the digit given the prefix drawn so far, obtained by summing
the oracle over the contiguous block of indices that share the prefix.  This
needs ``O(chi log chi)`` oracle calls per draw and no preprocessing.

A cached-CDF path is provided for bulk draws; it sweeps the oracle once and
then uses binary search.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ContractViolation, ZeroMassPrefix

__all__ = [
    "PmfOracle",
    "n_bits",
    "prefix_range",
    "prefix_mass",
    "bit_probability",
    "sample_index",
    "sample_indices",
]

NORMALIZATION_TOL = 1e-9


@dataclass(eq=False)
class PmfOracle:
    """Probability mass function on ``{0, ..., chi - 1}`` given as a callable.

    Parameters
    ----------
    chi : int
        Size of the support.
    eval : callable
        ``eval(j)`` returns ``p(j) >= 0``.  The values must sum to one; this
        is checked once, on the first draw.
    """

    chi: int
    eval: Callable[[int], float]
    _checked: bool = field(default=False, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)
    _cdf: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if int(self.chi) != self.chi or self.chi < 1:
            raise ValueError(f"chi must be a positive integer, got {self.chi!r}")
        self.chi = int(self.chi)

    @classmethod
    def from_weights(cls, weights) -> "PmfOracle":
        w = np.asarray(weights, dtype=float)
        return cls(len(w), lambda j: w[j])

    def __call__(self, j: int) -> float:
        value = self.eval(j)
        if value < 0:
            raise ContractViolation(f"p({j}) = {value} is negative")
        return value

    def check(self) -> None:
        """Validate nonnegativity and normalization (once per oracle)."""
        with self._lock:
            if self._checked:
                return
            values = np.array([self(j) for j in range(self.chi)], dtype=float)
            total = values.sum()
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise ContractViolation(f"probabilities sum to {total!r}, not 1")
            self._cdf = np.cumsum(values)
            self._checked = True

    @property
    def cdf(self) -> np.ndarray:
        self.check()
        return self._cdf


def n_bits(chi: int) -> int:
    """Number of binary digits ``ceil(log2 chi)`` used to encode an index."""
    return 0 if chi <= 1 else math.ceil(math.log2(chi))


def prefix_range(chi: int, prefix: str) -> range:
    """Indices whose leading ``len(prefix)`` bits equal ``prefix``, clipped to ``chi``."""
    L = n_bits(chi)
    r = len(prefix)
    if r > L:
        raise ValueError(f"prefix of length {r} exceeds {L} bits")
    if prefix and set(prefix) - {"0", "1"}:
        raise ValueError(f"prefix must be a bit string, got {prefix!r}")
    value = int(prefix, 2) if prefix else 0
    shift = L - r
    lo = value << shift
    hi = (value + 1) << shift
    return range(min(lo, chi), min(hi, chi))


def prefix_mass(oracle: PmfOracle, prefix: str):
    """Total probability of the indices sharing the given most-significant bits."""
    return sum(oracle(j) for j in prefix_range(oracle.chi, prefix))


def bit_probability(oracle: PmfOracle, prefix: str):
    """Conditional probability that the next bit after ``prefix`` is 1.

    Returns a ``(probability, mass_of_prefix)`` pair.  The arithmetic is
    generic, so an oracle returning :class:`fractions.Fraction` values gives
    exact results.
    """
    m0 = prefix_mass(oracle, prefix + "0")
    m1 = prefix_mass(oracle, prefix + "1")
    total = m0 + m1
    if total <= 0:
        raise ZeroMassPrefix(f"prefix {prefix!r} carries no probability mass")
    return m1 / total, total


def sample_index(oracle: PmfOracle, rng: np.random.Generator) -> int:
    """Draw one index from ``oracle`` bit by bit, most significant bit first.

    One uniform variate is consumed per bit.  For ``chi == 1`` the result is
    0 and no randomness is consumed.
    """
    oracle.check()
    prefix = ""
    for _ in range(n_bits(oracle.chi)):
        q, _ = bit_probability(oracle, prefix)
        prefix += "1" if rng.random() < q else "0"
    return int(prefix, 2) if prefix else 0


def sample_indices(oracle: PmfOracle, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` indices at once using the cached CDF."""
    cdf = oracle.cdf
    if oracle.chi == 1:
        return np.zeros(size, dtype=np.intp)
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    # u can land exactly on a trailing flat stretch of the CDF
    return np.minimum(idx, oracle.chi - 1)
