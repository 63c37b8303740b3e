"""JSON model documents.

Four document types are understood::

    {"type": "cat", "alpha": [re, im]}
    {"type": "gkp", "kappa": 0.6, "delta": 0.3, "zmax": 7, "tail_tol": 1e-5}
    {"type": "gaussian_superposition", "modes": N, "normalize": false,
     "components": [{"c": [re, im], "gamma": [[...]], "d": [...]}, ...]}
    {"type": "finite", "dim": D, "components": [[z, ...], ...],
     "coeffs": [z, ...], "povm": [[[z, ...], ...], ...]}

Complex numbers are written ``[re, im]`` or as a plain real number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .exceptions import InvalidPOVM, InvalidState, SamplingError
from .gaussian import GaussianPureState, GaussianSuperposition, MeasurementSpec, make_cat, make_gkp
from .povm import FinitePOVM, FiniteSuperposition

__all__ = ["ModelSpecError", "LoadedModel", "load_model", "parse_model", "dump_superposition"]


class ModelSpecError(ValueError):
    """A model document failed to parse; the message names the offending field."""


@dataclass
class LoadedModel:
    kind: str
    gaussian: Optional[GaussianSuperposition] = None
    finite: Optional[tuple] = None
    default_measurement: Optional[str] = None

    def measurement(self, requested: Optional[str]) -> Optional[MeasurementSpec]:
        if self.kind == "finite":
            return None
        return MeasurementSpec(requested or self.default_measurement or "heterodyne")


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ModelSpecError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ModelSpecError(f"{where}: expected a number or [re, im], got {value!r}")


def _complex_array(value, where: str, ndim: int) -> np.ndarray:
    if ndim == 0:
        return np.asarray(_complex(value, where))
    if not isinstance(value, list):
        raise ModelSpecError(f"{where}: expected a list, got {type(value).__name__}")
    parts = [_complex_array(v, f"{where}[{i}]", ndim - 1) for i, v in enumerate(value)]
    if not parts:
        raise ModelSpecError(f"{where}: must not be empty")
    shapes = {p.shape for p in parts}
    if len(shapes) != 1:
        raise ModelSpecError(f"{where}: ragged entries")
    return np.stack(parts)


def _real_array(value, where: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ModelSpecError(f"{where}: expected a numeric array") from None
    return arr


def _field(doc: dict, name: str, where: str = "") -> Any:
    if name not in doc:
        raise ModelSpecError(f"{where}{name}: required field missing")
    return doc[name]


def _number(doc: dict, name: str, kind=float, positive=True, default=None):
    if name not in doc and default is not None:
        return default
    v = _field(doc, name)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelSpecError(f"{name}: expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ModelSpecError(f"{name}: expected an integer, got {v!r}")
    if positive and v <= 0:
        raise ModelSpecError(f"{name}: must be positive, got {v!r}")
    return kind(v)


def parse_model(doc: Any) -> LoadedModel:
    if not isinstance(doc, dict):
        raise ModelSpecError("document: expected a JSON object")
    kind = _field(doc, "type")
    try:
        if kind == "cat":
            alpha = _complex(_field(doc, "alpha"), "alpha")
            sup, _ = make_cat(alpha)
            return LoadedModel("cat", gaussian=sup, default_measurement="heterodyne")
        if kind == "gkp":
            kappa = _number(doc, "kappa")
            delta = _number(doc, "delta")
            zmax = _number(doc, "zmax", kind=int, positive=False)
            tail_tol = _number(doc, "tail_tol", default=1e-9)
            sup, _ = make_gkp(kappa, delta, zmax, tail_tol=tail_tol)
            return LoadedModel("gkp", gaussian=sup, default_measurement="homodyne")
        if kind == "gaussian_superposition":
            return LoadedModel("gaussian_superposition", gaussian=_parse_gaussian(doc))
        if kind == "finite":
            return LoadedModel("finite", finite=_parse_finite(doc))
    except ModelSpecError:
        raise
    except (SamplingError, ValueError) as exc:
        raise ModelSpecError(f"{kind}: {exc}") from None
    raise ModelSpecError(f"type: unknown model type {kind!r}")


def _parse_gaussian(doc: dict) -> GaussianSuperposition:
    modes = _number(doc, "modes", kind=int)
    comps_doc = _field(doc, "components")
    if not isinstance(comps_doc, list) or not comps_doc:
        raise ModelSpecError("components: expected a non-empty list")
    comps, coeffs = [], []
    for i, item in enumerate(comps_doc):
        where = f"components[{i}]."
        if not isinstance(item, dict):
            raise ModelSpecError(f"components[{i}]: expected an object")
        coeffs.append(_complex(_field(item, "c", where), where + "c"))
        gamma = _real_array(_field(item, "gamma", where), where + "gamma")
        d = _real_array(_field(item, "d", where), where + "d")
        if gamma.shape != (2 * modes, 2 * modes):
            raise ModelSpecError(f"{where}gamma: expected shape {(2 * modes, 2 * modes)}, got {gamma.shape}")
        if d.shape != (2 * modes,):
            raise ModelSpecError(f"{where}d: expected length {2 * modes}, got shape {d.shape}")
        try:
            comps.append(GaussianPureState(gamma, d))
        except InvalidState as exc:
            raise ModelSpecError(f"{where}gamma: {exc}") from None
    sup = GaussianSuperposition(tuple(comps), coeffs)
    if doc.get("normalize", False):
        return sup.normalized()
    if abs(sup.norm_squared - 1) > 1e-9:
        raise ModelSpecError(
            f"components: superposition has squared norm {sup.norm_squared:.12g}; "
            'set "normalize": true to rescale the coefficients'
        )
    return sup


def _parse_finite(doc: dict) -> tuple:
    dim = _number(doc, "dim", kind=int)
    V = _complex_array(_field(doc, "components"), "components", 2)
    c = _complex_array(_field(doc, "coeffs"), "coeffs", 1)
    E = _complex_array(_field(doc, "povm"), "povm", 3)
    if V.shape[1] != dim:
        raise ModelSpecError(f"components: vectors have length {V.shape[1]}, dim is {dim}")
    if E.shape[1:] != (dim, dim):
        raise ModelSpecError(f"povm: effects have shape {E.shape[1:]}, expected {(dim, dim)}")
    try:
        sup = FiniteSuperposition(V, c)
    except ValueError as exc:
        raise ModelSpecError(f"components: {exc}") from None
    try:
        povm = FinitePOVM(E)
    except InvalidPOVM as exc:
        raise ModelSpecError(f"povm: {exc}") from None
    return sup, povm


def load_model(source: Union[str, Path, dict]) -> LoadedModel:
    """Parse a model document from a path, a JSON string, or an already-decoded dict."""
    if isinstance(source, dict):
        return parse_model(source)
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_model(doc)


def dump_superposition(sup: GaussianSuperposition) -> dict:
    """Serialize a Gaussian superposition as a ``gaussian_superposition`` document."""
    return {
        "type": "gaussian_superposition",
        "modes": sup.modes,
        "components": [
            {"c": [float(c.real), float(c.imag)], "gamma": s.gamma.tolist(), "d": s.disp.tolist()}
            for c, s in zip(sup.coeffs, sup.components)
        ],
    }
