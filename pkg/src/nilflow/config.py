"""Resolution of command-line / file configuration into model objects."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import Algebra2Step, heisenberg_algebra, is_heisenberg_canonical, load_algebra
from .errors import ConfigError
from .heisenberg import PMetricSpec, build_P_metric, canonical_families
from .integrals import (
    Energy,
    FirstIntegral,
    KillingRotation,
    KillingTranslation,
    LinearCentral,
    Quadratic,
)
from .lattice import LatticeSpec, SmoothedKilling, load_lattice, quotient_family

NAMED_FAMILIES = ("G", "F", "Fprime", "quotient", "basic")


@dataclass
class RunConfig:
    algebra: Algebra2Step
    n: int | None
    metric: PMetricSpec | None
    family_name: str
    family: list[FirstIntegral]
    lattice: LatticeSpec | None
    seed: int
    samples: int
    tol: float | None


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def resolve_algebra(group: str, n: int | None) -> tuple[Algebra2Step, int | None]:
    if group == "hn":
        if n is None or n < 1:
            raise ConfigError("--n must be a positive integer for group hn")
        return heisenberg_algebra(n), n
    try:
        a = load_algebra(group)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"cannot load algebra {group}: {exc}") from exc
    n_h = a.dim_v // 2 if is_heisenberg_canonical(a) else None
    return a, n_h


def resolve_metric(metric: str, n: int | None) -> PMetricSpec | None:
    if metric == "canonical":
        return None
    d = _read_json(metric)
    kind = d.get("type")
    if kind == "canonical":
        return None
    if kind != "P":
        raise ConfigError('metric JSON "type" must be "canonical" or "P"')
    if n is None:
        raise ConfigError("P metrics are defined on the Heisenberg group only")
    try:
        pm = build_P_metric(d["P_tilde"], d["lambda"])
    except KeyError as exc:
        raise ConfigError(f"metric JSON is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if pm.n != n:
        raise ConfigError(f"P_tilde has size {2 * pm.n}, expected {2 * n}")
    return pm


def integral_from_descriptor(a: Algebra2Step, d: dict) -> FirstIntegral:
    """Build one integral from a JSON descriptor such as ``{"kind": "killing_translation", "k": 1}``."""
    kind = d.get("kind")
    name = d.get("name")
    try:
        if kind == "energy":
            return Energy(a, name or "E")
        if kind == "linear":
            return LinearCentral(a, d["Z"], name)
        if kind == "quadratic":
            return Quadratic(a, d["A"], name)
        if kind == "killing_translation":
            if "k" in d:
                F = KillingTranslation.basis(a, int(d["k"]))
                return F if name is None else KillingTranslation(a, F.direction, name)
            return KillingTranslation(a, d["direction"], name)
        if kind == "killing_rotation":
            return KillingRotation(a, d["T"], name)
        if kind == "smoothed_killing":
            return SmoothedKilling(a, int(d["k"]), bool(d.get("damped", True)), name)
    except KeyError as exc:
        raise ConfigError(f"descriptor {d} is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad descriptor {d}: {exc}") from exc
    raise ConfigError(f"unknown integral kind {kind!r}")


def _named_family(name, a, n, metric, lattice) -> list[FirstIntegral]:
    if name == "basic":
        eye = np.eye(a.dim_z)
        return [Energy(a)] + [LinearCentral(a, eye[i], name=f"f_Z{i + 1}") for i in range(a.dim_z)]
    if n is None:
        raise ConfigError(f"family {name} needs the Heisenberg group (group hn)")
    if name == "quotient":
        if metric is not None:
            raise ConfigError("the quotient family uses the canonical metric")
        return quotient_family(lattice or LatticeSpec((1,) * n))
    if metric is not None:
        fams = metric.families()
        if name not in fams:
            raise ConfigError(f"family {name} is not available for P metrics (use F or Fprime)")
        return fams[name]
    return canonical_families(n)[name]


def resolve_family(choice: str, a, n, metric, lattice) -> tuple[str, list[FirstIntegral]]:
    if choice in NAMED_FAMILIES:
        return choice, _named_family(choice, a, n, metric, lattice)
    d = _read_json(choice)
    name = d.get("family")
    if "n" in d and d["n"] != n:
        raise ConfigError(f"family file is for n={d['n']}, but the group has n={n}")
    if name == "custom":
        items = d.get("custom")
        if not isinstance(items, list) or not items:
            raise ConfigError('custom family needs a non-empty "custom" list')
        return "custom", [integral_from_descriptor(a, item) for item in items]
    if name in NAMED_FAMILIES:
        return name, _named_family(name, a, n, metric, lattice)
    raise ConfigError(f"unknown family {name!r}")


def resolve(
    group: str = "hn",
    n: int | None = None,
    metric: str = "canonical",
    family: str = "G",
    lattice: str | None = None,
    seed: int = 0,
    samples: int = 1000,
    tol: float | None = None,
) -> RunConfig:
    if samples < 1:
        raise ConfigError("--samples must be positive")
    if tol is not None and not tol > 0:
        raise ConfigError("--tol must be positive")
    a, n_h = resolve_algebra(group, n)
    pm = resolve_metric(metric, n_h)
    if pm is not None:
        a = pm.algebra
    L = None
    if lattice is not None:
        L = load_lattice(lattice)
        if n_h is None or L.n != n_h:
            raise ConfigError("lattice size must match the Heisenberg group dimension")
    fam_name, fam = resolve_family(family, a, n_h, pm, L)
    return RunConfig(a, n_h, pm, fam_name, fam, L, seed, samples, tol)
