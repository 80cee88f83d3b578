"""Certification suites producing machine-readable reports.

Every suite returns a plain dict with ``schema``, ``check``, ``samples``,
``max_abs_residual``, ``failures`` (state dumps) and ``passed``.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Sequence

import numpy as np

from .algebra import Algebra2Step, is_heisenberg_canonical
from .flow import rank_check
from .heisenberg import f_Z1
from .integrals import (
    FirstIntegral,
    IsometryAlgebraElement,
    KillingRotation,
    KillingTranslation,
    butler_predicate,
    isometry_bracket,
    isotropy_basis,
    killing_to_integral,
)
from .lattice import LatticeSpec, act, killing_shift, quotient_family, random_elements
from .symplectic import TangentState, first_integral_residual, poisson

SCHEMA = 1
MAX_DUMPS = 10

DEFAULT_TOL = {
    "involution": 1e-10,
    "integrals": 1e-10,
    "rank": 0.99,
    "quotient": 1e-9,
    "isomorphism": 1e-10,
}


def _report(check: str, samples: int, residual: float, failures: list, passed: bool, **extra) -> dict:
    out = {
        "schema": SCHEMA,
        "check": check,
        "samples": int(samples),
        "max_abs_residual": float(residual),
        "failures": failures[:MAX_DUMPS],
        "passed": bool(passed),
    }
    out.update(extra)
    return out


def _dump(states: TangentState, idx: int, residual: float, **labels) -> dict:
    d = {"index": int(idx), "p": states.p[idx].tolist(), "Y": states.Y[idx].tolist(), "residual": float(residual)}
    d.update(labels)
    return d


def _collect(states, residuals, tol, **labels) -> list:
    bad = np.flatnonzero(~(np.abs(residuals) <= tol))
    return [_dump(states, i, residuals[i], **labels) for i in bad[:MAX_DUMPS]]


def check_integrals(family: Sequence[FirstIntegral], states: TangentState, tol: float) -> dict:
    """First-integral residual of every member at every state."""
    a = family[0].algebra
    worst, failures, per = 0.0, [], {}
    for f in family:
        r = first_integral_residual(a, states, f.grad(states))
        per[f.name] = float(np.abs(r).max())
        worst = max(worst, per[f.name])
        failures += _collect(states, r, tol, integral=f.name)
    return _report("integrals", len(states), worst, failures, worst <= tol, per_integral=per)


def check_involution(family: Sequence[FirstIntegral], states: TangentState, tol: float) -> dict:
    """All pairwise Poisson brackets within the family."""
    a = family[0].algebra
    grads = [f.grad(states) for f in family]
    worst, failures, per = 0.0, [], {}
    for i, j in itertools.combinations(range(len(family)), 2):
        r = poisson(a, states, grads[i], grads[j])
        key = f"{{{family[i].name},{family[j].name}}}"
        per[key] = float(np.abs(r).max())
        worst = max(worst, per[key])
        failures += _collect(states, r, tol, pair=key)
    return _report("involution", len(states), worst, failures, worst <= tol, per_pair=per)


def check_rank(family: Sequence[FirstIntegral], states: TangentState, min_fraction: float = 0.99) -> dict:
    res = rank_check(family, states=states)
    bad = np.flatnonzero(res.ranks < len(family))
    failures = [_dump(states, i, float(len(family) - res.ranks[i]), rank=int(res.ranks[i])) for i in bad[:MAX_DUMPS]]
    return _report(
        "rank",
        len(states),
        float(len(family) - res.min_rank),
        failures,
        res.fraction_full_rank >= min_fraction,
        expected_rank=len(family),
        min_rank=res.min_rank,
        fraction_full_rank=res.fraction_full_rank,
    )


def check_butler(a: Algebra2Step, samples: int, seed: int) -> dict:
    """Passes when no Butler obstruction is detected."""
    res = butler_predicate(a, samples=samples, seed=seed)
    return _report(
        "butler",
        samples,
        0.0,
        [],
        not res.non_integrable,
        non_integrable=res.non_integrable,
        min_annihilator_dim=res.min_dim,
        obstructed_fraction=res.fraction,
    )


def check_quotient(
    L: LatticeSpec,
    states: TangentState,
    lattice_count: int,
    seed: int,
    tol: float,
    variant: str = "F",
) -> dict:
    """Lattice invariance, integer shifts and involution of the quotient family."""
    fam = quotient_family(L, variant)
    qs = random_elements(L, lattice_count, seed)
    inv_res = np.zeros(len(states))
    shift_res = np.zeros(len(states))
    for q in qs:
        moved = act(L, q, states)
        for f in fam:
            inv_res = np.maximum(inv_res, np.abs(f.value(moved) - f.value(states)))
        for k in range(1, 2 * L.n + 1):
            m = killing_shift(L, k, q, states)
            shift_res = np.maximum(shift_res, np.abs(m - np.round(m)))
    invol = check_involution(fam, states, tol)
    failures = _collect(states, inv_res, tol, test="invariance") + _collect(states, shift_res, tol, test="integer_shift")
    failures += invol["failures"]
    worst = max(float(inv_res.max()), float(shift_res.max()), invol["max_abs_residual"])
    return _report(
        "quotient",
        len(states),
        worst,
        failures,
        worst <= tol,
        lattice=L.to_dict(),
        lattice_elements=lattice_count,
        invariance=float(inv_res.max()),
        integer_shift=float(shift_res.max()),
        involution=invol["max_abs_residual"],
    )


def killing_functions(a: Algebra2Step) -> list[FirstIntegral]:
    """``F_T`` over a basis of the isotropy algebra, then ``F_1..F_2n`` and ``f_Z1``."""
    J = a.j_mats[0]
    rots = [KillingRotation(a, B, name=f"F_T{i + 1}") for i, B in enumerate(isotropy_basis(J))]
    trans = [KillingTranslation.basis(a, k) for k in range(1, a.dim_v + 1)]
    return rots + trans + [f_Z1(a)]


def _random_isometry_element(a: Algebra2Step, basis, rng) -> IsometryAlgebraElement:
    T = np.einsum("k,kab->ab", rng.normal(size=len(basis)), np.array(basis))
    return IsometryAlgebraElement(T, rng.normal(size=a.dim))


def check_isomorphism(a: Algebra2Step, states: TangentState, seed: int, tol: float, pairs: int = 20) -> dict:
    """Killing fields to first integrals: injectivity and bracket homomorphism.

    Injectivity is certified by the rank of the evaluation matrix of a basis
    image at the probe states; the homomorphism property by comparing
    ``{f_xi, f_eta}`` with ``f_[xi, eta]`` for random pairs.
    """
    if not is_heisenberg_canonical(a):
        raise ValueError("the isomorphism suite needs the canonical Heisenberg algebra")
    funcs = killing_functions(a)
    M = np.stack([f.value(states) for f in funcs])
    s = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    basis = isotropy_basis(a.j_mats[0])
    rng = np.random.default_rng(seed)
    worst, failures = 0.0, []
    for _ in range(pairs):
        xi = _random_isometry_element(a, basis, rng)
        eta = _random_isometry_element(a, basis, rng)
        f, g = killing_to_integral(a, xi), killing_to_integral(a, eta)
        h = killing_to_integral(a, isometry_bracket(a, xi, eta))
        r = poisson(a, states, f.grad(states), g.grad(states)) - h.value(states)
        worst = max(worst, float(np.abs(r).max()))
        failures += _collect(states, r, tol, test="homomorphism")
    expected = len(funcs)
    return _report(
        "isomorphism",
        len(states),
        worst,
        failures,
        rank == expected and worst <= tol,
        rank=rank,
        expected_rank=expected,
        isotropy_dim=len(basis),
    )


def check_conservation(drifts: dict, tol: float, samples: int = 1) -> dict:
    worst = max(drifts.values()) if drifts else 0.0
    failures = [{"integral": k, "residual": v} for k, v in drifts.items() if not v <= tol]
    return _report("conservation", samples, worst, failures, worst <= tol, drift=drifts)


# -- JSON output --------------------------------------------------------------


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_emit(str(k), indent, level + 1)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq):
            return "[" + ", ".join(_emit(x, indent, level + 1) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + _emit(x, indent, level + 1) for x in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _emit(obj, indent, 0) + "\n"
