"""Lattices of H_n, their action on T H_n, and the smooth first integrals
that descend to the compact quotient.

Coordinates are interleaved: the ``x`` slots of ``v`` are the even (0-based)
indices and the ``y`` slots the odd ones.  A lattice element has
``x_i in r_i Z``, ``y_i in 2 Z`` and ``z in Z``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import heisenberg_algebra
from .errors import ConfigError
from .group import inv, mul
from .heisenberg import f_Z1
from .integrals import FirstIntegral, KillingTranslation, Quadratic, cartan_projectors
from .symplectic import TangentPair, TangentState

INT_TOL = 1e-9
ZERO_CUTOFF = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    r: tuple[int, ...]

    def __post_init__(self):
        r = tuple(self.r)
        if not r:
            raise ConfigError("r must be non-empty")
        for x in r:
            if isinstance(x, bool) or int(x) != x or x < 1:
                raise ConfigError(f"r entries must be positive integers, got {x!r}")
        r = tuple(int(x) for x in r)
        for lo, hi in zip(r, r[1:]):
            if hi % lo:
                raise ConfigError(f"divisibility chain broken: {lo} does not divide {hi}")
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return len(self.r)

    @property
    def algebra(self):
        return heisenberg_algebra(self.n)

    @property
    def periods(self) -> np.ndarray:
        """Generator spacing per coordinate: ``(r_1, 2, r_2, 2, ..., 1)``."""
        out = np.empty(2 * self.n + 1)
        out[0:-1:2] = self.r
        out[1:-1:2] = 2.0
        out[-1] = 1.0
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        if not isinstance(d, dict) or "r" not in d:
            raise ConfigError('lattice JSON needs an "r" list')
        return cls(tuple(d["r"]))

    def to_dict(self) -> dict:
        return {"r": list(self.r)}


def load_lattice(path) -> LatticeSpec:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read lattice file {path}: {exc}") from exc
    return LatticeSpec.from_dict(d)


def contains(L: LatticeSpec, q, tol: float = INT_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 2 * L.n + 1:
        raise ValueError(f"element must have {2 * L.n + 1} coordinates")
    c = q / L.periods
    ok = np.all(np.abs(c - np.round(c)) <= tol, axis=-1)
    return ok if ok.ndim else bool(ok)


def random_elements(L: LatticeSpec, count: int, seed=0, span: int = 3) -> np.ndarray:
    """``count`` lattice elements with integer generator coefficients in ``[-span, span]``."""
    rng = np.random.default_rng(seed)
    k = rng.integers(-span, span + 1, size=(count, 2 * L.n + 1))
    return k * L.periods


def act(L: LatticeSpec, q, state: TangentState) -> TangentState:
    """Left action ``(p, Y) -> (q p, Y)``."""
    if not np.all(contains(L, q)):
        raise ValueError("q is not an element of the lattice")
    return TangentState(mul(L.algebra, q, state.p), state.Y)


def commutator(L: LatticeSpec, a_el, b_el) -> np.ndarray:
    """Group commutator ``a b a^-1 b^-1``."""
    A = L.algebra
    return mul(A, mul(A, mul(A, a_el, b_el), inv(A, a_el)), inv(A, b_el))


def killing_shift(L: LatticeSpec, k: int, q, state: TangentState) -> np.ndarray:
    """``(F_k(q p, Y) - F_k(p, Y)) / f_Z1(p, Y)``; an integer for lattice ``q``."""
    F = KillingTranslation.basis(L.algebra, k)
    f = state.Y[..., -1]
    return (F.value(act(L, q, state)) - F.value(state)) / f


class SmoothedKilling(FirstIntegral):
    """``F^_k = sin(2 pi F_k / f_Z1)`` or ``F-_k = exp(-1/f_Z1^2) F^_k``.

    Both are taken to be 0 where ``|f_Z1| <= 1e-12``; only the second is
    smooth there.
    """

    kind = "smoothed_killing"

    def __init__(self, algebra, k: int, damped: bool = True, name=None):
        prefix = "Fbar" if damped else "Fhat"
        super().__init__(algebra, name or f"{prefix}_{k}")
        self.k = k
        self.damped = damped
        self.F = KillingTranslation.basis(algebra, k)

    def _parts(self, state):
        f = state.Y[..., -1]
        live = np.abs(f) > ZERO_CUTOFF
        fs = np.where(live, f, 1.0)
        ratio = self.F.value(state) / fs
        damp = np.exp(-1.0 / fs**2) if self.damped else np.ones_like(fs)
        return f, fs, live, ratio, damp

    def value(self, state):
        _, _, live, ratio, damp = self._parts(state)
        return np.where(live, damp * np.sin(2 * np.pi * ratio), 0.0)

    def grad(self, state):
        f, fs, live, ratio, damp = self._parts(state)
        a = self.algebra
        gFU, gFV = self.F.grad(state)
        e_z = a.vec(z=[1.0])
        # d(ratio) = dF / f - F df / f^2, with df = (0, Z_1)
        dRU = gFU / fs[..., None]
        dRV = gFV / fs[..., None] - (ratio / fs)[..., None] * e_z
        s, c = np.sin(2 * np.pi * ratio), np.cos(2 * np.pi * ratio)
        coef = (damp * 2 * np.pi * c)[..., None]
        U = coef * dRU
        V = coef * dRV
        if self.damped:
            V = V + (damp * s * 2.0 / fs**3)[..., None] * e_z
        mask = live[..., None]
        return TangentPair(np.where(mask, U, 0.0), np.where(mask, V, 0.0))


def smoothed_integral(L: LatticeSpec, k: int, state: TangentState, damped: bool = True) -> np.ndarray:
    return SmoothedKilling(L.algebra, k, damped).value(state)


def quotient_family(L: LatticeSpec, variant: str = "F") -> list[FirstIntegral]:
    """``{f_Z1, g_Ai, F-_(2k-1)}`` (``variant="F"``) or with ``F-_2k`` (``"Fprime"``)."""
    if variant not in ("F", "Fprime"):
        raise ValueError("variant must be 'F' or 'Fprime'")
    a = L.algebra
    offset = 1 if variant == "F" else 2
    quad = [Quadratic(a, A, name=f"g_A{i + 1}") for i, A in enumerate(cartan_projectors(L.n))]
    smooth = [SmoothedKilling(a, 2 * k + offset) for k in range(L.n)]
    return [f_Z1(a)] + quad + smooth
