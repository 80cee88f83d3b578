"""First integrals of the geodesic flow, their exact gradients, and the
algebraic criteria for integrability and involution.

Every integral is bound to an :class:`~nilflow.algebra.Algebra2Step` and
evaluates on (possibly batched) :class:`~nilflow.symplectic.TangentState`
objects.  ``grad`` always means the gradient for the algebra's own metric.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .algebra import (
    RANK_TOL,
    Algebra2Step,
    _null_space,
    bracket,
    is_heisenberg_canonical,
    j_apply,
    j_of,
)
from .symplectic import TangentPair, TangentState, numeric_gradient, poisson

COMMUTE_TOL = 1e-10
STRUCT_TOL = 1e-12


def _scale(*mats) -> float:
    return max([1.0] + [float(np.abs(m).max(initial=0.0)) for m in mats])


class FirstIntegral(abc.ABC):
    """A function on TN, intended (but not assumed) to be a first integral."""

    kind = "custom"

    def __init__(self, algebra: Algebra2Step, name: str | None = None):
        self.algebra = algebra
        self.name = name or self.kind

    @abc.abstractmethod
    def value(self, state: TangentState) -> np.ndarray: ...

    def grad(self, state: TangentState) -> TangentPair:
        return self.numeric_grad(state)

    def numeric_grad(self, state: TangentState, step: float = 1e-5) -> TangentPair:
        return numeric_gradient(self.value, self.algebra, state, step)

    @property
    def metric_tag(self) -> str:
        return "standard" if self.algebra.is_standard_metric() else "P"

    def __call__(self, state: TangentState) -> np.ndarray:
        return self.value(state)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _zeros_like_state(a: Algebra2Step, state: TangentState) -> np.ndarray:
    return np.zeros(state.batch_shape + (a.dim,))


class Energy(FirstIntegral):
    kind = "energy"

    def __init__(self, algebra, name="E"):
        super().__init__(algebra, name)

    def value(self, state):
        return 0.5 * self.algebra.inner(state.Y, state.Y)

    def grad(self, state):
        return TangentPair(_zeros_like_state(self.algebra, state), state.Y.copy())


class LinearCentral(FirstIntegral):
    """``f_Z0(p, Y) = <Y, Z0>`` for a central direction ``Z0``."""

    kind = "linear"

    def __init__(self, algebra, Z0, name=None):
        Z0 = np.asarray(Z0, dtype=float)
        if Z0.shape != (algebra.dim_z,):
            raise ValueError(f"Z0 must have length {algebra.dim_z}")
        super().__init__(algebra, name or "f_Z")
        self.Z0 = Z0
        self._vec = algebra.vec(z=Z0)

    def value(self, state):
        return self.algebra.inner(state.Y, self._vec)

    def grad(self, state):
        zero = _zeros_like_state(self.algebra, state)
        return TangentPair(zero, zero + self._vec)


class Quadratic(FirstIntegral):
    """``g_A(p, Y) = <Y, A Y> / 2`` for a metric-symmetric ``A`` killing ``z``."""

    kind = "quadratic"

    def __init__(self, algebra, A, name=None):
        A = embed_v_operator(algebra, A)
        GA = algebra.metric @ A
        if np.abs(GA - GA.T).max() > STRUCT_TOL * _scale(GA):
            raise ValueError("A is not symmetric for the algebra metric")
        super().__init__(algebra, name or "g_A")
        self.A = A

    def value(self, state):
        return 0.5 * self.algebra.inner(state.Y, state.Y @ self.A.T)

    def grad(self, state):
        return TangentPair(_zeros_like_state(self.algebra, state), state.Y @ self.A.T)


class KillingTranslation(FirstIntegral):
    """Integral of the right-invariant Killing field generated by ``direction``.

    ``F(p, Y) = <Y, U> - <j(Y_z) W_v, U_v>`` with ``U = direction``, which for
    ``H_n`` and ``U = X_k`` is ``F_k``.
    """

    kind = "killing_translation"

    def __init__(self, algebra, direction, name=None):
        super().__init__(algebra, name or "F_U")
        self.direction = algebra.check(direction).copy()

    @classmethod
    def basis(cls, algebra, k: int) -> "KillingTranslation":
        """``F_k`` for the k-th (1-based) basis vector of ``v``."""
        if not 1 <= k <= algebra.dim_v:
            raise ValueError(f"k must be in 1..{algebra.dim_v}")
        return cls(algebra, algebra.basis(k - 1), name=f"F_{k}")

    def value(self, state):
        a = self.algebra
        Wv, _ = a.split(state.W)
        _, Yz = a.split(state.Y)
        Uv, _ = a.split(self.direction)
        return a.inner(state.Y, self.direction) - a.inner_v(j_apply(a, Yz, Wv), Uv)

    def grad(self, state):
        a = self.algebra
        _, Yz = a.split(state.Y)
        Uv, _ = a.split(self.direction)
        jU = j_apply(a, Yz, Uv)
        gU = a.join(jU, np.zeros(jU.shape[:-1] + (a.dim_z,)))
        gV = self.direction - bracket(a, state.W, self.direction)
        return TangentPair(gU, gV)


class KillingRotation(FirstIntegral):
    """``F_T(p, Y) = <T W_v, Y_v> - <A W_v, W_v> <Z_1, Y> / 2`` with ``T = J A``.

    Defined for the canonical Heisenberg algebra; ``T`` must be skew and
    commute with ``J``.
    """

    kind = "killing_rotation"

    def __init__(self, algebra, T, name=None):
        if not is_heisenberg_canonical(algebra):
            raise ValueError("rotation integrals need the canonical Heisenberg algebra")
        J = algebra.j_mats[0]
        T = np.asarray(T, dtype=float)
        if T.shape != J.shape:
            raise ValueError(f"T must be {J.shape}")
        tol = STRUCT_TOL * _scale(T)
        if np.abs(T + T.T).max() > tol or np.abs(J @ T - T @ J).max() > tol:
            raise ValueError("T must be skew-symmetric and commute with J")
        super().__init__(algebra, name or "F_T")
        self.T = T
        self.A = psi_inverse(T, J)

    def value(self, state):
        a = self.algebra
        Wv, _ = a.split(state.W)
        Yv, Yz = a.split(state.Y)
        TW = Wv @ self.T.T
        AW = Wv @ self.A.T
        return np.sum(TW * Yv, axis=-1) - 0.5 * np.sum(AW * Wv, axis=-1) * Yz[..., 0]

    def grad(self, state):
        a = self.algebra
        Wv, _ = a.split(state.W)
        Yv, Yz = a.split(state.Y)
        AW = Wv @ self.A.T
        gU = -Yz * AW - Yv @ self.T.T
        gV_z = -0.5 * np.sum(AW * Wv, axis=-1, keepdims=True)
        return TangentPair(
            a.join(gU, np.zeros(gU.shape[:-1] + (1,))),
            a.join(Wv @ self.T.T, gV_z),
        )


class LinearCombination(FirstIntegral):
    kind = "combination"

    def __init__(self, algebra, terms: Sequence[tuple[float, FirstIntegral]], name=None):
        super().__init__(algebra, name or "sum")
        self.terms = [(float(c), f) for c, f in terms]

    def value(self, state):
        out = np.zeros(state.batch_shape)
        for c, f in self.terms:
            out = out + c * f.value(state)
        return out

    def grad(self, state):
        U = _zeros_like_state(self.algebra, state)
        V = U.copy()
        for c, f in self.terms:
            gU, gV = f.grad(state)
            U = U + c * gU
            V = V + c * gV
        return TangentPair(U, V)


class Custom(FirstIntegral):
    """Wraps an arbitrary evaluator; gradients are numeric unless supplied."""

    def __init__(self, algebra, fn: Callable, grad_fn: Callable | None = None, name=None):
        super().__init__(algebra, name or "custom")
        self._fn = fn
        self._grad_fn = grad_fn

    def value(self, state):
        return np.asarray(self._fn(state), dtype=float)

    def grad(self, state):
        if self._grad_fn is None:
            return self.numeric_grad(state)
        U, V = self._grad_fn(state)
        return TangentPair(np.asarray(U), np.asarray(V))


def poisson_of(f: FirstIntegral, g: FirstIntegral) -> Custom:
    """The function ``{f, g}`` built from the exact gradients of ``f`` and ``g``."""
    a = f.algebra

    def fn(state):
        return poisson(a, state, f.grad(state), g.grad(state))

    return Custom(a, fn, name=f"{{{f.name},{g.name}}}")


def position_probe(algebra, index: int = 0) -> Custom:
    """``<W_v, X_(index+1)>``: a coordinate function, not a first integral."""
    return Custom(algebra, lambda s: s.W[..., index], name=f"W_{index + 1}")


# -- operators --------------------------------------------------------------


def embed_v_operator(a: Algebra2Step, A) -> np.ndarray:
    """Extend an operator on ``v`` by zero on ``z`` (full-size input is validated)."""
    A = np.asarray(A, dtype=float)
    if A.shape == (a.dim_v, a.dim_v):
        out = np.zeros((a.dim, a.dim))
        out[: a.dim_v, : a.dim_v] = A
        return out
    if A.shape == (a.dim, a.dim):
        if np.abs(A[:, a.dim_v :]).max() > STRUCT_TOL or np.abs(A[a.dim_v :, :]).max() > STRUCT_TOL:
            raise ValueError("operator must vanish on z and take values in v")
        return A.copy()
    raise ValueError(f"operator has shape {A.shape}, expected {a.dim_v} or {a.dim} square")


def _v_block(a: Algebra2Step, A) -> np.ndarray:
    return embed_v_operator(a, A)[: a.dim_v, : a.dim_v]


def _check_symmetric(a: Algebra2Step, A: np.ndarray) -> None:
    GA = a.metric[: a.dim_v, : a.dim_v] @ A
    if np.abs(GA - GA.T).max() > STRUCT_TOL * _scale(GA):
        raise ValueError("operator is not symmetric for the algebra metric")


def quadratic_is_integral(a: Algebra2Step, A, tol: float = COMMUTE_TOL) -> bool:
    """``g_A`` is a first integral iff ``[j(Z_i), A] = 0`` for every basis ``Z_i``."""
    A = _v_block(a, A)
    _check_symmetric(a, A)
    return all(np.linalg.norm(j @ A - A @ j) <= tol for j in a.j_mats)


def quadratic_pair_commutes(a: Algebra2Step, A, B, tol: float = COMMUTE_TOL) -> bool:
    """For quadratic integrals, ``{g_A, g_B} = 0`` iff ``j(Z_i) (AB - BA) = 0``."""
    A, B = _v_block(a, A), _v_block(a, B)
    if not (quadratic_is_integral(a, A) and quadratic_is_integral(a, B)):
        raise ValueError("both operators must define first integrals")
    C = A @ B - B @ A
    return all(np.linalg.norm(j @ C) <= tol for j in a.j_mats)


def psi(A, J) -> np.ndarray:
    """``A -> J A``: symmetric operators commuting with J to the isotropy algebra."""
    A, J = np.asarray(A, dtype=float), np.asarray(J, dtype=float)
    tol = STRUCT_TOL * _scale(A)
    if np.abs(A - A.T).max() > tol or np.abs(J @ A - A @ J).max() > tol:
        raise ValueError("A must be symmetric and commute with J")
    return J @ A


def psi_inverse(B, J) -> np.ndarray:
    """Inverse of :func:`psi`, ``B -> -J B`` (uses ``J^2 = -1``)."""
    B, J = np.asarray(B, dtype=float), np.asarray(J, dtype=float)
    tol = STRUCT_TOL * _scale(B)
    if np.abs(B + B.T).max() > tol or np.abs(J @ B - B @ J).max() > tol:
        raise ValueError("B must be skew-symmetric and commute with J")
    return -J @ B


def isotropy_basis(J) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of ``k = {B skew : [J, B] = 0}``."""
    J = np.asarray(J, dtype=float)
    m = J.shape[0]
    skew = []
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m))
            E[i, j], E[j, i] = 1.0, -1.0
            skew.append(E)
    M = np.stack([(J @ E - E @ J).ravel() for E in skew], axis=1)
    coeffs = _null_space(M)
    out = []
    for c in coeffs.T:
        B = np.einsum("k,kab->ab", c, np.array(skew))
        out.append(B / np.linalg.norm(B))
    return out


def cartan_projectors(n: int) -> list[np.ndarray]:
    """``A_i`` = orthogonal projection onto span{X_(2i-1), X_(2i)}."""
    out = []
    for i in range(n):
        A = np.zeros((2 * n, 2 * n))
        A[2 * i, 2 * i] = A[2 * i + 1, 2 * i + 1] = 1.0
        out.append(A)
    return out


# -- isometry algebra -------------------------------------------------------


@dataclass(frozen=True)
class IsometryAlgebraElement:
    """``T + U`` in ``k (+) h_n``: an isotropy part and a translation part."""

    T: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        U = np.asarray(self.translation, dtype=float)
        if U.shape != (T.shape[0] + 1,):
            raise ValueError("translation must be a vector of h_n")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "translation", U)


def isometry_bracket(a: Algebra2Step, xi: IsometryAlgebraElement, eta: IsometryAlgebraElement):
    """Bracket of ``k ⋉ h_n``: ``([T, T'], T U'_v - T' U_v + [U, U'])``."""
    m = a.dim_v
    U, U2 = xi.translation, eta.translation
    trans = np.zeros(a.dim)
    trans[:m] = xi.T @ U2[:m] - eta.T @ U[:m]
    trans = trans + bracket(a, U, U2)
    return IsometryAlgebraElement(xi.T @ eta.T - eta.T @ xi.T, trans)


def killing_to_integral(a: Algebra2Step, element: IsometryAlgebraElement) -> LinearCombination:
    """``f_X* = F_T + sum_k s_k F_k + z f_Z1`` for ``X* = X_T* + X_U*``."""
    terms = []
    if np.any(element.T):
        terms.append((1.0, KillingRotation(a, element.T)))
    terms.append((1.0, KillingTranslation(a, element.translation)))
    return LinearCombination(a, terms, name="f_X*")


# -- Butler non-integrability ----------------------------------------------


def butler_annihilator(a: Algebra2Step, lam) -> np.ndarray:
    """Basis (columns) of ``n_lambda = ker j(Z) (+) z`` for ``lambda = <V + Z, .>``."""
    _, Z = a.split(lam)
    jZ = j_of(a, Z)
    ker = _null_space(jZ) if np.any(jZ) else np.eye(a.dim_v)
    B = np.zeros((a.dim, ker.shape[1] + a.dim_z))
    B[: a.dim_v, : ker.shape[1]] = ker
    B[a.dim_v :, ker.shape[1] :] = np.eye(a.dim_z)
    return B


def bracket_span_dim(a: Algebra2Step, B1: np.ndarray, B2: np.ndarray) -> int:
    """Dimension of ``[span B1, span B2]``."""
    vecs = bracket(a, B1.T[:, None, :], B2.T[None, :, :]).reshape(-1, a.dim)
    if vecs.size == 0:
        return 0
    s = np.linalg.svd(vecs, compute_uv=False)
    scale = max(1.0, float(np.abs(a.j_mats).max()))
    return int(np.sum(s > RANK_TOL * scale))


class ButlerResult(NamedTuple):
    non_integrable: bool
    min_dim: int
    fraction: float
    pairs: int


def butler_predicate(a: Algebra2Step, samples: int = 200, seed=0, threshold: float = 0.95) -> ButlerResult:
    """Sampled test of Butler's non-integrability condition.

    Regularity uses the minimum annihilator dimension seen over the sample.
    The algebra is reported non-integrable when at least ``threshold`` of the
    sampled pairs are both regular with ``dim [n_lambda, n_mu] > 0``.
    """
    rng = np.random.default_rng(seed)
    lams = rng.normal(size=(samples, a.dim))
    mus = rng.normal(size=(samples, a.dim))
    ann_l = [butler_annihilator(a, x) for x in lams]
    ann_m = [butler_annihilator(a, x) for x in mus]
    min_dim = min(B.shape[1] for B in ann_l + ann_m)
    good = 0
    for B1, B2 in zip(ann_l, ann_m):
        if B1.shape[1] == min_dim and B2.shape[1] == min_dim and bracket_span_dim(a, B1, B2) > 0:
            good += 1
    frac = good / samples
    return ButlerResult(frac >= threshold, min_dim, frac, samples)
