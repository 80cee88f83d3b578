"""Symplectic structure of TN = N x n in left-trivialized coordinates.

A tangent vector at ``(p, Y)`` is a pair ``(U, V)`` of algebra vectors: ``U``
is a left-invariant direction on N and ``V`` a constant direction in the
fiber.  Gradients are taken with respect to the product metric built from
the algebra's metric, so for a non-orthonormal metric ``G`` the gradient is
``G^-1`` times the coordinate differential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .algebra import Algebra2Step, ad_transpose, bracket, j_apply
from .errors import NumericError
from .group import mul


@dataclass(frozen=True)
class TangentState:
    """A point ``(p, Y)`` of TN; ``p`` and ``Y`` may carry matching batch axes.

    Group elements are stored in exponential coordinates, so ``W = log p`` is
    ``p`` itself.
    """

    p: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if p.shape[-1:] != Y.shape[-1:]:
            raise ValueError(f"p and Y have mismatched dimensions {p.shape} / {Y.shape}")
        p, Y = np.broadcast_arrays(p, Y)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Y", Y)

    @property
    def W(self) -> np.ndarray:
        return self.p

    @property
    def batch_shape(self) -> tuple:
        return self.p.shape[:-1]

    def __len__(self):
        return self.batch_shape[0] if self.batch_shape else 1

    def __getitem__(self, idx) -> "TangentState":
        if not self.batch_shape:
            raise IndexError("unbatched state")
        return TangentState(self.p[idx], self.Y[idx])


class TangentPair(NamedTuple):
    U: np.ndarray
    V: np.ndarray


def omega(a: Algebra2Step, state: TangentState, xi, eta) -> np.ndarray:
    """``<U, V'> - <V, U'> + <Y, [U, U']>``."""
    U, V = xi
    U2, V2 = eta
    return a.inner(U, V2) - a.inner(V, U2) + a.inner(state.Y, bracket(a, U, U2))


def omega_matrix(a: Algebra2Step, state: TangentState) -> np.ndarray:
    """Matrix of Omega in the basis ``(e_i, 0), (0, e_i)``."""
    d = a.dim
    basis = np.eye(2 * d)
    xi = TangentPair(basis[:, None, :d], basis[:, None, d:])
    eta = TangentPair(basis[None, :, :d], basis[None, :, d:])
    Y = np.asarray(state.Y)[..., None, None, :]
    return omega(a, TangentState(np.zeros_like(Y), Y), xi, eta)


def grad_to_hamiltonian(a: Algebra2Step, Y, grad) -> TangentPair:
    """Hamiltonian field ``X_f = (V, ad^t(V) Y - U)`` for ``grad f = (U, V)``."""
    U, V = grad
    return TangentPair(a.check(V).copy(), ad_transpose(a, V, Y) - U)


def poisson(a: Algebra2Step, state: TangentState, grad_f, grad_g) -> np.ndarray:
    """``{f, g} = <V', U> - <V, U'> - <Y, [V, V']>``."""
    U, V = grad_f
    U2, V2 = grad_g
    return a.inner(V2, U) - a.inner(V, U2) - a.inner(state.Y, bracket(a, V, V2))


def poisson_j_form(a: Algebra2Step, state: TangentState, grad_f, grad_g) -> np.ndarray:
    """The same bracket written with the j-map: ``<V', U> - <V, U'> + <j(Y_z) V'_v, V_v>``."""
    U, V = grad_f
    U2, V2 = grad_g
    _, Yz = a.split(state.Y)
    Vv, _ = a.split(V)
    V2v, _ = a.split(V2)
    return a.inner(V2, U) - a.inner(V, U2) + a.inner_v(j_apply(a, Yz, V2v), Vv)


def first_integral_residual(a: Algebra2Step, state: TangentState, grad) -> np.ndarray:
    """``<Y, U> - <Y, [V, Y]>``; vanishes identically iff f is a first integral."""
    U, V = grad
    Y = state.Y
    return a.inner(Y, U) - a.inner(Y, bracket(a, V, Y))


def numeric_gradient(
    f: Callable[[TangentState], np.ndarray],
    a: Algebra2Step,
    state: TangentState,
    step: float = 1e-5,
) -> TangentPair:
    """Central-difference gradient along ``c(t) = (p exp(tU), Y + tV)``.

    The step along each coordinate is ``step * (1 + |coordinate|)``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    p, Y = state.p, state.Y
    d = a.dim
    dU = np.zeros(p.shape)
    dV = np.zeros(Y.shape)
    for i in range(d):
        e = a.basis(i)
        h = step * (1.0 + np.abs(p[..., i]))
        hp = h[..., None] * e
        plus = f(TangentState(mul(a, p, hp), Y))
        minus = f(TangentState(mul(a, p, -hp), Y))
        dU[..., i] = (plus - minus) / (2 * h)
        h = step * (1.0 + np.abs(Y[..., i]))
        hv = h[..., None] * e
        plus = f(TangentState(p, Y + hv))
        minus = f(TangentState(p, Y - hv))
        dV[..., i] = (plus - minus) / (2 * h)
    if not (np.all(np.isfinite(dU)) and np.all(np.isfinite(dV))):
        raise NumericError("non-finite value while differentiating")
    G_inv = a.metric_inv
    return TangentPair(dU @ G_inv.T, dV @ G_inv.T)


def directional_derivative(f, a: Algebra2Step, state: TangentState, direction, step: float = 1e-5):
    """``df(U, V)`` by central differences along ``(p exp(tU), Y + tV)``."""
    U, V = direction
    plus = f(TangentState(mul(a, state.p, step * np.asarray(U)), state.Y + step * np.asarray(V)))
    minus = f(TangentState(mul(a, state.p, -step * np.asarray(U)), state.Y - step * np.asarray(V)))
    return (plus - minus) / (2 * step)
