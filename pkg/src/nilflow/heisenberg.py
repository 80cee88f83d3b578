"""Heisenberg group models: the canonical integrable families and general
left-invariant metrics ``<X, Y>_P = <P X, Y>`` with ``P = diag(P~, lambda)``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Algebra2Step, heisenberg_algebra, standard_J
from .errors import ConfigError
from .integrals import (
    Energy,
    FirstIntegral,
    KillingRotation,
    KillingTranslation,
    LinearCentral,
    Quadratic,
    cartan_projectors,
)

FAMILIES = ("G", "F", "Fprime")


def f_Z1(a: Algebra2Step) -> LinearCentral:
    return LinearCentral(a, [1.0], name="f_Z1")


def canonical_families(n: int, torus: list[np.ndarray] | None = None) -> dict[str, list[FirstIntegral]]:
    """The three commuting families of ``2n + 1`` integrals on ``T H_n``.

    ``G = {E, g_Ai, F_Ti}``, ``F = {f_Z1, g_Ai, F_(2k-1)}``, ``F' = {f_Z1, g_Ai, F_2k}``.
    ``torus`` replaces the default Cartan projectors ``A_i`` (it must be a
    commuting set of symmetric maps commuting with ``J``).
    """
    a = heisenberg_algebra(n)
    J = a.j_mats[0]
    As = cartan_projectors(n) if torus is None else [np.asarray(A, dtype=float) for A in torus]
    if len(As) != n:
        raise ConfigError(f"torus must contain {n} operators")
    quad = [Quadratic(a, A, name=f"g_A{i + 1}") for i, A in enumerate(As)]
    rot = [KillingRotation(a, J @ A, name=f"F_T{i + 1}") for i, A in enumerate(As)]
    odd = [KillingTranslation.basis(a, 2 * k + 1) for k in range(n)]
    even = [KillingTranslation.basis(a, 2 * k + 2) for k in range(n)]
    return {
        "G": [Energy(a)] + quad + rot,
        "F": [f_Z1(a)] + quad + odd,
        "Fprime": [f_Z1(a)] + quad + even,
    }


def random_j_invariant_spd(n: int, rng, low: float = 0.5, high: float = 3.0) -> np.ndarray:
    """Random symmetric positive-definite ``P~`` commuting with ``J``.

    Built as ``Q diag(d_1, d_1, ..., d_n, d_n) Q^T`` with ``Q`` a random
    unitary matrix in its real form, so every eigenspace is J-invariant.
    """
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    real = np.zeros((2 * n, 2 * n))
    # a + ib acting on C^n in the interleaved basis
    real[0::2, 0::2] = Q.real
    real[1::2, 1::2] = Q.real
    real[0::2, 1::2] = -Q.imag
    real[1::2, 0::2] = Q.imag
    d = np.repeat(rng.uniform(low, high, size=n), 2)
    P = real @ np.diag(d) @ real.T
    return 0.5 * (P + P.T)


def _j_closed_basis(E: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(E) ordered as w_1, J w_1, w_2, J w_2, ..."""
    chosen: list[np.ndarray] = []
    for w in E.T:
        for c in chosen:
            w = w - (c @ w) * c
        norm = np.linalg.norm(w)
        if norm < 1e-8:
            continue
        w = w / norm
        Jw = J @ w
        chosen.extend([w, Jw])
        if len(chosen) == E.shape[1]:
            break
    return np.array(chosen).T


@dataclass(frozen=True, eq=False)
class PMetricSpec:
    """A left-invariant metric on ``H_n`` with its adapted data.

    ``eigvecs[:, k]`` is ``U_(k+1)``; ``U_2i = J U_(2i-1)`` and
    ``P~ U_k = eigvals[k] U_k``.
    """

    P_tilde: np.ndarray
    lam: float
    algebra: Algebra2Step = field(repr=False)
    eigvals: np.ndarray | None = field(repr=False)
    eigvecs: np.ndarray | None = field(repr=False)
    pairing_error: str | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.P_tilde.shape[0] // 2

    @property
    def P(self) -> np.ndarray:
        return self.algebra.metric

    @property
    def j_P(self) -> np.ndarray:
        return self.algebra.j_mats[0]

    @property
    def pairable(self) -> bool:
        return self.pairing_error is None

    def _require_pairing(self) -> None:
        if self.pairing_error is not None:
            raise ConfigError(self.pairing_error)

    def A_tilde(self, i: int) -> np.ndarray:
        """Projector (1-based ``i``) onto span{U_(2i-1), U_2i}."""
        self._require_pairing()
        U = self.eigvecs[:, 2 * i - 2 : 2 * i]
        return U @ U.T

    def quadratic(self, i: int) -> Quadratic:
        return Quadratic(self.algebra, self.A_tilde(i), name=f"g_A~{i}")

    def killing(self, k: int) -> KillingTranslation:
        """``F~_k(p, Y) = <Y, U_k>_P - <j_P(Y_z) W_v, U_k>_P``."""
        self._require_pairing()
        U = self.algebra.vec(v=self.eigvecs[:, k - 1])
        return KillingTranslation(self.algebra, U, name=f"F~_{k}")

    def families(self) -> dict[str, list[FirstIntegral]]:
        self._require_pairing()
        a = self.algebra
        quad = [self.quadratic(i + 1) for i in range(self.n)]
        return {
            "F": [f_Z1(a)] + quad + [self.killing(2 * k + 1) for k in range(self.n)],
            "Fprime": [f_Z1(a)] + quad + [self.killing(2 * k + 2) for k in range(self.n)],
        }


def build_P_metric(P_tilde, lam: float, eig_tol: float = 1e-9) -> PMetricSpec:
    """Assemble the metric ``diag(P~, lambda)`` and its adapted eigenbasis.

    The metric and ``j_P`` exist for any positive-definite ``P~``.  The
    eigenbasis with ``U_2i = J U_(2i-1)`` exists only when every eigenspace of
    ``P~`` is J-invariant; otherwise the operators that need it (``A_tilde``,
    ``killing``, ``families``) raise :class:`ConfigError`.
    """
    P_tilde = np.asarray(P_tilde, dtype=float)
    if P_tilde.ndim != 2 or P_tilde.shape[0] != P_tilde.shape[1] or P_tilde.shape[0] % 2:
        raise ConfigError("P_tilde must be a square matrix of even size")
    if not np.allclose(P_tilde, P_tilde.T, rtol=0, atol=1e-12 * max(1.0, np.abs(P_tilde).max())):
        raise ConfigError("P_tilde must be symmetric")
    lam = float(lam)
    if not lam > 0:
        raise ConfigError("lambda must be positive")
    n = P_tilde.shape[0] // 2
    w, V = np.linalg.eigh(P_tilde)
    if w.min() <= 0:
        raise ConfigError("P_tilde must be positive definite")
    J = standard_J(n)

    # cluster eigenvalues, then pick a J-closed orthonormal basis per eigenspace
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > eig_tol * max(1.0, abs(w[k])):
            groups.append((start, k))
            start = k
    vals, vecs, error = [], [], None
    for lo, hi in groups:
        E = V[:, lo:hi]
        leak = np.linalg.norm(J @ E - E @ (E.T @ J @ E))
        if (hi - lo) % 2 or leak > 1e-8:
            error = (
                f"eigenspace for eigenvalue {w[lo]:.6g} is not J-invariant; "
                "no eigenbasis with U_2i = J U_(2i-1) exists"
            )
            break
        B = _j_closed_basis(E, J)
        vecs.append(B)
        vals.extend(np.diag(B.T @ P_tilde @ B))
    P = np.zeros((2 * n + 1, 2 * n + 1))
    P[: 2 * n, : 2 * n] = P_tilde
    P[-1, -1] = lam
    j_P = lam * np.linalg.solve(P_tilde, J)
    algebra = Algebra2Step(j_P[None], P)
    if error is not None:
        return PMetricSpec(P_tilde, lam, algebra, None, None, error)
    return PMetricSpec(P_tilde, lam, algebra, np.array(vals), np.hstack(vecs))


def is_metric_symmetric(A, P, tol: float = 1e-12) -> bool:
    """``A`` is symmetric for ``<., .>_P`` iff ``P A = A^t P``."""
    A, P = np.asarray(A, dtype=float), np.asarray(P, dtype=float)
    return bool(np.abs(P @ A - A.T @ P).max() <= tol * max(1.0, np.abs(P @ A).max()))
