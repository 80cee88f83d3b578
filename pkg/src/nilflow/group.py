"""Simply connected 2-step nilpotent groups in exponential coordinates.

A group element is stored as ``W = log p``, so ``exp`` and ``log`` are the
identity on coordinates and the product is the truncated BCH series
``p q = p + q + [p, q] / 2``.  For ``H_n`` this is exactly
``(v, z)(v', z') = (v + v', z + z' - v^T J v' / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Algebra2Step, bracket, heisenberg_algebra


def identity(a: Algebra2Step) -> np.ndarray:
    return np.zeros(a.dim)


def mul(a: Algebra2Step, p, q) -> np.ndarray:
    p, q = a.check(p), a.check(q)
    return p + q + 0.5 * bracket(a, p, q)


def inv(a: Algebra2Step, p) -> np.ndarray:
    return -a.check(p)


def exp_map(a: Algebra2Step, X) -> np.ndarray:
    return a.check(X).copy()


def log_map(a: Algebra2Step, p) -> np.ndarray:
    return a.check(p).copy()


def left_translate(a: Algebra2Step, p, U) -> np.ndarray:
    """Coordinate velocity of ``dL_p U``, i.e. ``d/ds (p exp(sU))`` at ``s = 0``."""
    return a.check(U) + 0.5 * bracket(a, p, U)


def frame(a: Algebra2Step, p) -> np.ndarray:
    """Matrix whose columns are the left-invariant basis fields at ``p``."""
    p = a.check(p)
    eye = np.eye(a.dim)
    return np.moveaxis(left_translate(a, p[..., None, :], eye), -2, -1)


def integral_curve(a: Algebra2Step, p, U, s) -> np.ndarray:
    """Integral curve of the left-invariant field ``U`` through ``p``."""
    return mul(a, p, np.multiply.outer(np.asarray(s, dtype=float), a.check(U)))


@dataclass(frozen=True)
class HeisenbergGroup:
    """``H_n`` on R^(2n+1) with interleaved coordinates (x_1, y_1, ..., x_n, y_n, z)."""

    n: int
    algebra: Algebra2Step = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        object.__setattr__(self, "algebra", heisenberg_algebra(self.n))

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def identity(self):
        return identity(self.algebra)

    def mul(self, p, q):
        return mul(self.algebra, p, q)

    def inv(self, p):
        return inv(self.algebra, p)

    def exp_map(self, X):
        return exp_map(self.algebra, X)

    def log_map(self, p):
        return log_map(self.algebra, p)

    def frame(self, p):
        return frame(self.algebra, p)
