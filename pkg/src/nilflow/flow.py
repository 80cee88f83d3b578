"""Geodesic flow on TN: integration, a closed-form fiber oracle, and
conservation / independence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import expm

from .algebra import Algebra2Step, ad_transpose, is_heisenberg_canonical, j_of
from .errors import NumericError
from .group import left_translate
from .integrals import FirstIntegral
from .symplectic import TangentState

METHODS = ("rk4", "exact-fiber")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution; ``p`` and ``Y`` have the time axis first."""

    times: np.ndarray
    p: np.ndarray
    Y: np.ndarray
    method: str
    dt: float

    @property
    def states(self) -> TangentState:
        return TangentState(self.p, self.Y)

    def state(self, i: int) -> TangentState:
        return TangentState(self.p[i], self.Y[i])

    def __len__(self):
        return len(self.times)


def geodesic_field(a: Algebra2Step, state: TangentState):
    """``X_E(p, Y) = (Y, j(Y_z) Y_v)`` as a coordinate velocity ``(dp, dY)``."""
    return left_translate(a, state.p, state.Y), ad_transpose(a, state.Y, state.Y)


def _fiber_propagator(a: Algebra2Step, Yz: np.ndarray, t: float) -> np.ndarray:
    """``exp(t j(Y_z))`` on v, batched over ``Yz``."""
    if is_heisenberg_canonical(a):
        theta = t * Yz[..., 0]
        c, s = np.cos(theta), np.sin(theta)
        n = a.dim_v // 2
        R = np.zeros(Yz.shape[:-1] + (a.dim_v, a.dim_v))
        for i in range(n):
            R[..., 2 * i, 2 * i] = c
            R[..., 2 * i + 1, 2 * i + 1] = c
            R[..., 2 * i, 2 * i + 1] = -s
            R[..., 2 * i + 1, 2 * i] = s
        return R
    return expm(t * j_of(a, Yz))


def exact_fiber_solution(a: Algebra2Step, Y0, t: float) -> np.ndarray:
    """Fiber component of the geodesic flow: ``Y_z`` is constant and
    ``Y_v(t) = exp(t j(Y_z)) Y_v(0)``."""
    Yv, Yz = a.split(Y0)
    R = _fiber_propagator(a, Yz, t)
    return a.join(np.einsum("...ab,...b->...a", R, Yv), Yz)


def _check_finite(step: int, *arrays) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite state at step {step}")


def integrate(
    a: Algebra2Step,
    state0: TangentState,
    T: float,
    dt: float,
    method: str = "rk4",
    stride: int = 1,
) -> Trajectory:
    """Fixed-step integration of the geodesic field over ``[0, T]``.

    ``rk4`` is the classical Runge-Kutta scheme on ``(p, Y)``.  ``exact-fiber``
    advances ``Y`` with the exact rotation and ``p`` with RK4 driven by it.
    The step count is ``floor(T / dt)``; the step itself is stretched to
    ``T / floor(T / dt)`` so the last state sits exactly at ``T``.  Every
    ``stride``-th state is stored (the first and last are always kept).
    """
    if not (dt > 0 and T > 0):
        raise ValueError("T and dt must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    steps = int(np.floor(T / dt + 1e-9))
    if steps:
        dt = T / steps
    p = np.array(state0.p, dtype=float)
    Y = np.array(state0.Y, dtype=float)
    ps, Ys, ts = [p.copy()], [Y.copy()], [0.0]

    if method == "exact-fiber":
        half = _fiber_propagator(a, a.split(Y)[1], dt / 2)

    def rot(Yc):
        Yv, Yz = a.split(Yc)
        return a.join(np.einsum("...ab,...b->...a", half, Yv), Yz)

    for k in range(1, steps + 1):
        if method == "rk4":
            k1p, k1y = geodesic_field(a, TangentState(p, Y))
            k2p, k2y = geodesic_field(a, TangentState(p + 0.5 * dt * k1p, Y + 0.5 * dt * k1y))
            k3p, k3y = geodesic_field(a, TangentState(p + 0.5 * dt * k2p, Y + 0.5 * dt * k2y))
            k4p, k4y = geodesic_field(a, TangentState(p + dt * k3p, Y + dt * k3y))
            p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
            Y = Y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        else:
            Y_mid = rot(Y)
            Y_end = rot(Y_mid)
            k1 = left_translate(a, p, Y)
            k2 = left_translate(a, p + 0.5 * dt * k1, Y_mid)
            k3 = left_translate(a, p + 0.5 * dt * k2, Y_mid)
            k4 = left_translate(a, p + dt * k3, Y_end)
            p = p + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            Y = Y_end
        _check_finite(k, p, Y)
        if k % stride == 0 or k == steps:
            ps.append(p.copy())
            Ys.append(Y.copy())
            ts.append(T if k == steps else k * dt)
    return Trajectory(np.array(ts), np.array(ps), np.array(Ys), method, dt)


def conservation_report(traj: Trajectory, family: Sequence[FirstIntegral]) -> dict[str, float]:
    """Max relative drift ``|F(t) - F(0)| / (1 + |F(0)|)`` per integral."""
    states = traj.states
    out = {}
    for f in family:
        vals = f.value(states)
        drift = np.abs(vals - vals[0]) / (1.0 + np.abs(vals[0]))
        out[f.name] = float(drift.max())
    return out


def sample_states(
    a: Algebra2Step,
    count: int,
    seed: int = 0,
    low: float = -2.0,
    high: float = 2.0,
    min_abs_yz: float = 0.0,
) -> TangentState:
    """Uniform random states; sample ``i`` uses its own stream seeded by ``(seed, i)``.

    With ``min_abs_yz > 0`` a draw is repeated (from the same stream) until
    ``|Y_z| >= min_abs_yz``.
    """
    p = np.empty((count, a.dim))
    Y = np.empty((count, a.dim))
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        while True:
            x = rng.uniform(low, high, size=2 * a.dim)
            if np.linalg.norm(x[a.dim + a.dim_v :]) >= min_abs_yz:
                break
        p[i], Y[i] = x[: a.dim], x[a.dim :]
    return TangentState(p, Y)


class RankResult(NamedTuple):
    min_rank: int
    fraction_full_rank: float
    ranks: np.ndarray


def gradient_matrix(family: Sequence[FirstIntegral], states: TangentState) -> np.ndarray:
    """Stacked gradients, shape ``batch + (len(family), 2 dim)``."""
    rows = []
    for f in family:
        U, V = f.grad(states)
        U, V = np.broadcast_arrays(U, V)
        rows.append(np.concatenate([U, V], axis=-1))
    return np.stack(rows, axis=-2)


def rank_check(
    family: Sequence[FirstIntegral],
    sample_count: int = 1000,
    seed: int = 0,
    states: TangentState | None = None,
    rel_tol: float = 1e-8,
) -> RankResult:
    """Numerical rank of the gradient matrix at sampled states."""
    if states is None:
        states = sample_states(family[0].algebra, sample_count, seed)
    M = gradient_matrix(family, states)
    s = np.linalg.svd(M, compute_uv=False)
    top = s[..., :1]
    ranks = np.sum(s > rel_tol * np.where(top > 0, top, 1.0), axis=-1)
    full = len(family)
    return RankResult(int(ranks.min()), float(np.mean(ranks == full)), ranks)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    if traj.p.ndim != 2:
        raise ValueError("only single (unbatched) trajectories can be written")
    d = traj.p.shape[1]
    header = ["t"] + [f"p_{i + 1}" for i in range(d)] + [f"Y_{i + 1}" for i in range(d)]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for t, p, Y in zip(traj.times, traj.p, traj.Y):
            fh.write(",".join(format(float(x), ".17g") for x in (t, *p, *Y)) + "\n")
