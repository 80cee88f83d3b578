"""Metric 2-step nilpotent Lie algebras described by their j-maps.

Coordinates on n = v + z are always ``(v_1, ..., v_dim_v, z_1, ..., z_dim_z)``.
For a metric ``G = diag(G_v, G_z)`` the bracket is recovered from the j-maps
through ``<[X, Y], Z_i>_G = <j(Z_i) X_v, Y_v>_G``.  With the identity metric
this is simply ``[X, Y]_z,i = <j(Z_i) X_v, Y_v>``.

All functions accept arrays with arbitrary leading batch dimensions; the last
axis is the algebra coordinate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

SKEW_TOL = 1e-12
RANK_TOL = 1e-10


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Algebra2Step:
    """A metric 2-step nilpotent Lie algebra ``n = v + z``.

    ``j_mats[i]`` is the matrix of ``j(Z_i)`` acting on ``v``, where ``Z_i`` is
    the i-th coordinate vector of ``z``.  ``metric`` is the Gram matrix of the
    inner product in these coordinates; ``v`` and ``z`` must be orthogonal.
    """

    j_mats: np.ndarray
    metric: np.ndarray

    def __post_init__(self):
        j = np.array(self.j_mats, dtype=float)
        if j.ndim != 3 or j.shape[1] != j.shape[2] or j.shape[0] < 1 or j.shape[1] < 1:
            raise ValueError(f"j_mats must have shape (dim_z, dim_v, dim_v), got {j.shape}")
        dim_z, dim_v = j.shape[0], j.shape[1]
        dim = dim_v + dim_z
        g = np.array(self.metric, dtype=float)
        if g.shape != (dim, dim):
            raise ValueError(f"metric must be {dim}x{dim}, got {g.shape}")
        if not np.allclose(g, g.T, rtol=0, atol=SKEW_TOL * max(1.0, np.abs(g).max())):
            raise ValueError("metric is not symmetric")
        if np.abs(g[:dim_v, dim_v:]).max(initial=0.0) > SKEW_TOL:
            raise ValueError("v and z must be orthogonal in the metric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("metric is not positive definite")
        g_v = g[:dim_v, :dim_v]
        scale = max(1.0, np.abs(j).max() * np.abs(g_v).max())
        for i, ji in enumerate(j):
            if np.abs(g_v @ ji + ji.T @ g_v).max() > SKEW_TOL * scale:
                raise ValueError(f"j_mats[{i}] is not skew-symmetric for the metric")
        object.__setattr__(self, "j_mats", _frozen(j))
        object.__setattr__(self, "metric", _frozen(g))
        # [X, Y]_z,k = X_v^T S_k Y_v
        g_z_inv = np.linalg.inv(g[dim_v:, dim_v:])
        forms = np.einsum("iab,bc->iac", j.transpose(0, 2, 1), g_v)
        object.__setattr__(self, "_structure", _frozen(np.einsum("ki,iab->kab", g_z_inv, forms)))
        object.__setattr__(self, "_metric_inv", _frozen(np.linalg.inv(g)))

    @property
    def dim_v(self) -> int:
        return self.j_mats.shape[1]

    @property
    def dim_z(self) -> int:
        return self.j_mats.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_v + self.dim_z

    @property
    def metric_inv(self) -> np.ndarray:
        return self._metric_inv

    @property
    def structure(self) -> np.ndarray:
        """Bilinear forms ``S_k`` with ``[X, Y]_z,k = X_v . S_k Y_v``."""
        return self._structure

    def is_standard_metric(self) -> bool:
        return bool(np.array_equal(self.metric, np.eye(self.dim)))

    def check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1:] != (self.dim,):
            raise ValueError(f"expected vectors of length {self.dim}, got shape {X.shape}")
        return X

    def split(self, X):
        X = self.check(X)
        return X[..., : self.dim_v], X[..., self.dim_v :]

    def join(self, v, z) -> np.ndarray:
        v, z = np.asarray(v, dtype=float), np.asarray(z, dtype=float)
        lead = np.broadcast_shapes(v.shape[:-1], z.shape[:-1])
        return np.concatenate(
            [np.broadcast_to(v, lead + v.shape[-1:]), np.broadcast_to(z, lead + z.shape[-1:])], axis=-1
        )

    def vec(self, v=None, z=None) -> np.ndarray:
        """Build a single algebra vector from optional v and z parts."""
        out = np.zeros(self.dim)
        if v is not None:
            out[: self.dim_v] = v
        if z is not None:
            out[self.dim_v :] = z
        return out

    def basis(self, i: int) -> np.ndarray:
        out = np.zeros(self.dim)
        out[i] = 1.0
        return out

    def inner(self, X, Y) -> np.ndarray:
        X, Y = self.check(X), self.check(Y)
        return np.einsum("...i,ij,...j->...", X, self.metric, Y)

    def inner_v(self, X, Y) -> np.ndarray:
        """Inner product of two pure v-vectors given by their v coordinates."""
        g_v = self.metric[: self.dim_v, : self.dim_v]
        return np.einsum("...i,ij,...j->...", X, g_v, Y)

    def to_dict(self) -> dict:
        return {
            "dim_v": self.dim_v,
            "dim_z": self.dim_z,
            "j_mats": self.j_mats.tolist(),
            "metric": self.metric.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Algebra2Step":
        try:
            dim_v, dim_z = int(data["dim_v"]), int(data["dim_z"])
            j = np.asarray(data["j_mats"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed algebra description: {exc}") from exc
        if j.shape != (dim_z, dim_v, dim_v):
            raise ValueError(f"j_mats shape {j.shape} does not match dim_z={dim_z}, dim_v={dim_v}")
        metric = data.get("metric")
        metric = np.eye(dim_v + dim_z) if metric is None else np.asarray(metric, dtype=float)
        return cls(j, metric)


def load_algebra(path) -> Algebra2Step:
    return Algebra2Step.from_dict(json.loads(Path(path).read_text()))


def standard_J(n: int) -> np.ndarray:
    """Multiplication by i on C^n in the interleaved basis X_1, ..., X_2n."""
    if n < 1:
        raise ValueError("n must be positive")
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return J


def heisenberg_algebra(n: int) -> Algebra2Step:
    """The Heisenberg algebra h_n with orthonormal basis X_1..X_2n, Z_1."""
    return Algebra2Step(standard_J(n)[None], np.eye(2 * n + 1))


def is_heisenberg_canonical(a: Algebra2Step) -> bool:
    if a.dim_z != 1 or a.dim_v % 2 or not a.is_standard_metric():
        return False
    return bool(np.array_equal(a.j_mats[0], standard_J(a.dim_v // 2)))


def bracket(a: Algebra2Step, X, Y) -> np.ndarray:
    """Lie bracket; the result is a pure z-vector.

    Evaluated as ``(B(X, Y) - B(Y, X)) / 2`` so that antisymmetry holds bit for bit.
    """
    Xv, _ = a.split(X)
    Yv, _ = a.split(Y)
    S = a.structure
    xy = np.einsum("...a,kab,...b->...k", Xv, S, Yv)
    yx = np.einsum("...a,kab,...b->...k", Yv, S, Xv)
    z = 0.5 * (xy - yx)
    return a.join(np.zeros(z.shape[:-1] + (a.dim_v,)), z)


def j_of(a: Algebra2Step, Z) -> np.ndarray:
    """``j(Z) = sum_i Z_i j_mats[i]`` for a z-vector ``Z`` (batched)."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[-1:] != (a.dim_z,):
        raise ValueError(f"expected z-vectors of length {a.dim_z}, got shape {Z.shape}")
    return np.einsum("...i,iab->...ab", Z, a.j_mats)


def j_apply(a: Algebra2Step, Z, V) -> np.ndarray:
    """``j(Z) V`` for z-vectors ``Z`` and v-coordinate vectors ``V`` (batched)."""
    return np.einsum("...i,iab,...b->...a", np.asarray(Z, dtype=float), a.j_mats, np.asarray(V, dtype=float))


def ad_transpose(a: Algebra2Step, V, Y) -> np.ndarray:
    """Metric transpose of ``ad(V)`` applied to ``Y``: ``j(Y_z) V_v`` (pure v)."""
    Vv, _ = a.split(V)
    _, Yz = a.split(Y)
    w = j_apply(a, Yz, Vv)
    return a.join(w, np.zeros(w.shape[:-1] + (a.dim_z,)))


def _metric_orthonormalize(a: Algebra2Step, B: np.ndarray) -> np.ndarray:
    if B.shape[1] == 0:
        return B
    L = np.linalg.cholesky(B.T @ a.metric @ B)
    return B @ np.linalg.inv(L).T


def _null_space(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    _, s, vt = np.linalg.svd(M)
    top = s[0] if s.size else 0.0
    if top == 0.0:
        return np.eye(M.shape[1])
    rank = int(np.sum(s > tol * top))
    return vt[rank:].T


def center(a: Algebra2Step) -> np.ndarray:
    """Basis (columns, metric-orthonormal) of the center ``z + (common kernel of j)``."""
    ker = _null_space(np.vstack(list(a.j_mats)))
    B = np.zeros((a.dim, ker.shape[1] + a.dim_z))
    B[: a.dim_v, : ker.shape[1]] = ker
    B[a.dim_v :, ker.shape[1] :] = np.eye(a.dim_z)
    return _metric_orthonormalize(a, B)


class Nonsingularity(NamedTuple):
    nonsingular: bool
    witness: np.ndarray | None


def _is_singular(M: np.ndarray, scale: float) -> bool:
    if M.shape[0] == 0:
        return False
    return bool(np.linalg.svd(M, compute_uv=False).min() <= RANK_TOL * scale)


def is_nonsingular(a: Algebra2Step, sample_count: int = 200, rng_seed=0) -> Nonsingularity:
    """Decide whether ``j(Z)`` is invertible for every nonzero ``Z``.

    Exact for ``dim_z == 1``.  Otherwise the coordinate axes and ``sample_count``
    random unit vectors are probed, then the most nearly singular probes are
    refined by minimizing the smallest singular value on the sphere.  A
    ``False`` answer always carries a witness.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    scale = max(1.0, float(np.linalg.svd(np.vstack(list(a.j_mats)), compute_uv=False).max()))
    if a.dim_v % 2:
        return Nonsingularity(False, a.vec(z=np.eye(a.dim_z)[0])[a.dim_v :])
    if a.dim_z == 1:
        if _is_singular(a.j_mats[0], scale):
            return Nonsingularity(False, np.ones(1))
        return Nonsingularity(True, None)

    rng = np.random.default_rng(rng_seed)
    probes = rng.normal(size=(sample_count, a.dim_z))
    probes = np.vstack([np.eye(a.dim_z), probes / np.linalg.norm(probes, axis=1, keepdims=True)])
    smin = np.linalg.svd(j_of(a, probes), compute_uv=False).min(axis=-1)
    if smin.min() <= RANK_TOL * scale:
        return Nonsingularity(False, probes[np.argmin(smin)])

    from scipy.optimize import minimize

    def objective(x):
        Z = x / np.linalg.norm(x)
        return np.linalg.svd(j_of(a, Z), compute_uv=False).min()

    for idx in np.argsort(smin)[:3]:
        res = minimize(objective, probes[idx], method="Nelder-Mead",
                       options={"xatol": 1e-14, "fatol": 1e-16, "maxiter": 4000})
        if res.fun <= RANK_TOL * scale:
            return Nonsingularity(False, res.x / np.linalg.norm(res.x))
    return Nonsingularity(True, None)
