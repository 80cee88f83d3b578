import json

import numpy as np
import pytest

from nilflow.algebra import (
    Algebra2Step,
    ad_transpose,
    bracket,
    center,
    heisenberg_algebra,
    is_nonsingular,
    j_of,
    load_algebra,
    standard_J,
)
from conftest import free_algebra_3, random_metric_algebra


def test_heisenberg_brackets():
    a = heisenberg_algebra(1)
    X1, X2, Z1 = np.eye(3)
    np.testing.assert_array_equal(bracket(a, X1, X2), Z1)
    np.testing.assert_array_equal(bracket(a, X1, Z1), 0)
    b = heisenberg_algebra(2)
    e = np.eye(5)
    np.testing.assert_array_equal(bracket(b, e[0], e[2]), 0)
    np.testing.assert_array_equal(bracket(b, e[2], e[3]), e[4])


def test_j_of_examples():
    a = heisenberg_algebra(2)
    J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
    np.testing.assert_array_equal(j_of(a, [1.0]), J)
    np.testing.assert_array_equal(j_of(a, [0.0]), 0)
    np.testing.assert_array_equal(j_of(a, [2.0]), 2 * J)
    with pytest.raises(ValueError):
        j_of(a, [1.0, 0.0])


def test_ad_transpose_examples():
    a = heisenberg_algebra(1)
    X1, X2, Z1 = np.eye(3)
    np.testing.assert_array_equal(ad_transpose(a, X1, Z1), X2)
    np.testing.assert_array_equal(ad_transpose(a, X1, X1 + X2), 0)
    np.testing.assert_array_equal(ad_transpose(a, Z1, np.array([1.0, 2.0, 3.0])), 0)


@pytest.mark.parametrize("make", [lambda r: heisenberg_algebra(3), lambda r: random_metric_algebra(r), lambda r: free_algebra_3()])
def test_bracket_identities(make, rng):
    a = make(rng)
    X, Y, W = rng.normal(size=(3, 500, a.dim))
    B = bracket(a, X, Y)
    # exact antisymmetry and values in z
    np.testing.assert_array_equal(B, -bracket(a, Y, X))
    assert np.all(B[..., : a.dim_v] == 0)
    np.testing.assert_array_equal(bracket(a, B, W), 0)
    # <[X, Y], W> = <j(W_z) X_v, Y_v>
    Xv, Yv = X[:, : a.dim_v], Y[:, : a.dim_v]
    lhs = a.inner(B, W)
    rhs = a.inner_v(np.einsum("nab,nb->na", j_of(a, W[:, a.dim_v :]), Xv), Yv)
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + np.abs(lhs).max())
    # ad^t duality
    duality = a.inner(ad_transpose(a, X, Y), W) - a.inner(Y, bracket(a, X, W))
    assert np.abs(duality).max() <= 1e-12 * (1 + np.abs(lhs).max())


def test_validation_rejects_bad_input():
    with pytest.raises(ValueError):
        Algebra2Step(np.ones((1, 2, 2)), np.eye(3))
    with pytest.raises(ValueError):
        Algebra2Step(standard_J(1)[None], -np.eye(3))
    with pytest.raises(ValueError):
        bracket(heisenberg_algebra(1), np.ones(4), np.ones(4))


def test_center():
    assert center(heisenberg_algebra(3)).shape == (7, 1)
    abelian = Algebra2Step(np.zeros((1, 2, 2)), np.eye(3))
    assert center(abelian).shape[1] == 3
    j = np.zeros((1, 3, 3))
    j[0, :2, :2] = standard_J(1)
    C = center(Algebra2Step(j, np.eye(4)))
    assert C.shape[1] == 2
    # spans X_3 and Z_1
    P = C @ C.T
    np.testing.assert_allclose(P, np.diag([0, 0, 1, 1]), atol=1e-12)


def test_is_nonsingular():
    assert is_nonsingular(heisenberg_algebra(2)).nonsingular
    odd = np.zeros((1, 3, 3))
    odd[0, :2, :2] = standard_J(1)
    assert not is_nonsingular(Algebra2Step(odd, np.eye(4))).nonsingular
    j = np.stack([standard_J(1), np.zeros((2, 2))])
    res = is_nonsingular(Algebra2Step(j, np.eye(4)))
    assert not res.nonsingular
    witness = res.witness / np.linalg.norm(res.witness)
    assert abs(abs(witness[1]) - 1) < 1e-6
    # free algebra: dim v odd, so every j(Z) is singular
    assert not is_nonsingular(free_algebra_3()).nonsingular


def test_nonsingular_quaternionic():
    # H-type algebra with dim z = 3: j(Z) is invertible for every Z != 0
    e = np.zeros((3, 4, 4))
    i = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
    jm = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])
    e[0], e[1], e[2] = i, jm, i @ jm
    a = Algebra2Step(e, np.eye(7))
    assert is_nonsingular(a, sample_count=50).nonsingular


def test_algebra_json_roundtrip(tmp_path, rng):
    a = random_metric_algebra(rng)
    path = tmp_path / "alg.json"
    path.write_text(json.dumps(a.to_dict()))
    b = load_algebra(path)
    np.testing.assert_array_equal(a.j_mats, b.j_mats)
    np.testing.assert_array_equal(a.metric, b.metric)
