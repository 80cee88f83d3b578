import numpy as np
import pytest

from nilflow.algebra import Algebra2Step, heisenberg_algebra, standard_J
from nilflow.flow import sample_states
from nilflow.heisenberg import canonical_families, f_Z1
from nilflow.integrals import (
    Custom,
    Energy,
    IsometryAlgebraElement,
    KillingRotation,
    KillingTranslation,
    LinearCentral,
    LinearCombination,
    Quadratic,
    butler_annihilator,
    butler_predicate,
    cartan_projectors,
    isometry_bracket,
    isotropy_basis,
    killing_to_integral,
    psi,
    psi_inverse,
    quadratic_is_integral,
    quadratic_pair_commutes,
)
from nilflow.symplectic import TangentState, first_integral_residual, poisson
from conftest import free_algebra_3, random_metric_algebra


def commuting_with_J(rng, n):
    """Random symmetric operator commuting with J."""
    J = standard_J(n)
    S = rng.normal(size=(2 * n, 2 * n))
    S = S + S.T
    return 0.5 * (S - J @ S @ J)


def test_eval_examples():
    a = heisenberg_algebra(2)
    Y = np.array([0.5, -1.0, 2.0, 3.0, 0.7])
    e = TangentState(np.zeros(5), Y)
    for k in range(1, 5):
        assert KillingTranslation.basis(a, k).value(e) == Y[k - 1]
    s = TangentState(np.eye(5)[1], np.eye(5)[4])
    assert KillingTranslation.basis(a, 1).value(s) == 1.0
    for i, A in enumerate(cartan_projectors(2)):
        g = Quadratic(a, A)
        assert g.value(e) == pytest.approx(0.5 * (Y[2 * i] ** 2 + Y[2 * i + 1] ** 2))


def test_grad_examples():
    a = heisenberg_algebra(1)
    X1, X2, Z1 = np.eye(3)
    s = TangentState(np.zeros(3), Z1)
    U, V = f_Z1(a).grad(s)
    np.testing.assert_array_equal(U, 0)
    np.testing.assert_array_equal(V, Z1)
    U, V = Quadratic(a, np.eye(2)).grad(TangentState(np.ones(3), np.zeros(3)))
    assert not U.any() and not V.any()
    U, V = KillingTranslation.basis(a, 1).grad(s)
    np.testing.assert_array_equal(U, X2)
    np.testing.assert_array_equal(V, X1)


def all_integrals(n):
    a = heisenberg_algebra(n)
    fams = canonical_families(n)
    extra = [KillingTranslation(a, np.arange(1.0, 2 * n + 2)), KillingRotation(a, isotropy_basis(standard_J(n))[-1])]
    return a, [f for fam in fams.values() for f in fam] + extra


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exact_gradients_match_numeric(n):
    a, fs = all_integrals(n)
    s = sample_states(a, 100, seed=n)
    for f in fs:
        U, V = f.grad(s)
        nU, nV = f.numeric_grad(s)
        scale = 1 + max(np.abs(U).max(), np.abs(V).max())
        assert np.abs(U - nU).max() <= 1e-7 * scale, f.name
        assert np.abs(V - nV).max() <= 1e-7 * scale, f.name


@pytest.mark.parametrize("n", [1, 2, 3])
def test_every_integral_passes_residual(n):
    a, fs = all_integrals(n)
    s = sample_states(a, 1000, seed=100 + n)
    for f in fs:
        assert np.abs(first_integral_residual(a, s, f.grad(s))).max() <= 1e-10, f.name


def test_general_metric_integrals(rng):
    a = random_metric_algebra(rng)
    s = TangentState(rng.normal(size=(200, a.dim)), rng.normal(size=(200, a.dim)))
    fs = [Energy(a), LinearCentral(a, [1.0, -2.0]), KillingTranslation(a, rng.normal(size=a.dim))]
    for f in fs:
        assert np.abs(first_integral_residual(a, s, f.grad(s))).max() <= 1e-10
        U, V = f.grad(s)
        nU, nV = f.numeric_grad(s)
        assert np.abs(U - nU).max() <= 1e-7 * (1 + np.abs(U).max())
        assert np.abs(V - nV).max() <= 1e-7 * (1 + np.abs(V).max())


def test_quadratic_is_integral_examples():
    a1 = heisenberg_algebra(1)
    assert quadratic_is_integral(a1, cartan_projectors(1)[0])
    assert quadratic_is_integral(a1, np.eye(2))
    assert not quadratic_is_integral(a1, np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        quadratic_is_integral(a1, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_quadratic_pair_commutes_examples():
    a = heisenberg_algebra(2)
    A1, A2 = cartan_projectors(2)
    assert quadratic_pair_commutes(a, A1, A2)
    assert quadratic_pair_commutes(a, A1, A1)
    B = np.zeros((4, 4))
    B[0, 2] = B[2, 0] = B[1, 3] = B[3, 1] = 1.0
    assert quadratic_is_integral(a, B)
    assert not quadratic_pair_commutes(a, A1, B)
    with pytest.raises(ValueError):
        quadratic_pair_commutes(a, A1, np.diag([1.0, -1.0, 0.0, 0.0]))


def test_psi_examples():
    J = standard_J(2)
    np.testing.assert_array_equal(psi(np.eye(4), J), J)
    Ts = [psi(A, J) for A in cartan_projectors(2)]
    for A, T in zip(cartan_projectors(2), Ts):
        np.testing.assert_array_equal(T, J @ A)
        np.testing.assert_allclose(psi_inverse(T, J), A, atol=1e-15)
    np.testing.assert_array_equal(Ts[0] @ Ts[1] - Ts[1] @ Ts[0], 0)
    with pytest.raises(ValueError):
        psi(np.diag([1.0, -1.0, 0.0, 0.0]), J)
    with pytest.raises(ValueError):
        psi_inverse(np.eye(4), J)


def test_psi_involution_equivalence(rng):
    # {g_A, g_B} = 0 everywhere iff [psi(A), psi(B)] = 0
    n = 2
    a = heisenberg_algebra(n)
    J = standard_J(n)
    s = sample_states(a, 200, seed=5)
    for trial in range(10):
        A = commuting_with_J(rng, n)
        if trial % 2:
            B = A @ A + 2 * A
        else:
            B = commuting_with_J(rng, n)
        pb = poisson(a, s, Quadratic(a, A).grad(s), Quadratic(a, B).grad(s))
        C = psi(A, J) @ psi(B, J) - psi(B, J) @ psi(A, J)
        assert (np.abs(pb).max() <= 1e-10) == (np.linalg.norm(C) <= 1e-10)


def test_isotropy_algebra_dimension():
    for n in (1, 2, 3):
        J = standard_J(n)
        basis = isotropy_basis(J)
        assert len(basis) == n * n
        for B in basis:
            assert np.abs(B + B.T).max() <= 1e-12
            assert np.abs(J @ B - B @ J).max() <= 1e-12


def test_killing_rotation_validation():
    a = heisenberg_algebra(2)
    with pytest.raises(ValueError):
        KillingRotation(a, np.eye(4))
    T = np.zeros((4, 4))
    T[0, 2], T[2, 0] = 1.0, -1.0  # skew but does not commute with J
    with pytest.raises(ValueError):
        KillingRotation(a, T)
    with pytest.raises(ValueError):
        KillingRotation(random_metric_algebra(np.random.default_rng(0)), np.zeros((4, 4)))


def test_poisson_table(states_h2):
    a = heisenberg_algebra(2)
    s = states_h2
    J = standard_J(2)
    fZ = f_Z1(a)
    F = [KillingTranslation.basis(a, k) for k in range(1, 5)]
    basis = isotropy_basis(J)
    for i in range(4):
        assert np.abs(poisson(a, s, fZ.grad(s), F[i].grad(s))).max() <= 1e-12
        for j in range(4):
            pb = poisson(a, s, F[i].grad(s), F[j].grad(s))
            expected = J[j, i] * fZ.value(s)  # {F_1, F_2} = f_Z1, {F_2, F_1} = -f_Z1
            assert np.abs(pb - expected).max() <= 1e-12
    for Ta in basis:
        for Tb in basis:
            lhs = poisson(a, s, KillingRotation(a, Ta).grad(s), KillingRotation(a, Tb).grad(s))
            C = Ta @ Tb - Tb @ Ta
            rhs = KillingRotation(a, C).value(s) if np.any(np.abs(C) > 1e-14) else 0.0
            assert np.abs(lhs - rhs).max() <= 1e-10


def test_rotation_translation_bracket(states_h2):
    # {F_T, F_k} = F_{T X_k}
    a = heisenberg_algebra(2)
    s = states_h2
    for T in isotropy_basis(standard_J(2)):
        FT = KillingRotation(a, T)
        for k in range(1, 5):
            lhs = poisson(a, s, FT.grad(s), KillingTranslation.basis(a, k).grad(s))
            rhs = KillingTranslation(a, a.vec(v=T[:, k - 1])).value(s)
            assert np.abs(lhs - rhs).max() <= 1e-10


def test_rotation_translation_bracket_printed_form_fails(states_h2):
    # the alternative F_k(p, T Y_v + Y_z) is not the bracket
    a = heisenberg_algebra(2)
    s = states_h2
    J = standard_J(2)
    lhs = poisson(a, s, KillingRotation(a, J).grad(s), KillingTranslation.basis(a, 1).grad(s))
    Yv, Yz = a.split(s.Y)
    alt = KillingTranslation.basis(a, 1).value(TangentState(s.p, a.join(Yv @ J.T, Yz)))
    assert np.abs(lhs - alt).max() > 1e-2


def test_rotation_quadratic_brackets(rng):
    # {F_Ta, F_Tb} = 0 iff [A, B] = 0, and {F_Ta, g_B} = 0 when [A, B] = 0
    n = 2
    a = heisenberg_algebra(n)
    J = standard_J(n)
    s = sample_states(a, 200, seed=9)
    for trial in range(8):
        A = commuting_with_J(rng, n)
        B = A @ A - A if trial % 2 else commuting_with_J(rng, n)
        Fa, Fb = KillingRotation(a, J @ A), KillingRotation(a, J @ B)
        pb = poisson(a, s, Fa.grad(s), Fb.grad(s))
        commute = np.linalg.norm(A @ B - B @ A) <= 1e-10
        assert (np.abs(pb).max() <= 1e-10) == commute
        if commute:
            assert np.abs(poisson(a, s, Fa.grad(s), Quadratic(a, B).grad(s))).max() <= 1e-10


def test_killing_to_integral_examples(states_h2):
    a = heisenberg_algebra(2)
    s = states_h2
    Z = IsometryAlgebraElement(np.zeros((4, 4)), a.vec(z=[1.0]))
    np.testing.assert_allclose(killing_to_integral(a, Z).value(s), f_Z1(a).value(s), atol=0)
    zero = IsometryAlgebraElement(np.zeros((4, 4)), np.zeros(5))
    assert np.abs(killing_to_integral(a, zero).value(s)).max() == 0


def test_killing_map_is_homomorphism(states_h2, rng):
    a = heisenberg_algebra(2)
    s = states_h2
    basis = np.array(isotropy_basis(standard_J(2)))

    def element():
        return IsometryAlgebraElement(np.einsum("k,kab->ab", rng.normal(size=4), basis), rng.normal(size=5))

    for _ in range(10):
        xi, eta = element(), element()
        f, g = killing_to_integral(a, xi), killing_to_integral(a, eta)
        h = killing_to_integral(a, isometry_bracket(a, xi, eta))
        assert np.abs(poisson(a, s, f.grad(s), g.grad(s)) - h.value(s)).max() <= 1e-10
        # linear in the element
        both = IsometryAlgebraElement(xi.T + eta.T, xi.translation + eta.translation)
        np.testing.assert_allclose(killing_to_integral(a, both).value(s), f.value(s) + g.value(s), atol=1e-12)


def test_killing_integral_equals_pairing_with_field(rng):
    # f_X*(p, Y) = <X*(p), dL_p Y> with the metric read in left-invariant coordinates
    from nilflow.group import frame, mul

    a = heisenberg_algebra(2)
    basis = np.array(isotropy_basis(standard_J(2)))
    xi = IsometryAlgebraElement(np.einsum("k,kab->ab", rng.normal(size=4), basis), rng.normal(size=5))
    p, Y = rng.normal(size=(2, 5))
    h = 1e-6

    def flow(t):
        # one-parameter group of isometries generated by xi, to first order
        R = np.eye(5)
        R[:4, :4] += t * xi.T
        return mul(a, t * xi.translation, R @ p)

    field = (flow(h) - flow(-h)) / (2 * h)
    coords_in_frame = np.linalg.solve(frame(a, p), field)
    assert abs(coords_in_frame @ Y - killing_to_integral(a, xi).value(TangentState(p, Y))) <= 1e-8


def test_linear_combination_and_custom():
    a = heisenberg_algebra(1)
    s = sample_states(a, 20, seed=0)
    E, fz = Energy(a), f_Z1(a)
    comb = LinearCombination(a, [(2.0, E), (-1.0, fz)])
    np.testing.assert_allclose(comb.value(s), 2 * E.value(s) - fz.value(s))
    U, V = comb.grad(s)
    np.testing.assert_allclose(V, 2 * s.Y - a.vec(z=[1.0]))
    c = Custom(a, E.value)
    nU, nV = c.grad(s)
    assert np.abs(nV - s.Y).max() <= 1e-8


def test_butler_annihilator_examples():
    a = heisenberg_algebra(2)
    lam = np.array([0.3, 1.0, -2.0, 0.5, 1.5])
    B = butler_annihilator(a, lam)
    assert B.shape[1] == 1
    np.testing.assert_array_equal(B[:, 0], a.vec(z=[1.0]))
    assert butler_annihilator(a, np.array([1.0, 2, 3, 4, 0])).shape[1] == 5


def test_butler_predicate_heisenberg_and_free():
    for n in (1, 2, 3):
        assert not butler_predicate(heisenberg_algebra(n), samples=100).non_integrable
    res = butler_predicate(free_algebra_3(), samples=100)
    assert res.non_integrable and res.min_dim == 4


def test_butler_predicate_false_for_two_dimensional_centre(rng):
    # [n_lambda, n_mu] is orthogonal to both central parts, so dim z = 2 cannot obstruct
    for _ in range(3):
        j = rng.normal(size=(2, 5, 5))
        j = j - j.transpose(0, 2, 1)
        a = Algebra2Step(j, np.eye(7))
        assert not butler_predicate(a, samples=50, seed=1).non_integrable
