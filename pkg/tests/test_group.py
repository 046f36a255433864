import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import hsp.group as G
from hsp.errors import (
    DecompositionError,
    DimensionError,
    NotConnectedComponentError,
    NotHeisenbergError,
    NotOrthogonalError,
    NotSymplecticError,
    StructureError,
)
from hsp.geometry import extended_invariance_residuals, metric_forms

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=1, max_value=3)


def close(a, b, tol=1e-12):
    return G.field_distance(a, b) <= tol


# --- construction and realization --------------------------------------------

def test_identity_element():
    g = G.make_element(np.eye(2), np.zeros(2), 0.0)
    assert close(g, G.identity(1), 0.0)
    np.testing.assert_array_equal(G.to_matrix(G.identity(2)), np.eye(6))


def test_quarter_turn_is_symplectic():
    g = G.make_element([[0, 1], [-1, 0]], [0, 0], 0.0)
    assert g.n == 1


def test_non_symplectic_rejected():
    with pytest.raises(NotSymplecticError):
        G.make_element(np.diag([2.0, 2.0]))


def test_shape_mismatch_rejected():
    with pytest.raises(DimensionError):
        G.make_element(np.eye(2), np.zeros(3))


def test_e_row_of_pure_force():
    m = G.to_matrix(G.heisenberg(f=[1.0], v=[0.0]))
    # e-row reads (v, -f, 1, r)
    np.testing.assert_array_equal(m[2], [0.0, -1.0, 1.0, 0.0])


def test_e_row_general():
    m = G.to_matrix(G.heisenberg(f=[2.0], v=[3.0], r=5.0))
    np.testing.assert_array_equal(m[2], [3.0, -2.0, 1.0, 5.0])
    np.testing.assert_array_equal(m[:2, 3], [2.0, 3.0])


def test_from_matrix_roundtrip():
    g = G.random_element(2, 7)
    assert close(G.from_matrix(G.to_matrix(g)), g, 0.0)


def test_from_matrix_time_reversal():
    m = np.eye(4)
    m[3, 3] = -1.0
    with pytest.raises(NotConnectedComponentError):
        G.from_matrix(m)


def test_from_matrix_t_row_violation():
    m = np.eye(4)
    m[3, 1] = 0.5
    with pytest.raises(StructureError):
        G.from_matrix(m)


def test_from_matrix_c_row_violation():
    m = G.to_matrix(G.heisenberg(f=[1.0], v=[2.0]))
    m[2, 0] += 0.1
    with pytest.raises(StructureError):
        G.from_matrix(m)


def test_from_matrix_nonsymplectic_block():
    m = np.eye(4)
    m[0, 0] = 2.0
    with pytest.raises(NotSymplecticError):
        G.from_matrix(m)


def test_dict_roundtrip():
    g = G.random_element(2, 3)
    d = G.element_to_dict(g)
    assert close(G.element_from_dict(d), g, 0.0)
    d["sigma"] = np.asarray(d["sigma"]).ravel().tolist()
    assert close(G.element_from_dict(d), g, 0.0)


# --- group law -----------------------------------------------------------------

def test_force_then_boost():
    g = G.compose(G.heisenberg(f=[1.0], v=[0.0]), G.heisenberg(f=[0.0], v=[1.0]))
    np.testing.assert_array_equal(g.w, [1.0, 1.0])
    assert g.r == -1.0


def test_boost_then_force():
    g = G.compose(G.heisenberg(f=[0.0], v=[1.0]), G.heisenberg(f=[1.0], v=[0.0]))
    np.testing.assert_array_equal(g.w, [1.0, 1.0])
    assert g.r == 1.0


def test_inverse_of_heisenberg():
    h = G.heisenberg(f=[1.0, -2.0], v=[0.5, 3.0], r=4.0)
    expected = G.heisenberg(f=[-1.0, 2.0], v=[-0.5, -3.0], r=-4.0)
    assert close(G.inverse(h), expected, 0.0)


def test_inverse_of_identity():
    assert close(G.inverse(G.identity(3)), G.identity(3), 0.0)


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        G.compose(G.identity(1), G.identity(2))


def test_matmul_operator():
    a, b = G.random_element(1, 1), G.random_element(1, 2)
    assert close(a @ b, G.compose(a, b), 0.0)


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_compose_matches_matrix_product(n, seed):
    rng = np.random.default_rng(seed)
    a, b = G.random_element(n, rng), G.random_element(n, rng)
    np.testing.assert_allclose(G.to_matrix(G.compose(a, b)), G.to_matrix(a) @ G.to_matrix(b),
                               rtol=0, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_associativity_and_inverse(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (G.random_element(n, rng) for _ in range(3))
    assert close(G.compose(G.compose(a, b), c), G.compose(a, G.compose(b, c)), 1e-11)
    assert close(G.compose(a, G.inverse(a)), G.identity(n))
    assert close(G.compose(G.inverse(a), a), G.identity(n))


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_realization_preserves_forms(n, seed):
    g = G.random_element(n, seed)
    sym, deg = extended_invariance_residuals(G.to_matrix(g), metric_forms(n))
    assert sym <= 1e-12 and deg <= 1e-12


# --- subgroups -----------------------------------------------------------------

def test_heisenberg_on_pure_dt():
    h = G.heisenberg(f=[0.0], v=[1.0])
    np.testing.assert_array_equal(G.apply_differential(h, [0, 0, 0, 1]), [0, 1, 0, 1])


def test_heisenberg_energy_row():
    h = G.heisenberg(f=[2.0], v=[3.0], r=5.0)
    assert G.apply_differential(h, [1, 1, 0, 0])[2] == 1.0


def test_heisenberg_on_dt_general():
    h = G.heisenberg(f=[1.5, -2.0], v=[0.25, 4.0], r=-3.0)
    out = G.apply_differential(h, [0, 0, 0, 0, 0, 1])
    np.testing.assert_array_equal(out, [1.5, -2.0, 0.25, 4.0, -3.0, 1.0])


def test_heisenberg_from_vfp():
    vfp = G.VelocityForcePower(v=[1.0], f=[2.0], r=3.0)
    h = G.heisenberg(vfp)
    assert (h.f[0], h.v[0], h.r) == (2.0, 1.0, 3.0)
    assert G.VelocityForcePower.from_element(h) == vfp


def test_zero_heisenberg_is_identity():
    assert close(G.heisenberg(f=[0.0], v=[0.0]), G.identity(1), 0.0)


def test_apply_differential_batched():
    g = G.random_element(2, 0)
    dz = np.random.default_rng(1).normal(size=(5, 6))
    np.testing.assert_allclose(G.apply_differential(g, dz), dz @ G.to_matrix(g).T)


def test_rotation_element():
    assert close(G.rotation_element(np.eye(2)), G.identity(2), 0.0)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    g = G.rotation_element(rot)
    assert G.classify(g)["special_orthogonal"]


def test_reflection_accepted_but_flagged():
    g = G.rotation_element(np.diag([1.0, -1.0]))
    labels = G.classify(g)
    assert labels["rotation"] and not labels["special_orthogonal"]


def test_rotation_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalError):
        G.rotation_element(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_galilei_boost():
    assert close(G.galilei_boost([0.0]), G.identity(1), 0.0)
    out = G.apply_differential(G.galilei_boost([2.0]), [1, 0, 0, 0])
    assert out[2] == 2.0
    assert G.classify(G.galilei_boost([1.0, 2.0]))["inertial"]


def test_classify_labels():
    labels = G.classify(G.heisenberg(f=[1.0], v=[0.0]))
    assert labels["heisenberg"] and not labels["symplectic"] and not labels["inertial"]
    sym = G.symplectic_element([[2.0, 0.0], [0.0, 0.5]])
    labels = G.classify(sym)
    assert labels["symplectic"] and not labels["rotation"]


def test_semidirect_split():
    g = G.random_element(2, 11)
    assert close(G.compose(G.heisenberg_part(g), G.symplectic_part(g)), g)


# --- normality ----------------------------------------------------------------

def test_conjugation_by_identity():
    h = G.heisenberg(f=[1.0], v=[2.0], r=3.0)
    assert close(G.conjugate_heisenberg(G.identity(1), h), h, 0.0)


def test_conjugation_shifts_centre_by_two():
    g = G.heisenberg(f=[1.0], v=[0.0])
    h = G.heisenberg(f=[0.0], v=[1.0])
    c = G.conjugate_heisenberg(g, h)
    np.testing.assert_array_equal(c.w, h.w)
    assert abs(c.r - h.r) == 2.0


def test_conjugation_requires_heisenberg():
    with pytest.raises(NotHeisenbergError):
        G.conjugate_heisenberg(G.identity(1), G.random_element(1, 0))


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_conjugation_closed_form(n, seed):
    rng = np.random.default_rng(seed)
    g = G.random_element(n, rng)
    h = G.heisenberg_part(G.random_element(n, rng))
    c = G.conjugate_heisenberg(g, h)
    assert np.max(np.abs(c.sigma - np.eye(2 * n))) <= 1e-12
    assert close(c, G.conjugate_heisenberg_closed_form(g, h), 1e-11)


# --- algebra ------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_basis_brackets_from_matrices(n):
    """Commutators of the realization matrices: [W_a, W_b] = -2 zeta0_ab U."""
    basis = G.algebra_basis(n)
    zeta0 = metric_forms(n).zeta0
    u = basis[-1]
    for a in range(2 * n):
        for b in range(2 * n):
            br = G.bracket(basis[a], basis[b])
            assert not np.any(br.s) and not np.any(br.w)
            assert br.r == -2 * zeta0[a, b]
        assert G.bracket(basis[a], u).r == 0.0
        assert not np.any(G.bracket(basis[a], u).w)
    assert G.bracket(u, u).r == 0.0


def test_n1_basis_bracket_value():
    w1, w2, u = G.algebra_basis(1)
    assert G.bracket(w1, w2).r == -2.0
    assert G.bracket(w2, w1).r == 2.0


def test_bracket_with_self_vanishes():
    x = G.random_algebra_element(2, np.random.default_rng(0))
    br = G.bracket(x, x)
    assert not np.any(br.s) and not np.any(br.w) and br.r == 0.0


def test_bracket_of_pure_s_elements():
    rng = np.random.default_rng(5)
    x, y = (G.random_algebra_element(2, rng) for _ in range(2))
    x0 = G.HspAlgebraElement(x.s, np.zeros(4), 0.0)
    y0 = G.HspAlgebraElement(y.s, np.zeros(4), 0.0)
    br = G.bracket(x0, y0)
    assert not np.any(br.w) and br.r == 0.0
    np.testing.assert_allclose(br.s, x.s @ y.s - y.s @ x.s)


def test_algebra_from_matrix_rejects_outsider():
    x = np.zeros((4, 4))
    x[0, 0] = 1.0
    with pytest.raises(DecompositionError):
        G.HspAlgebraElement.from_matrix(x)


def test_exp_of_zero_and_nilpotent():
    zero = G.HspAlgebraElement(np.zeros((2, 2)), np.zeros(2), 0.0)
    assert close(G.exp_algebra(zero), G.identity(1), 0.0)
    x = G.HspAlgebraElement(np.zeros((4, 4)), np.array([1.0, -2.0, 0.5, 3.0]), 0.7)
    g = G.exp_algebra(x)
    np.testing.assert_array_equal(g.w, x.w)
    assert g.r == 0.7
    from scipy.linalg import expm
    np.testing.assert_allclose(G.to_matrix(g), expm(x.matrix()), atol=1e-14)


def test_exp_of_rotation_generator():
    th = 0.4
    x = G.HspAlgebraElement(th * np.array([[0.0, 1.0], [-1.0, 0.0]]), np.zeros(2), 0.0)
    expected = [[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]]
    np.testing.assert_allclose(G.exp_algebra(x).sigma, expected, atol=1e-15)


def test_random_element_determinism():
    a, b = G.random_element(2, 42), G.random_element(2, 42)
    assert close(a, b, 0.0)
    assert close(G.random_element(3, 1, scale=0.0), G.identity(3), 0.0)


def test_random_elements_in_group():
    rng = np.random.default_rng(0)
    forms = metric_forms(2)
    worst = 0.0
    for _ in range(1000):
        worst = max(worst, *extended_invariance_residuals(G.to_matrix(G.random_element(2, rng)), forms))
    assert worst <= 1e-12


# --- central discrepancy ---------------------------------------------------------

def test_discrepancy_orthogonal_is_zero():
    assert G.central_discrepancy([1.0, 0.0], [0.0, 1.0]) == 0.0


def test_discrepancy_magnitude():
    assert abs(G.central_discrepancy([1.0], [1.0])) == 2.0
    assert G.central_discrepancy([1.0], [1.0]) == -2.0


@settings(max_examples=100, deadline=None)
@given(
    f=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    v=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    a=st.floats(-5, 5),
)
def test_discrepancy_bilinear(f, v, a):
    f, v = np.array(f), np.array(v)
    d = G.central_discrepancy(f, v)
    assert d == pytest.approx(-2.0 * f @ v, abs=1e-12)
    assert G.central_discrepancy(a * f, v) == pytest.approx(a * d, abs=1e-11)
    assert G.central_discrepancy(f, a * v) == pytest.approx(a * d, abs=1e-11)
