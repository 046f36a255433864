import numpy as np
import pytest

from hsp.canonical import builtin_canonical_maps, linear_map, transform_hamiltonian
from hsp.errors import DimensionError, InvalidParamsError, InversionError, UnknownNameError
from hsp.geometry import metric_forms, symplectic_residual
from hsp.hamiltonians import catalog
from hsp.verify import trajectory_correspondence, verify_canonical_map

POINTS = np.array([[0.0, 0.0], [1.0, -2.0], [0.3, 0.7], [-1.5, 2.5]])


def test_identity_map():
    cmap = builtin_canonical_maps("identity")
    np.testing.assert_array_equal(cmap.jacobian(POINTS[1]), np.eye(2))
    H = catalog("harmonic", {"k": 2.0})
    Ht = transform_hamiltonian(H, cmap)
    np.testing.assert_array_equal(Ht.value(POINTS, 0.1), H.value(POINTS, 0.1))


def test_scaling_jacobian():
    cmap = builtin_canonical_maps("scaling", {"lam": 2.0})
    np.testing.assert_array_equal(cmap.jacobian(POINTS[0]), np.diag([2.0, 0.5]))
    assert symplectic_residual(cmap.jacobian(POINTS[0]), metric_forms(1)) == 0.0


def test_shear_jacobian():
    cmap = builtin_canonical_maps("shear", {"g": 1.0})
    np.testing.assert_array_equal(cmap.jacobian(POINTS[0]), [[1.0, 0.0], [1.0, 1.0]])
    assert symplectic_residual(cmap.jacobian(POINTS[0]), metric_forms(1)) == 0.0
    np.testing.assert_array_equal(cmap.forward([2.0, 1.0]), [2.0, 3.0])


def test_lambda_alias_and_errors():
    assert builtin_canonical_maps("scaling", {"lambda": 3.0}).params == {"lam": 3.0}
    with pytest.raises(InvalidParamsError):
        builtin_canonical_maps("scaling", {"lam": 0.0})
    with pytest.raises(UnknownNameError):
        builtin_canonical_maps("swirl")
    with pytest.raises(InvalidParamsError):
        builtin_canonical_maps("shear", {"theta": 1.0})
    with pytest.raises(InversionError):
        linear_map(np.zeros((2, 2)))


def test_scaled_free_particle():
    Ht = transform_hamiltonian(catalog("free"), builtin_canonical_maps("scaling", {"lam": 2.0}))
    pt = np.array([[-1.0, 0.0], [1.0, 1.0], [2.0, -1.0]])
    np.testing.assert_allclose(Ht.value(pt), pt[:, 0] ** 2 / 8.0, rtol=1e-15)


@pytest.mark.parametrize("name,params", [("scaling", {"lam": 2.0}), ("shear", {"g": 1.0}),
                                         ("phase_rotation", {"theta": 0.4})])
def test_transformed_gradient(name, params):
    H = catalog("harmonic", {"m": 1.5, "k": 0.7})
    cmap = builtin_canonical_maps(name, params)
    Ht = transform_hamiltonian(H, cmap)
    y = np.array([0.4, -0.9])
    h = 1e-6
    fd = [(Ht.value(y + h * e) - Ht.value(y - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(Ht.grad(y), fd, atol=1e-8)


def test_transform_dimension_mismatch():
    with pytest.raises(DimensionError):
        transform_hamiltonian(catalog("charged_uniform_B"), builtin_canonical_maps("shear"))


@pytest.mark.parametrize("name,params", [("identity", {}), ("scaling", {"lam": 2.0}), ("shear", {"g": 1.0}),
                                         ("phase_rotation", {"theta": 0.3})])
def test_builtin_maps_are_canonical(name, params):
    rep = verify_canonical_map(builtin_canonical_maps(name, params), POINTS)
    assert rep.passed
    assert rep.symplectic_residual <= 1e-15


def test_non_canonical_map_fails():
    # M^T zeta0 M = 2 zeta0, so the residual is 1
    rep = verify_canonical_map(linear_map(np.diag([2.0, 1.0])), POINTS)
    assert not rep.passed
    assert rep.symplectic_residual == 1.0


def test_phase_rotation_several_dimensions():
    cmap = builtin_canonical_maps("phase_rotation", {"theta": 0.9}, n=3)
    pts = np.random.default_rng(0).normal(size=(4, 6))
    assert verify_canonical_map(cmap, pts).passed


@pytest.mark.parametrize("hname", ["harmonic", "free"])
@pytest.mark.parametrize("mname", ["identity", "scaling", "shear"])
def test_trajectory_correspondence(hname, mname):
    cmap = builtin_canonical_maps(mname)
    res = trajectory_correspondence(catalog(hname), cmap, [0.5, 1.0], 0.0, 5.0, 1e-2)
    assert res["max_deviation"] <= 1e-12
