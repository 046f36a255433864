import numpy as np
import pytest

from hsp.errors import DimensionError
from hsp.geometry import (
    Layout,
    extended_invariance_residuals,
    metric_forms,
    symplectic_residual,
    two_form_eval,
)


def basis(i, size=4):
    u = np.zeros(size)
    u[i] = 1.0
    return u


def test_layout_indices():
    lay = Layout(2)
    assert (lay.dim, lay.ext_dim, lay.e, lay.t) == (4, 6, 4, 5)
    assert lay.p == slice(0, 2) and lay.q == slice(2, 4)
    assert Layout.from_ext_dim(6) == lay
    assert Layout.from_phase_dim(4) == lay


@pytest.mark.parametrize("bad", [0, -1, 1.5, True])
def test_layout_rejects_bad_n(bad):
    with pytest.raises(DimensionError):
        Layout(bad)


def test_reduced_form_n1():
    forms = metric_forms(1)
    np.testing.assert_array_equal(forms.zeta0, [[0, 1], [-1, 0]])


def test_time_form_n1():
    eta0 = metric_forms(1).eta0
    expected = np.zeros((4, 4))
    expected[3, 3] = 1.0
    np.testing.assert_array_equal(eta0, expected)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_reduced_form_squares_to_minus_one(n):
    z = metric_forms(n).zeta0
    np.testing.assert_array_equal(z @ z, -np.eye(2 * n))


def test_forms_are_read_only():
    forms = metric_forms(2)
    with pytest.raises(ValueError):
        forms.zeta[0, 0] = 1.0


def test_two_form_values():
    forms = metric_forms(1)
    assert two_form_eval(forms, basis(0), basis(1)) == 1.0
    assert two_form_eval(forms, basis(2), basis(3)) == -1.0
    u = np.array([0.3, -1.2, 2.0, 0.5])
    assert two_form_eval(forms, u, u) == 0.0


def test_two_form_dimension_mismatch():
    with pytest.raises(DimensionError):
        two_form_eval(metric_forms(1), np.zeros(3), np.zeros(4))


def test_symplectic_residual_examples():
    forms = metric_forms(1)
    assert symplectic_residual(np.eye(2), forms) == 0.0
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert symplectic_residual(rot, forms) < 1e-15
    # M^T zeta0 M = 4 zeta0
    assert symplectic_residual(np.diag([2.0, 2.0]), forms) == 3.0


def test_extended_residuals():
    forms = metric_forms(1)
    assert extended_invariance_residuals(np.eye(4), forms) == (0.0, 0.0)
    j = np.eye(4)
    j[3, 3] = 2.0
    sym, deg = extended_invariance_residuals(j, forms)
    assert deg == 3.0
    assert sym == 1.0


def test_extended_residuals_shape_check():
    with pytest.raises(DimensionError):
        extended_invariance_residuals(np.eye(5), metric_forms(1))
