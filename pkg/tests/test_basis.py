import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apdec.basis import FESpace, bernstein, eval_basis, eval_grad, quadrature
from apdec.mesh import build_mesh_2d, build_uniform_1d, disk_mesh


def test_linear_hat_midpoint():
    np.testing.assert_allclose(eval_basis(1, 0.5), [0.5, 0.5])


def test_quadratic_endpoint_and_midpoint():
    np.testing.assert_allclose(eval_basis(2, 0.0), [1, 0, 0])
    np.testing.assert_allclose(eval_basis(2, 0.5), [0.25, 0.5, 0.25])


def test_linear_gradient_is_constant():
    for x in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(eval_grad(1, x)[:, 0], [-1, 1])


def test_quadratic_gradient_at_left_end():
    # d/dx of (1-x)^2, 2x(1-x), x^2 at x = 0
    np.testing.assert_allclose(eval_grad(2, 0.0)[:, 0], [-2, 2, 0])


def test_outside_reference_element():
    with pytest.raises(ValueError):
        eval_basis(2, 1.5)
    with pytest.raises(ValueError):
        eval_basis(1, [0.8, 0.8], dim=2)


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([1, 2, 3]))
def test_triangle_partition_of_unity(s, t, d):
    x = np.array([s * (1 - t), t]) if s + t > 1 else np.array([s, t])
    vals = eval_basis(d, x, dim=2)
    assert np.all(vals >= -1e-15)
    assert abs(vals.sum() - 1) < 1e-14
    np.testing.assert_allclose(eval_grad(d, x, dim=2).sum(axis=0), 0, atol=1e-13)


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_quadrature_exact_on_monomials(dim, d):
    lam, w = quadrature(dim, 2 * d)
    assert np.all(w > 0)
    if dim == 1:
        for k in range(2 * d + 1):
            assert abs(np.dot(w, lam[:, 1] ** k) - 1 / (k + 1)) < 1e-13
    else:
        from math import factorial
        for i in range(2 * d + 1):
            for j in range(2 * d + 1 - i):
                # weights are normalised to sum to one, i.e. twice the reference area
                exact = 2 * factorial(i) * factorial(j) / factorial(i + j + 2)
                assert abs(np.dot(w, lam[:, 1] ** i * lam[:, 2] ** j) - exact) < 1e-13 * max(exact, 1e-3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_quadrature_points_keep_partition(d):
    lam, _ = quadrature(2, 2 * d)
    np.testing.assert_allclose(bernstein(d, lam).sum(axis=1), 1, atol=1e-14)


def test_lumped_quadratic_cell():
    sp_ = FESpace(build_uniform_1d(0, 0.3, 1, periodic=False), 2)
    np.testing.assert_allclose(sp_.lumped, [0.1, 0.1, 0.1])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lumped_sums_to_domain(d):
    sp_ = FESpace(build_uniform_1d(0, 1, 7), d)
    assert abs(sp_.lumped.sum() - 1) < 1e-14
    assert np.all(sp_.lumped > 0)


def test_lumped_unit_right_triangle():
    sp_ = FESpace(build_mesh_2d([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]]), 1)
    np.testing.assert_allclose(sp_.lumped, 1 / 6)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_disk_lumped_positive(d):
    sp_ = FESpace(disk_mesh(1.0, 4), d)
    assert np.all(sp_.lumped > 0)
    assert abs(sp_.lumped.sum() - sp_.mesh.measure) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("mesh", [build_uniform_1d(0, 1, 9), disk_mesh(1.0, 3)], ids=["1d", "2d"])
def test_values_coefficients_round_trip(mesh, d, rng):
    sp_ = FESpace(mesh, d)
    v = rng.standard_normal((sp_.n_dofs, 3))
    np.testing.assert_allclose(sp_.to_values(sp_.from_values(v)), v, atol=1e-13)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_interpolation_reproduces_polynomials(d):
    sp_ = FESpace(disk_mesh(1.0, 3), d)

    def poly(p):
        return (1 + p[:, 0] - 2 * p[:, 1]) ** d

    c = sp_.interpolate(poly)
    pts = np.array([[0.1, 0.2], [-0.3, 0.5], [0.0, -0.6]])
    np.testing.assert_allclose(sp_.evaluate(c, pts), poly(pts), atol=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mass_and_advection_consistency(d):
    sp_ = FESpace(build_uniform_1d(0, 1, 5), d)
    ones = np.ones(sp_.n_dofs)
    np.testing.assert_allclose(sp_.mass @ ones, sp_.lumped, atol=1e-14)
    np.testing.assert_allclose(sp_.advection[0] @ ones, 0, atol=1e-12)
