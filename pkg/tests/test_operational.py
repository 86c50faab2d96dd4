import math

import numpy as np
import pytest

from burgers_ilt.operational import (
    Kernel, SingularSystemError, boundary_matrix, boundary_residuals, build_field,
    chi, growth_abscissa, r_transform, r_transform_dx, solve_boundary_system)
from burgers_ilt.problem import BurgersProblem, ReactionDiffusionProblem, to_reaction_diffusion
from burgers_ilt.reference import (
    Example1Params, example1_boundary_vector, example1_pdomain, example1_problem,
    example2_problem)

PI = math.pi
UNIT = Kernel(1.0)


def ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


def zeros(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def example2_phi(x):
    return np.exp((np.cos(PI * np.asarray(x)) - 1) / (2 * PI))


def rel(a, b):
    return np.max(np.abs(np.asarray(a) - b) / np.maximum(np.abs(b), 1e-300))


# {{{ kernel

def test_chi():
    assert chi(0.0, 3 - 7j, UNIT) == 1.0
    assert abs(chi(1.0, 4.0, UNIT) - math.exp(-2)) < 1e-16
    expected = np.exp(-(1 + 1j) / math.sqrt(2))
    assert abs(chi(1.0, 1j, UNIT) - expected) < 1e-15
    assert abs(chi(1.0, 1j, UNIT) - (0.374853 - 0.320316j)) < 1e-6


def test_principal_root():
    p = np.array([-4 + 1e-300j, -4 - 1e-300j, 1j, -1j, 2.0])
    s = Kernel(1.0, 0.0).root(p)
    assert np.all(s.real >= 0)
    assert abs(Kernel(2.0, 3.0).root(1.0) - 2.0) < 1e-15

# }}}


# {{{ convolution term

def test_r_zero_profile():
    assert r_transform(0.3, 2 + 1j, zeros, None, UNIT, 0, 1) == 0


@pytest.mark.parametrize("p", [0.5, 1.0, 4.0, 30.0])
def test_r_unit_profile_at_end(p):
    # int_0^1 exp(-xi sqrt p) / (2 sqrt p) dxi
    expected = (1 - math.exp(-math.sqrt(p))) / (2 * p)
    assert abs(r_transform(0.0, p, ones, None, UNIT, 0, 1) - expected) < 1e-15


def test_r_dx_symmetric_interval():
    assert abs(r_transform_dx(0.5, 3 + 2j, ones, None, UNIT, 0, 1)) < 1e-15
    assert r_transform_dx(0.2, 3.0, zeros, None, UNIT, 0, 1) == 0


def test_r_dx_finite_difference():
    h = 1e-4
    fd = (r_transform(0.4 + h, 2.0, example2_phi, None, UNIT, 0, 1)
          - r_transform(0.4 - h, 2.0, example2_phi, None, UNIT, 0, 1)) / (2 * h)
    exact = r_transform_dx(0.4, 2.0, example2_phi, None, UNIT, 0, 1)
    assert abs(fd - exact) < 1e-6


def test_r_broadcasts():
    xs = np.linspace(0, 1, 5)[:, None]
    ps = np.array([1.0, 2 + 3j, 7 - 1j])[None, :]
    grid = r_transform(xs, ps, example2_phi, None, UNIT, 0, 1)
    assert grid.shape == (5, 3)
    assert grid[2, 1] == pytest.approx(
        r_transform(0.5, 2 + 3j, example2_phi, None, UNIT, 0, 1), rel=1e-12)

# }}}


# {{{ boundary system

def test_boundary_vector_example1():
    params = Example1Params(1.0, 2.0)
    field = build_field(example1_problem(1.0, 2.0))
    ps = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
    got = np.array(field.coefficients(ps).as_array())
    expected = example1_boundary_vector(ps, params)
    assert rel(got[[0, 2]], expected[[0, 2]]) < 1e-12
    assert np.max(np.abs(got[[1, 3]])) < 1e-15


def test_boundary_vector_value_p1():
    field = build_field(example1_problem(1.0, 2.0))
    U_l1 = field.coefficients(1.0).U_l1
    assert abs(U_l1 - (2 * PI ** 2 + 3) / (3 * (PI ** 2 + 1))) < 1e-14


def test_homogeneous_system_zero():
    rd = ReactionDiffusionProblem(1.0, 0.0, 0.0, 1.0, (1.0, 2.0), (0.0, 2.0), zeros)
    co = solve_boundary_system(2 + 1j, rd, 0.0, 0.0)
    assert np.all(np.asarray(co.as_array()) == 0)


def test_singular_system_detected():
    # pure Neumann has a zero eigenvalue: the system is singular at p = 0
    rd = ReactionDiffusionProblem(1.0, 0.0, 0.0, 1.0, (0.0, 1.0), (0.0, 1.0), ones)
    with pytest.raises(SingularSystemError) as err:
        solve_boundary_system(1e-30, rd, 1.0, 1.0)
    assert err.value.cond > 1e13


def test_matrix_rows():
    rd = ReactionDiffusionProblem(4.0, 0.0, 0.0, 1.0, (1.0, 2.0), (3.0, 4.0), ones)
    m = boundary_matrix(4.0, rd)
    c = math.exp(-1.0)
    expected = [[1, 2, 0, 0], [0, 0, 3, 4], [0.5, 0.5, -c / 2, -c / 2],
                [-c / 2, c / 2, 0.5, -0.5]]
    assert np.allclose(m, expected, atol=1e-16)

# }}}


# {{{ field

@pytest.mark.parametrize("x,p", [(0.5, 1.0), (0.2, 3 + 4j), (0.9, 0.7 - 12j)])
def test_field_example1_closed_form(x, p):
    params = Example1Params(1.0, 2.0)
    U, Ux = build_field(example1_problem(1.0, 2.0)).evaluate(x, p)
    U_ref, Ux_ref = example1_pdomain(x, p, params)
    assert abs(U - U_ref) <= 1e-12 * abs(U_ref)
    assert abs(Ux - Ux_ref) <= 1e-11 * abs(Ux_ref)


def test_field_example1_values_p1():
    U, Ux = build_field(example1_problem(1.0, 2.0)).evaluate(0.5, 1.0)
    assert abs(U - 2 / 3) < 1e-14
    assert abs(Ux + PI / (3 * (PI ** 2 + 1))) < 1e-14


def test_zero_profile_field():
    rd = ReactionDiffusionProblem(1.0, 0.0, 0.0, 1.0, (1.0, 2.0), (0.0, 2.0), zeros)
    U, Ux = build_field(rd).grid(np.linspace(0, 1, 4), [1.0, 2 + 1j])
    assert np.all(U == 0) and np.all(Ux == 0)
    assert boundary_residuals(build_field(rd), 2 + 1j) == (0, 0)


def test_residuals_example1_contour():
    field = build_field(example1_problem(1.0, 2.0))
    ps = 10.36 + 1j * PI * np.arange(41) / 2.0
    r1, r2 = boundary_residuals(field, ps)
    U = field.eval_U(np.array([0.0, 1.0]), ps[:, None])
    scale = np.max(np.abs(U), axis=1)
    assert np.max(np.abs(r1) / scale) < 1e-10
    assert np.max(np.abs(r2) / scale) < 1e-10


def test_residuals_example2():
    field = build_field(example2_problem(1.0))
    r1, r2 = boundary_residuals(field, 2 + 3j)
    U = field.eval_U(np.array([0.0, 1.0]), 2 + 3j)
    assert max(abs(r1), abs(r2)) <= 1e-8 * np.max(np.abs(U))


def test_ode_residual_second_order():
    field = build_field(example2_problem(1.0))
    x, p = 0.37, 2.5

    def residual(h):
        U = field.eval_U(np.array([x - h, x, x + h]), p)
        d2 = (U[0] - 2 * U[1] + U[2]) / h ** 2
        return abs(-d2 + p * U[1] - example2_phi(x))

    r1, r2 = residual(2e-2), residual(1e-2)
    assert r2 < 1e-4
    assert 3.5 < r1 / r2 < 4.5


def test_linearity_in_data():
    c = 2.5 - 1.5j
    base = ReactionDiffusionProblem(1.0, 0.0, 0.0, 1.0, (0.0, 2.0), (0.0, 2.0), example2_phi)
    scaled = ReactionDiffusionProblem(1.0, 0.0, 0.0, 1.0, (0.0, 2.0), (0.0, 2.0),
                                      lambda x: c * example2_phi(x))
    xs = np.linspace(0, 1, 6)
    U0, Ux0 = build_field(base).grid(xs, [1.0, 3 + 2j])
    U1, Ux1 = build_field(scaled).grid(xs, [1.0, 3 + 2j])
    assert np.max(np.abs(U1 - c * U0)) < 1e-14 * np.max(np.abs(U0))
    assert np.max(np.abs(Ux1 - c * Ux0)) < 1e-13 * np.max(np.abs(U0))


def test_derivative_consistency():
    field = build_field(example2_problem(0.5))
    h = 1e-5
    for x, p in [(0.3, 2 + 1j), (0.8, 5 - 3j)]:
        fd = (field.eval_U(x + h, p) - field.eval_U(x - h, p)) / (2 * h)
        assert abs(fd - field.eval_Ux(x, p)) < 1e-8 * abs(field.eval_U(x, p))


def test_u00_scales_field():
    f1 = build_field(example2_problem(1.0), u00=1.0)
    f5 = build_field(example2_problem(1.0), u00=-3.0)
    U1, Ux1 = f1.evaluate(0.4, 2 + 1j)
    U5, Ux5 = f5.evaluate(0.4, 2 + 1j)
    assert abs(U5 + 3 * U1) < 1e-14 and abs(Ux5 + 3 * Ux1) < 1e-14

# }}}


# {{{ general reaction-diffusion path

def test_neumann_with_reaction():
    # u_t - a^2 u_xx + b u = 0, u_x = 0 at both ends, u(x, 0) = 1  ->  u = e^{-bt}
    rd = ReactionDiffusionProblem(0.5, 0.7, -1.0, 2.0, (0.0, 1.0), (0.0, 1.0), ones)
    ps = np.array([0.5, 3 + 4j])
    U, Ux = build_field(rd).grid(np.linspace(-1, 2, 7), ps)
    assert np.max(np.abs(U - 1 / (ps + 0.7))) < 1e-14
    assert np.max(np.abs(Ux)) < 1e-14


def test_dirichlet_data():
    # u = 1 everywhere: u(l_i, t) = 1 transforms to G_i = 1/p
    rd = ReactionDiffusionProblem(2.0, 0.0, 0.0, 1.0, (1.0, 0.0), (1.0, 0.0), ones,
                                  G1=lambda p: 1 / p, G2=lambda p: 1 / p)
    ps = np.array([1.0, 2 - 5j])
    U, Ux = build_field(rd).grid(np.linspace(0, 1, 5), ps)
    assert np.max(np.abs(U - 1 / ps)) < 1e-14
    assert np.max(np.abs(Ux)) < 1e-13


def test_robin_source_and_reaction():
    a_sq, b = 0.5, 0.7
    F = lambda xi, p: np.asarray(xi) / (p + 1)
    rd = ReactionDiffusionProblem(
        a_sq, b, -0.5, 1.5, (1.0, 0.5), (0.3, 1.0), lambda x: np.cos(np.asarray(x)),
        F=F, G1=lambda p: 1 / p, G2=lambda p: 2 / (p + 1))
    field = build_field(rd)
    p = 1.5 + 0.5j
    r1, r2 = boundary_residuals(field, p)
    assert max(abs(r1), abs(r2)) < 1e-13
    x, h = 0.4, 5e-3
    U = field.eval_U(np.array([x - h, x, x + h]), p)
    d2 = (U[0] - 2 * U[1] + U[2]) / h ** 2
    resid = -a_sq * d2 + (b + p) * U[1] - (math.cos(x) + F(x, p))
    assert abs(resid) < 1e-5

# }}}


# {{{ growth abscissa

def test_growth_abscissa_dirichlet_problem():
    # alpha = 0 gives Neumann heat data; the top eigenvalue is p = 0
    rd = build_field(example2_problem(1.0)).problem
    assert growth_abscissa(rd) <= 1e-8


def test_growth_abscissa_robin():
    # u + 2 u_x = 0 at both ends admits u = e^{-x/2}, and u_t = u_xx then
    # grows like e^{t/4}
    prob = BurgersProblem(1.0, 0.0, 1.0, 1.0, 1.0, ones)
    assert abs(growth_abscissa(to_reaction_diffusion(prob)) - 0.25) < 1e-10

# }}}
