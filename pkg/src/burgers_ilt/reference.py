"""Reference solutions: the two classical test problems and an FD baseline."""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .engine import SolutionTable, SpaceTimeGrid
from .ilt import Status
from .problem import BurgersProblem, DomainError, InitialProfile, validate
from .quadrature import QuadratureSpec, integrate

PI = math.pi


class FdInstabilityError(ArithmeticError):
    pass


# {{{ example 1: rational-trigonometric closed form

@dataclass(frozen=True)
class Example1Params:
    a_sq: float
    sigma: float

    def __post_init__(self):
        if not self.a_sq > 0:
            raise DomainError("a_sq must be positive")
        if not abs(self.sigma) > 1:
            raise DomainError("need |sigma| > 1 so the denominator never vanishes")


def example1_w0(params):
    a_sq, sigma = params.a_sq, params.sigma

    def w0(x):
        x = np.asarray(x, dtype=float)
        return 2 * a_sq * PI * np.sin(PI * x) / (sigma + np.cos(PI * x))
    return w0


def example1_problem(a_sq, sigma, T=1.0):
    params = Example1Params(a_sq, sigma)
    return BurgersProblem(a_sq, 0.0, 1.0, 0.0, 0.0,
                          InitialProfile(example1_w0(params), name="example1"), T)


def example1_exact(x, t, params):
    """``2 a^2 pi e^{-pi^2 a^2 t} sin(pi x) / (sigma + e^{-pi^2 a^2 t} cos(pi x))``."""
    x = np.asarray(x, dtype=float)
    decay = np.exp(-PI ** 2 * params.a_sq * np.asarray(t, dtype=float))
    return (2 * params.a_sq * PI * decay * np.sin(PI * x)
            / (params.sigma + decay * np.cos(PI * x)))[()]


def example1_heat(x, t, params, u00=1.0):
    """Heat-equation solution ``u = u00 (sigma + e^{-pi^2 a^2 t} cos(pi x)) / (sigma + 1)``."""
    decay = np.exp(-PI ** 2 * params.a_sq * np.asarray(t, dtype=float))
    return u00 * (params.sigma + decay * np.cos(PI * np.asarray(x))) / (params.sigma + 1)


def example1_pdomain(x, p, params, u00=1.0):
    """Laplace transforms ``(U, U_x)`` of :func:`example1_heat`."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=complex)
    a_sq, sigma = params.a_sq, params.sigma
    k = PI ** 2 * a_sq
    U = u00 * (k * sigma + np.cos(PI * x) * p + p * sigma) / ((sigma + 1) * p * (k + p))
    Ux = -u00 * np.sin(PI * x) * PI / ((sigma + 1) * (k + p))
    return U[()], Ux[()]


def example1_boundary_vector(p, params, u00=1.0):
    """``(U(0), U_x(0), U(1), U_x(1))`` in closed form."""
    p = np.asarray(p, dtype=complex)
    a_sq, sigma = params.a_sq, params.sigma
    k = PI ** 2 * a_sq
    den = (k + p) * p * (sigma + 1)
    zero = np.zeros_like(p)
    return np.stack([u00 * (k * sigma + p * sigma + p) / den, zero,
                     u00 * (k * sigma + p * sigma - p) / den, zero])

# }}}


# {{{ example 2: sine initial profile, Cole's series

def example2_w0(x):
    return np.sin(PI * np.asarray(x, dtype=float))


def example2_problem(a_sq, T=1.0):
    return BurgersProblem(a_sq, 0.0, 1.0, 0.0, 0.0,
                          InitialProfile(example2_w0, name="example2"), T)


def example2_theta(xi, a_sq):
    return (np.cos(PI * xi) - 1.0) / (2 * a_sq * PI)


@dataclass(frozen=True)
class ColeSeriesParams:
    a_sq: float
    n_terms: int = 20
    quad: QuadratureSpec = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13)

    def __post_init__(self):
        if not self.a_sq > 0:
            raise DomainError("a_sq must be positive")
        if self.n_terms < 1:
            raise DomainError("n_terms must be >= 1")


@lru_cache(maxsize=32)
def cole_coefficients(params):
    """``c_0 .. c_N`` of the cosine expansion of ``exp(theta(x))`` on ``[0, 1]``."""
    n = np.arange(params.n_terms + 1)

    def f(x):
        return np.exp(example2_theta(x, params.a_sq))[:, None] * np.cos(PI * np.outer(x, n))

    c = 2.0 * np.asarray(integrate(f, 0.0, 1.0, params.quad).value)
    c[0] *= 0.5
    if not c[0] > 0:
        raise ArithmeticError("c_0 must be positive")
    return c


def cole_series(x, t, params):
    """Cole's series solution of example 2, truncated at ``n_terms``."""
    c = cole_coefficients(params)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    n = np.arange(1, params.n_terms + 1)
    damp = c[1:] * np.exp(-np.multiply.outer(t, n ** 2) * PI ** 2 * params.a_sq)
    arg = PI * np.multiply.outer(x, n)
    num = np.sum(damp * n * np.sin(arg), axis=-1)
    den = c[0] + np.sum(damp * np.cos(arg), axis=-1)
    return (2 * PI * params.a_sq * num / den)[()]


def example2_pdomain(x, p, a_sq, u00=1.0, spec=QuadratureSpec()):
    """``(U, U_x)`` for example 2 from the endpoint-image decomposition.

    With ``E(y) = exp(-y sqrt(p) / a)`` and
    ``I_pm(l, r) = int_l^r exp(+-xi sqrt(p)/a + theta(xi)) dxi``::

        K   = -u00 / (2 a sqrt(p) (E(2) - 1))
        U   = K [I_-(0,1) (E(2-x) + E(x)) + I_+(0,1) (E(2+x) + E(2-x))] + R
        U_x = (sqrt(p)/a) K [I_-(0,1) (E(2-x) - E(x))
                             + I_+(0,1) (E(2-x) - E(2+x))] + R_x
        R   = u00/(2 a sqrt(p)) [E(x) I_+(0,x) + E(-x) I_-(x,1)]
        R_x = -u00/(2 a^2) [E(x) I_+(0,x) - E(-x) I_-(x,1)]

    Scalar ``x`` and ``p``; integrals by adaptive quadrature.
    """
    a = math.sqrt(a_sq)
    p = complex(p)
    x = float(x)
    s = np.sqrt(p)

    def E(y):
        return np.exp(-y * s / a)

    def I(lo, hi, sign):
        res = integrate(lambda xi: np.exp(sign * xi * s / a + example2_theta(xi, a_sq)),
                        lo, hi, spec)
        return complex(res.value)

    K = -u00 / (2 * a * s * (E(2.0) - 1.0))
    minus, plus = I(0.0, 1.0, -1), I(0.0, 1.0, +1)
    left, right = I(0.0, x, +1), I(x, 1.0, -1)
    R = u00 / (2 * a * s) * (E(x) * left + E(-x) * right)
    Rx = -u00 / (2 * a_sq) * (E(x) * left - E(-x) * right)
    U = K * (minus * (E(2 - x) + E(x)) + plus * (E(2 + x) + E(2 - x))) + R
    Ux = s / a * K * (minus * (E(2 - x) - E(x)) + plus * (E(2 - x) - E(2 + x))) + Rx
    return U, Ux

# }}}


# {{{ finite differences

@dataclass(frozen=True)
class FdScheme:
    """Crank-Nicolson diffusion with explicit centered conservative convection."""

    dx: float = 0.01
    dt: float = 0.001

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("dx and dt must be positive")


class _CrankNicolson:
    """Factorized ``I - (a^2 dt / 2) D2`` on the interior nodes, one per step size."""

    def __init__(self, a_sq, dx, n_interior):
        self.a_sq = a_sq
        self.dx = dx
        self.n = n_interior
        self._factors = {}

    def factor(self, dt):
        if dt not in self._factors:
            r = self.a_sq * dt / (2 * self.dx ** 2)
            band = np.empty((2, self.n))
            band[0] = -r
            band[1] = 1 + 2 * r
            self._factors[dt] = (r, cholesky_banded(band))
        return self._factors[dt]

    def step(self, w, dt, alpha1, alpha2):
        r, chol = self.factor(dt)
        inner = w[1:-1]
        flux = 0.5 * w * w
        conv = (flux[2:] - flux[:-2]) / (2 * self.dx)
        rhs = inner + r * (w[2:] - 2 * inner + w[:-2]) - dt * conv
        rhs[0] += r * alpha1
        rhs[-1] += r * alpha2
        out = np.empty_like(w)
        out[0], out[-1] = alpha1, alpha2
        out[1:-1] = cho_solve_banded((chol, False), rhs)
        return out


def fd_solve(problem, scheme=FdScheme(), times=None, xs=None):
    """Finite-difference baseline on a uniform mesh.

    Diffusion is Crank-Nicolson (one banded Cholesky solve per step), the
    convective flux ``w^2/2`` is differenced centrally and treated explicitly,
    and the end nodes are pinned to the Dirichlet values.  Output is recorded
    at ``times`` (default: every step; steps are shortened to land on them)
    and linearly interpolated to ``xs`` (default: the mesh).
    """
    validate(problem)
    n = int(round(problem.length / scheme.dx))
    if n < 2:
        raise ValueError("mesh needs at least two cells")
    mesh = np.linspace(problem.l1, problem.l2, n + 1)
    dx = mesh[1] - mesh[0]
    w0 = problem.w0 if isinstance(problem.w0, InitialProfile) else InitialProfile(problem.w0)
    w = np.asarray(w0(mesh), dtype=float).copy()
    w[0], w[-1] = problem.alpha1, problem.alpha2

    bound = max(np.max(np.abs(w)), abs(problem.alpha1), abs(problem.alpha2))
    if scheme.dt > dx * dx / (2 * bound * dx + np.finfo(float).eps):
        warnings.warn(f"dt = {scheme.dt:g} exceeds the advisory convective limit",
                      stacklevel=2)
    spread = max(np.ptp(w), np.max(np.abs(w)), np.finfo(float).tiny)

    if times is None:
        steps = int(round(problem.T / scheme.dt))
        times = scheme.dt * np.arange(1, steps + 1)
    times = np.asarray(times, dtype=float)
    out_x = mesh if xs is None else np.asarray(xs, dtype=float)

    cn = _CrankNicolson(problem.a_sq, dx, n - 1)
    rows = np.empty((times.size, out_x.size))
    t = 0.0
    for k, target in enumerate(times):
        while target - t > 1e-12 * max(1.0, target):
            dt = min(scheme.dt, target - t)
            if target - (t + dt) < 1e-9 * scheme.dt:
                dt = target - t
            w = cn.step(w, dt, problem.alpha1, problem.alpha2)
            t = target if dt == target - t else t + dt
            peak = np.max(np.abs(w))
            if not np.isfinite(peak) or peak > 10 * spread:
                raise FdInstabilityError(
                    f"max|w| = {peak:.3e} at t = {t:.6g} exceeds 10x the initial range")
        rows[k] = np.interp(out_x, mesh, w)

    grid = SpaceTimeGrid(out_x, times)
    status = np.full(rows.shape, Status.OK, dtype=np.int8)
    return SolutionTable(grid, rows, status,
                         {"solver": "fd", "config": {"dx": scheme.dx, "dt": scheme.dt}})

# }}}
