"""Exact Laplace-domain solution of the linear reaction-diffusion problem.

For ``u_t - a^2 u_xx + b u = f`` with Robin data on ``[l1, l2]`` the transform
``U(x, p)`` is the free-space convolution ``R(x, p)`` plus two exponentials
anchored at the endpoints.  Their amplitudes are the four boundary values
``U(l1), U_x(l1), U(l2), U_x(l2)``, fixed by a 4x4 linear system.  Square roots
use the principal branch throughout, so on any contour with ``Re(b+p) > 0``
every exponential decays.
"""

import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .problem import BurgersProblem, to_reaction_diffusion
from .quadrature import QuadratureSpec, integrate


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, p, cond):
        super().__init__(f"boundary system singular at p = {p} (cond = {cond:.3e})")
        self.p = p
        self.cond = cond


# condition number beyond which the 4x4 solve is reported as singular
SINGULAR_COND = 1e13

#: U_x samples below this multiple of ``|sqrt(b + p) U / a|`` are rounding noise
NOISE_FACTOR = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class Kernel:
    a: float
    b: float = 0.0

    def root(self, p):
        """Principal ``sqrt(b + p)``."""
        return np.sqrt(self.b + np.asarray(p, dtype=complex))


def chi(x, p, kernel):
    """``exp(-x sqrt(b + p) / a)``."""
    return np.exp(-np.asarray(x) * kernel.root(p) / kernel.a)


@dataclass
class BoundaryCoefficients:
    U_l1: complex
    Ux_l1: complex
    U_l2: complex
    Ux_l2: complex

    def as_array(self):
        return np.stack([np.asarray(v) for v in
                         (self.U_l1, self.Ux_l1, self.U_l2, self.Ux_l2)])


def _pad(arr, ndim):
    arr = np.asarray(arr)
    return arr.reshape((1,) * (ndim - arr.ndim) + arr.shape)


def _convolution_sides(x, p, phi, Fsrc, kernel, l1, l2, spec):
    """Left and right pieces of ``R(x, p)`` for broadcastable ``x`` and ``p``.

    The integral is split at the kink ``xi = x``.  Each piece is mapped onto
    ``tau in [0, 1]`` (``xi = l1 + (x - l1) tau`` on the left and
    ``xi = x + (l2 - x) tau`` on the right) so all ``(x, p)`` pairs share one
    adaptive tree.  Returns ``(left, right, converged)``.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=complex)
    shape = np.broadcast_shapes(x.shape, p.shape)
    nd = len(shape)
    xb = _pad(x, nd)[None]
    pb = _pad(p, nd)[None]
    s = kernel.root(pb)
    a = kernel.a
    left_len = xb - l1
    right_len = l2 - xb
    pre = 1.0 / (2.0 * a * s)

    def weight(xi):
        w = phi(xi)
        if Fsrc is not None:
            w = w + Fsrc(xi, pb)
        return w

    def integrand(tau):
        t = tau.reshape((-1,) + (1,) * nd)
        left = weight(l1 + left_len * t) * np.exp(-left_len * (1.0 - t) * s / a)
        right = weight(xb + right_len * t) * np.exp(-right_len * t * s / a)
        left = np.broadcast_to(left * left_len * pre, (tau.size,) + shape)
        right = np.broadcast_to(right * right_len * pre, (tau.size,) + shape)
        return np.stack([left, right], axis=1)

    res = integrate(integrand, 0.0, 1.0, spec, raise_on_failure=False)
    value = np.asarray(res.value)
    return value[0], value[1], res.converged


def r_transform(x, p, phi, Fsrc, kernel, l1, l2, spec=QuadratureSpec()):
    """Free-space convolution ``R(x, p) = int (phi + F) e^{-|xi-x| s/a} / (2 a s)``.

    ``s = sqrt(b + p)``.  Broadcasts over ``x`` and ``p``.
    """
    left, right, _ = _convolution_sides(x, p, phi, Fsrc, kernel, l1, l2, spec)
    return (left + right)[()]


def r_transform_dx(x, p, phi, Fsrc, kernel, l1, l2, spec=QuadratureSpec()):
    """``d/dx R(x, p)``: each one-sided piece picks up ``sign(xi - x) s / a``."""
    left, right, _ = _convolution_sides(x, p, phi, Fsrc, kernel, l1, l2, spec)
    s = kernel.root(np.asarray(p))
    return ((right - left) * s / kernel.a)[()]


def boundary_matrix(p, problem):
    """4x4 system matrices, stacked over ``p`` (shape ``(..., 4, 4)``)."""
    kernel = Kernel(problem.a, problem.b)
    p = np.asarray(p, dtype=complex)
    s = kernel.root(p)
    a = kernel.a
    c = chi(problem.l2 - problem.l1, p, kernel)
    al1, be1 = problem.robin1
    al2, be2 = problem.robin2
    m = np.zeros(p.shape + (4, 4), dtype=complex)
    m[..., 0, 0] = al1
    m[..., 0, 1] = be1
    m[..., 1, 2] = al2
    m[..., 1, 3] = be2
    m[..., 2, 0] = 0.5
    m[..., 2, 1] = a / (2 * s)
    m[..., 2, 2] = -c / 2
    m[..., 2, 3] = -a * c / (2 * s)
    m[..., 3, 0] = -c / 2
    m[..., 3, 1] = a * c / (2 * s)
    m[..., 3, 2] = 0.5
    m[..., 3, 3] = -a / (2 * s)
    return m


def solve_boundary_system(p, problem, R_l1, R_l2, G1=0.0, G2=0.0):
    """Solve for ``U(l1), U_x(l1), U(l2), U_x(l2)`` at one or many ``p``.

    Rows are the two Robin conditions followed by the two matching conditions
    obtained by evaluating the solution template at ``x = l1`` and ``x = l2``.
    Solved by LU with partial pivoting.
    """
    p = np.asarray(p, dtype=complex)
    m = boundary_matrix(p, problem)
    rhs = np.stack(np.broadcast_arrays(
        np.asarray(G1, dtype=complex), np.asarray(G2, dtype=complex),
        np.asarray(R_l1, dtype=complex), np.asarray(R_l2, dtype=complex)), axis=-1)
    rhs = np.broadcast_to(rhs, p.shape + (4,))
    cond = np.linalg.cond(m)
    bad = ~(cond < SINGULAR_COND)
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        raise SingularSystemError(np.atleast_1d(p)[tuple(idx)],
                                  np.atleast_1d(cond)[tuple(idx)])
    sol = np.linalg.solve(m, rhs[..., None])[..., 0]
    return BoundaryCoefficients(*(sol[..., k][()] for k in range(4)))


class LaplaceField:
    """Evaluator of ``U(x, p)`` and ``U_x(x, p)`` with a per-``p`` coefficient cache.

    The 4x4 solve and the two endpoint convolutions are done once per ``p``
    and reused for every ``x``.  Cache insertion is serialized by a lock;
    for parallel sweeps call :meth:`populate` first and only read afterwards.
    """

    def __init__(self, problem, spec=QuadratureSpec()):
        self.problem = problem
        self.spec = spec
        self.kernel = Kernel(problem.a, problem.b)
        self._cache = {}
        self._lock = threading.Lock()
        #: ``p`` values at which some quadrature did not converge
        self.unconverged = set()

    def _sides(self, x, p):
        pr = self.problem
        left, right, ok = _convolution_sides(x, p, pr.phi, pr.F, self.kernel,
                                             pr.l1, pr.l2, self.spec)
        if not ok:
            with self._lock:
                self.unconverged.update(complex(v) for v in np.ravel(p))
        return left, right

    def populate(self, p):
        """Fill the coefficient cache for every ``p`` not yet present."""
        p = np.unique(np.ravel(np.asarray(p, dtype=complex)))
        missing = np.array([v for v in p if complex(v) not in self._cache], dtype=complex)
        if missing.size == 0:
            return
        pr = self.problem
        ends = np.array([pr.l1, pr.l2])[:, None]
        left, right = self._sides(ends, missing[None, :])
        R = left + right
        G1 = 0.0 if pr.G1 is None else pr.G1(missing)
        G2 = 0.0 if pr.G2 is None else pr.G2(missing)
        coeffs = solve_boundary_system(missing, pr, R[0], R[1], G1, G2).as_array()
        coeffs = coeffs.reshape(4, -1)
        with self._lock:
            for k, v in enumerate(missing):
                self._cache.setdefault(complex(v), coeffs[:, k].copy())

    def coefficients(self, p):
        """Boundary coefficients at ``p`` (scalar or array)."""
        p = np.asarray(p, dtype=complex)
        self.populate(p)
        flat = np.array([self._cache[complex(v)] for v in p.ravel()]).T
        flat = flat.reshape((4,) + p.shape)
        return BoundaryCoefficients(*(flat[k][()] for k in range(4)))

    def evaluate(self, x, p):
        """``(U, U_x)`` at broadcast ``(x, p)``."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=complex)
        co = self.coefficients(p)
        pr = self.problem
        a = self.kernel.a
        s = self.kernel.root(p)
        left, right = self._sides(x, p)
        R = left + right
        Rx = (right - left) * s / a
        from_l2 = np.exp(-(pr.l2 - x) * s / a) * (co.U_l2 * s + a * co.Ux_l2)
        from_l1 = np.exp(-(x - pr.l1) * s / a) * (co.U_l1 * s - a * co.Ux_l1)
        U = (from_l2 + from_l1) / (2 * s) + R
        Ux = (from_l2 - from_l1) / (2 * a) + Rx
        return U[()], Ux[()]

    def eval_U(self, x, p):
        return self.evaluate(x, p)[0]

    def eval_Ux(self, x, p):
        return self.evaluate(x, p)[1]

    def derivative_floor(self, U, p):
        """Noise level of ``U_x`` samples along the last axis.

        At an end with a homogeneous Neumann condition ``U_x`` is identically
        zero and what the templates return is cancellation noise; rows below
        this floor are inverted as exact zeros.
        """
        s = self.kernel.root(np.asarray(p, dtype=complex))
        return NOISE_FACTOR * np.max(np.abs(np.asarray(U) * s / self.kernel.a), axis=-1)

    def grid(self, xs, ps):
        """Outer evaluation: arrays of shape ``(len(xs), len(ps))``."""
        xs = np.asarray(xs, dtype=float)
        ps = np.asarray(ps, dtype=complex)
        return self.evaluate(xs[:, None], ps[None, :])


def build_field(problem, u00=1.0, spec=QuadratureSpec()):
    """Laplace-domain field for a reaction-diffusion or Burgers problem.

    A :class:`BurgersProblem` is first mapped to its heat problem
    (``b = 0``, ``f = 0``, ``beta_i = 2 a^2``, zero Robin data).
    """
    if isinstance(problem, BurgersProblem):
        problem = to_reaction_diffusion(problem, u00)
    return LaplaceField(problem, spec)


def boundary_residuals(field, p):
    """Robin residuals ``alpha_i U(l_i) + beta_i U_x(l_i) - G_i`` from the templates."""
    pr = field.problem
    U, Ux = field.evaluate(np.array([pr.l1, pr.l2]), np.asarray(p)[..., None])
    G1 = 0.0 if pr.G1 is None else pr.G1(p)
    G2 = 0.0 if pr.G2 is None else pr.G2(p)
    (al1, be1), (al2, be2) = pr.robin1, pr.robin2
    res1 = al1 * U[..., 0] + be1 * Ux[..., 0] - G1
    res2 = al2 * U[..., 1] + be2 * Ux[..., 1] - G2
    return res1[()], res2[()]


def growth_abscissa(problem, samples=4000):
    """Largest real ``p`` at which the homogeneous boundary system is singular.

    This is the right-most pole of ``U`` (a growing eigenmode of the Robin
    problem), which the inversion contour must clear.  Returns ``-inf`` when
    no root is found above ``-b``.
    """
    a = problem.a
    rates = [abs(al / be) for al, be in (problem.robin1, problem.robin2) if be != 0]
    k_max = sum(rates) + 1.0 / (problem.l2 - problem.l1)
    top = a * a * k_max * k_max + 1.0
    lo = -problem.b
    span = top
    grid = lo + span * np.geomspace(1e-10, 1.0, samples)

    def det(p):
        return np.linalg.det(boundary_matrix(np.asarray(p, dtype=complex), problem)).real

    vals = det(grid)
    change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if change.size == 0:
        return -np.inf
    k = change[-1]
    return brentq(lambda q: float(det(q)), grid[k], grid[k + 1], xtol=1e-14)
