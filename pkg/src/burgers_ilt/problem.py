"""Problem definitions and the Hopf-Cole transform of Burgers' data.

Burgers' equation ``w_t - a^2 w_xx + w w_x = 0`` on ``[l1, l2]`` with constant
Dirichlet values is mapped by ``w = -2 a^2 u_x / u`` onto the heat equation
with homogeneous Robin conditions ``alpha_i u + 2 a^2 u_x = 0``.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .quadrature import gauss_legendre

#: relative factor of the denominator guard in the Hopf-Cole ratio
GUARD_FACTOR = 1e-12


class DomainError(ValueError):
    """Problem parameters outside the admissible domain."""


class IntegrationError(ArithmeticError):
    """Cumulative integral of the initial profile did not converge."""


class DegenerateDenominatorError(ZeroDivisionError):
    def __init__(self, magnitude, floor):
        super().__init__(f"|u| = {magnitude:.3e} below guard {floor:.3e}")
        self.magnitude = magnitude
        self.floor = floor


class InitialProfile:
    """Initial Burgers profile given in closed form or as a sampled table.

    Sampled tables are interpolated with a monotone piecewise cubic (PCHIP) so
    the exponential of its integral does not pick up spurious wiggles.
    """

    def __init__(self, func=None, xs=None, values=None, name=None):
        if func is None:
            xs = np.asarray(xs, dtype=float)
            values = np.asarray(values, dtype=float)
            if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
                raise DomainError("sampled profile needs matching 1-D abscissae and values")
            if np.any(np.diff(xs) <= 0):
                raise DomainError("sampled abscissae must be strictly increasing")
            self.kind = "table"
            self.xs = xs
            self._func = PchipInterpolator(xs, values, extrapolate=False)
        else:
            self.kind = "closed-form"
            self.xs = None
            self._func = func
        self.name = name

    @classmethod
    def from_table(cls, xs, values, name=None):
        return cls(xs=xs, values=values, name=name)

    def covers(self, l1, l2):
        if self.kind != "table":
            return True
        return self.xs[0] <= l1 and self.xs[-1] >= l2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self._func(x), dtype=float)
        if out.shape != x.shape:
            # scalar-only callables
            out = np.vectorize(lambda v: float(self._func(v)))(x)
        return out


def _as_profile(w0):
    return w0 if isinstance(w0, InitialProfile) else InitialProfile(w0)


@dataclass(frozen=True)
class BurgersProblem:
    """``w_t - a_sq w_xx + w w_x = 0`` on ``[l1, l2]``, ``w(l_i, t) = alpha_i``."""

    a_sq: float
    l1: float
    l2: float
    alpha1: float
    alpha2: float
    w0: Callable
    T: float = 1.0

    @property
    def a(self):
        return math.sqrt(self.a_sq)

    @property
    def length(self):
        return self.l2 - self.l1


@dataclass(frozen=True)
class ReactionDiffusionProblem:
    """``u_t - a_sq u_xx + b u = f`` with Robin data on both ends.

    ``robin1 = (alpha1, beta1)`` means ``alpha1 u(l1) + beta1 u_x(l1) = g1(t)``.
    The Laplace-domain solver only ever needs the transforms, so ``F`` is an
    evaluator ``(xi, p) -> complex`` and ``G1``, ``G2`` are ``p -> complex``;
    ``None`` stands for identically zero data.
    """

    a_sq: float
    b: float
    l1: float
    l2: float
    robin1: tuple
    robin2: tuple
    phi: Callable
    F: Optional[Callable] = None
    G1: Optional[Callable] = None
    G2: Optional[Callable] = None
    g1: Optional[Callable] = None
    g2: Optional[Callable] = None

    def __post_init__(self):
        if not self.a_sq > 0:
            raise DomainError(f"a_sq must be positive, got {self.a_sq}")
        if not self.l1 < self.l2:
            raise DomainError(f"need l1 < l2, got [{self.l1}, {self.l2}]")
        for name, (al, be) in (("robin1", self.robin1), ("robin2", self.robin2)):
            if al * al + be * be == 0:
                raise DomainError(f"{name}: alpha^2 + beta^2 must be nonzero")

    @property
    def a(self):
        return math.sqrt(self.a_sq)


def validate(problem):
    """Check the invariants of a :class:`BurgersProblem` and return it.

    Raises :class:`DomainError` for a reversed interval or non-positive
    viscosity/horizon.  Incompatible corner data only warns, since the
    operational solution handles generalized (discontinuous) solutions.
    """
    if not problem.l1 < problem.l2:
        raise DomainError(f"need l1 < l2, got [{problem.l1}, {problem.l2}]")
    if not problem.a_sq > 0:
        raise DomainError(f"a_sq must be positive, got {problem.a_sq}")
    if not problem.T > 0:
        raise DomainError(f"T must be positive, got {problem.T}")
    w0 = _as_profile(problem.w0)
    if not w0.covers(problem.l1, problem.l2):
        raise DomainError("sampled initial profile does not span [l1, l2]")
    ends = w0(np.array([problem.l1, problem.l2]))
    for side, value, alpha in zip(("l1", "l2"), ends, (problem.alpha1, problem.alpha2)):
        if not math.isclose(value, alpha, rel_tol=1e-9, abs_tol=1e-9):
            warnings.warn(
                f"w0({side}) = {value:.6g} differs from boundary value {alpha:.6g}",
                stacklevel=2)
    return problem


class HopfColeInitial:
    """``phi(x) = u00 exp(-(1/2a^2) int_{l1}^x w0)`` with a cached primitive.

    The primitive of ``w0`` is tabulated once on an adaptively refined panel
    grid (at least ``base_panels`` panels, 8-point Gauss-Legendre per panel,
    each panel accepted only when it agrees with its two halves).  Evaluation
    at arbitrary points adds a single Gauss-Legendre pass over the partial
    panel, so ``phi`` is cheap and smooth inside the quadrature loops.
    """

    def __init__(self, w0, l1, l2, a_sq, u00=1.0, base_panels=512, tol=1e-13,
                 max_depth=40):
        if u00 == 0:
            raise DomainError("u00 must be nonzero")
        self.w0 = _as_profile(w0)
        self.l1 = float(l1)
        self.l2 = float(l2)
        self.a_sq = float(a_sq)
        self.u00 = float(u00)
        self._gx, self._gw = gauss_legendre(8)
        self.breaks, self.primitive = self._tabulate(base_panels, tol, max_depth)

    def _panel(self, lo, hi):
        half = 0.5 * (hi - lo)
        nodes = 0.5 * (hi + lo)[..., None] + half[..., None] * self._gx
        return half * (self.w0(nodes) @ self._gw)

    def _tabulate(self, base_panels, tol, max_depth):
        edges = np.linspace(self.l1, self.l2, base_panels + 1)
        lo, hi = edges[:-1], edges[1:]
        depth = 0
        done_lo, done_hi, done_val = [], [], []
        span = self.l2 - self.l1
        while lo.size:
            mid = 0.5 * (lo + hi)
            whole = self._panel(lo, hi)
            halves = self._panel(lo, mid) + self._panel(mid, hi)
            if not (np.all(np.isfinite(whole)) and np.all(np.isfinite(halves))):
                raise IntegrationError("initial profile integrand is not finite")
            # whole-vs-halves difference bounds the halves' error for smooth
            # panels by a wide margin; the absolute floor stops jumps at ~1e-14
            est = np.abs(halves - whole)
            ok = est <= np.maximum(tol * (hi - lo) / span, 10 * tol)
            done_lo.append(lo[ok])
            done_hi.append(hi[ok])
            done_val.append(halves[ok])
            if ok.all():
                break
            depth += 1
            if depth > max_depth:
                raise IntegrationError(
                    "cumulative integral of w0 did not converge near x = "
                    f"{lo[~ok][0]:.6g}")
            lo, hi = lo[~ok], hi[~ok]
            mid = mid[~ok]
            lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        if depth >= 8:
            warnings.warn("w0 looks discontinuous; cumulative integral refined "
                          f"{depth} levels", stacklevel=3)
        lo = np.concatenate(done_lo)
        hi = np.concatenate(done_hi)
        val = np.concatenate(done_val)
        order = np.argsort(lo)
        breaks = np.append(lo[order], hi[order][-1])
        primitive = np.concatenate([[0.0], np.cumsum(val[order])])
        return breaks, primitive

    def integral(self, x):
        """``int_{l1}^x w0(y) dy``, vectorized over ``x``."""
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(self.breaks, x, side="right") - 1,
                    0, self.breaks.size - 2)
        left = self.breaks[j]
        return self.primitive[j] + self._panel(left, x)

    def __call__(self, x):
        return self.u00 * np.exp(-self.integral(x) / (2.0 * self.a_sq))


def hopf_cole_initial(problem, u00=1.0):
    """Initial datum of the heat problem obtained from ``w0`` (Hopf-Cole)."""
    return HopfColeInitial(problem.w0, problem.l1, problem.l2, problem.a_sq, u00)


def denominator_floor(scale):
    return GUARD_FACTOR * scale


def hopf_cole_ratio(u, ux, a_sq, scale=1.0):
    """``w = -2 a_sq ux / u`` with the denominator guard ``|u| > 1e-12 scale``.

    ``scale`` is the running maximum of ``|u|`` over the grid row being
    evaluated; for an isolated point it defaults to 1.
    """
    floor = denominator_floor(scale)
    if not abs(u) > floor:
        raise DegenerateDenominatorError(abs(u), floor)
    return -2.0 * a_sq * ux / u


def hopf_cole_ratio_row(u, ux, a_sq):
    """Vectorized ratio over one grid row; returns ``(w, guarded_mask)``.

    The guard floor is ``1e-12 * max|u|`` over the row; guarded cells get NaN.
    """
    u = np.asarray(u, dtype=float)
    ux = np.asarray(ux, dtype=float)
    scale = np.max(np.abs(u)) if u.size else 0.0
    guarded = ~(np.abs(u) > denominator_floor(scale))
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(guarded, np.nan, -2.0 * a_sq * ux / np.where(guarded, 1.0, u))
    return w, guarded


def to_reaction_diffusion(problem, u00=1.0):
    """Heat problem with homogeneous Robin data equivalent to ``problem``."""
    phi = hopf_cole_initial(problem, u00)
    two_a_sq = 2.0 * problem.a_sq
    return ReactionDiffusionProblem(
        a_sq=problem.a_sq, b=0.0, l1=problem.l1, l2=problem.l2,
        robin1=(problem.alpha1, two_a_sq), robin2=(problem.alpha2, two_a_sq),
        phi=phi)
