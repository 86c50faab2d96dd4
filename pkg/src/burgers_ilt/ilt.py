"""Numerical inverse Laplace transform (de Hoog, Knight & Stokes).

The Bromwich integral is discretized as a Fourier series on the line
``Re p = gamma`` with period ``2T'``; the series is summed through the
continued fraction of its diagonal Pade approximant, whose coefficients come
from the quotient-difference (QD) algorithm.  Everything is vectorized over a
leading batch axis so that one set of ``2M+1`` transform samples per batch
row serves every requested time.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Status(IntEnum):
    OK = 0
    DEGRADED = 1
    GUARD = 2

    @property
    def label(self):
        return {0: "ok", 1: "degraded", 2: "denominator-guard"}[int(self)]


@dataclass(frozen=True)
class IltConfig:
    tol: float = 1e-9
    M: int = 20
    scale_factor: float = 2.0
    gamma_shift: float = 0.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.M < 5:
            raise ValueError("M must be at least 5")
        if not self.scale_factor > 1:
            raise ValueError("scale_factor must exceed 1")


@dataclass
class IltResult:
    values: np.ndarray
    status: np.ndarray

    @property
    def ok(self):
        return bool(np.all(self.status == Status.OK))


@dataclass(frozen=True)
class Contour:
    gamma: float
    period: float  # T'
    nodes: np.ndarray


def contour(t_max, cfg, gamma_shift=None):
    """Sampling nodes ``p_k = gamma + i k pi / T'`` for ``k = 0 .. 2M``."""
    shift = cfg.gamma_shift if gamma_shift is None else gamma_shift
    period = cfg.scale_factor * t_max
    gamma = shift - math.log(cfg.tol) / (2.0 * period)
    nodes = gamma + 1j * math.pi * np.arange(2 * cfg.M + 1) / period
    return Contour(gamma, period, nodes)


def time_groups(times, ratio=4.0):
    """Split sorted-unique ``times`` into groups ``[t0, ratio * t0)``.

    Returns a list of index arrays into ``times``.
    """
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    groups = []
    start = 0
    while start < order.size:
        t0 = times[order[start]]
        stop = start
        while stop < order.size and times[order[stop]] < ratio * t0:
            stop += 1
        groups.append(order[start:stop])
        start = stop
    return groups


def qd_coefficients(samples):
    """Continued-fraction coefficients ``d_0 .. d_2M`` from the QD table.

    ``samples`` has shape ``(..., 2M+1)``: transform values on the contour.
    The power-series coefficients are the samples with the first one halved.
    """
    a = np.array(samples, dtype=complex)
    a[..., 0] *= 0.5
    n = a.shape[-1]
    M = (n - 1) // 2
    d = np.empty(a.shape, dtype=complex)
    d[..., 0] = a[..., 0]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = a[..., 1:] / a[..., :-1]          # q^(0)_i, i = 0 .. 2M-1
        e = np.zeros(a.shape[:-1] + (n - 1,), dtype=complex)   # e^(0)_i = 0
        for r in range(1, M + 1):
            d[..., 2 * r - 1] = -q[..., 0]
            e = q[..., 1:] - q[..., :-1] + e[..., 1:q.shape[-1]]
            d[..., 2 * r] = -e[..., 0]
            if r < M:
                q = q[..., 1:-1] * e[..., 1:] / e[..., :-1]
    return d


def _continued_fraction(d, z):
    """Evaluate the QD continued fraction with de Hoog's improved remainder.

    ``d`` has shape ``(B, 2M+1)``; ``z`` has shape ``(T,)``.  Returns ``(B, T)``.
    """
    n = d.shape[-1]
    dz = d[:, :, None] * z[None, None, :]
    with np.errstate(all="ignore"):
        A_prev = np.zeros(dz.shape[::2], dtype=complex)
        A = np.broadcast_to(d[:, 0:1], A_prev.shape).astype(complex)
        B_prev = np.ones_like(A)
        B = np.ones_like(A)
        for i in range(1, n - 1):
            A, A_prev = A + dz[:, i] * A_prev, A
            B, B_prev = B + dz[:, i] * B_prev, B
        h = 0.5 * (1.0 + dz[:, n - 2] - dz[:, n - 1])
        rem = -h * (1.0 - np.sqrt(1.0 + dz[:, n - 1] / (h * h)))
        A = A + rem * A_prev
        B = B + rem * B_prev
        return A / B


def _wynn_epsilon(partial):
    """Wynn epsilon extrapolation of partial sums along the last axis."""
    col = np.array(partial, dtype=complex)
    before = np.zeros_like(col)
    best = col[..., -1]
    with np.errstate(all="ignore"):
        for k in range(1, col.shape[-1]):
            nxt = before[..., 1:col.shape[-1]] + 1.0 / (col[..., 1:] - col[..., :-1])
            before, col = col, nxt
            if k % 2 == 0:
                cand = col[..., -1]
                best = np.where(np.isfinite(cand), cand, best)
    return best


def _fallback(samples, z):
    """Epsilon-accelerated plain Fourier partial sums, for QD breakdowns."""
    a = np.array(samples, dtype=complex)
    a[..., 0] *= 0.5
    k = np.arange(a.shape[-1])
    terms = a[:, None, :] * z[None, :, None] ** k
    partial = np.cumsum(terms, axis=-1)
    return _wynn_epsilon(partial)


def invert_samples(samples, times, path, floor=0.0):
    """Invert transform samples taken on ``path`` at every time in ``times``.

    Parameters
    ----------
    samples : array, shape (..., 2M+1)
        ``F(path.nodes)`` for each batch row.
    times : array, shape (T,)
    path : Contour
    floor : float or array broadcastable to the batch shape
        Rows whose samples never exceed ``floor`` in modulus are rounding
        noise of an identically zero transform and invert to exactly 0.

    Returns
    -------
    IltResult with ``values`` and ``status`` of shape ``(..., T)``.
    """
    samples = np.asarray(samples, dtype=complex)
    times = np.asarray(times, dtype=float)
    batch = samples.shape[:-1]
    flat = samples.reshape(-1, samples.shape[-1])
    z = np.exp(1j * math.pi * times / path.period)
    floor = np.broadcast_to(np.asarray(floor, dtype=float), batch).ravel()
    zero = np.max(np.abs(flat), axis=-1, initial=0.0) <= floor
    d = qd_coefficients(np.where(zero[:, None], 1.0, flat))
    series = _continued_fraction(d, z)
    bad = ~np.isfinite(series) & ~zero[:, None]
    if bad.any():
        rows = np.nonzero(bad.any(axis=1))[0]
        alt = _fallback(flat[rows], z)
        series[rows] = np.where(bad[rows], alt, series[rows])
    values = np.exp(path.gamma * times) / path.period * series.real
    values[zero] = 0.0
    status = np.where(bad, Status.DEGRADED, Status.OK).astype(np.int8)
    status[~np.isfinite(values)] = Status.DEGRADED
    return IltResult(values.reshape(batch + (times.size,)),
                     status.reshape(batch + (times.size,)))


def invert(F, times, cfg=IltConfig()):
    """Numerical inverse Laplace transform of ``F`` at ``times`` (all > 0).

    ``F`` is called with a 1-D complex array of contour nodes.  Times are
    processed in groups ``[t, 4t)``, each sharing one contour whose period is
    ``scale_factor`` times the group's largest time.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0):
        raise ValueError("inversion times must be positive")
    values = np.empty(times.shape)
    status = np.empty(times.shape, dtype=np.int8)
    for idx in time_groups(times):
        path = contour(times[idx].max(), cfg)
        samples = np.asarray(F(path.nodes), dtype=complex)
        res = invert_samples(samples, times[idx], path)
        values[idx] = res.values
        status[idx] = res.status
    return IltResult(values, status)


def invert_field(field, component, x, times, cfg=IltConfig()):
    """Invert ``U`` or ``U_x`` of a :class:`LaplaceField` at fixed ``x``.

    ``U_x`` samples that sit at the field's rounding-noise level (a
    homogeneous Neumann end) invert to exactly zero.
    """
    if component not in ("U", "Ux"):
        raise ValueError(f"component must be 'U' or 'Ux', got {component!r}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0):
        raise ValueError("inversion times must be positive")
    values = np.empty(times.shape)
    status = np.empty(times.shape, dtype=np.int8)
    for idx in time_groups(times):
        path = contour(times[idx].max(), cfg)
        U, Ux = field.evaluate(x, path.nodes)
        if component == "U":
            res = invert_samples(U, times[idx], path)
        else:
            res = invert_samples(Ux, times[idx], path,
                                 floor=field.derivative_floor(U, path.nodes))
        values[idx] = res.values
        status[idx] = res.status
    return IltResult(values, status)
