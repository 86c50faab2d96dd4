"""End-to-end Burgers solver through the inverse Laplace transform.

``w(x, t) = -2 a^2 L^{-1}{U_x}(x, t) / L^{-1}{U}(x, t)`` evaluated on a grid.
Times are split into groups ``[t, 4t)`` sharing one inversion contour; within
a group the boundary coefficients at the contour nodes are computed once and
every ``x`` is swept against them.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .ilt import IltConfig, Status, contour, invert_samples, time_groups
from .operational import build_field, growth_abscissa
from .problem import InitialProfile, hopf_cole_ratio_row, validate
from .quadrature import QuadratureSpec

log = logging.getLogger(__name__)

class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceTimeGrid:
    xs: np.ndarray
    ts: np.ndarray

    def __post_init__(self):
        xs = np.atleast_1d(np.asarray(self.xs, dtype=float))
        ts = np.atleast_1d(np.asarray(self.ts, dtype=float))
        if xs.size == 0 or ts.size == 0:
            raise ValueError("grid must be non-empty")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("grid abscissae must be strictly increasing")
        if np.any(ts < 0):
            raise ValueError("grid times must be non-negative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ts", ts)

    @classmethod
    def uniform(cls, l1, l2, dx, T, dt):
        """Grid with steps ``dx`` on ``[l1, l2]`` and ``dt, 2dt, ..., T``."""
        nx = int(round((l2 - l1) / dx))
        nt = int(round(T / dt))
        return cls(np.linspace(l1, l2, nx + 1), np.linspace(dt, nt * dt, nt))

    def within(self, l1, l2, T=None):
        tol = 1e-12 * max(1.0, abs(l1), abs(l2))
        ok = self.xs[0] >= l1 - tol and self.xs[-1] <= l2 + tol
        if T is not None:
            ok = ok and self.ts[-1] <= T * (1 + 1e-12)
        return ok


@dataclass
class SolutionTable:
    grid: SpaceTimeGrid
    w: np.ndarray                 # (len(ts), len(xs))
    status: np.ndarray            # Status codes, same shape
    meta: dict = dc_field(default_factory=dict)

    @property
    def degraded_count(self):
        return int(np.count_nonzero(self.status != Status.OK))


def default_threads():
    env = os.environ.get("BURGERS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer BURGERS_THREADS=%r", env)
    return 1


#: x points per shared quadrature tree; fixed so results do not depend on threads
SWEEP_CHUNK = 32


def _sweep(field, xs, nodes, threads):
    """``(U, U_x)`` on ``xs`` x ``nodes``; coefficients must be cached first.

    ``xs`` is cut into fixed chunks of :data:`SWEEP_CHUNK` points, each with
    its own adaptive quadrature tree, and ``threads`` only decides how many
    chunks run at once, so the output is bit-identical for any thread count.
    """
    chunks = [xs[k:k + SWEEP_CHUNK] for k in range(0, xs.size, SWEEP_CHUNK)]
    work = lambda c: field.grid(c, nodes)
    if threads <= 1 or len(chunks) == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    return (np.concatenate([u for u, _ in parts]),
            np.concatenate([ux for _, ux in parts]))


def solve(problem, grid, ilt_cfg=IltConfig(), u00=1.0, quad=QuadratureSpec(),
          threads=None):
    """Solve a Burgers problem on ``grid`` by inverting the operational solution.

    Cells where ``|L^{-1}{U}|`` falls below ``1e-12`` times the row maximum
    are flagged ``denominator-guard``; cells whose inversion fell back to the
    epsilon-accelerated series, or whose contour saw a quadrature failure,
    are flagged ``degraded``.  A ``t = 0`` row is filled from ``w0``.
    """
    validate(problem)
    if not grid.within(problem.l1, problem.l2, problem.T):
        raise ValueError("grid lies outside the problem domain")
    threads = default_threads() if threads is None else threads
    timings = {}

    t0 = time.perf_counter()
    field = build_field(problem, u00=u00, spec=quad)
    rd = field.problem
    shift = max(ilt_cfg.gamma_shift, growth_abscissa(rd), 0.0)
    timings["hopf_cole"] = time.perf_counter() - t0

    xs, ts = grid.xs, grid.ts
    w = np.empty((ts.size, xs.size))
    status = np.full(w.shape, Status.OK, dtype=np.int8)
    contours = []
    build_time = invert_time = 0.0

    positive = np.nonzero(ts > 0)[0]
    if positive.size < ts.size:
        w0 = problem.w0 if isinstance(problem.w0, InitialProfile) else InitialProfile(problem.w0)
        w[ts == 0] = w0(xs)

    for group in time_groups(ts[positive]):
        rows = positive[group]
        path = contour(ts[rows].max(), ilt_cfg, gamma_shift=shift)
        contours.append(path)
        tb = time.perf_counter()
        field.populate(path.nodes)
        U, Ux = _sweep(field, xs, path.nodes, threads)
        build_time += time.perf_counter() - tb

        ti = time.perf_counter()
        inv_u = invert_samples(U, ts[rows], path)
        inv_ux = invert_samples(Ux, ts[rows], path,
                                floor=field.derivative_floor(U, path.nodes))
        invert_time += time.perf_counter() - ti

        failed = any(complex(p) in field.unconverged for p in path.nodes)
        for k, row in enumerate(rows):
            u = inv_u.values[:, k]
            ux = inv_ux.values[:, k]
            w_row, guarded = hopf_cole_ratio_row(u, ux, problem.a_sq)
            w[row] = w_row
            bad = (inv_u.status[:, k] != Status.OK) | (inv_ux.status[:, k] != Status.OK)
            if failed:
                bad[:] = True
            status[row] = np.where(guarded, Status.GUARD,
                                   np.where(bad, Status.DEGRADED, Status.OK))

    timings["field_build"] = build_time
    timings["inversion"] = invert_time
    timings["total"] = time.perf_counter() - t0

    meta = {
        "solver": "ilt",
        "config": {
            "tol": ilt_cfg.tol, "M": ilt_cfg.M, "scale_factor": ilt_cfg.scale_factor,
            "gamma_shift": shift, "u00": u00,
            "quad_abs_tol": quad.abs_tol, "quad_rel_tol": quad.rel_tol,
        },
        "timings": timings,
        "contours": [{"gamma": c.gamma, "period": c.period} for c in contours],
    }
    ends = [(k, alpha) for k, alpha in ((0, problem.alpha1), (-1, problem.alpha2))
            if np.isclose(xs[k], problem.l1 if k == 0 else problem.l2)]
    if ends:
        ok_rows = ts > 0
        dev = max(float(np.nanmax(np.abs(w[ok_rows, k] - alpha))) if ok_rows.any() else 0.0
                  for k, alpha in ends)
        meta["boundary_deviation"] = dev
    return SolutionTable(grid, w, status, meta)


def error_norms(candidate, reference):
    """Discrete L2 and max norms of ``candidate - reference``.

    ``l2 = sqrt(dx dt sum (w_c - w_r)^2)`` with the mean grid spacings (1 for
    a single point).  Cells not ``ok`` in either table are excluded and
    counted.  Returns a dict with ``l2``, ``linf``, ``excluded`` and
    ``per_time`` rows ``(t, l2_t, linf_t)``.
    """
    ga, gb = candidate.grid, reference.grid
    if ga.xs.shape != gb.xs.shape or ga.ts.shape != gb.ts.shape or \
            not (np.array_equal(ga.xs, gb.xs) and np.array_equal(ga.ts, gb.ts)):
        raise GridMismatchError("solution tables are on different grids")
    xs, ts = ga.xs, ga.ts
    dx = (xs[-1] - xs[0]) / (xs.size - 1) if xs.size > 1 else 1.0
    dt = (ts[-1] - ts[0]) / (ts.size - 1) if ts.size > 1 else 1.0
    usable = (candidate.status == Status.OK) & (reference.status == Status.OK)
    diff = np.where(usable, candidate.w - reference.w, 0.0)
    per_time = []
    for k, t in enumerate(ts):
        row = diff[k]
        per_time.append((float(t), float(np.sqrt(dx * np.sum(row ** 2))),
                         float(np.max(np.abs(row))) if row.size else 0.0))
    return {
        "l2": float(np.sqrt(dx * dt * np.sum(diff ** 2))),
        "linf": float(np.max(np.abs(diff))) if diff.size else 0.0,
        "excluded": int(np.count_nonzero(~usable)),
        "per_time": per_time,
    }


def table_from_function(func, grid, solver, meta=None):
    """Tabulate a closed-form reference ``func(x, t)`` on ``grid``."""
    X, Tt = np.meshgrid(grid.xs, grid.ts)
    w = np.asarray(func(X, Tt), dtype=float)
    status = np.where(np.isfinite(w), Status.OK, Status.DEGRADED).astype(np.int8)
    info = {"solver": solver}
    info.update(meta or {})
    return SolutionTable(grid, w, status, info)
