"""Adaptive Dormand-Prince 5(4) integrator with dense output on a fixed grid.

The propagating solution is 5th order, the embedded one 4th order, and the
continuous extension is the 4th order interpolant of Hairer & Wanner, used
to fill a regular sample grid without constraining the step size.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter, StepUnderflow

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    np.array(row)
    for row in (
        [],
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    )
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# 5th minus embedded 4th order weights (7 stages, FSAL)
B6 = B[:6]
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output: y(t + theta h) = y + h * K.T @ (P @ [theta, theta^2, theta^3, theta^4])
P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
UNDERFLOW_FRACTION = 1e-14


class Termination(str, enum.Enum):
    END_OF_SPAN = "EndOfSpan"
    GUARD = "Guard"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    initial_step: float = 1e-3
    max_step: float = 0.5
    sample_interval: float = 0.05

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise InvalidParameter(f"{name} must lie in (0, 1), got {val!r}")
        for name in ("initial_step", "max_step", "sample_interval"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")

    def with_tol(self, tol: float) -> "IntegratorConfig":
        """Same config with ``rel_tol = tol`` and ``abs_tol = tol / 100``."""
        return IntegratorConfig(tol, tol * 1e-2, self.initial_step, self.max_step, self.sample_interval)

    def as_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "initial_step": self.initial_step,
            "max_step": self.max_step,
            "sample_interval": self.sample_interval,
        }


@dataclass
class TrajectoryMeta:
    accepted_steps: int = 0
    rejected_steps: int = 0
    terminated_by: Termination = Termination.END_OF_SPAN


@dataclass
class Trajectory:
    """Samples ``y[i]`` at strictly increasing abscissae ``t[i]``."""

    t: np.ndarray
    y: np.ndarray
    meta: TrajectoryMeta = field(default_factory=TrajectoryMeta)

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> tuple[float, np.ndarray]:
        return float(self.t[-1]), self.y[-1]

    def column(self, i: int) -> np.ndarray:
        return self.y[:, i]


def _sample_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if grid[-1] < t1 - 1e-9 * dt:
        grid = np.append(grid, t1)
    else:
        grid[-1] = min(grid[-1], t1)
    return grid


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
    guard: Optional[Callable[[float, np.ndarray], bool]] = None,
    raise_on_underflow: bool = True,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``span`` and sample on a regular grid.

    Parameters
    ----------
    rhs : callable
        Vector field ``rhs(t, y)`` returning an array shaped like ``y``.
    y0 : array_like
        Initial state at ``span[0]``.
    span : (float, float)
        Integration interval; ``span[1] > span[0]``.
    config : IntegratorConfig
        Tolerances, step bounds and the output spacing.
    guard : callable, optional
        ``guard(t, y) -> bool`` checked at every sample and every accepted
        step end.  Integration stops at the first point where it holds; that
        point is the last sample.
    raise_on_underflow : bool
        If true, a collapsed step raises :class:`StepUnderflow` (carrying the
        partial trajectory).  Otherwise the partial trajectory is returned
        with ``terminated_by = StepUnderflow``.

    Returns
    -------
    Trajectory
    """
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise InvalidParameter("span must satisfy t1 > t0")
    if config.sample_interval > t1 - t0:
        raise InvalidParameter("sample_interval exceeds the integration span")

    grid = _sample_grid(t0, t1, config.sample_interval)
    y = np.array(y0, dtype=float)
    ts = [t0]
    ys = [y.copy()]
    meta = TrajectoryMeta()

    def finish(status):
        meta.terminated_by = status
        return Trajectory(np.array(ts), np.array(ys), meta)

    if guard is not None and guard(t0, y):
        return finish(Termination.GUARD)

    rtol, atol = config.rel_tol, config.abs_tol
    h_min = UNDERFLOW_FRACTION * (t1 - t0)
    h = min(config.initial_step, config.max_step, t1 - t0)
    t = t0
    gi = 1  # next grid index to emit
    n_grid = len(grid)
    K = np.empty((7, y.size))
    K[0] = rhs(t, y)

    while t < t1:
        if h < h_min:
            traj = finish(Termination.STEP_UNDERFLOW)
            if raise_on_underflow:
                raise StepUnderflow(f"step size {h:.3e} fell below {h_min:.3e} at t={t!r}", traj)
            return traj
        last = t + h >= t1
        if last:
            h = t1 - t
        for s in range(1, 6):
            K[s] = rhs(t + C[s] * h, y + h * A[s].dot(K[:s]))
        y_new = y + h * B6.dot(K[:6])
        t_new = t1 if last else t + h
        K[6] = rhs(t_new, y_new)

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float((np.abs(h * E.dot(K)) / scale).max())

        if not math.isfinite(err):
            meta.rejected_steps += 1
            h *= MIN_FACTOR
            continue
        if err > 1.0:
            meta.rejected_steps += 1
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            continue

        meta.accepted_steps += 1
        gj = gi
        while gj < n_grid and grid[gj] <= t_new:
            gj += 1
        if gj > gi:
            tg = grid[gi:gj]
            theta = (tg - t) / h
            powers = np.vstack((theta, theta * theta, theta**3, theta**4))
            yg = y + h * ((K.T @ P) @ powers).T
            if tg[-1] == t_new:
                yg[-1] = y_new
            for k in range(gj - gi):
                ts.append(float(tg[k]))
                ys.append(yg[k])
                if guard is not None and guard(ts[-1], yg[k]):
                    return finish(Termination.GUARD)
            gi = gj
        if guard is not None and t_new > ts[-1] and guard(t_new, y_new):
            ts.append(t_new)
            ys.append(y_new.copy())
            return finish(Termination.GUARD)

        t, y = t_new, y_new
        K[0] = K[6]
        factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
        h = min(h * factor, config.max_step)

    return finish(Termination.END_OF_SPAN)
