"""Reproducible experiments: simulations, capture tests, basin sweeps and the
oscillator-versus-reduced cross-check.

Every experiment writes flat files (CSV for sampled data, JSON for structured
results) and a :class:`RunManifest` that records the resolved invocation, so
the run can be replayed to byte-identical outputs.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import AutoresonanceError, InvalidParameter
from .integrate import IntegratorConfig, Termination, Trajectory, integrate
from .model import (
    OscillatorParams,
    ReducedParams,
    energy_array,
    oscillator_field,
    oscillator_state_from_reduced,
    phase_mismatch_track,
    reduce_params,
    reduced_field,
    separatrix_energy,
)

REDUCED_COLUMNS = ("tau", "rho", "psi")
OSCILLATOR_COLUMNS = ("t", "u", "v", "E", "Delta")
BASIN_COLUMNS = ("index", "rho0", "psi0", "state", "rho_final", "psi_final", "tau_final")
CROSSCHECK_COLUMNS = ("t", "tau", "envelope", "predicted", "rel_error", "Delta", "psi")
RESIDUAL_COLUMNS = ("tau", "res_rho", "res_psi")
SCHEMA_VERSION = 1

ENERGY_GUARD_FRACTION = 0.9
TEST_EPS = 0.02


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # running from a source tree
        return "0+unknown"


# -- flat-file output -------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, columns: Sequence[str], rows) -> Path:
    """Write rows with shortest round-trip float formatting (deterministic)."""
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


@dataclass
class RunManifest:
    """What was run and what it produced.

    ``invocation`` holds the resolved command arguments (execution-only
    knobs such as the worker count and the output directory excluded);
    ``outputs`` are file names relative to the output directory.
    """

    command: str
    params: dict
    seed: int
    tool_version: str
    outputs: list[str] = field(default_factory=list)
    invocation: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def write(self, out_dir: Path, stem: str) -> Path:
        name = f"{stem}.manifest.json"
        return write_json(Path(out_dir) / name, asdict(self))

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))


# -- presets -----------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    """A named run.

    Reduced presets start at ``tau = span[0]`` from ``(rho, psi) = y0``.
    Oscillator presets place the oscillator on the reduced state ``y0`` at
    slow time ``span[0]`` and run to slow time ``span[1]``.
    """

    name: str
    system: str
    params: dict
    y0: tuple[float, float]
    span: tuple[float, float]
    note: str = ""


_FIG1_BASE = {"eps": 1e-3, "alpha": 1e-4 / 2, "gamma": 1 / 6}
_FIG2_PARAMS = {"lam": 1.0, "f": 1.0, "m": 4.0}

PRESETS: dict[str, Preset] = {
    "fig1a": Preset("fig1a", "oscillator", {**_FIG1_BASE, "f0": 4.0, "h0": 0.0}, (1.0, math.pi), (1.0, 15.0),
                    "no pumping, anti-phase start: captured"),
    "fig1b": Preset("fig1b", "oscillator", {**_FIG1_BASE, "f0": 4.0, "h0": 0.0}, (1.0, 0.0), (1.0, 15.0),
                    "no pumping, in-phase start: not captured"),
    "fig1c": Preset("fig1c", "oscillator", {**_FIG1_BASE, "f0": 1.0, "h0": 5.0}, (1.0, 0.0), (1.0, 15.0),
                    "decaying pumping, in-phase start: captured"),
    "fig1d": Preset("fig1d", "oscillator", {**_FIG1_BASE, "f0": 1.0, "h0": 5.0}, (1.0, math.pi), (1.0, 15.0),
                    "decaying pumping, anti-phase start: captured"),
    "fig2a": Preset("fig2a", "reduced", _FIG2_PARAMS, (0.27, 0.01), (0.0, 50.0), "captured, oscillating phase"),
    "fig2b": Preset("fig2b", "reduced", _FIG2_PARAMS, (0.32, 0.31), (0.0, 50.0), "captured, phase slips"),
    "fig2c": Preset("fig2c", "reduced", _FIG2_PARAMS, (2.04, 1.78), (0.0, 50.0), "not captured, bounded"),
}


def rescale_eps(params: OscillatorParams, eps: float = TEST_EPS) -> OscillatorParams:
    """Same ``lam``, ``f``, ``m`` at a larger ``eps`` (``alpha`` rescaled)."""
    lam = reduce_params(params).lam
    return OscillatorParams(eps=eps, alpha=0.5 * lam * eps ** (4.0 / 3.0), gamma=params.gamma,
                            f0=params.f0, h0=params.h0)


# -- simulation --------------------------------------------------------------------

@dataclass
class SimulationResult:
    trajectory: Trajectory
    columns: tuple[str, ...]
    table: np.ndarray


def simulate_reduced(params: ReducedParams, y0, span, config: IntegratorConfig = IntegratorConfig(),
                     parametric: bool = True) -> SimulationResult:
    traj = integrate(reduced_field(params, parametric), y0, span, config)
    table = np.column_stack((traj.t, traj.y))
    return SimulationResult(traj, REDUCED_COLUMNS, table)


def energy_guard(params: OscillatorParams, fraction: float = ENERGY_GUARD_FRACTION):
    limit = fraction * separatrix_energy(params.gamma)

    def guard(t, y):
        return 0.5 * y[0] ** 2 - 0.25 * params.gamma * y[0] ** 4 + 0.5 * y[1] ** 2 > limit

    return guard


def simulate_oscillator(params: OscillatorParams, y0, span, config: IntegratorConfig = IntegratorConfig(),
                        delta_reference: float = 0.0, guard_fraction: Optional[float] = ENERGY_GUARD_FRACTION
                        ) -> SimulationResult:
    """Integrate the oscillator from ``(u, v) = y0`` over ``span`` in fast time.

    The run stops early once the energy exceeds ``guard_fraction`` of the
    separatrix energy (beyond it the quartic potential has no bound states).
    """
    guard = None if guard_fraction is None else energy_guard(params, guard_fraction)
    traj = integrate(oscillator_field(params), y0, span, config, guard=guard)
    u, v = traj.y[:, 0], traj.y[:, 1]
    E = energy_array(u, v, params.gamma)
    delta = phase_mismatch_track(traj.t, u, v, params, reference=delta_reference)
    table = np.column_stack((traj.t, u, v, E, delta))
    return SimulationResult(traj, OSCILLATOR_COLUMNS, table)


def oscillator_start(params: OscillatorParams, rho0: float, psi0: float, tau0: float):
    """Fast time and ``(u, v)`` matching the reduced state at slow time ``tau0``."""
    t0 = tau0 / params.slow_scale
    s = oscillator_state_from_reduced(rho0, psi0, t0, params)
    return t0, (s.u, s.v)


def run_preset(preset: Preset, config: IntegratorConfig, eps: Optional[float] = None) -> SimulationResult:
    if preset.system == "reduced":
        return simulate_reduced(ReducedParams(**preset.params), preset.y0, preset.span, config)
    params = OscillatorParams(**preset.params)
    if eps is not None:
        params = rescale_eps(params, eps)
    t0, y0 = oscillator_start(params, preset.y0[0], preset.y0[1], preset.span[0])
    t1 = preset.span[1] / params.slow_scale
    return simulate_oscillator(params, y0, (t0, t1), config, delta_reference=preset.y0[1])


# -- capture -----------------------------------------------------------------------

@dataclass(frozen=True)
class CaptureCriterion:
    """Finite-horizon stand-in for unbounded growth with a locked phase."""

    horizon_tau: float = 50.0
    ratio_threshold: float = 0.8
    phase_bound: float = 4.0 * math.pi

    def __post_init__(self):
        if not self.horizon_tau > 0:
            raise InvalidParameter("horizon_tau must be positive")
        if not 0.0 < self.ratio_threshold < 1.0:
            raise InvalidParameter("ratio_threshold must lie in (0, 1)")

    def captured(self, traj: Trajectory, lam: float) -> bool:
        tau, y = traj.final
        if tau < self.horizon_tau * (1 - 1e-12):
            return False
        ratio = y[0] / math.sqrt(lam * self.horizon_tau)
        return bool(ratio >= self.ratio_threshold and np.max(np.abs(traj.y[:, 1])) <= self.phase_bound)


class CaptureState:
    CAPTURED = "captured"
    NOT_CAPTURED = "not_captured"
    FAILED = "failed"


def _basin_cell(args):
    params, rho0, psi0, criterion, config = args
    try:
        traj = integrate(reduced_field(params), (rho0, psi0), (0.0, criterion.horizon_tau), config)
    except AutoresonanceError:
        return CaptureState.FAILED, math.nan, math.nan, math.nan
    t, y = traj.final
    state = CaptureState.CAPTURED if criterion.captured(traj, params.lam) else CaptureState.NOT_CAPTURED
    return state, float(y[0]), float(y[1]), t


def basin(params: ReducedParams, rho_grid, psi_grid, criterion: CaptureCriterion = CaptureCriterion(),
          config: IntegratorConfig = IntegratorConfig(sample_interval=1.0), workers: int = 1) -> list[tuple]:
    """Capture map over the product grid; rows are ordered by input index.

    Integrator failures in a cell are recorded as ``failed`` and do not stop
    the sweep.
    """
    rho_grid = np.atleast_1d(np.asarray(rho_grid, dtype=float))
    psi_grid = np.atleast_1d(np.asarray(psi_grid, dtype=float))
    if rho_grid.size == 0 or psi_grid.size == 0:
        raise InvalidParameter("basin grids must be nonempty")
    cells = [(float(r), float(p)) for r in rho_grid for p in psi_grid]
    jobs = [(params, r, p, criterion, config) for r, p in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_basin_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_basin_cell(j) for j in jobs]
    return [(i, r, p, *res) for i, ((r, p), res) in enumerate(zip(cells, results))]


@dataclass(frozen=True)
class OscillatorCapture:
    captured: bool
    max_deviation: float
    energy_start: float
    energy_end: float
    tau_end: float
    terminated_by: str


def oscillator_capture(params: OscillatorParams, psi0: float, tau0: float = 1.0, tau1: float = 4.0,
                       config: IntegratorConfig = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.5,
                                                                   sample_interval=0.5)) -> OscillatorCapture:
    """Start on the captured branch ``rho = sqrt(lam tau0)`` with phase ``psi0``.

    The mode counts as captured if ``Delta`` stays within pi/2 of ``psi0``
    and the energy has grown by the end of the run.
    """
    lam = reduce_params(params).lam
    t0, y0 = oscillator_start(params, math.sqrt(lam * tau0), psi0, tau0)
    res = simulate_oscillator(params, y0, (t0, tau1 / params.slow_scale), config, delta_reference=psi0)
    E = res.table[:, 3]
    dev = float(np.max(np.abs(res.table[:, 4] - psi0)))
    captured = dev <= 0.5 * math.pi and E[-1] >= E[0]
    return OscillatorCapture(bool(captured), dev, float(E[0]), float(E[-1]),
                             float(res.table[-1, 0] * params.slow_scale),
                             res.trajectory.meta.terminated_by.value)


# -- oscillator versus reduced model -------------------------------------------------

@dataclass
class Crosscheck:
    rows: np.ndarray
    max_rel_error: float
    max_phase_error: float


def crosscheck(params: OscillatorParams, rho0: float, psi0: float, tau_span: tuple[float, float],
               config: IntegratorConfig = IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11, sample_interval=0.05),
               transient_tau: float = 0.5) -> Crosscheck:
    """Compare the oscillator envelope with the reduced-model prediction.

    The envelope is the maximum of ``|u|`` over consecutive windows of one
    drive period; the prediction is ``amplitude_scale * rho`` at the time of
    that maximum.  Error statistics skip the first ``transient_tau`` of slow
    time.
    """
    tau0, tau1 = tau_span
    t0, y0 = oscillator_start(params, rho0, psi0, tau0)
    osc = simulate_oscillator(params, y0, (t0, tau1 / params.slow_scale), config, delta_reference=psi0)
    t, u, delta = osc.table[:, 0], osc.table[:, 1], osc.table[:, 4]

    reduced = reduce_params(params)
    tau_end = t[-1] * params.slow_scale
    red = integrate(reduced_field(reduced), (rho0, psi0), (tau0, tau_end),
                    IntegratorConfig(config.rel_tol, config.abs_tol, sample_interval=min(1e-3, tau_end - tau0)))

    window = 2.0 * math.pi
    idx = np.floor((t - t0) / window).astype(int)
    rows = []
    for k in range(idx.max()):  # the last window may be incomplete
        sel = np.nonzero(idx == k)[0]
        j = sel[np.argmax(np.abs(u[sel]))]
        tau_j = t[j] * params.slow_scale
        rho = np.interp(tau_j, red.t, red.y[:, 0])
        psi = np.interp(tau_j, red.t, red.y[:, 1])
        pred = params.amplitude_scale * rho
        env = abs(u[j])
        rows.append((t[j], tau_j, env, pred, (env - pred) / pred, delta[j], psi))
    rows = np.array(rows).reshape(-1, len(CROSSCHECK_COLUMNS))
    late = rows[:, 1] >= tau0 + transient_tau
    max_rel = float(np.max(np.abs(rows[late, 4]))) if late.any() else math.nan
    max_phase = float(np.max(np.abs(rows[late, 5] - rows[late, 6]))) if late.any() else math.nan
    return Crosscheck(rows, max_rel, max_phase)


def residual_table(sol, tau_grid) -> np.ndarray:
    tau_grid = np.asarray(tau_grid, dtype=float)
    res_rho, res_psi = sol.residual(tau_grid)
    return np.column_stack((tau_grid, res_rho, res_psi))


def terminated_early(result: SimulationResult) -> bool:
    return result.trajectory.meta.terminated_by is not Termination.END_OF_SPAN


@dataclass
class PerturbationDecay:
    """Phase deviation from a branch after a kick, and its fitted power-law decay."""

    tau: np.ndarray
    deviation: np.ndarray
    initial: float
    final: float
    exponent: float

    @property
    def ratio(self) -> float:
        return self.final / self.initial


def envelope_exponent(tau, dev) -> float:
    """Decay exponent ``s`` of ``dev ~ tau**(-s)`` fitted to its local maxima."""
    tau = np.asarray(tau)
    dev = np.abs(np.asarray(dev))
    peaks = np.nonzero((dev[1:-1] >= dev[:-2]) & (dev[1:-1] >= dev[2:]))[0] + 1
    if peaks.size < 3:
        raise InvalidParameter("too few oscillation peaks to fit an envelope")
    slope = np.polyfit(np.log(tau[peaks]), np.log(dev[peaks]), 1)[0]
    return float(-slope)


def perturbation_decay(sol, tau0: float = 20.0, tau1: float = 500.0, kick: float = 0.05,
                       config: IntegratorConfig = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10,
                                                                   sample_interval=0.05)
                       ) -> PerturbationDecay:
    """Kick the phase of the branch ``sol`` by ``kick`` at ``tau0`` and follow ``|psi - psi_*|``."""
    rho_s, psi_s = sol.eval(tau0)
    traj = integrate(reduced_field(sol.params), (rho_s, psi_s + kick), (tau0, tau1), config)
    dev = np.abs(traj.y[:, 1] - sol.eval(traj.t)[1])
    return PerturbationDecay(traj.t, dev, float(dev[0]), float(dev[-1]), envelope_exponent(traj.t, dev))
