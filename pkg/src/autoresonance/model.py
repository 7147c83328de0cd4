"""Parameters, states and vector fields of the three dynamical systems.

Reduced (slow) amplitude-phase system, with optional decaying parametric
pumping ``nu(tau) = m / sqrt(1 + tau)``::

    rho'  = f sin(psi) - nu rho sin(2 psi)
    psi'  = rho**2 - lam tau + f cos(psi) / rho - nu cos(2 psi)

Driven oscillator with quartic potential ``U(u) = u**2/2 - gamma u**4/4``::

    u'' + (1 + eps**(2/3) h(t) cos 2 phi(t)) U'(u) = eps f0 cos phi(t)
    phi(t) = t - alpha t**2,   h(t) = h0 / sqrt(1 + eps**(2/3) t)

and the two-scale map between them (``lam = 2 alpha eps**(-4/3)``,
``m = h0 / 4``, ``f = f0 sqrt(3 gamma / 32)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AmplitudeSingular, InvalidParameter, NonPositiveLambda, PhaseUndefined

RHO_MIN = 1e-8

VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ReducedParams:
    """Sweep rate ``lam``, external pumping ``f`` and parametric scale ``m``.

    ``lam > 0`` is enforced on construction.  ``f`` may be any real here so
    that the ``(f, psi) -> (-f, psi + pi)`` symmetry can be exercised; the
    asymptotic and stability analyses call :meth:`require_positive_f`.
    """

    lam: float
    f: float
    m: float = 0.0

    def __post_init__(self):
        for name in ("lam", "f", "m"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.lam <= 0:
            raise NonPositiveLambda(f"lam must be positive, got {self.lam!r}")

    @property
    def m_star(self) -> float:
        """Critical parametric amplitude ``f / sqrt(4 lam)``."""
        return self.f / math.sqrt(4.0 * self.lam)

    def require_positive_f(self) -> "ReducedParams":
        if not self.f > 0:
            raise InvalidParameter(
                f"f must be positive (use the f -> -f, psi -> psi + pi symmetry), got {self.f!r}"
            )
        return self

    def as_dict(self) -> dict:
        return {"lam": self.lam, "f": self.f, "m": self.m}


@dataclass(frozen=True)
class ReducedState:
    rho: float
    psi: float
    tau: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise InvalidParameter("rho must be nonnegative")
        if self.tau < 0:
            raise InvalidParameter("tau must be nonnegative")


@dataclass(frozen=True)
class OscillatorParams:
    """Small parameter ``eps``, chirp ``alpha``, stiffness ``gamma``, drive
    amplitude ``f0`` and parametric amplitude ``h0``."""

    eps: float
    alpha: float
    gamma: float
    f0: float
    h0: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameter(f"eps must be positive, got {self.eps!r}")
        if not self.gamma > 0:
            raise InvalidParameter(f"gamma must be positive, got {self.gamma!r}")

    @property
    def amplitude_scale(self) -> float:
        """Factor ``eps**(1/3) sqrt(8 / (3 gamma))`` mapping ``rho`` onto ``u``."""
        return self.eps ** (1.0 / 3.0) * math.sqrt(8.0 / (3.0 * self.gamma))

    @property
    def slow_scale(self) -> float:
        """``eps**(2/3)``: slow time is ``tau = slow_scale * t``."""
        return self.eps ** (2.0 / 3.0)

    def as_dict(self) -> dict:
        return {"eps": self.eps, "alpha": self.alpha, "gamma": self.gamma, "f0": self.f0, "h0": self.h0}


@dataclass(frozen=True)
class OscillatorState:
    u: float
    v: float
    t: float = 0.0


def nu(tau, m: float):
    """Decaying parametric amplitude ``m / sqrt(1 + tau)``; vectorized over tau."""
    if np.ndim(tau) == 0:
        if tau < 0:
            raise InvalidParameter("tau must be nonnegative")
        return m / math.sqrt(1.0 + tau)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InvalidParameter("tau must be nonnegative")
    return m / np.sqrt(1.0 + tau)


def reduced_rhs(
    state: ReducedState, params: ReducedParams, parametric: bool = True, rho_min: float = RHO_MIN
) -> tuple[float, float]:
    """Return ``(drho/dtau, dpsi/dtau)``.

    With ``parametric=False`` the ``nu`` terms are dropped entirely; with
    ``m = 0`` the two settings agree bit for bit.
    """
    rho, psi, tau = state.rho, state.psi, state.tau
    if rho <= rho_min:
        raise AmplitudeSingular(rho, rho_min)
    drho = params.f * math.sin(psi)
    dpsi = rho * rho - params.lam * tau + params.f * math.cos(psi) / rho
    if parametric:
        n = params.m / math.sqrt(1.0 + tau)
        drho -= n * rho * math.sin(2.0 * psi)
        dpsi -= n * math.cos(2.0 * psi)
    return drho, dpsi


def reduced_field(params: ReducedParams, parametric: bool = True, rho_min: float = RHO_MIN) -> VectorField:
    """Vector field ``(tau, [rho, psi]) -> [rho', psi']`` for :func:`integrate`."""
    lam, f, m = params.lam, params.f, params.m
    sin, cos, sqrt = math.sin, math.cos, math.sqrt

    def rhs(tau, y):
        rho, psi = float(y[0]), float(y[1])
        if rho <= rho_min:
            raise AmplitudeSingular(float(rho), rho_min)
        drho = f * sin(psi)
        dpsi = rho * rho - lam * tau + f * cos(psi) / rho
        if parametric:
            n = m / sqrt(1.0 + tau)
            drho -= n * rho * sin(2.0 * psi)
            dpsi -= n * cos(2.0 * psi)
        return np.array((drho, dpsi))

    return rhs


def drive_phase(t, alpha: float):
    """``phi(t) = t - alpha t**2``."""
    return t - alpha * t * t


def oscillator_rhs(state: OscillatorState, params: OscillatorParams) -> tuple[float, float]:
    """Return ``(du/dt, dv/dt)`` for the chirped, parametrically pumped oscillator."""
    u, v, t = state.u, state.v, state.t
    p = params
    e23 = p.eps ** (2.0 / 3.0)
    phi = t - p.alpha * t * t
    h = p.h0 / math.sqrt(1.0 + e23 * t)
    restoring = u - p.gamma * u * u * u
    dv = -(1.0 + e23 * h * math.cos(2.0 * phi)) * restoring + p.eps * p.f0 * math.cos(phi)
    return v, dv


def oscillator_field(params: OscillatorParams) -> VectorField:
    """Vector field ``(t, [u, v]) -> [u', v']`` for :func:`integrate`."""
    eps, alpha, gamma, f0, h0 = params.eps, params.alpha, params.gamma, params.f0, params.h0
    e23 = eps ** (2.0 / 3.0)
    drive = eps * f0
    cos, sqrt = math.cos, math.sqrt

    def rhs(t, y):
        u, v = float(y[0]), float(y[1])
        phi = t - alpha * t * t
        h = h0 / sqrt(1.0 + e23 * t)
        dv = -(1.0 + e23 * h * cos(2.0 * phi)) * (u - gamma * u * u * u) + drive * cos(phi)
        return np.array((v, dv))

    return rhs


def energy(state: OscillatorState, params: OscillatorParams) -> float:
    """``U(u) + v**2 / 2`` with the quartic-truncated potential."""
    u, v = state.u, state.v
    return 0.5 * u * u - 0.25 * params.gamma * u**4 + 0.5 * v * v


def energy_array(u, v, gamma: float):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * u * u - 0.25 * gamma * u**4 + 0.5 * v * v


def separatrix_energy(gamma: float) -> float:
    """Height of the potential barrier at ``u = 1/sqrt(gamma)``."""
    return 0.25 / gamma


def oscillator_phase(u, v):
    """``Phi = -arctan(v / u)`` lifted to a full-turn branch via ``atan2(-v, u)``."""
    return np.arctan2(-np.asarray(v, dtype=float), np.asarray(u, dtype=float))


def phase_mismatch(state: OscillatorState, params: OscillatorParams) -> float:
    """``Delta = phi(t) - Phi(t)`` for a single state, wrapped to ``(-pi, pi]``."""
    if state.u == 0.0 and state.v == 0.0:
        raise PhaseUndefined("phase is undefined at u = v = 0")
    d = drive_phase(state.t, params.alpha) - math.atan2(-state.v, state.u)
    d = math.remainder(d, 2.0 * math.pi)
    return math.pi if d == -math.pi else d


def phase_mismatch_track(t, u, v, params: OscillatorParams, reference: float = 0.0) -> np.ndarray:
    """Continuous ``Delta`` along sampled trajectory data.

    Jumps larger than pi between consecutive samples are removed by adding
    multiples of 2 pi; the whole track is then shifted by a multiple of 2 pi
    so that its first value lies within pi of ``reference``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u == 0.0) & (v == 0.0)):
        raise PhaseUndefined("phase is undefined at u = v = 0")
    delta = np.unwrap(drive_phase(np.asarray(t, dtype=float), params.alpha) - oscillator_phase(u, v))
    if delta.size:
        delta -= 2.0 * np.pi * np.round((delta[0] - reference) / (2.0 * np.pi))
    return delta


def reduce_params(params: OscillatorParams) -> ReducedParams:
    """Two-scale reduction ``(eps, alpha, gamma, f0, h0) -> (lam, f, m)``."""
    if not params.alpha > 0:
        raise NonPositiveLambda(f"alpha must be positive for captured solutions, got {params.alpha!r}")
    lam = 2.0 * params.alpha * params.eps ** (-4.0 / 3.0)
    f = params.f0 * math.sqrt(3.0 * params.gamma / 32.0)
    return ReducedParams(lam=lam, f=f, m=params.h0 / 4.0)


def oscillator_state_from_reduced(rho: float, psi: float, t: float, params: OscillatorParams) -> OscillatorState:
    """Leading-order oscillator state ``u = A cos(phi - psi)``, ``v = -A phi' sin(phi - psi)``."""
    amp = params.amplitude_scale * rho
    theta = drive_phase(t, params.alpha) - psi
    freq = 1.0 - 2.0 * params.alpha * t
    return OscillatorState(u=amp * math.cos(theta), v=-amp * freq * math.sin(theta), t=t)
