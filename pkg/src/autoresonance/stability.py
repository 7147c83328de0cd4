"""Linear stability of the autoresonant branches and their final classification.

Deviations from a branch are written as ``rho = rho_* + r tau**(-1/4)``,
``psi = psi_* + p`` in the stretched time ``eta = (4/5) tau**(5/4)``.  The
linearized flow ``d(r, p)/deta = A(eta) (r, p)`` has eigenvalues tending to
``+-sqrt(D0)``.  A positive ``D0`` proves instability; a negative one is
inconclusive and the verdict ``Stable`` additionally needs the parameter
condition under which a Lyapunov function exists.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .asymptotics import TAU_FLOOR, AsymptoticSolution, phase_roots
from .errors import BranchAbsent, DegeneratePumping, NonPositiveLambda
from .model import OscillatorParams, ReducedParams, reduce_params

SIGMA = 1.25**0.2
ETA_FLOOR = 0.8 * TAU_FLOOR**1.25
DEGENERATE_RTOL = 1e-9
BRANCHES = (1, 2, 3, 4)


class Regime(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    DEGENERATE = "Degenerate"
    NOT_PRESENT = "NotPresent"


class Justification(str, enum.Enum):
    LINEAR_UNSTABLE = "LinearUnstable"
    LYAPUNOV_STABLE = "LyapunovStable"
    DEGENERATE_BOUNDARY = "DegenerateBoundary"
    ROOT_ABSENT = "RootAbsent"


def tau_of_eta(eta):
    return (1.25 * np.asarray(eta, dtype=float)) ** 0.8


def eta_of_tau(tau):
    return 0.8 * np.asarray(tau, dtype=float) ** 1.25


@dataclass(frozen=True, eq=False)
class LinearizationPoint:
    branch: int
    eta: float
    matrix: np.ndarray
    eigen: tuple[complex, complex]

    @property
    def trace(self) -> float:
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def linearization_matrix(sol: AsymptoticSolution, eta) -> np.ndarray:
    """Entries of ``A(eta)`` along the truncated branch; broadcasts over ``eta``."""
    eta = np.asarray(eta, dtype=float)
    tau = tau_of_eta(eta)
    rho, psi = sol.eval(tau)
    n = sol.nu(tau)
    f = sol.params.f
    q = SIGMA * eta**0.2  # == tau**(1/4)
    s2 = np.sin(2.0 * psi)
    a11 = 1.0 / (5.0 * eta) - n * s2 / q
    a12 = f * np.cos(psi) - 2.0 * n * rho * np.cos(2.0 * psi)
    a21 = 2.0 * rho / q**2 - f * np.cos(psi) / (rho**2 * q**2)
    a22 = 2.0 * n * s2 / q - f * np.sin(psi) / (q * rho)
    return np.array([[a11, a12], [a21, a22]])


def _eig2(a, b, c, d):
    """Roots of ``mu**2 - (a + d) mu + (ad - bc)`` in a cancellation-safe form."""
    half = 0.5 * (a + d)
    disc = (0.5 * (a - d)) ** 2 + b * c
    root = np.sqrt(complex(disc))
    return half + root, half - root


def jacobian(sol: AsymptoticSolution, eta: float) -> LinearizationPoint:
    if eta < ETA_FLOOR:
        raise ValueError(f"eta must be >= {ETA_FLOOR}")
    M = linearization_matrix(sol, float(eta))
    mu = _eig2(M[0, 0], M[0, 1], M[1, 0], M[1, 1])
    return LinearizationPoint(sol.branch, float(eta), M, mu)


def d0(params: ReducedParams, branch: int) -> float:
    """Leading discriminant ``D0`` of the branch's linearization."""
    present = dict(phase_roots(params))
    if branch not in present:
        raise BranchAbsent(f"branch {branch} is absent for m={params.m!r}")
    lam, m, ms = params.lam, params.m, params.m_star
    if branch == 1:
        return 4.0 * (ms - m) * lam
    if branch == 2:
        return -4.0 * (ms + m) * lam
    return 4.0 * (m * m - ms * ms) * lam / m


def lyapunov_condition(params: ReducedParams, branch: int) -> bool:
    """Parameter range where a Lyapunov function for the branch is available."""
    m, ms = params.m, params.m_star
    if branch == 1:
        return m > ms
    if branch == 2:
        return m > -ms and not math.isclose(m, ms, rel_tol=DEGENERATE_RTOL)
    return m < -ms


@dataclass(frozen=True)
class StabilityVerdict:
    branch: int
    regime: Regime
    d0: float
    m_star: float
    justification: Justification
    psi0: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "regime": self.regime.value,
            "d0": None if math.isnan(self.d0) else self.d0,
            "m_star": self.m_star,
            "justification": self.justification.value,
            "psi0": self.psi0,
        }


def is_degenerate(params: ReducedParams) -> bool:
    return math.isclose(abs(params.m), params.m_star, rel_tol=DEGENERATE_RTOL)


def classify(params: ReducedParams) -> list[StabilityVerdict]:
    """One verdict per branch 1..4."""
    params.require_positive_f()
    ms = params.m_star
    if is_degenerate(params):
        return [
            StabilityVerdict(b, Regime.DEGENERATE, math.nan, ms, Justification.DEGENERATE_BOUNDARY)
            for b in BRANCHES
        ]
    roots = dict(phase_roots(params))
    out = []
    for b in BRANCHES:
        if b not in roots:
            out.append(StabilityVerdict(b, Regime.NOT_PRESENT, math.nan, ms, Justification.ROOT_ABSENT))
            continue
        D = d0(params, b)
        if D > 0:
            out.append(StabilityVerdict(b, Regime.UNSTABLE, D, ms, Justification.LINEAR_UNSTABLE, roots[b]))
        elif D < 0 and lyapunov_condition(params, b):
            out.append(StabilityVerdict(b, Regime.STABLE, D, ms, Justification.LYAPUNOV_STABLE, roots[b]))
        else:
            # D0 <= 0 without a Lyapunov function: linear analysis alone is inconclusive
            out.append(StabilityVerdict(b, Regime.DEGENERATE, D, ms, Justification.DEGENERATE_BOUNDARY, roots[b]))
    return out


def stable_phases(params: ReducedParams) -> list[float]:
    return sorted(v.psi0 for v in classify(params) if v.regime is Regime.STABLE)


class RegimeKind(str, enum.Enum):
    ANTI_PHASE_ONLY = "AntiPhaseOnly"
    TWO_STABLE_MODES = "TwoStableModes"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class OscillatorRegime:
    kind: RegimeKind
    mu: float
    mu0: float
    psi0: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "mu": self.mu, "mu0": self.mu0, "psi0": list(self.psi0)}


def oscillator_regime(params: OscillatorParams, rtol: float = DEGENERATE_RTOL) -> OscillatorRegime:
    """Stable autoresonant modes of the oscillator from ``mu = eps alpha**(-3/4)``.

    ``mu0 = (16 h0**2 / (3 gamma f0**2))**(3/4)``; the ratio satisfies
    ``|m| / m_* = (mu0 / mu)**(2/3)`` under the two-scale reduction.
    """
    if not params.alpha > 0:
        raise NonPositiveLambda(f"alpha must be positive, got {params.alpha!r}")
    mu = params.eps * params.alpha**-0.75
    mu0 = (16.0 * params.h0**2 / (3.0 * params.gamma * params.f0**2)) ** 0.75
    if math.isclose(mu, mu0, rel_tol=rtol):
        return OscillatorRegime(RegimeKind.DEGENERATE, mu, mu0)
    if mu > mu0:
        return OscillatorRegime(RegimeKind.ANTI_PHASE_ONLY, mu, mu0, (math.pi,))
    if params.h0 > 0:
        return OscillatorRegime(RegimeKind.TWO_STABLE_MODES, mu, mu0, (0.0, math.pi))
    a = math.acos(-((mu / mu0) ** (2.0 / 3.0)))
    return OscillatorRegime(RegimeKind.TWO_STABLE_MODES, mu, mu0, (-a, a))


def oscillator_stable_phases(params: OscillatorParams) -> list[float]:
    """Stable-mode phases via the reduced model (for cross-checking the regime map)."""
    reduced = reduce_params(params)
    try:
        return stable_phases(reduced)
    except DegeneratePumping:
        return []


def eigenvalue_error(sol: AsymptoticSolution, eta) -> np.ndarray:
    """Distance of ``mu_+(eta)`` from its limit.

    ``|mu_+ - sqrt(D0)|`` when ``D0 > 0``; ``|Im mu_+ - sqrt(-D0)|`` when
    ``D0 < 0`` (the real part, half the trace, is compared separately).
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    M = linearization_matrix(sol, eta)
    half = 0.5 * (M[0, 0] + M[1, 1])
    disc = (0.5 * (M[0, 0] - M[1, 1])) ** 2 + M[0, 1] * M[1, 0]
    mu = half + np.sqrt(disc.astype(complex))
    D = d0(sol.params, sol.branch)
    if D > 0:
        return np.abs(mu - math.sqrt(D))
    return np.abs(mu.imag - math.sqrt(-D))
