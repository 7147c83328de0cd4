"""Isolated autoresonant solutions as truncated series in ``tau**(-1/2)``.

The captured solutions of the parametrically pumped reduced system grow as
``sqrt(lam tau)`` with a phase locked to one of the roots ``psi0`` of
``(m_* - m cos psi0) sin psi0 = 0``.  Writing ``x = tau**(-1/2)``::

    rho_*(tau) = sqrt(lam) / x + sum_k rho_k x**k
    psi_*(tau) = psi0 + sum_{k>=1} psi_k x**k

Both equations are expanded with :class:`~autoresonance.series.HalfPowerSeries`
and matched order by order.  At step ``k`` the ``x**k`` coefficient of the
amplitude equation and the ``x**(k-1)`` coefficient of the phase equation
(multiplied through by ``rho``) are affine in ``(psi_k, rho_{k+1})``; the
2x2 system is read off the engine by unit perturbations and solved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchAbsent, DegeneratePumping, InvalidParameter, SingularRecurrence
from .model import ReducedParams
from .series import HalfPowerSeries, binomial_series

TAU_FLOOR = 1.0
DEGENERACY_RTOL = 1e-12
MAX_CONDITION = 1e12


def phase_roots(params: ReducedParams) -> list[tuple[int, float]]:
    """Branch indices and limiting phases ``psi0``.

    Four roots ``0, pi, +-arccos(m_*/m)`` when ``|m| > m_*``, otherwise the
    two roots ``0, pi``.  ``|m| = m_*`` raises :class:`DegeneratePumping`.
    """
    params.require_positive_f()
    ms, m = params.m_star, params.m
    if abs(abs(m) - ms) <= DEGENERACY_RTOL * ms:
        raise DegeneratePumping(
            f"|m| = m_* = {ms!r}: series coefficients are undefined, no power asymptotics exist"
        )
    roots = [(1, 0.0), (2, math.pi)]
    if abs(m) > ms:
        a = math.acos(ms / m)
        roots += [(3, a), (4, -a)]
    return roots


def branch_phase(params: ReducedParams, branch: int) -> float:
    roots = dict(phase_roots(params))
    if branch not in roots:
        raise BranchAbsent(f"branch {branch} does not exist for m={params.m!r}, m_*={params.m_star!r}")
    return roots[branch]


def _equations(params: ReducedParams, rho_c: np.ndarray, psi_c: np.ndarray):
    """Series of both defects for coefficient arrays ``rho_0..rho_N``, ``psi_0..psi_N``."""
    lam, f, m = params.lam, params.f, params.m
    N = rho_c.size - 1
    sq = math.sqrt(lam)
    rho = HalfPowerSeries(-1, np.concatenate(([sq], rho_c)))
    delta = HalfPowerSeries(0, rho_c)
    psi = HalfPowerSeries(0, psi_c)
    nu = binomial_series(-0.5, N + 4).shift(1) * m
    s1, c1 = psi.sincos()
    s2, c2 = (psi * 2.0).sincos()
    amp_eq = rho.deriv_tau() + nu * rho * s2 - s1 * f
    # rho**2 - lam tau, without the cancelling leading term
    excess = delta.shift(-1) * (2.0 * sq) + delta * delta
    phase_eq = rho * (psi.deriv_tau() + nu * c2 - excess) - c1 * f
    return amp_eq, phase_eq


@dataclass(frozen=True, eq=False)
class AsymptoticSolution:
    """Truncated series for branch ``branch``.

    ``rho_coeffs[k]`` multiplies ``tau**(-k/2)`` for ``k = 0..K``;
    ``psi_coeffs[k - 1]`` multiplies ``tau**(-k/2)`` for ``k = 1..K``.
    """

    branch: int
    psi0: float
    rho_coeffs: np.ndarray
    psi_coeffs: np.ndarray
    K: int
    params: ReducedParams
    tau_floor: float = field(default=TAU_FLOOR)

    def _x(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < self.tau_floor):
            raise InvalidParameter(f"tau must be >= {self.tau_floor} for the truncated series")
        return tau, tau**-0.5

    def eval(self, tau):
        """``(rho_*(tau), psi_*(tau))``; scalars or arrays like ``tau``."""
        tau, x = self._x(tau)
        rho = np.sqrt(self.params.lam * tau) + _horner(self.rho_coeffs, x)
        psi = self.psi0 + x * _horner(self.psi_coeffs, x)
        return _unbox(rho), _unbox(psi)

    def derivative(self, tau):
        """``(drho_*/dtau, dpsi_*/dtau)`` by term-wise differentiation."""
        tau, x = self._x(tau)
        k_rho = np.arange(self.rho_coeffs.size)
        k_psi = np.arange(1, self.psi_coeffs.size + 1)
        drho = 0.5 * math.sqrt(self.params.lam) * x + x**2 * _horner(-0.5 * k_rho * self.rho_coeffs, x)
        dpsi = x**3 * _horner(-0.5 * k_psi * self.psi_coeffs, x)
        return _unbox(drho), _unbox(dpsi)

    def residual(self, tau):
        """Defects of the two equations, amplitude equation first.

        The phase equation is used in its ``rho``-multiplied form; for a
        truncation at ``K`` the amplitude defect is ``O(tau**(-(K+1)/2))``.
        """
        tau, x = self._x(tau)
        p = self.params
        rho, psi = self.eval(tau)
        drho, dpsi = self.derivative(tau)
        n = p.m / np.sqrt(1.0 + tau)
        delta = _horner(self.rho_coeffs, x)
        excess = delta * (2.0 * np.sqrt(p.lam * tau) + delta)
        res_rho = drho + n * rho * np.sin(2.0 * psi) - p.f * np.sin(psi)
        res_psi = rho * (dpsi + n * np.cos(2.0 * psi) - excess) - p.f * np.cos(psi)
        return _unbox(res_rho), _unbox(res_psi)

    def nu(self, tau):
        return self.params.m / np.sqrt(1.0 + np.asarray(tau, dtype=float))

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "psi0": self.psi0,
            "K": self.K,
            "params": self.params.as_dict(),
            "rho_coeffs": [float(c) for c in self.rho_coeffs],
            "psi_coeffs": [float(c) for c in self.psi_coeffs],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "AsymptoticSolution":
        return cls(
            branch=int(d["branch"]),
            psi0=float(d["psi0"]),
            rho_coeffs=np.array(d["rho_coeffs"], dtype=float),
            psi_coeffs=np.array(d["psi_coeffs"], dtype=float),
            K=int(d["K"]),
            params=ReducedParams(**d["params"]),
        )


def _horner(coeffs, x):
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


def _unbox(a):
    return float(a) if np.ndim(a) == 0 else a


def build_series(params: ReducedParams, branch: int, K: int = 4) -> AsymptoticSolution:
    """Solve for ``rho_0..rho_K`` and ``psi_1..psi_K`` on the given branch."""
    if K < 2:
        raise InvalidParameter("truncation order K must be at least 2")
    psi0 = branch_phase(params, branch)
    N = K + 2
    rho_c = np.zeros(N + 1)
    psi_c = np.zeros(N + 1)
    psi_c[0] = psi0

    def defects(rows):
        amp, phase = _equations(params, rho_c, psi_c)
        return np.array([amp[k] if eq == 0 else phase[k] for eq, k in rows])

    # leading orders x^-2, x^-1 of the phase equation fix rho_0 and rho_1
    for j in (0, 1):
        row = [(1, j - 2)]
        base = defects(row)[0]
        rho_c[j] = 1.0
        slope = defects(row)[0] - base
        rho_c[j] = 0.0
        if slope == 0.0:
            raise SingularRecurrence(f"order x^{j - 2} does not determine rho_{j}")
        rho_c[j] = -base / slope

    for k in range(1, K + 1):
        rows = [(0, k), (1, k - 1)]
        base = defects(rows)
        M = np.empty((2, 2))
        for col, (arr, idx) in enumerate(((psi_c, k), (rho_c, k + 1))):
            arr[idx] = 1.0
            M[:, col] = defects(rows) - base
            arr[idx] = 0.0
        cond = np.linalg.cond(M)
        if not cond <= MAX_CONDITION:
            raise SingularRecurrence(
                f"order {k} matrix has condition number {cond:.3e}; m is too close to +-m_*"
            )
        psi_c[k], rho_c[k + 1] = np.linalg.solve(M, -base)

    return AsymptoticSolution(
        branch=branch,
        psi0=psi0,
        rho_coeffs=rho_c[: K + 1].copy(),
        psi_coeffs=psi_c[1 : K + 1].copy(),
        K=K,
        params=params,
    )


def closed_form_leading(params: ReducedParams, psi0: float) -> tuple[float, float]:
    """``(rho_2, psi_1)`` from their explicit expressions."""
    ms, m = params.m_star, params.m
    rho2 = (m * math.cos(2 * psi0) - 2 * ms * math.cos(psi0)) / math.sqrt(4 * params.lam)
    psi1 = 1.0 / (4 * ms * math.cos(psi0) - 4 * m * math.cos(2 * psi0))
    return rho2, psi1
