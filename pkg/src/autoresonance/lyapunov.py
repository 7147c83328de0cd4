"""Deviation coordinates, the Hamiltonian form of the deviation flow and a
sampled check of the Lyapunov inequalities.

Around a branch ``(rho_*, psi_*)`` put::

    rho = rho_*(tau) + r tau**(-1/4),   psi = psi_*(tau) + p,   eta = (4/5) tau**(5/4)

Then ``dr/deta = -dH/dp`` and ``dp/deta = dH/dr + G`` where ``H`` is an
explicit Hamiltonian and ``G`` a small non-Hamiltonian remainder.  The
candidate ``L = H + V1 + V2`` is compared against the quadratic form
``Q = sqrt(lam) r**2 + c p**2`` with ``c = f (m cos 2psi0 - m_* cos psi0) / (2 m_*)``:

    (1 - eps1) Q <= L <= (1 + eps1) Q
    dL/deta <= -(1 - eps2) Q / (5 eta)

Everything here broadcasts over arrays of ``(r, p, eta)``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .asymptotics import AsymptoticSolution, build_series
from .errors import AmplitudeSingular
from .model import RHO_MIN, ReducedParams
from .stability import ETA_FLOOR, SIGMA, eta_of_tau, lyapunov_condition, tau_of_eta

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class TransformedState:
    r: Union[float, np.ndarray]
    p: Union[float, np.ndarray]
    eta: Union[float, np.ndarray]

    @property
    def d(self):
        return np.hypot(self.r, self.p)


def to_transformed(rho, psi, tau, sol: AsymptoticSolution) -> TransformedState:
    rho_s, psi_s = sol.eval(tau)
    tau = np.asarray(tau, dtype=float)
    r = (np.asarray(rho, dtype=float) - rho_s) * tau**0.25
    p = np.asarray(psi, dtype=float) - psi_s
    return TransformedState(_unbox(r), _unbox(p), _unbox(eta_of_tau(tau)))


def from_transformed(state: TransformedState, sol: AsymptoticSolution):
    """Inverse of :func:`to_transformed`: returns ``(rho, psi, tau)``."""
    tau = tau_of_eta(state.eta)
    rho_s, psi_s = sol.eval(tau)
    rho = rho_s + np.asarray(state.r, dtype=float) * tau**-0.25
    psi = psi_s + np.asarray(state.p, dtype=float)
    return _unbox(rho), _unbox(psi), _unbox(tau)


def _unbox(a):
    return float(a) if np.ndim(a) == 0 else a


# -- cancellation-free trigonometric pieces -----------------------------------

def _one_minus_cos(p):
    s = np.sin(0.5 * p)
    return 2.0 * s * s


def _sin_minus_id(p):
    """``sin(p) - p`` without cancellation for small ``|p|``."""
    p = np.asarray(p, dtype=float)
    p2 = p * p
    # Taylor tail through p**15; exact to rounding for |p| < 0.5
    series = -p * p2 / 6.0 * (
        1 - p2 / 20 * (1 - p2 / 42 * (1 - p2 / 72 * (1 - p2 / 110 * (1 - p2 / 156 * (1 - p2 / 210)))))
    )
    return np.where(np.abs(p) < 0.5, series, np.sin(p) - p)


def _cos_shift(p, a):
    """``cos(p + a) - cos(a)``."""
    return -np.cos(a) * _one_minus_cos(p) - np.sin(a) * np.sin(p)


def _sin_shift(p, a):
    """``sin(p + a) - sin(a)``."""
    return np.cos(a) * np.sin(p) - np.sin(a) * _one_minus_cos(p)


def _cos_taylor_rest(p, a):
    """``cos(p + a) - cos(a) + p sin(a)``."""
    return -np.cos(a) * _one_minus_cos(p) - np.sin(a) * _sin_minus_id(p)


# -- frame quantities -----------------------------------------------------------

@dataclass
class _Frame:
    eta: np.ndarray
    tau: np.ndarray
    q: np.ndarray  # tau**(1/4) == sigma eta**(1/5)
    rho: np.ndarray
    psi: np.ndarray
    nu: np.ndarray


def _frame(sol: AsymptoticSolution, eta) -> _Frame:
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < ETA_FLOOR):
        raise ValueError(f"eta must be >= {ETA_FLOOR}")
    tau = tau_of_eta(eta)
    rho, psi = sol.eval(tau)
    return _Frame(eta, tau, SIGMA * eta**0.2, np.asarray(rho), np.asarray(psi), sol.nu(tau))


def _H(r, p, fr: _Frame, f: float):
    return (
        r * r * fr.rho / fr.q**2
        + r**3 / (3.0 * fr.q**3)
        + f * _cos_taylor_rest(p, fr.psi)
        - r * p / (5.0 * fr.eta)
        - 0.5 * fr.nu * fr.rho * _cos_taylor_rest(2.0 * p, 2.0 * fr.psi)
        - 0.5 * fr.nu * r / fr.q * _cos_shift(2.0 * p, 2.0 * fr.psi)
    )


def _grad_H(r, p, fr: _Frame, f: float):
    c3 = _cos_shift(2.0 * p, 2.0 * fr.psi)
    dr = 2.0 * r * fr.rho / fr.q**2 + r * r / fr.q**3 - p / (5.0 * fr.eta) - 0.5 * fr.nu / fr.q * c3
    dp = (
        -f * _sin_shift(p, fr.psi)
        - r / (5.0 * fr.eta)
        + fr.nu * fr.rho * _sin_shift(2.0 * p, 2.0 * fr.psi)
        + fr.nu * r / fr.q * np.sin(2.0 * p + 2.0 * fr.psi)
    )
    return dr, dp


def _G(r, p, fr: _Frame, f: float, rho_min: float = RHO_MIN):
    rho = fr.rho + r / fr.q
    if np.any(rho <= rho_min):
        raise AmplitudeSingular(float(np.min(rho)), rho_min)
    quotient = (fr.rho * _cos_shift(p, fr.psi) - np.cos(fr.psi) * r / fr.q) / (fr.rho * rho)
    return -0.5 * fr.nu / fr.q * _cos_shift(2.0 * p, 2.0 * fr.psi) + f / fr.q * quotient + p / (5.0 * fr.eta)


def g_function(p, psi0: float, params: ReducedParams):
    """``m/2 [cos 2psi0 - cos(2p + 2psi0)] - 2 m_* [cos psi0 - cos(p + psi0)]``."""
    return -0.5 * params.m * _cos_shift(2.0 * p, 2.0 * psi0) + 2.0 * params.m_star * _cos_shift(p, psi0)


def g_derivative(p, psi0: float, params: ReducedParams):
    m, ms = params.m, params.m_star
    const = m * math.sin(2.0 * psi0) - 2.0 * ms * math.sin(psi0)
    return m * _sin_shift(2.0 * p, 2.0 * psi0) - 2.0 * ms * _sin_shift(p, psi0) + const


def _V1(r, p, fr: _Frame, sol: AsymptoticSolution):
    prm = sol.params
    return (r * g_function(p, sol.psi0, prm) + 4.0 * math.sqrt(prm.lam) * prm.m_star * r**3 / (3.0 * prm.f)) / fr.q**3


def _grad_V1(r, p, fr: _Frame, sol: AsymptoticSolution):
    prm = sol.params
    dr = (g_function(p, sol.psi0, prm) + 4.0 * math.sqrt(prm.lam) * prm.m_star * r * r / prm.f) / fr.q**3
    dp = r * g_derivative(p, sol.psi0, prm) / fr.q**3
    return dr, dp


def _V2(r, p, fr: _Frame):
    return -r * p / (10.0 * fr.eta)


def hamiltonian(state: TransformedState, sol: AsymptoticSolution, which: str = "L"):
    """Evaluate ``H``, ``V1``, ``V2`` or ``L = H + V1 + V2`` at ``state``."""
    fr = _frame(sol, state.eta)
    r = np.asarray(state.r, dtype=float)
    p = np.asarray(state.p, dtype=float)
    f = sol.params.f
    if which == "H":
        out = _H(r, p, fr, f)
    elif which == "V1":
        out = _V1(r, p, fr, sol)
    elif which == "V2":
        out = _V2(r, p, fr)
    elif which == "L":
        out = _H(r, p, fr, f) + _V1(r, p, fr, sol) + _V2(r, p, fr)
    else:
        raise ValueError(f"which must be one of H, V1, V2, L; got {which!r}")
    return _unbox(out)


def series_defect(sol: AsymptoticSolution, eta):
    """Contribution of the truncation residual to ``(dr/deta, dp/deta)``."""
    fr = _frame(sol, eta)
    res_rho, res_psi = sol.residual(fr.tau)
    return -np.asarray(res_rho), -np.asarray(res_psi) / (fr.rho * fr.q)


def transformed_rhs(state: TransformedState, sol: AsymptoticSolution, defect: bool = True):
    """``(dr/deta, dp/deta) = (-dH/dp, dH/dr + G)``.

    With ``defect=True`` the truncation residual of the series is included,
    which makes this the exact image of the reduced vector field under the
    change of variables.  With ``defect=False`` the branch is treated as an
    exact solution, so the origin is an exact fixed point.
    """
    fr = _frame(sol, state.eta)
    r = np.asarray(state.r, dtype=float)
    p = np.asarray(state.p, dtype=float)
    f = sol.params.f
    h_r, h_p = _grad_H(r, p, fr, f)
    dr = -h_p
    dp = h_r + _G(r, p, fr, f)
    if defect:
        e_r, e_p = series_defect(sol, fr.eta)
        dr = dr + e_r
        dp = dp + e_p
    return _unbox(dr), _unbox(dp)


def transformed_field(sol: AsymptoticSolution):
    """Scalar vector field ``(eta, [r, p]) -> [r', p']`` of the defect-free
    deviation flow, for :func:`~autoresonance.integrate.integrate`.

    Same formulas as ``transformed_rhs(..., defect=False)`` written with
    :mod:`math` for speed along long trajectories.
    """
    lam, f, m = sol.params.lam, sol.params.f, sol.params.m
    sq = math.sqrt(lam)
    rho_c = [float(c) for c in sol.rho_coeffs[::-1]]
    psi_c = [float(c) for c in sol.psi_coeffs[::-1]]
    psi0 = sol.psi0
    sin, cos = math.sin, math.cos

    def rhs(eta, y):
        r, p = float(y[0]), float(y[1])
        tau = (1.25 * eta) ** 0.8
        x = tau**-0.5
        acc = 0.0
        for c in rho_c:
            acc = acc * x + c
        rho_s = sq / x + acc
        acc = 0.0
        for c in psi_c:
            acc = acc * x + c
        psi_s = psi0 + x * acc
        q = SIGMA * eta**0.2
        n = m / math.sqrt(1.0 + tau)
        rho = rho_s + r / q
        if rho <= RHO_MIN:
            raise AmplitudeSingular(rho, RHO_MIN)
        sp2 = sin(2.0 * p + 2.0 * psi_s)
        c2_shift = cos(2.0 * p + 2.0 * psi_s) - cos(2.0 * psi_s)
        c1_shift = cos(p + psi_s) - cos(psi_s)
        dr = (
            f * (sin(p + psi_s) - sin(psi_s))
            + r / (5.0 * eta)
            - n * rho_s * (sp2 - sin(2.0 * psi_s))
            - n * r / q * sp2
        )
        h_r = 2.0 * r * rho_s / q**2 + r * r / q**3 - p / (5.0 * eta) - 0.5 * n / q * c2_shift
        g = -0.5 * n / q * c2_shift + f / q * (rho_s * c1_shift - cos(psi_s) * r / q) / (rho_s * rho) + p / (5.0 * eta)
        return np.array((dr, h_r + g))

    return rhs


def lyapunov_rate(state: TransformedState, sol: AsymptoticSolution, defect: bool = False):
    """Total derivative ``dL/deta`` along the deviation flow.

    ``dL/deta`` at fixed ``(r, p)`` comes from a central difference with step
    ``eta * 1e-6`` and one Richardson refinement; the spatial gradient is in
    closed form.  ``defect`` is passed through to :func:`transformed_rhs`.
    """
    r = np.asarray(state.r, dtype=float)
    p = np.asarray(state.p, dtype=float)
    eta = np.asarray(state.eta, dtype=float)
    f = sol.params.f

    def L_at(e):
        fr = _frame(sol, e)
        return _H(r, p, fr, f) + _V1(r, p, fr, sol) + _V2(r, p, fr)

    h = eta * FD_REL_STEP
    d1 = (L_at(eta + h) - L_at(eta - h)) / (2.0 * h)
    d2 = (L_at(eta + 0.5 * h) - L_at(eta - 0.5 * h)) / h
    dL_deta = (4.0 * d2 - d1) / 3.0

    fr = _frame(sol, eta)
    h_r, h_p = _grad_H(r, p, fr, f)
    v_r, v_p = _grad_V1(r, p, fr, sol)
    L_r = h_r + v_r - p / (10.0 * eta)
    L_p = h_p + v_p - r / (10.0 * eta)
    dr, dp = transformed_rhs(TransformedState(r, p, eta), sol, defect=defect)
    return _unbox(dL_deta + L_r * dr + L_p * dp)


def quadratic_coefficient(params: ReducedParams, psi0: float) -> float:
    """``c`` in the leading form ``sqrt(lam) r**2 + c p**2`` of ``L``."""
    ms = params.m_star
    return params.f * (params.m * math.cos(2.0 * psi0) - ms * math.cos(psi0)) / (2.0 * ms)


def quadratic_form(r, p, sol: AsymptoticSolution):
    c = quadratic_coefficient(sol.params, sol.psi0)
    return math.sqrt(sol.params.lam) * np.asarray(r) ** 2 + c * np.asarray(p) ** 2


# -- sampled verification -------------------------------------------------------

@dataclass(frozen=True)
class LyapunovDomain:
    """``d < d_star``, ``eta > eta_star``, with the slack factors eps1, eps2."""

    d_star: float
    eta_star: float
    eps1: float = 0.5
    eps2: float = 0.5

    def __post_init__(self):
        if not (self.d_star > 0 and self.eta_star > 0):
            raise ValueError("d_star and eta_star must be positive")
        if not (0 < self.eps1 < 1 and 0 < self.eps2 < 1):
            raise ValueError("eps1 and eps2 must lie in (0, 1)")

    def constants(self, params: ReducedParams, psi0: float) -> tuple[float, float, float]:
        """``(A, B, beta)`` with ``beta = (1 - eps2) A / (5 (1 + eps1) B)``."""
        sq = math.sqrt(params.lam)
        c = quadratic_coefficient(params, psi0)
        A, B = min(sq, c), max(sq, c)
        beta = (1 - self.eps2) * A / (5 * (1 + self.eps1) * B)
        return A, B, beta


@dataclass
class LyapunovReport:
    branch: int
    domain: LyapunovDomain
    samples: int
    bound_violations: int
    derivative_violations: int
    min_margin: float
    min_relative_margin: float
    applicable: bool
    A: float
    B: float
    beta: float
    seed: int
    K: int
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.bound_violations == 0 and self.derivative_violations == 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = asdict(self.domain)
        return d


ETA_SPAN_FACTOR = 1e3


def sample_points(domain: LyapunovDomain, seed: int, start: int, stop: int):
    """Points ``start..stop-1`` of the deterministic sample sequence.

    Each index owns its own generator seeded by ``(seed, index)``, so any
    partition of the index range reproduces the same points.
    """
    u = np.empty((stop - start, 3))
    for k, i in enumerate(range(start, stop)):
        u[k] = np.random.default_rng((seed, i)).random(3)
    d = domain.d_star * np.sqrt(u[:, 0])
    theta = 2.0 * np.pi * u[:, 1]
    eta = domain.eta_star * ETA_SPAN_FACTOR ** u[:, 2]
    return d * np.cos(theta), d * np.sin(theta), eta


def _check_chunk(sol, domain, seed, start, stop):
    r, p, eta = sample_points(domain, seed, start, stop)
    state = TransformedState(r, p, eta)
    Q = quadratic_form(r, p, sol)
    L = np.asarray(hamiltonian(state, sol, "L"))
    rate = np.asarray(lyapunov_rate(state, sol))
    lo = L - (1 - domain.eps1) * Q
    hi = (1 + domain.eps1) * Q - L
    dv = -(1 - domain.eps2) * Q / (5.0 * eta) - rate
    bound_bad = int(np.count_nonzero((lo < 0) | (hi < 0)))
    deriv_bad = int(np.count_nonzero(dv < 0))
    raw = np.minimum(np.minimum(lo, hi), dv)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.minimum(np.minimum(lo, hi) / np.abs(Q), dv * 5.0 * eta / np.abs(Q))
    return bound_bad, deriv_bad, float(raw.min()), float(np.nanmin(rel))


def check_bounds(
    sol: AsymptoticSolution, domain: LyapunovDomain, n_samples: int = 10_000, seed: int = 0, workers: int = 1
) -> LyapunovReport:
    """Count sampled violations of the two-sided bound and of the decay bound.

    Points are uniform in the disc ``d < d_star`` and log-uniform in
    ``eta in [eta_star, 1e3 eta_star]``.  The report is produced even when
    the branch's parameter condition fails; ``applicable`` is then false.
    """
    chunks = max(1, int(workers))
    edges = np.linspace(0, n_samples, chunks + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if chunks == 1:
        results = [_check_chunk(sol, domain, seed, a, b) for a, b in jobs]
    else:
        with ProcessPoolExecutor(max_workers=chunks) as pool:
            futures = [pool.submit(_check_chunk, sol, domain, seed, a, b) for a, b in jobs]
            results = [fut.result() for fut in futures]
    A, B, beta = domain.constants(sol.params, sol.psi0)
    return LyapunovReport(
        branch=sol.branch,
        domain=domain,
        samples=n_samples,
        bound_violations=sum(r[0] for r in results),
        derivative_violations=sum(r[1] for r in results),
        min_margin=min(r[2] for r in results),
        min_relative_margin=min(r[3] for r in results),
        applicable=lyapunov_condition(sol.params, sol.branch),
        A=A,
        B=B,
        beta=beta,
        seed=seed,
        K=sol.K,
        params=sol.params.as_dict(),
    )


D_STAR_GRID = (0.2, 0.1, 0.05, 0.02, 0.01)
ETA_STAR_GRID = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7)


def search_domain(
    sol: AsymptoticSolution,
    eps1: float = 0.5,
    eps2: float = 0.5,
    n_samples: int = 10_000,
    seed: int = 0,
    d_grid=D_STAR_GRID,
    eta_grid=ETA_STAR_GRID,
) -> Optional[LyapunovDomain]:
    """First ``(d_star, eta_star)`` on a coarse grid with no sampled violation.

    The grid is scanned from the smallest ``eta_star`` and, for each, from
    the largest ``d_star``.
    """
    for eta_star in eta_grid:
        for d_star in d_grid:
            dom = LyapunovDomain(d_star, eta_star, eps1, eps2)
            if check_bounds(sol, dom, n_samples, seed).passed:
                return dom
    return None


# -- frozen domains ---------------------------------------------------------------

FIXTURE_NAME = "lyapunov_domains.json"


@dataclass(frozen=True)
class FrozenDomain:
    branch: int
    params: dict
    K: int
    d_star: float
    eta_star: float
    eps1: float
    eps2: float
    seed: int

    @property
    def domain(self) -> LyapunovDomain:
        return LyapunovDomain(self.d_star, self.eta_star, self.eps1, self.eps2)

    def solution(self) -> AsymptoticSolution:
        return build_series(ReducedParams(**self.params), self.branch, self.K)

    def matches(self, params: ReducedParams, branch: int) -> bool:
        return branch == self.branch and all(
            math.isclose(self.params[k], v, rel_tol=1e-12, abs_tol=1e-15) for k, v in params.as_dict().items()
        )


def load_fixtures(path: Optional[Union[str, Path]] = None) -> list[FrozenDomain]:
    if path is None:
        text = resources.files("autoresonance.data").joinpath(FIXTURE_NAME).read_text()
    else:
        p = Path(path)
        if not p.exists():
            return []
        text = p.read_text()
    return [FrozenDomain(**entry) for entry in json.loads(text)]


def save_fixtures(entries: list[FrozenDomain], path: Union[str, Path]) -> None:
    data = [asdict(e) for e in entries]
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def find_fixture(params: ReducedParams, branch: int, path=None) -> Optional[FrozenDomain]:
    for entry in load_fixtures(path):
        if entry.matches(params, branch):
            return entry
    return None
