from __future__ import annotations

import json
import math

import numpy as np
import pytest

from autoresonance.asymptotics import build_series
from autoresonance.errors import AmplitudeSingular
from autoresonance.integrate import IntegratorConfig, integrate
from autoresonance.lyapunov import (
    FrozenDomain,
    LyapunovDomain,
    TransformedState,
    check_bounds,
    find_fixture,
    from_transformed,
    g_function,
    hamiltonian,
    load_fixtures,
    lyapunov_rate,
    quadratic_coefficient,
    sample_points,
    save_fixtures,
    series_defect,
    to_transformed,
    transformed_field,
    transformed_rhs,
)
from autoresonance.model import ReducedParams, ReducedState, reduced_rhs
from autoresonance.stability import eta_of_tau, jacobian, tau_of_eta

P4 = ReducedParams(1.0, 1.0, 4.0)
PM4 = ReducedParams(1.0, 1.0, -4.0)


def sol_for(branch, K=4):
    return build_series(P4 if branch in (1, 2) else PM4, branch, K)


def pushforward(rho, psi, tau, sol):
    """Chain rule applied to the reduced vector field: the independent route."""
    d_rho, d_psi = np.array([reduced_rhs(ReducedState(*z), sol.params) for z in zip(rho, psi, tau)]).T
    rho_s, _ = sol.eval(tau)
    drho_s, dpsi_s = sol.derivative(tau)
    dtau_deta = tau**-0.25
    dr = ((d_rho - drho_s) * tau**0.25 + 0.25 * (rho - rho_s) * tau**-0.75) * dtau_deta
    dp = (d_psi - dpsi_s) * dtau_deta
    return dr, dp


def test_origin_and_time_map():
    sol = sol_for(1)
    rho, psi = sol.eval(16.0)
    st = to_transformed(rho, psi, 16.0, sol)
    assert (st.r, st.p) == (0.0, 0.0)
    assert st.eta == pytest.approx(25.6)


def test_round_trip():
    rng = np.random.default_rng(1)
    for b in (1, 2, 3, 4):
        sol = sol_for(b)
        tau = 10 ** rng.uniform(0.5, 5, 200)
        rho_s, psi_s = sol.eval(tau)
        rho = rho_s + rng.uniform(-0.3, 0.3, tau.size)
        psi = psi_s + rng.uniform(-0.3, 0.3, tau.size)
        back = from_transformed(to_transformed(rho, psi, tau, sol), sol)
        np.testing.assert_allclose(back, (rho, psi, tau), rtol=1e-12, atol=1e-12)


def test_all_pieces_vanish_at_origin():
    for b in (1, 2, 3, 4):
        st = TransformedState(0.0, 0.0, 1e3)
        for which in ("H", "V1", "V2", "L"):
            assert hamiltonian(st, sol_for(b), which) == 0.0
    with pytest.raises(ValueError):
        hamiltonian(TransformedState(0.0, 0.0, 1e3), sol_for(1), "X")


def test_candidate_matches_its_quadratic_form():
    L = hamiltonian(TransformedState(0.01, 0.01, 1e6), sol_for(1))
    assert L == pytest.approx(4.5e-4, rel=0.05)


def test_quadratic_coefficients():
    assert quadratic_coefficient(P4, 0.0) == pytest.approx(3.5)
    # branches 3, 4: (m_*^2 - m^2) f / (2 m m_*), positive iff m < -m_*
    sol = sol_for(3)
    ms = PM4.m_star
    assert quadratic_coefficient(PM4, sol.psi0) == pytest.approx((ms**2 - 16) / (2 * -4 * ms), rel=1e-12)
    assert quadratic_coefficient(PM4, sol.psi0) > 0
    assert quadratic_coefficient(P4, build_series(P4, 3).psi0) < 0


@pytest.mark.parametrize("psi0", [0.0, math.pi])
def test_shifted_g_reduces_to_the_unshifted_form(psi0):
    p = np.linspace(-0.5, 0.5, 41)
    ms = P4.m_star
    plain = 0.5 * P4.m * (1 - np.cos(2 * p)) - 2 * ms * math.cos(psi0) * (1 - np.cos(p))
    np.testing.assert_allclose(g_function(p, psi0, P4), plain, rtol=1e-12, atol=1e-16)


@pytest.mark.parametrize("branch", [1, 2, 3, 4])
def test_pushforward_consistency(branch):
    sol = sol_for(branch)
    rng = np.random.default_rng(branch)
    tau = 10 ** rng.uniform(0.5, 5, 1000)
    rho_s, psi_s = sol.eval(tau)
    rho = rho_s + rng.uniform(-0.2, 0.2, tau.size)
    psi = psi_s + rng.uniform(-0.5, 0.5, tau.size)
    ref = np.array(pushforward(rho, psi, tau, sol))
    got = np.array(transformed_rhs(to_transformed(rho, psi, tau, sol), sol))
    scale = np.max(np.abs(ref), axis=0)
    assert np.max(np.abs(got - ref) / scale) <= 1e-8


def test_scalar_field_matches_vectorized():
    sol = sol_for(3)
    field = transformed_field(sol)
    rng = np.random.default_rng(4)
    for _ in range(50):
        r, p = rng.uniform(-0.1, 0.1, 2)
        eta = 10 ** rng.uniform(0, 6)
        ref = np.array(transformed_rhs(TransformedState(r, p, eta), sol, defect=False))
        assert np.allclose(field(eta, (r, p)), ref, rtol=1e-12, atol=1e-18)


def test_amplitude_singularity():
    sol = sol_for(1)
    with pytest.raises(AmplitudeSingular):
        transformed_rhs(TransformedState(-1e3, 0.0, 10.0), sol)


@pytest.mark.parametrize("branch", [1, 3])
@pytest.mark.parametrize("K", [2, 3, 4])
def test_origin_defect_orders(branch, K):
    eta = np.array([1e3, 1e4, 1e5])
    sol = sol_for(branch, K)
    dr, dp = transformed_rhs(TransformedState(np.zeros(3), np.zeros(3), eta), sol)
    e_r, e_p = series_defect(sol, eta)
    assert np.array_equal(dr, e_r) and np.array_equal(dp, e_p)
    # amplitude component at eta^(-2(K+1)/5); the phase component one half-order slower
    r_scaled = np.abs(e_r) * eta ** (2 * (K + 1) / 5)
    p_scaled = np.abs(e_p) * eta ** ((2 * K + 1) / 5)
    assert r_scaled[-1] <= 2 * r_scaled[0] + 1e-12
    assert p_scaled[-1] <= 2 * p_scaled[0] + 1e-12
    assert np.all(transformed_rhs(TransformedState(0.0, 0.0, 1e4), sol, defect=False) == (0.0, 0.0))


@pytest.mark.parametrize("branch", [1, 2, 3, 4])
def test_linearization_matches_jacobian(branch):
    sol = sol_for(branch)
    eta, h = 1e4, 1e-6
    fd = np.empty((2, 2))
    for j, e in enumerate(np.eye(2)):
        hi = np.array(transformed_rhs(TransformedState(*(h * e), eta), sol, defect=False))
        lo = np.array(transformed_rhs(TransformedState(*(-h * e), eta), sol, defect=False))
        fd[:, j] = (hi - lo) / (2 * h)
    np.testing.assert_allclose(fd, jacobian(sol, eta).matrix, atol=1e-6)


def test_rate_example():
    r = p = 0.05
    eta = 1e5
    rate = lyapunov_rate(TransformedState(r, p, eta), sol_for(1))
    lead = (r * r + 3.5 * p * p) / (5 * eta)
    assert rate < 0
    assert lead / 3 <= -rate <= 3 * lead


def test_rate_vanishes_at_origin():
    for b in (1, 2, 3, 4):
        assert lyapunov_rate(TransformedState(0.0, 0.0, 1e4), sol_for(b)) == 0.0


def test_unstable_regime_has_no_sign_definite_rate():
    sol = build_series(ReducedParams(1.0, 1.0, 0.0), 1)
    rep = check_bounds(sol, LyapunovDomain(0.05, 1e4), 2000)
    assert not rep.applicable
    assert rep.derivative_violations > 0 and rep.bound_violations > 0


def test_spec_domain_two_sided_bound():
    rep = check_bounds(sol_for(1), LyapunovDomain(0.05, 1e4), 10_000, seed=0)
    assert rep.bound_violations == 0 and rep.applicable


def fixture(branch, m):
    entry = find_fixture(ReducedParams(1.0, 1.0, m), branch)
    assert entry is not None
    return entry


@pytest.mark.parametrize("branch, m", [(1, 4.0), (2, 4.0), (2, 0.0), (3, -4.0), (4, -4.0)])
def test_frozen_domains_pass(branch, m):
    entry = fixture(branch, m)
    rep = check_bounds(entry.solution(), entry.domain, 10_000, entry.seed)
    assert rep.passed and rep.applicable
    assert rep.min_margin > 0


def test_positive_definite_on_frozen_domain():
    for entry in load_fixtures():
        sol = entry.solution()
        r, p, eta = sample_points(entry.domain, 7, 0, 2000)
        keep = np.hypot(r, p) > 0
        assert np.all(np.asarray(hamiltonian(TransformedState(r[keep], p[keep], eta[keep]), sol)) > 0)


def test_margin_shrinks_with_radius():
    sol = sol_for(1)
    margins = [check_bounds(sol, LyapunovDomain(d, 1e6), 1000).min_margin for d in (0.05, 0.01, 0.002)]
    assert all(m > 0 for m in margins)
    assert margins[0] > margins[1] > margins[2]
    assert margins[2] < 1e-17


def test_partition_invariance():
    dom = LyapunovDomain(0.1, 1e3)
    whole = np.array(sample_points(dom, 3, 0, 300))
    parts = np.concatenate([np.array(sample_points(dom, 3, a, b)) for a, b in ((0, 7), (7, 150), (150, 300))], axis=1)
    assert np.array_equal(whole, parts)
    sol = sol_for(3)
    one = check_bounds(sol, dom, 600, seed=3, workers=1)
    two = check_bounds(sol, dom, 600, seed=3, workers=2)
    assert one.as_dict() == two.as_dict()


def test_report_and_fixture_serialization(tmp_path):
    entry = fixture(3, -4.0)
    rep = check_bounds(entry.solution(), entry.domain, 100)
    d = json.loads(json.dumps(rep.as_dict()))
    assert d["bound_violations"] <= d["samples"] and d["domain"]["d_star"] == entry.d_star
    path = tmp_path / "domains.json"
    save_fixtures(load_fixtures(), path)
    assert load_fixtures(path) == load_fixtures()
    assert load_fixtures(tmp_path / "missing.json") == []
    assert isinstance(entry, FrozenDomain) and entry.matches(PM4, 3) and not entry.matches(PM4, 4)


def test_domain_validation():
    with pytest.raises(ValueError):
        LyapunovDomain(0.0, 1.0)
    with pytest.raises(ValueError):
        LyapunovDomain(0.1, 1.0, eps1=1.0)
    A, B, beta = LyapunovDomain(0.1, 1.0).constants(P4, 0.0)
    assert (A, B) == (1.0, pytest.approx(3.5))
    assert beta == pytest.approx(0.5 / (5 * 1.5 * 3.5))


@pytest.fixture(scope="module")
def decay_run():
    entry = fixture(3, -4.0)
    sol = entry.solution()
    eta0 = entry.eta_star
    d0 = 0.02
    y0 = (d0 / math.sqrt(2), d0 / math.sqrt(2))
    cfg = IntegratorConfig(1e-9, 1e-13, max_step=1.0, sample_interval=0.05)
    traj = integrate(transformed_field(sol), y0, (eta0, 3 * eta0), cfg)
    ell = np.asarray(hamiltonian(TransformedState(traj.y[:, 0], traj.y[:, 1], traj.t), sol))
    return sol, traj, ell


def test_candidate_decays_along_trajectories(decay_run):
    _, traj, ell = decay_run
    after = ell[len(ell) // 10 :]
    assert np.all(np.diff(after) <= 0)
    beta = -np.polyfit(np.log(traj.t), np.log(ell), 1)[0]
    assert 0 < beta <= 0.2 + 0.01
    assert np.all(ell <= ell[0] * (traj.t / traj.t[0]) ** (-0.5 * beta) * (1 + 1e-9))


def test_back_transformed_phase_approaches_its_limit(decay_run):
    sol, traj, _ = decay_run
    _, psi, tau = from_transformed(TransformedState(traj.y[:, 0], traj.y[:, 1], traj.t), sol)
    dev = np.abs(psi - sol.psi0)
    s = -np.polyfit(np.log(tau), np.log(dev), 1)[0]
    assert s > 0
    assert tau_of_eta(traj.t[0]) == pytest.approx(tau[0]) and eta_of_tau(tau[-1]) == pytest.approx(traj.t[-1])
