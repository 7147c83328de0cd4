"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one ``PASS``/``FAIL`` line (shown in the terminal
summary) and then asserts on the same verdict.  Nothing here is loosened to
make a criterion pass.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from autoresonance import experiments as ex
from autoresonance.asymptotics import build_series, closed_form_leading, phase_roots
from autoresonance.cli import main
from autoresonance.lyapunov import check_bounds, find_fixture, to_transformed, transformed_rhs
from autoresonance.model import OscillatorParams, ReducedParams, ReducedState, reduce_params, reduced_rhs
from autoresonance.stability import classify, d0, eigenvalue_error, oscillator_regime, stable_phases

P4 = ReducedParams(1.0, 1.0, 4.0)


def verdict(record, number, title, ok, elapsed, budget, detail):
    within = elapsed < budget
    passed = bool(ok and within)
    record(f"criterion {number}: {'PASS' if passed else 'FAIL'} {title}: {detail} ({elapsed:.2f} s / {budget:g} s)")
    return passed


def log_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


# The four cells per column follow the stable/unstable/absent verdicts per branch.
TABLE = {
    -3.0: ["Unstable", "Unstable", "Stable", "Stable"],
    -1.5: ["Unstable", "Unstable", "Stable", "Stable"],
    -0.5: ["Unstable", "Stable", "NotPresent", "NotPresent"],
    0.0: ["Unstable", "Stable", "NotPresent", "NotPresent"],
    0.5: ["Unstable", "Stable", "NotPresent", "NotPresent"],
    1.5: ["Stable", "Stable", "Unstable", "Unstable"],
    3.0: ["Stable", "Stable", "Unstable", "Unstable"],
}


def test_criterion_01_table(acceptance_line):
    t0 = time.perf_counter()
    ms = ReducedParams(1.0, 1.0, 0.0).m_star
    bad = []
    for ratio, expected in TABLE.items():
        got = [v.regime.value for v in classify(ReducedParams(1.0, 1.0, ratio * ms))]
        if got != expected:
            bad.append((ratio, got))
    ok = verdict(acceptance_line, 1, "stability table", not bad, time.perf_counter() - t0, 1.0,
                 f"{len(TABLE) * 4 - 4 * len(bad)}/{len(TABLE) * 4} cells match")
    assert ok, bad


def test_criterion_02_discriminants(acceptance_line):
    t0 = time.perf_counter()
    got = [d0(P4, b) for b in (1, 2, 3)]
    want = [-14.0, -18.0, 15.75]
    err = max(abs(g - w) / abs(w) for g, w in zip(got, want))
    ok = verdict(acceptance_line, 2, "D0 spot values", err <= 1e-12, time.perf_counter() - t0, 1.0,
                 f"max relative error {err:.1e}")
    assert ok


def test_criterion_03_closed_forms(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, points = 0.0, 0
    while points < 20:
        lam, f = rng.uniform(0.2, 5), rng.uniform(0.2, 5)
        ms = f / math.sqrt(4 * lam)
        ratio = rng.choice([rng.uniform(0.1, 0.9), rng.uniform(1.1, 10)]) * rng.choice([-1, 1])
        p = ReducedParams(lam, f, ratio * ms)
        for b, psi0 in phase_roots(p):
            sol = build_series(p, b, K=2)
            rho2, psi1 = closed_form_leading(p, psi0)
            worst = max(worst, abs(sol.rho_coeffs[2] - rho2) / max(abs(rho2), 1e-300),
                        abs(sol.psi_coeffs[0] - psi1) / abs(psi1))
        points += 1
    ok = verdict(acceptance_line, 3, "series closed forms", worst <= 1e-12, time.perf_counter() - t0, 5.0,
                 f"20 points, max relative error {worst:.1e}")
    assert ok


def test_criterion_04_residual_decay(acceptance_line):
    t0 = time.perf_counter()
    tau = np.logspace(2, 4, 41)
    s2 = log_slope(tau, build_series(P4, 1, K=2).residual(tau)[0])
    s4 = log_slope(tau, build_series(P4, 1, K=4).residual(tau)[0])
    good = abs(s2 + 1.5) <= 0.3 and s4 < s2
    ok = verdict(acceptance_line, 4, "residual decay", good, time.perf_counter() - t0, 10.0,
                 f"K=2 slope {s2:.3f}, K=4 slope {s4:.3f}")
    assert ok


def test_criterion_05_eigenvalue_convergence(acceptance_line):
    t0 = time.perf_counter()
    eta = np.logspace(3, 6, 31)
    slopes = {b: log_slope(eta, eigenvalue_error(build_series(P4, b), eta)) for b in (1, 3)}
    good = all(abs(s + 0.4) <= 0.15 for s in slopes.values())
    ok = verdict(acceptance_line, 5, "eigenvalue convergence", good, time.perf_counter() - t0, 10.0,
                 f"slopes branch 1 {slopes[1]:.3f}, branch 3 {slopes[3]:.3f} (target -0.4 +- 0.15)")
    assert ok


def test_criterion_06_pushforward(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for b in (1, 2, 3, 4):
        sol = build_series(P4 if b < 3 else ReducedParams(1.0, 1.0, -4.0), b)
        n = 250
        tau = 10 ** rng.uniform(0.5, 5, n)
        rho_s, psi_s = sol.eval(tau)
        rho = rho_s + rng.uniform(-0.2, 0.2, n)
        psi = psi_s + rng.uniform(-0.5, 0.5, n)
        fr, fp = np.array([reduced_rhs(ReducedState(*z), sol.params) for z in zip(rho, psi, tau)]).T
        drs, dps = sol.derivative(tau)
        ref_r = ((fr - drs) * tau**0.25 + 0.25 * (rho - rho_s) * tau**-0.75) * tau**-0.25
        ref_p = (fp - dps) * tau**-0.25
        got_r, got_p = transformed_rhs(to_transformed(rho, psi, tau, sol), sol)
        worst = max(worst, np.max(np.abs(got_r - ref_r)) / np.max(np.abs(ref_r)),
                    np.max(np.abs(got_p - ref_p)) / np.max(np.abs(ref_p)))
    ok = verdict(acceptance_line, 6, "pushforward consistency", worst <= 1e-8, time.perf_counter() - t0, 5.0,
                 f"1000 states, max relative error {worst:.1e}")
    assert ok


def test_criterion_07_lyapunov_bounds(acceptance_line):
    t0 = time.perf_counter()
    cases = [(1, 4.0), (2, 4.0), (2, 0.0), (3, -4.0), (4, -4.0)]
    counts = []
    for b, m in cases:
        entry = find_fixture(ReducedParams(1.0, 1.0, m), b)
        if entry is None:
            counts.append((b, m, None))
            continue
        rep = check_bounds(entry.solution(), entry.domain, 10_000, entry.seed)
        counts.append((b, m, rep.bound_violations + rep.derivative_violations))
    good = all(c == 0 for _, _, c in counts)
    detail = ", ".join(f"b{b} m={m:g}: {c}" for b, m, c in counts)
    ok = verdict(acceptance_line, 7, "Lyapunov bounds on frozen domains", good, time.perf_counter() - t0, 30.0,
                 f"violations {detail}")
    assert ok


def test_criterion_08_asymptotic_attraction(acceptance_line):
    t0 = time.perf_counter()
    res = ex.perturbation_decay(build_series(P4, 1), tau0=20.0, tau1=500.0, kick=0.05)
    good = res.ratio < 0.2 and res.exponent > 0
    ok = verdict(acceptance_line, 8, "asymptotic attraction", good, time.perf_counter() - t0, 10.0,
                 f"final/initial {res.ratio:.3f} (needs < 0.2), envelope exponent {res.exponent:.3f}")
    assert ok


def test_criterion_09_reduced_presets(acceptance_line):
    t0 = time.perf_counter()
    cfg = ex.IntegratorConfig(sample_interval=0.01)
    notes, good = [], True
    for name in ("fig2a", "fig2b"):
        res = ex.run_preset(ex.PRESETS[name], cfg)
        ratio = res.table[-1, 1] / math.sqrt(50.0)
        psi_max = float(np.max(np.abs(res.table[:, 2])))
        good &= 0.8 <= ratio <= 1.2 and psi_max <= 4 * math.pi
        notes.append(f"{name} rho/sqrt(50)={ratio:.3f} max|psi|={psi_max:.2f}")
    res = ex.run_preset(ex.PRESETS["fig2c"], cfg)
    sup = float(np.max(res.table[:, 1]))
    good &= sup <= 3.0
    notes.append(f"fig2c sup rho={sup:.3f} (needs <= 3)")
    ok = verdict(acceptance_line, 9, "reduced presets fig2a-c", good, time.perf_counter() - t0, 10.0, "; ".join(notes))
    assert ok


def test_criterion_10_oscillator_capture(acceptance_line):
    t0 = time.perf_counter()
    no_pump = ex.rescale_eps(OscillatorParams(**ex.PRESETS["fig1a"].params))
    pump = ex.rescale_eps(OscillatorParams(**ex.PRESETS["fig1c"].params))
    flags = {
        "h0=0 anti-phase": ex.oscillator_capture(no_pump, math.pi).captured,
        "h0=0 in-phase": ex.oscillator_capture(no_pump, 0.0).captured,
        "pumped in-phase": ex.oscillator_capture(pump, 0.0).captured,
        "pumped anti-phase": ex.oscillator_capture(pump, math.pi).captured,
    }
    want = {"h0=0 anti-phase": True, "h0=0 in-phase": False, "pumped in-phase": True, "pumped anti-phase": True}
    ok = verdict(acceptance_line, 10, "oscillator capture flags at eps=0.02", flags == want,
                 time.perf_counter() - t0, 60.0, ", ".join(f"{k}: {v}" for k, v in flags.items()))
    assert ok


def test_criterion_11_regime_map(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    mismatches = 0
    for _ in range(50):
        p = OscillatorParams(rng.uniform(1e-4, 1e-2), rng.uniform(1e-6, 1e-3), rng.uniform(0.1, 2),
                             rng.uniform(0.2, 3), rng.uniform(-6, 6))
        via_reduced = stable_phases(reduce_params(p))
        direct = sorted(oscillator_regime(p).psi0)
        if len(via_reduced) != len(direct) or not np.allclose(via_reduced, direct, rtol=1e-12, atol=1e-12):
            mismatches += 1
    ok = verdict(acceptance_line, 11, "oscillator regime map", mismatches == 0, time.perf_counter() - t0, 1.0,
                 f"{50 - mismatches}/50 draws agree")
    assert ok


def test_criterion_12_determinism(acceptance_line, tmp_path):
    t0 = time.perf_counter()
    differing = []
    for name in ex.PRESETS:
        first, second = tmp_path / name / "a", tmp_path / name / "b"
        assert main(["--out-dir", str(first), "--workers", "1", "preset", name]) == 0
        manifest = first / f"{name}.manifest.json"
        assert main(["--out-dir", str(second), "--workers", "3", "replay", str(manifest)]) == 0
        for path in first.iterdir():
            if path.read_bytes() != (second / path.name).read_bytes():
                differing.append(path.name)
    ok = verdict(acceptance_line, 12, "replay determinism", not differing, time.perf_counter() - t0, 60.0,
                 f"{len(ex.PRESETS)} presets replayed, differing files: {differing or 'none'}")
    assert ok


@pytest.mark.parametrize("ratio", sorted(TABLE))
def test_table_column_is_consistent_with_discriminants(ratio):
    # sanity link between criteria 1 and 2: a stable verdict always carries D0 < 0
    for v in classify(ReducedParams(1.0, 1.0, ratio * 0.5)):
        if v.regime.value == "Stable":
            assert v.d0 < 0
