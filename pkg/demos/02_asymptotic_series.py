"""Power series of the growing solutions in ``tau**(-1/2)``.

Builds each branch for one parameter set, prints the leading
coefficients and shows how the residual of the truncated series falls
faster as more terms are kept.

    python3 demos/02_asymptotic_series.py
"""

from __future__ import annotations

import numpy as np

from autoresonance.asymptotics import build_series, closed_form_leading, phase_roots
from autoresonance.model import ReducedParams

params = ReducedParams(lam=1.0, f=1.0, m=4.0)
print(f"m_* = {params.m_star}, m = {params.m}")
for branch, psi0 in phase_roots(params):
    sol = build_series(params, branch, K=4)
    rho2, psi1 = closed_form_leading(params, psi0)
    print(f"branch {branch}: psi0 = {psi0:+.6f}, rho_2 = {sol.rho_coeffs[2]:+.6f} (closed form {rho2:+.6f}), "
          f"psi_1 = {sol.psi_coeffs[0]:+.6f} (closed form {psi1:+.6f})")

tau = np.logspace(2, 4, 41)
for K in (2, 3, 4, 5):
    res_rho, _ = build_series(params, 1, K).residual(tau)
    slope = np.polyfit(np.log(tau), np.log(np.abs(res_rho)), 1)[0]
    print(f"K={K}: amplitude residual ~ tau^{slope:.2f}")

rho, psi = build_series(params, 1, K=2).eval(100.0)
print(f"branch 1, K=2 at tau=100: rho = {rho:.6f}, psi = {psi:.6f}")
