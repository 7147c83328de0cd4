"""Which growing solutions are stable, as the parametric pumping varies.

Prints the verdict per branch for a sweep of ``m / m_*`` together with the
leading discriminant of the linearization, then the oscillator-level view
of the same question.

    python3 demos/03_stability_map.py
"""

from __future__ import annotations

import numpy as np

from autoresonance.asymptotics import build_series
from autoresonance.model import OscillatorParams, ReducedParams
from autoresonance.stability import classify, eigenvalue_error, jacobian, oscillator_regime

for ratio in (-3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0):
    params = ReducedParams(1.0, 1.0, ratio * 0.5)
    cells = []
    for v in classify(params):
        d = "" if np.isnan(v.d0) else f" (D0={v.d0:+.3g})"
        cells.append(f"{v.regime.value}{d}")
    print(f"m/m_* = {ratio:+.1f}: " + " | ".join(cells))

params = ReducedParams(1.0, 1.0, 4.0)
print("\nlinearization along branch 1 and branch 3 at m = 4:")
for branch in (1, 3):
    sol = build_series(params, branch)
    for eta in (1e3, 1e5):
        pt = jacobian(sol, eta)
        print(f"  branch {branch}, eta={eta:.0e}: eigenvalues {pt.eigen[0]:.5f}, {pt.eigen[1]:.5f}; "
              f"distance to the limit {eigenvalue_error(sol, eta)[0]:.2e}")

for h0 in (0.0, 5.0, -5.0):
    r = oscillator_regime(OscillatorParams(eps=1e-3, alpha=5e-5, gamma=1 / 6, f0=1.0, h0=h0))
    print(f"oscillator with h0={h0:+}: {r.kind.value}, stable phases {tuple(round(p, 4) for p in r.psi0)}")
