"""Sampled check of the Lyapunov inequalities near a growing solution.

Loads the frozen domains, re-checks each with 10 000 samples, and then
shows the same check failing on a branch that is linearly unstable.
Finally it follows one perturbed trajectory in the deviation coordinates
and prints how the Lyapunov function decays along it.

    python3 demos/04_lyapunov_check.py
"""

from __future__ import annotations

import math

import numpy as np

from autoresonance.asymptotics import build_series
from autoresonance.integrate import IntegratorConfig, integrate
from autoresonance.lyapunov import (
    LyapunovDomain,
    TransformedState,
    check_bounds,
    hamiltonian,
    load_fixtures,
    transformed_field,
)
from autoresonance.model import ReducedParams

for entry in load_fixtures():
    rep = check_bounds(entry.solution(), entry.domain, 10_000, entry.seed)
    print(f"branch {entry.branch}, m={entry.params['m']:+}: d_star={entry.d_star}, eta_star={entry.eta_star:.0e} -> "
          f"{rep.bound_violations} bound / {rep.derivative_violations} decay violations, "
          f"min margin {rep.min_margin:.2e}")

unstable = build_series(ReducedParams(1.0, 1.0, 0.0), 1)
rep = check_bounds(unstable, LyapunovDomain(0.05, 1e4), 2000)
print(f"branch 1 at m=0 (applicable={rep.applicable}): {rep.derivative_violations} of {rep.samples} "
      "sampled rates have the wrong sign")

sol = build_series(ReducedParams(1.0, 1.0, -4.0), 3)
eta0 = 100.0
traj = integrate(transformed_field(sol), (0.02 / math.sqrt(2), 0.02 / math.sqrt(2)), (eta0, 3 * eta0),
                 IntegratorConfig(1e-9, 1e-13, max_step=1.0, sample_interval=20.0))
ell = np.asarray(hamiltonian(TransformedState(traj.y[:, 0], traj.y[:, 1], traj.t), sol))
for eta, value in zip(traj.t, ell):
    print(f"  eta={eta:6.1f}  L={value:.4e}")
