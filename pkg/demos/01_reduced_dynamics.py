"""Capture and non-capture in the slow amplitude-phase equations.

Runs the three reduced presets and reports whether the amplitude follows
the growing branch ``sqrt(lam tau)`` and whether the phase stays bounded.

    python3 demos/01_reduced_dynamics.py
"""

from __future__ import annotations

import math

import numpy as np

from autoresonance import experiments as ex
from autoresonance.integrate import IntegratorConfig

cfg = IntegratorConfig(sample_interval=0.05)
for name in ("fig2a", "fig2b", "fig2c"):
    preset = ex.PRESETS[name]
    res = ex.run_preset(preset, cfg)
    tau, rho, psi = res.table.T
    print(f"{name}: start (rho, psi) = {preset.y0}")
    print(f"  rho(50) / sqrt(50) = {rho[-1] / math.sqrt(50):.3f}")
    print(f"  max rho = {rho.max():.3f}, max |psi| = {np.abs(psi).max():.3f}")
    print(f"  expected: {preset.note}")

# the same verdicts from the finite-horizon capture criterion
for name in ("fig2a", "fig2b", "fig2c"):
    rho0, psi0 = ex.PRESETS[name].y0
    row = ex.basin(ex.ReducedParams(**ex.PRESETS[name].params), [rho0], [psi0])[0]
    print(f"{name} under the capture criterion: {row[3]}")
