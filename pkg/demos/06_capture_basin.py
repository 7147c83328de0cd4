"""A coarse map of which initial conditions get captured.

Sweeps a grid of starting amplitudes and phases for the reduced system and
prints a character map: ``#`` captured, ``.`` not captured, ``x`` failed.

    python3 demos/06_capture_basin.py
"""

from __future__ import annotations

import numpy as np

from autoresonance import experiments as ex
from autoresonance.model import ReducedParams

rho = np.linspace(0.1, 2.5, 9)
psi = np.linspace(-np.pi, np.pi, 17)
rows = ex.basin(ReducedParams(1.0, 1.0, 4.0), rho, psi, ex.CaptureCriterion(horizon_tau=30.0))
mark = {ex.CaptureState.CAPTURED: "#", ex.CaptureState.NOT_CAPTURED: ".", ex.CaptureState.FAILED: "x"}
print("rho \\ psi from -pi to pi")
for i, r in enumerate(rho):
    line = "".join(mark[row[3]] for row in rows[i * psi.size:(i + 1) * psi.size])
    print(f"{r:4.2f}  {line}")
