"""Regenerate ``frozen_oracles.json`` from the reference implementations.

Run ``python tests/freeze_oracles.py`` only when an oracle itself changes;
the tests compare the library against the frozen numbers, so a library
regression cannot silently move its own reference.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

import oracles

PV_POINTS = [(0.0, 3.0), (0.0, 1.0), (0.3, 0.75), (0.5, 0.75), (1.0, 0.75), (1.0, 2.0),
             (2.0, 0.75), (2.5, 0.5), (3.0, 1.5), (5.0, 0.75)]
REG_POINTS = [(0.0, 1.0), (0.0, 3.0), (0.5, 2.0), (0.5, 4.0), (1.5, 0.5), (4.0, 1.0)]
BESSEL_X = [0.3, 1.0, 1.7, 2.404826, 5.0, 8.0, 9.2, 15.0, 40.0]
POISSON = [(0.0, 0.1), (0.5, 0.1), (1.3, 1.0), (0.2, 2.5), (2.0, 4.0)]
LINDBLAD_TIMES = [0.0, 0.1, 0.3, 0.7, 1.5, 3.0]


def _lindblad_case() -> dict:
    # three qubits with hand-picked couplings (units of Gamma0)
    J = np.array([[0.0, 0.4, -0.15], [0.4, 0.0, 0.25], [-0.15, 0.25, 0.0]])
    G = np.array([[1.0, 0.6, 0.2], [0.6, 1.0, 0.5], [0.2, 0.5, 1.0]])
    b = 0.3
    L = oracles.lindblad_superop(J, G, b * G)
    rho0 = np.zeros((8, 8), complex)
    rho0[7, 7] = 1.0
    states = oracles.evolve_expm(L, rho0, LINDBLAD_TIMES)
    return {"J": J.tolist(), "Gamma": G.tolist(), "boltzmann": b, "times": LINDBLAD_TIMES,
            "sum_sigma_z": [oracles.sigma_z_total(r) for r in states],
            "populations": [np.real(np.diag(r)).tolist() for r in states]}


def main() -> None:
    data = {
        "j0_first_zero": oracles.j0_zero_bisect(),
        "j0": {repr(x): oracles.j0_ref(x) for x in BESSEL_X},
        "y0": {repr(x): oracles.y0_ref(x) for x in BESSEL_X},
        "pv": [[x, d, oracles.pv_oracle(x, d)] for x, d in PV_POINTS],
        "regular": [[x, d, oracles.regular_oracle(x, d)] for x, d in REG_POINTS],
        "poisson": [[k, a, oracles.poisson_oracle(k, a)] for k, a in POISSON],
        "lindblad_n3": _lindblad_case(),
        "bose_beta1": 1.0 / math.expm1(1.0),
    }
    path = Path(__file__).with_name("frozen_oracles.json")
    path.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
