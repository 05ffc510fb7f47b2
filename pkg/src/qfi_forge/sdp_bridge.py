"""File-exchange bridge to an external SDP solver.

The bridge writes the materialized problem to a JSON file, invokes the
solver executable as ``solver <problem.json> <solution.json>`` and reads
the solution back.  It is disabled unless the caller selects
``engine='bridge'`` and QFI_FORGE_SOLVER names the executable, so the
built-in solver keeps the test suite self-contained.

Problem file schema (all matrices real, after Hermitian realification):

```
{
  "nvars": int,                  # flat real coordinate count
  "objective": [float, ...],     # minimize objective . x
  "constant": float,
  "blocks": [                    # PSD constraints G0 + sum_i x_i G_i >= 0
    {"dim": m,
     "g0": [[row, col, value], ...],          # sparse triplets
     "coeffs": [{"var": i, "entries": [[row, col, value], ...]}, ...]}
  ],
  "equalities": {"rows": [[...]], "rhs": [...]}   # dense E x = f
}
```

Solution file schema: ``{"status": str, "x": [...], "gap": float}``.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from pathlib import Path

import numpy as np


def _triplets(m: np.ndarray, tol: float = 0.0) -> list:
    rows, cols = np.nonzero(np.abs(m) > tol)
    return [[int(r), int(c), float(m[r, c])] for r, c in zip(rows, cols)]


def problem_to_dict(compiled) -> dict:
    blocks = []
    for g0, mats in compiled.blocks:
        coeffs = []
        for i in range(compiled.nvars):
            ent = _triplets(mats[i])
            if ent:
                coeffs.append({"var": i, "entries": ent})
        blocks.append({"dim": int(g0.shape[0]), "g0": _triplets(g0),
                       "coeffs": coeffs})
    return {
        "nvars": compiled.nvars,
        "objective": list(map(float, compiled.c)),
        "constant": compiled.constant,
        "blocks": blocks,
        "equalities": {
            "rows": compiled.emat.tolist(),
            "rhs": compiled.erhs.tolist(),
        },
    }


def solve_via_bridge(compiled, solver_path: str, gap_tol: float,
                     feas_tol: float):
    from .sdp import SdpSolution

    with tempfile.TemporaryDirectory(prefix="qfi_sdp_") as tmp:
        prob = Path(tmp) / "problem.json"
        sol = Path(tmp) / "solution.json"
        prob.write_text(json.dumps(problem_to_dict(compiled)))
        res = subprocess.run(
            [solver_path, str(prob), str(sol)],
            capture_output=True, text=True, timeout=3600,
        )
        if res.returncode != 0 or not sol.exists():
            raise RuntimeError(
                f"external solver failed (rc={res.returncode}): {res.stderr[-500:]}"
            )
        data = json.loads(sol.read_text())
    x = np.asarray(data["x"], dtype=float)
    value = compiled.sign * (compiled.c @ x) + compiled.constant
    return SdpSolution(
        status=data.get("status", "optimal"),
        objective_value=float(value),
        variable_values=compiled.unpack(x),
        duality_gap=float(data.get("gap", np.nan)),
    )
