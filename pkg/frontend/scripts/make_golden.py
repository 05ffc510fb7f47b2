"""Produce the golden vectors for the bindings parity suite.

Values come straight from the library (not the CLI), so the suite
checks the full path bindings -> CLI -> library against the library
itself.
"""

import json
import pathlib
import sys

from qfi_forge import (
    IssOptions,
    ad_bounds,
    ad_bounds_correlated,
    amplitude_damping,
    asym_scaling_qfi,
    channel_from_spec,
    dephasing,
    iss_channel_qfi,
    iss_tnet_parallel_qfi,
    markov_dephasing_env,
    mop_channel_qfi,
    mop_parallel_qfi,
    par_bounds,
)

DEPH = {"kind": "builtin", "name": "dephasing", "p": 0.75}
AMP = {"kind": "builtin", "name": "amplitude_damping", "p": 0.75}
CORR = {"kind": "builtin", "name": "dephasing", "p": 0.75, "c": -0.75,
        "splitting": "one_sided"}


def main(out_path):
    entries = []

    entries.append({
        "name": "mop_channel_dephasing", "kind": "scalar", "channel": DEPH,
        "values": [mop_channel_qfi(dephasing(0.75))],
    })
    entries.append({
        "name": "mop_channel_amplitude_damping", "kind": "scalar",
        "channel": AMP,
        "values": [mop_channel_qfi(amplitude_damping(0.75))],
    })
    entries.append({
        "name": "mop_parallel_dephasing_n3", "kind": "scalar",
        "channel": DEPH, "n": 3,
        "values": [mop_parallel_qfi(dephasing(0.75), 3)],
    })

    opts = {"ancilla_dim": 2, "seed": 0}
    res = iss_channel_qfi(amplitude_damping(0.75),
                          options=IssOptions(**opts))
    entries.append({
        "name": "iss_channel_amplitude_damping", "kind": "iss",
        "channel": AMP, "options": opts,
        "values": [res.qfi] + list(res.trace),
    })

    tnet_opts = {"ancilla_dim": 2, "seed": 0, "mps_bond_dim": 2,
                 "sld_bond_dim": 4}
    res = iss_tnet_parallel_qfi(
        dephasing(0.75), 5, ancilla_dim=2, mps_bond_dim=2, sld_bond_dim=4,
        options=IssOptions(ancilla_dim=2, seed=0),
    )
    entries.append({
        "name": "iss_tnet_parallel_dephasing_n5", "kind": "iss",
        "channel": DEPH, "n": 5, "options": tnet_opts,
        "values": [res.qfi] + list(res.trace),
    })

    for name, ch_spec, ch in (("asym_dephasing", DEPH, dephasing(0.75)),
                              ("asym_noiseless",
                               {"kind": "builtin", "name": "dephasing",
                                "p": 1.0},
                               dephasing(1.0))):
        scaling = asym_scaling_qfi(ch)
        entries.append({
            "name": name, "kind": "asym", "channel": ch_spec,
            "values": [scaling.exponent, scaling.coefficient],
        })

    pb = par_bounds(dephasing(0.75), 10)
    entries.append({
        "name": "par_bounds_dephasing_n10", "kind": "series",
        "channel": DEPH, "n": 10,
        "values": list(map(float, pb.ns)) + list(pb.values),
    })
    ab = ad_bounds(dephasing(0.75), 20)
    entries.append({
        "name": "ad_bounds_dephasing_n20", "kind": "series",
        "channel": DEPH, "n": 20,
        "values": list(map(float, ab.ns)) + list(ab.values),
    })
    cb = ad_bounds_correlated(channel_from_spec(CORR), 4, 1)
    entries.append({
        "name": "ad_bounds_correlated_n4_m1", "kind": "series",
        "channel": CORR, "n": 4, "options": {"block_size": 1},
        "values": list(map(float, cb.ns)) + list(cb.values),
    })

    path = pathlib.Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(entries, indent=1))
    print(f"wrote {len(entries)} golden entries to {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "golden/golden_vectors.json")
