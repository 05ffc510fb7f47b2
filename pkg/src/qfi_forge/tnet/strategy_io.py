"""Strategy description files: a JSON schema for custom networks.

Schema::

    {
      "spaces": [{"label": "a" | ["INP", 0], "dim": 2,
                  "kind": "physical" | "bond"}, ...],
      "nodes": [
        {"type": "const", "name": "...", "spaces": [...],
         "choi": <[re,im] nested>},
        {"type": "channel", "name": "...", "in": [...], "out": [...],
         "env_in": ..., "env_out": ...,
         "channel": <channel spec object>},
        {"type": "var", "name": "...", "spaces": [...],
         "output_spaces": [...]?, "is_measurement": bool?,
         "comb_teeth": [[[...], [...]], ...]?}
      ]
    }

Labels given as two-element lists are treated as (prefix, index)
tuples, matching `arrange_spaces`.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..channel import channel_from_spec
from ..qcore import complex_from_json
from .creators import channel_tensor
from .spaces import SpaceDict
from .tensors import ConstTensor, TensorNetwork, VarTensor

__all__ = ["load_strategy", "strategy_from_dict"]


def _label(x):
    if isinstance(x, list):
        return (x[0], x[1])
    return x


def strategy_from_dict(data: dict) -> TensorNetwork:
    sd = SpaceDict()
    for s in data.get("spaces", []):
        label = _label(s["label"])
        if s.get("kind", "physical") == "bond":
            sd.set_bond(label, int(s["dim"]))
        else:
            sd[label] = int(s["dim"])
    tn = TensorNetwork([], sd)
    for node in data.get("nodes", []):
        ntype = node.get("type")
        name = node.get("name")
        if ntype == "const":
            spaces = [_label(l) for l in node["spaces"]]
            tn.add(ConstTensor(spaces, choi=complex_from_json(node["choi"]),
                               sdict=sd, name=name))
        elif ntype == "channel":
            ch = channel_from_spec(node["channel"])
            pt = channel_tensor(
                ch,
                [_label(l) for l in node["in"]],
                [_label(l) for l in node["out"]],
                sdict=sd, name=name,
                env_in=_label(node["env_in"]) if "env_in" in node else None,
                env_out=_label(node["env_out"]) if "env_out" in node else None,
            )
            tn.add(pt)
        elif ntype == "var":
            spaces = [_label(l) for l in node["spaces"]]
            teeth = None
            if node.get("comb_teeth"):
                teeth = [([_label(l) for l in ins], [_label(l) for l in outs])
                         for ins, outs in node["comb_teeth"]]
            tn.add(VarTensor(
                spaces, sd,
                output_spaces=[_label(l) for l in node["output_spaces"]]
                if node.get("output_spaces") is not None else None,
                is_measurement=bool(node.get("is_measurement", False)),
                comb_teeth=teeth, name=name,
            ))
        else:
            raise ValueError(f"unknown node type {ntype!r}")
    return tn


def load_strategy(path) -> TensorNetwork:
    data = json.loads(Path(path).read_text())
    return strategy_from_dict(data)
