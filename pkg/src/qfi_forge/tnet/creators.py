"""Builders for the recurring strategy ingredients.

These wrap the raw tensor classes: input states (full or MPS form),
CPTP control operations, combs, measurements (full or MPO form), and
channel tensors over registered spaces.  MPS/MPO bond dimensions are
capped per cut at the exact maximal useful rank, so requesting a large
bond never wastes work.
"""

from __future__ import annotations

import numpy as np

from .spaces import SpaceDict
from .tensors import ParamTensor, TensorNetwork, VarTensor, contr

__all__ = [
    "input_state_var",
    "mps_var_tnet",
    "cptp_var",
    "comb_var",
    "measure_var",
    "mpo_measure_var_tnet",
    "channel_tensor",
    "collisional_var_tnet",
]


def _capped_bonds(dims, bond_dim: int) -> list:
    """Per-cut bond dimensions, capped by the ranks either side allows."""
    n = len(dims)
    cap = int(bond_dim)
    lefts, rights = [], [1] * n
    acc = 1
    for d in dims[:-1]:
        acc = min(acc * int(d), cap)  # clipped running product
        lefts.append(acc)
    acc = 1
    for i in range(n - 1, 0, -1):
        acc = min(acc * int(dims[i]), cap)
        rights[i - 1] = acc
    return [min(cap, lefts[c], rights[c]) for c in range(n - 1)]


def mps_var_tnet(spaces, name, sdict: SpaceDict, bond_dim: int):
    """Variable density-matrix MPO of a pure MPS over the given spaces.

    Returns (network, element names, bond labels).  Bond labels are
    registered with the squared (fused ket/bra) dimensions; element
    names are ``f"{name}{i}"``.
    """
    if bond_dim < 1:
        raise ValueError("bond dimension must be >= 1")
    spaces = list(spaces)
    dims = [sdict[l] for l in spaces]
    caps = _capped_bonds(dims, bond_dim)
    bonds = []
    for i, cap in enumerate(caps):
        label = (f"{name}:bond", i)
        sdict.set_bond(label, cap * cap)
        bonds.append(label)
    tn = TensorNetwork([], sdict)
    names = []
    for i, l in enumerate(spaces):
        legs = []
        if i > 0:
            legs.append(bonds[i - 1])
        legs.append(l)
        if i < len(spaces) - 1:
            legs.append(bonds[i])
        vt = VarTensor(legs, sdict, output_spaces=[l], name=f"{name}{i}")
        tn.add(vt)
        names.append(vt.name)
    return tn, names, bonds


def input_state_var(spaces, name=None, sdict: SpaceDict = None,
                    mps_bond_dim: int = None):
    """A variable input state: one node, or an MPS network when
    ``mps_bond_dim`` is given."""
    if sdict is None:
        raise ValueError("sdict is required")
    if mps_bond_dim is None:
        return VarTensor(list(spaces), sdict, output_spaces=list(spaces),
                         name=name)
    tn, _, _ = mps_var_tnet(spaces, name or sdict.fresh_name("RHO"),
                            sdict, mps_bond_dim)
    return tn


def cptp_var(in_spaces, out_spaces, sdict: SpaceDict = None, name=None):
    """A variable CPTP map from in_spaces to out_spaces."""
    if sdict is None:
        raise ValueError("sdict is required")
    return VarTensor(list(out_spaces) + list(in_spaces), sdict,
                     output_spaces=list(out_spaces), name=name)


def comb_var(teeth, sdict: SpaceDict = None, name=None):
    """A variable quantum comb with the given (inputs, outputs) teeth."""
    if sdict is None:
        raise ValueError("sdict is required")
    spaces = [l for pair in teeth for part in pair for l in part]
    return VarTensor(spaces, sdict, comb_teeth=[(list(i), list(o))
                                                for i, o in teeth], name=name)


def measure_var(spaces, name=None, sdict: SpaceDict = None,
                bond_dim: int = None):
    """A variable measurement (pre-SLD); MPO form when bond_dim is given."""
    if sdict is None:
        raise ValueError("sdict is required")
    if bond_dim is None:
        return VarTensor(list(spaces), sdict, is_measurement=True, name=name)
    tn, _, _ = mpo_measure_var_tnet(spaces, name or sdict.fresh_name("PI"),
                                    sdict, bond_dim)
    return tn


def mpo_measure_var_tnet(spaces, name, sdict: SpaceDict, bond_dim: int):
    """Variable pre-SLD MPO over the given spaces.

    Returns (network, element names, bond labels); bonds carry the
    single-layer dimension (the quadratic term doubles them
    internally).
    """
    if bond_dim < 1:
        raise ValueError("bond dimension must be >= 1")
    spaces = list(spaces)
    dims = [sdict[l] ** 2 for l in spaces]  # operator-space ranks
    caps = _capped_bonds(dims, bond_dim)
    bonds = []
    for i, cap in enumerate(caps):
        label = (f"{name}:bond", i)
        sdict.set_bond(label, cap)
        bonds.append(label)
    tn = TensorNetwork([], sdict)
    names = []
    for i, l in enumerate(spaces):
        legs = []
        if i > 0:
            legs.append(bonds[i - 1])
        legs.append(l)
        if i < len(spaces) - 1:
            legs.append(bonds[i])
        vt = VarTensor(legs, sdict, is_measurement=True, name=f"{name}{i}")
        tn.add(vt)
        names.append(vt.name)
    return tn, names, bonds


def channel_tensor(channel, in_labels, out_labels, sdict: SpaceDict,
                   name=None, env_in=None, env_out=None) -> ParamTensor:
    """Wrap a ParamChannel as a ParamTensor over registered spaces.

    Labels are registered on first use; existing registrations must
    match the channel's dimensions.  Channels with an environment need
    env_in/env_out labels.
    """
    in_labels, out_labels = list(in_labels), list(out_labels)
    spaces = list(out_labels) + list(in_labels)
    if channel.env_dim > 1:
        if env_in is None or env_out is None:
            raise ValueError("environment channel needs env_in/env_out labels")
        spaces = [env_out] + list(out_labels) + [env_in] + list(in_labels)
    dims_known = {}
    sys_out, sys_in = channel.output_dim, channel.input_dim

    def register(labels, total, what):
        missing = [l for l in labels if l not in sdict]
        have = int(np.prod([sdict[l] for l in labels if l in sdict]))
        if not missing:
            if have != total:
                raise ValueError(
                    f"{what} labels {labels} have total dimension {have}, "
                    f"channel expects {total}"
                )
            return
        if len(missing) == len(labels) and len(labels) == 1:
            sdict[labels[0]] = total
            return
        rem = total // max(have, 1)
        if len(missing) == 1 and have * rem == total:
            sdict[missing[0]] = rem
            return
        raise ValueError(
            f"cannot infer dimensions for {missing}; register them first"
        )

    register(out_labels, sys_out, "output")
    register(in_labels, sys_in, "input")
    if channel.env_dim > 1:
        register([env_out], channel.env_dim, "environment")
        register([env_in], channel.env_dim, "environment")
    pt = ParamTensor(spaces, choi=channel._choi_mat, dchoi=channel._dchoi,
                     sdict=sdict, name=name)
    pt.output_spaces = ([env_out] if channel.env_dim > 1 else []) + out_labels
    return pt


def collisional_var_tnet(channel, n: int, ancilla_dim: int,
                         mps_bond_dim: int, sld_bond_dim: int,
                         sdict: SpaceDict = None):
    """Collisional strategy network: entangled probes interact one by
    one with the sensing chain through variable controls, each ancilla
    measured right after its interaction.

    Returns (network, info) where info carries the space and name lists.
    """
    if n < 2:
        raise ValueError("collisional strategy needs n >= 2")
    sd = sdict if sdict is not None else SpaceDict()
    d = channel.input_dim
    inp = sd.arrange_spaces(n, d, "INP")
    out = sd.arrange_spaces(n, channel.output_dim, "OUT")
    anc = sd.arrange_spaces(2 * n - 2, ancilla_dim, "ANC")

    rho_spaces = [inp[0]] + anc[::2]
    rho, rho_names, rho_bonds = mps_var_tnet(rho_spaces, "RHO0", sd,
                                             mps_bond_dim)
    tnet = rho
    for i in range(n):
        pt = channel_tensor(channel, [inp[i]], [out[i]], sdict=sd,
                            name=f"CHANNEL{i}")
        tnet = contr(tnet, pt)
    for i in range(n - 1):
        vt = cptp_var([out[i], anc[2 * i]], [inp[i + 1], anc[2 * i + 1]],
                      sdict=sd, name=f"CONTROL{i}")
        tnet = contr(tnet, vt)
    pi_spaces = anc[1::2] + [out[-1]]
    pi, pi_names, pi_bonds = mpo_measure_var_tnet(pi_spaces, "PI", sd,
                                                  sld_bond_dim)
    tnet = contr(tnet, pi)
    info = {
        "sdict": sd,
        "inp": inp,
        "out": out,
        "anc": anc,
        "rho_spaces": rho_spaces,
        "rho_names": rho_names,
        "rho_bonds": rho_bonds,
        "pi_spaces": pi_spaces,
        "pi_names": pi_names,
        "pi_bonds": pi_bonds,
    }
    return tnet, info
