"""Symbolic strategy networks and the generic see-saw optimizer."""

from .spaces import SpaceDict
from .tensors import (
    GeneralTensor,
    ConstTensor,
    ParamTensor,
    VarTensor,
    TensorNetwork,
    contr,
)
from .creators import (
    input_state_var,
    mps_var_tnet,
    cptp_var,
    comb_var,
    measure_var,
    mpo_measure_var_tnet,
    channel_tensor,
    collisional_var_tnet,
)
from .optimize import (
    iss_opt,
    iss_tnet_parallel_qfi,
    iss_tnet_adaptive_qfi,
)
from .strategy_io import load_strategy, strategy_from_dict

__all__ = [
    "SpaceDict",
    "GeneralTensor",
    "ConstTensor",
    "ParamTensor",
    "VarTensor",
    "TensorNetwork",
    "contr",
    "input_state_var",
    "mps_var_tnet",
    "cptp_var",
    "comb_var",
    "measure_var",
    "mpo_measure_var_tnet",
    "channel_tensor",
    "collisional_var_tnet",
    "iss_opt",
    "iss_tnet_parallel_qfi",
    "iss_tnet_adaptive_qfi",
    "load_strategy",
    "strategy_from_dict",
]
