"""qfi-forge: optimal quantum-metrology protocols and QFI bounds.

The high-level surface mirrors the strategy families: `mop_*` functions
give guaranteed-optimal values from semidefinite programs on small
problems, `iss_*` functions run see-saw maximization (optionally in
tensor-network form for large N), `par_bounds`/`ad_bounds`/
`ad_bounds_correlated`/`asym_scaling_qfi` compute fundamental upper
bounds, and `iss_opt` optimizes custom strategy networks built from the
tensor classes in :mod:`qfi_forge.tnet`.
"""

from .qcore import (
    ChoiOperator,
    KrausSet,
    Povm,
    Space,
    choi_from_krauses,
    dchoi_from_krauses,
    krauses_from_choi,
    link_product,
    partial_op,
    sld,
    state_qfi,
    state_cfi,
    validate_channel,
)
from .channel import (
    LindbladSpec,
    ParamChannel,
    amplitude_damping,
    builtin_channel,
    channel_from_spec,
    dephasing,
    from_lindblad,
    markov_dephasing_env,
)
from .sdp import SdpProblem, SdpSolution, min_hermitian_quadratic, solve_sdp
from .mop import mop_adaptive_qfi, mop_channel_qfi, mop_parallel_qfi
from .iss import (
    IssOptions,
    IssResult,
    iss_adaptive_qfi,
    iss_channel_qfi,
    iss_parallel_qfi,
    multiple_measurements_qfi,
    pre_qfi,
)
from .bounds import (
    AsymScaling,
    BoundSeries,
    ad_bounds,
    ad_bounds_correlated,
    alpha_beta,
    asym_scaling_qfi,
    par_bounds,
)
from .tnet import (
    ConstTensor,
    GeneralTensor,
    ParamTensor,
    SpaceDict,
    TensorNetwork,
    VarTensor,
    collisional_var_tnet,
    comb_var,
    contr,
    cptp_var,
    input_state_var,
    iss_opt,
    iss_tnet_adaptive_qfi,
    iss_tnet_parallel_qfi,
    load_strategy,
    measure_var,
    mpo_measure_var_tnet,
    mps_var_tnet,
)

__version__ = "0.1.0"
