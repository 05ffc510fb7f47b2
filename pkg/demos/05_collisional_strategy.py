# A custom strategy network: the collisional scheme.
#
# Entangled probe particles approach a common sensing system one by
# one; each interacts through a variable gate and its ancilla is
# measured right away. The network is assembled from creator functions
# (MPS input state, channel tensors, CPTP gate variables, measurement
# MPO) and optimized with the generic see-saw `iss_opt`.

import numpy as np

from qfi_forge import (
    IssOptions,
    SpaceDict,
    amplitude_damping,
    contr,
    cptp_var,
    iss_opt,
    iss_tnet_parallel_qfi,
    mpo_measure_var_tnet,
    mps_var_tnet,
)

n = 6          # channel uses
d_a = 2        # ancilla dimension per collision
r_mps = 2      # input-state MPS bond dimension
r_l = r_mps ** 2

ch = amplitude_damping(0.75)

sd = SpaceDict()
inp = sd.arrange_spaces(n, 2, "INP")
out = sd.arrange_spaces(n, 2, "OUT")
anc = sd.arrange_spaces(2 * n - 2, d_a, "ANC")

# entangled input: first system qubit plus the even ancillas
rho_spaces = [inp[0]] + anc[::2]
rho0, rho0_names, rho0_bonds = mps_var_tnet(rho_spaces, "RHO0", sd, r_mps)

tnet = rho0
for i in range(n):
    tnet = contr(tnet, ch.tensor([inp[i]], [out[i]], sdict=sd,
                                 name=f"CHANNEL{i}"))

# variable interaction gates: (system out, fresh ancilla) -> (next
# system in, measured ancilla)
for i in range(n - 1):
    gate = cptp_var([out[i], anc[2 * i]], [inp[i + 1], anc[2 * i + 1]],
                    sdict=sd, name=f"CONTROL{i}")
    tnet = contr(tnet, gate)

# measurement MPO over the odd ancillas and the final output
pi_spaces = anc[1::2] + [out[-1]]
pi, pi_names, pi_bonds = mpo_measure_var_tnet(pi_spaces, "PI", sd, r_l)
tnet = contr(tnet, pi)

print(f"collisional network: {len(tnet.tensors)} tensors")
qfi, qfis, tn_opt, status = iss_opt(tnet, IssOptions(seed=0, rel_tol=1e-6,
                                                     max_sweeps=300))
print(f"collisional QFI: {qfi:.5f}  ({status}, {len(qfis)} sweeps)")

par = iss_tnet_parallel_qfi(ch, n, ancilla_dim=d_a, mps_bond_dim=r_mps,
                            sld_bond_dim=r_l,
                            options=IssOptions(seed=0, rel_tol=1e-6))
print(f"parallel QFI:    {par.qfi:.5f}")
print(f"collisional advantage: {qfi - par.qfi:+.5f}")

# solved tensors are ordinary constants; read a gate's CJ matrix back
gate1 = tn_opt.tensors["CONTROL1"]
choi = gate1.choi([inp[2], anc[3], out[1], anc[2]])
print(f"CONTROL1 Choi trace (= input dimension): {np.trace(choi).real:.3f}")

# and the first MPS element of the optimized input state
el = tn_opt.tensors[rho0_names[1]]
psi = el.to_mps([rho0_bonds[0], rho_spaces[1], rho0_bonds[1]])
print(f"RHO01 pure element shape: {psi.shape}")
