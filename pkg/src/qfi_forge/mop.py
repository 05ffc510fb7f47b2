"""Channel QFI by minimization over equivalent Kraus representations.

The channel QFI equals 4 min_h ||sum_k dK_k(h)^dag dK_k(h)|| where
dK_k(h) = dK_k - i sum_l h_kl K_l runs over the derivative freedom of
equivalent Kraus representations (h Hermitian).  The minimization is a
semidefinite program with a bordered block matrix; parallel strategies
reuse it on the N-fold tensor-power channel, and adaptive strategies
add nested partial-trace constraints on auxiliary operators.
"""

from __future__ import annotations

import numpy as np

from .sdp import SdpProblem, solve_sdp

__all__ = [
    "mop_channel_qfi",
    "mop_parallel_qfi",
    "mop_adaptive_qfi",
    "MemoryCeilingError",
    "product_krauses",
]

# Materialized-problem budget for the SDP data, in bytes. The cost of the
# gauge SDP grows as r^2 * (d_in + r*d_out)^2; qubit channels are fine up
# to N = 3 under the default.
DEFAULT_MEM_LIMIT = 256 * 1024 ** 2


class MemoryCeilingError(MemoryError):
    pass


def _check_budget(nvars: int, block_dim: int, mem_limit: int, what: str):
    estimate = nvars * (2 * block_dim) ** 2 * 8
    if estimate > mem_limit:
        raise MemoryCeilingError(
            f"{what}: materialized SDP needs about {estimate / 1e6:.0f} MB "
            f"(limit {mem_limit / 1e6:.0f} MB); reduce N or raise mem_limit="
        )


def product_krauses(ks, dks, n: int):
    """Kraus operators of the N-fold tensor power with Leibniz derivatives.

    Operators are plain tensor products of the single-channel set (not
    re-diagonalized), so the index structure over single-use labels stays
    explicit.
    """
    ops = [np.array([[1.0]], dtype=complex)]
    dops = [np.zeros((1, 1), dtype=complex)]
    for _ in range(n):
        new_ops, new_dops = [], []
        for a, da in zip(ops, dops):
            for k, dk in zip(ks, dks):
                new_ops.append(np.kron(a, k))
                new_dops.append(np.kron(da, k) + np.kron(a, dk))
        ops, dops = new_ops, new_dops
    return ops, dops


def _gauge_block(ks, dks):
    """Affine map (lam, h) -> bordered PSD block for the gauge SDP."""
    karr = np.stack(ks)
    dkarr = np.stack(dks)
    r, do, di = karr.shape
    m = di + r * do

    def block(v):
        lam = v["lam"][0, 0]
        h = v["h"]
        dk_h = dkarr - 1j * np.einsum("kl,lab->kab", h, karr)
        a = np.zeros((m, m), dtype=complex)
        a[:di, :di] = lam * np.eye(di)
        stacked = dk_h.reshape(r * do, di)
        a[:di, di:] = stacked.conj().T
        a[di:, :di] = stacked
        a[di:, di:] = np.eye(r * do)
        return a

    return block, r, m


def mop_channel_qfi(channel, gap_tol: float = 1e-9,
                    mem_limit: int = DEFAULT_MEM_LIMIT) -> float:
    """Channel QFI with unrestricted ancilla, by the gauge SDP."""
    if channel.env_dim != 1:
        raise ValueError("mop_channel_qfi expects a channel without environment")
    ks, dks = channel.dkrauses()
    return _solve_gauge(ks, dks, gap_tol, mem_limit, "mop_channel_qfi")


def _solve_gauge(ks, dks, gap_tol, mem_limit, what) -> float:
    block, r, m = _gauge_block(ks, dks)
    _check_budget(r * r + 1, m, mem_limit, what)
    prob = SdpProblem()
    prob.add_var("lam", 1)
    prob.add_var("h", r)
    prob.set_objective({"lam": np.eye(1)})
    prob.add_psd_constraint(block)
    sol = solve_sdp(prob, gap_tol=gap_tol)
    if sol.status != "optimal":
        raise RuntimeError(
            f"{what}: SDP did not converge (status {sol.status}, "
            f"gap {sol.duality_gap:.2e})"
        )
    return 4.0 * sol.objective_value


def mop_parallel_qfi(channel, n: int, gap_tol: float = 1e-9,
                     mem_limit: int = DEFAULT_MEM_LIMIT) -> float:
    """QFI of the N-fold parallel strategy (tensor-power channel)."""
    if channel.env_dim != 1:
        raise ValueError("mop_parallel_qfi expects a channel without environment")
    if n < 1:
        raise ValueError("n must be >= 1")
    ks, dks = channel.dkrauses()
    kn, dkn = product_krauses(ks, dks, n)
    return _solve_gauge(kn, dkn, gap_tol, mem_limit, "mop_parallel_qfi")


def _interleaved_vecs(ops, do, di, n):
    """Vectorized operators in interleaved space order O_0 I_0 ... O_{n-1} I_{n-1}.

    Returns an array (r, d_out_last, rest) where the last output space
    index is split off and `rest` runs over the remaining interleaved
    factors.
    """
    r = len(ops)
    shape_o = [do] * n
    shape_i = [di] * n
    out = np.empty((r,) + tuple(shape_o + shape_i), dtype=complex)
    for k, op in enumerate(ops):
        out[k] = op.reshape(shape_o + shape_i)
    # interleave axes: O_0 I_0 O_1 I_1 ...
    perm = [0]
    for j in range(n):
        perm += [1 + j, 1 + n + j]
    out = out.transpose(perm)
    # move O_{n-1} axis to the front (after the Kraus index)
    axes = list(range(1, 2 * n + 1))
    o_last = 2 * n - 1
    axes.remove(o_last)
    out = out.transpose([0, o_last] + axes)
    return out.reshape(r, do, -1)


def mop_adaptive_qfi(channel, n: int, gap_tol: float = 1e-9,
                     mem_limit: int = DEFAULT_MEM_LIMIT) -> float:
    """QFI of the optimal N-step adaptive strategy (comb optimization).

    Solves the gauge SDP with a bordered block whose corner carries an
    auxiliary operator chain Q^(k) subject to the nested partial-trace
    conditions Tr_{O_{k-1}} Q^(k) = 1_{I_{k-1}} (x) Q^(k-1), Q^(0) = 1.
    Cost grows exponentially with n.
    """
    if channel.env_dim != 1:
        raise ValueError("mop_adaptive_qfi expects a channel without environment")
    if n < 1:
        raise ValueError("n must be >= 1")
    ks, dks = channel.dkrauses()
    do, di = ks[0].shape
    kn, dkn = product_krauses(ks, dks, n)
    karr = np.stack(kn)
    dkarr = np.stack(dkn)
    r = len(kn)
    tl_dim = (do * di) ** (n - 1) * di
    border = do * r
    _check_budget(r * r + 1 + sum((do * di) ** (2 * k) for k in range(1, n)),
                  tl_dim + border, mem_limit, "mop_adaptive_qfi")

    def block(v):
        lam = v["lam"][0, 0]
        h = v["h"]
        dk_h = dkarr - 1j * np.einsum("kl,lab->kab", h, karr)
        vecs = _interleaved_vecs(list(dk_h), do, di, n)  # (r, do, tl_dim)
        m = tl_dim + border
        a = np.zeros((m, m), dtype=complex)
        q_top = v[f"Q{n-1}"] if n > 1 else np.eye(1, dtype=complex)
        a[:tl_dim, :tl_dim] = np.kron(q_top, np.eye(di))
        cols = vecs.reshape(r * do, tl_dim).T  # columns indexed by (k, i)
        a[:tl_dim, tl_dim:] = cols
        a[tl_dim:, :tl_dim] = cols.conj().T
        a[tl_dim:, tl_dim:] = lam * np.eye(border)
        return a

    prob = SdpProblem()
    prob.add_var("lam", 1)
    prob.add_var("h", r)
    for k in range(1, n):
        prob.add_var(f"Q{k}", (do * di) ** k)
    prob.set_objective({"lam": np.eye(1)})
    prob.add_psd_constraint(block)

    for k in range(1, n):
        dim_prev = (do * di) ** (k - 1)

        def fn(v, k=k, dim_prev=dim_prev):
            q = v[f"Q{k}"]
            t = q.reshape(dim_prev, do, di, dim_prev, do, di)
            traced = np.einsum("aoiboj->aibj", t).reshape(
                dim_prev * di, dim_prev * di
            )
            prev = v[f"Q{k-1}"] if k > 1 else np.eye(1, dtype=complex)
            return traced - np.kron(prev, np.eye(di))

        prob.add_equality_constraint(fn)

    sol = solve_sdp(prob, gap_tol=gap_tol)
    if sol.status != "optimal":
        raise RuntimeError(
            f"mop_adaptive_qfi: SDP did not converge (status {sol.status}, "
            f"gap {sol.duality_gap:.2e})"
        )
    return 4.0 * sol.objective_value
