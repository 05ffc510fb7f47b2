"""Iterative see-saw maximization of the pre-QFI functional.

The pre-QFI F(rho0, L) = 2 Tr(drho_theta L) - Tr(rho_theta L^2) is
maximized by alternating exact updates: L from the symmetric
logarithmic derivative of the evolved state, the state (or the comb,
for adaptive strategies) from the leading eigenvector of the adjoint
functional (or a linear SDP over combs).  Every step is an exact local
maximization, so the value trace never decreases; the final value is
always a valid lower bound on the true optimum, with no global
optimality guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import ChoiOperator, Space, link_product, sld
from .sdp import SdpProblem, hermitian_basis_coords, solve_sdp

__all__ = [
    "IssOptions",
    "IssResult",
    "pre_qfi",
    "iss_channel_qfi",
    "iss_parallel_qfi",
    "iss_adaptive_qfi",
    "multiple_measurements_qfi",
    "random_pure_state",
    "random_hermitian",
    "random_cptp_choi",
]

ABS_FLOOR = 1e-12


@dataclass
class IssOptions:
    """Knobs shared by all see-saw optimizers."""

    ancilla_dim: int = 1
    seed: int = 0
    rel_tol: float = 1e-6
    stall_sweeps: int = 3
    max_sweeps: int = 1000

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.stall_sweeps < 1 or self.max_sweeps < 1:
            raise ValueError("sweep counts must be positive")


@dataclass
class IssResult:
    qfi: float
    trace: list
    artifacts: dict
    status: str
    seed: int = 0

    def __iter__(self):
        # (qfi, trace, *artifacts, status) unpacking convenience; the
        # solved-network artifact is reachable by key only
        yield self.qfi
        yield self.trace
        for k, v in self.artifacts.items():
            if k != "network":
                yield v
        yield self.status


class _Convergence:
    """Stop once the relative change stays below tol for a few sweeps."""

    def __init__(self, rel_tol: float, stall_sweeps: int):
        self.rel_tol = rel_tol
        self.stall = stall_sweeps
        self.prev = None
        self.quiet = 0

    def step(self, value: float) -> bool:
        if self.prev is not None:
            denom = max(abs(value), abs(self.prev), ABS_FLOOR)
            if abs(value - self.prev) <= self.rel_tol * denom:
                self.quiet += 1
            else:
                self.quiet = 0
        self.prev = value
        return self.quiet >= self.stall


def random_pure_state(dim: int, rng) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_hermitian(dim: int, rng) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_cptp_choi(dim_out: int, dim_in: int, rng, rank: int = None) -> np.ndarray:
    """Random channel CJ matrix (output x input), trace-preserving."""
    rank = rank or dim_out
    g = rng.normal(size=(dim_out * dim_in, rank)) + 1j * rng.normal(
        size=(dim_out * dim_in, rank)
    )
    c = g @ g.conj().T
    t = np.einsum("aiaj->ij", c.reshape(dim_out, dim_in, dim_out, dim_in))
    vals, vecs = np.linalg.eigh(t)
    tinv = (vecs / np.sqrt(np.maximum(vals, 1e-300))) @ vecs.conj().T
    w = np.kron(np.eye(dim_out), tinv)
    return w @ c @ w.conj().T


def _evolve(channel, rho0: np.ndarray, ancilla_dim: int):
    """(rho_theta, drho_theta) of (Lambda (x) Id_A)(rho0)."""
    do, di = channel.total_output_dim, channel.total_input_dim
    da = ancilla_dim
    r4 = rho0.reshape(di, da, di, da)
    c4 = channel._choi_mat.reshape(do, di, do, di)
    dc4 = channel._dchoi.reshape(do, di, do, di)
    out = np.einsum("aibj,imjn->ambn", c4, r4).reshape(do * da, do * da)
    dout = np.einsum("aibj,imjn->ambn", dc4, r4).reshape(do * da, do * da)
    return out, dout


def _adjoint(channel, y: np.ndarray, ancilla_dim: int,
             derivative: bool = False) -> np.ndarray:
    do, di = channel.total_output_dim, channel.total_input_dim
    da = ancilla_dim
    y4 = y.reshape(do, da, do, da)
    mat = channel._dchoi if derivative else channel._choi_mat
    c4 = mat.reshape(do, di, do, di)
    return np.einsum("ajbi,bman->imjn", c4, y4).reshape(di * da, di * da)


def pre_qfi(rho0: np.ndarray, l_op: np.ndarray, channel) -> float:
    """2 Tr(drho L) - Tr(rho L^2) for the given input state and pre-SLD."""
    di = channel.total_input_dim
    do = channel.total_output_dim
    if rho0.shape[0] % di:
        raise ValueError("state dimension incompatible with channel input")
    da = rho0.shape[0] // di
    if l_op.shape[0] != do * da:
        raise ValueError("pre-SLD dimension incompatible with channel output")
    rho_t, drho_t = _evolve(channel, rho0, da)
    val = 2 * np.trace(drho_t @ l_op) - np.trace(rho_t @ l_op @ l_op)
    return float(np.real(val))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v))
    ph = v[idx] / abs(v[idx]) if abs(v[idx]) > 0 else 1.0
    return v / ph


def iss_channel_qfi(channel, ancilla_dim: int = None,
                    options: IssOptions = None) -> IssResult:
    """See-saw channel QFI with an explicit ancilla dimension.

    Alternates the SLD update with the input-state update (leading
    eigenvector of 2 adj_dLambda(L) - adj_Lambda(L^2)).
    """
    opts = options or IssOptions()
    da = ancilla_dim if ancilla_dim is not None else opts.ancilla_dim
    if channel.env_dim != 1:
        raise ValueError("iss_channel_qfi expects a channel without environment")
    rng = np.random.default_rng(opts.seed)
    di, do = channel.total_input_dim, channel.total_output_dim
    rho0 = random_pure_state(di * da, rng)
    trace = []
    conv = _Convergence(opts.rel_tol, opts.stall_sweeps)
    status = "max_sweeps"
    l_op = np.zeros((do * da, do * da), dtype=complex)
    for _ in range(opts.max_sweeps):
        rho_t, drho_t = _evolve(channel, rho0, da)
        l_op = sld(rho_t, drho_t)
        m = 2 * _adjoint(channel, l_op, da, derivative=True) - _adjoint(
            channel, l_op @ l_op, da
        )
        m = (m + m.conj().T) / 2
        vals, vecs = np.linalg.eigh(m)
        v = _phase_fix(vecs[:, -1])
        rho0 = np.outer(v, v.conj())
        f = float(np.real(vals[-1]))
        trace.append(f)
        if not np.isfinite(f):
            status = "numerical_failure"
            break
        if conv.step(f):
            status = "converged"
            break
    return IssResult(
        qfi=trace[-1] if trace else 0.0,
        trace=trace,
        artifacts={"rho0": rho0, "sld": l_op},
        status=status,
        seed=opts.seed,
    )


def iss_parallel_qfi(channel, n: int, ancilla_dim: int = None,
                     options: IssOptions = None) -> IssResult:
    """See-saw QFI of the N-fold parallel strategy."""
    if n < 1:
        raise ValueError("n must be >= 1")
    power = channel.kron_pow(n) if n > 1 else channel
    return iss_channel_qfi(power, ancilla_dim, options)


# ----------------------------------------------------------------------
# Adaptive strategy on the full comb
# ----------------------------------------------------------------------

def _chain_choi(channel, n: int):
    """CJ operators (value, derivative) of the N-use process.

    Spaces are labeled ("I", k) / ("O", k); channels with an environment
    are chained through it, fed with the recorded environment input
    state and traced at the end.
    """
    base = channel.choi_operator()
    dbase = ChoiOperator(channel._dchoi, base.spaces)
    if channel.env_dim == 1:
        total, dtotal = None, None
        for k in range(n):
            mapping = {"O": ("O", k), "I": ("I", k)}
            ck, dck = base.relabel(mapping), dbase.relabel(mapping)
            if total is None:
                total, dtotal = ck, dck
            else:
                new = link_product(total, ck)
                dnew = link_product(dtotal, ck).matrix + link_product(
                    total, dck
                ).matrix
                total, dtotal = new, ChoiOperator(dnew, new.spaces)
        return total, dtotal
    # environment chain
    rho_e = channel.env_input_state
    if rho_e is None:
        rho_e = np.eye(channel.env_dim) / channel.env_dim
    total = ChoiOperator(rho_e, [Space(("E", 0), channel.env_dim, "output")])
    dtotal = ChoiOperator(np.zeros_like(rho_e), total.spaces)
    for k in range(n):
        mapping = {"O": ("O", k), "I": ("I", k),
                   "EI": ("E", k), "EO": ("E", k + 1)}
        ck, dck = base.relabel(mapping), dbase.relabel(mapping)
        new = link_product(total, ck)
        dnew = link_product(dtotal, ck).matrix + link_product(total, dck).matrix
        total, dtotal = new, ChoiOperator(dnew, new.spaces)
    # trace the final environment output
    tr = ChoiOperator(np.eye(channel.env_dim),
                      [Space(("E", n), channel.env_dim, "input")])
    new = link_product(total, tr)
    dnew = link_product(dtotal, tr).matrix
    return new, ChoiOperator(dnew, new.spaces)


def _comb_teeth_spaces(channel, n: int, end_ancilla_dim: int):
    """Comb spaces I_0, O_0, I_1, ..., O_{n-2}, I_{n-1}, A (interleaved)."""
    di, do = channel.input_dim, channel.output_dim
    spaces = [Space(("I", 0), di, "output")]
    for k in range(1, n):
        spaces.append(Space(("O", k - 1), do, "input"))
        spaces.append(Space(("I", k), di, "output"))
    spaces.append(Space("A", end_ancilla_dim, "output"))
    return spaces


def _random_comb(channel, n: int, da: int, rng) -> np.ndarray:
    """Random strategy comb built by linking random teeth."""
    di, do = channel.input_dim, channel.output_dim
    comb = ChoiOperator(
        random_pure_state(di * da, rng),
        [Space(("I", 0), di, "output"), Space(("anc", 0), da, "output")],
    )
    for k in range(1, n):
        c = random_cptp_choi(di * da, do * da, rng)
        tooth = ChoiOperator(
            c,
            [
                Space(("I", k), di, "output"),
                Space(("anc", k), da, "output"),
                Space(("O", k - 1), do, "input"),
                Space(("anc", k - 1), da, "input"),
            ],
        )
        comb = link_product(comb, tooth)
    comb = comb.relabel({("anc", n - 1): "A"})
    order = [s.label for s in _comb_teeth_spaces(channel, n, da)]
    return comb.reorder(order).matrix


def _comb_constraints(prob: SdpProblem, dims: list, n: int):
    """Nested normalization conditions for a strategy comb.

    dims: ordered dimensions of the comb spaces (teeth interleaved,
    ancilla last). The comb variable "C" and the intermediate operators
    "C1".."C{n-1}" satisfy Tr_last-tooth C^(k) = 1 (x) C^(k-1), with
    Tr C^(1) = 1.
    """
    # C^(k) lives on the first (2k-1) spaces of the comb for k < n
    def eq_top(v):
        c = v["C"]
        d_head = int(np.prod(dims[: 2 * n - 2])) if n > 1 else 1
        d_tail = int(np.prod(dims[2 * n - 2:]))
        t = c.reshape(d_head, d_tail, d_head, d_tail)
        traced = np.einsum("aibi->ab", t)
        if n == 1:
            return traced - np.eye(1) * 1.0
        d_o = dims[2 * n - 3]
        return traced - np.kron(v[f"C{n-1}"], np.eye(d_o))

    prob.add_equality_constraint(eq_top)
    for k in range(n - 1, 0, -1):

        def eq_k(v, k=k):
            c = v[f"C{k}"]
            d_head = int(np.prod(dims[: 2 * k - 2])) if k > 1 else 1
            d_i = dims[2 * k - 2]
            t = c.reshape(d_head, d_i, d_head, d_i)
            traced = np.einsum("aibi->ab", t)
            if k == 1:
                return traced - np.eye(1) * 1.0
            d_o = dims[2 * k - 3]
            return traced - np.kron(v[f"C{k-1}"], np.eye(d_o))

        prob.add_equality_constraint(eq_k)


def iss_adaptive_qfi(channel, n: int, end_ancilla_dim: int = None,
                     options: IssOptions = None) -> IssResult:
    """See-saw over the full strategy comb and the measurement.

    The comb update maximizes the linear pre-QFI functional over valid
    combs by an SDP; the measurement update is the exact SLD solve.
    Returns the comb CJ matrix among the artifacts.
    """
    opts = options or IssOptions()
    da = end_ancilla_dim if end_ancilla_dim is not None else opts.ancilla_dim
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(opts.seed)
    lam, dlam = _chain_choi(channel, n)
    do = channel.output_dim
    comb_spaces = _comb_teeth_spaces(channel, n, da)
    dims = [s.dim for s in comb_spaces]
    labels = [s.label for s in comb_spaces]
    comb_mat = _random_comb(channel, n, da, rng)

    prob = SdpProblem()
    prob.add_var("C", int(np.prod(dims)))
    for k in range(1, n):
        prob.add_var(f"C{k}", int(np.prod(dims[: 2 * k - 1])))
    prob.add_psd_constraint(lambda v: v["C"])
    _comb_constraints(prob, dims, n)
    compiled = prob.compile()

    def comb_op(mat):
        return ChoiOperator(mat, comb_spaces)

    trace = []
    conv = _Convergence(opts.rel_tol, opts.stall_sweeps)
    status = "max_sweeps"
    l_op = None
    for _ in range(opts.max_sweeps):
        # measurement update
        rho_t = link_product(comb_op(comb_mat), lam).reorder([("O", n - 1), "A"])
        drho_t = link_product(comb_op(comb_mat), dlam).reorder([("O", n - 1), "A"])
        l_op = sld(rho_t.matrix, drho_t.matrix)
        # comb update: maximize <C, W> over valid combs
        l_spaces = [Space(("O", n - 1), do, "input"), Space("A", da, "input")]
        lt = ChoiOperator(l_op.T, l_spaces)
        l2t = ChoiOperator((l_op @ l_op).T, l_spaces)
        w = link_product(dlam, lt).reorder(labels).matrix * 2 - link_product(
            lam, l2t
        ).reorder(labels).matrix
        a_obj = (w.T + w.conj()) / 2
        c_coords = np.zeros(compiled.nvars)
        name, d0, off = compiled.layout[0]
        c_coords[off:off + d0 * d0] = hermitian_basis_coords(a_obj)
        compiled.set_objective_coords(c_coords, sign=-1.0)  # maximize
        sol = solve_sdp(compiled, gap_tol=1e-9, feas_tol=1e-7)
        if sol.status != "optimal":
            status = "numerical_failure"
            break
        comb_mat = sol.variable_values["C"]
        f = float(np.real(np.trace(comb_mat @ a_obj)))
        trace.append(f)
        if not np.isfinite(f):
            status = "numerical_failure"
            break
        if conv.step(f):
            status = "converged"
            break
    return IssResult(
        qfi=trace[-1] if trace else 0.0,
        trace=trace,
        artifacts={"comb": ChoiOperator(comb_mat, comb_spaces), "sld": l_op},
        status=status,
        seed=opts.seed,
    )


# ----------------------------------------------------------------------
# Distributing channel uses over experiments
# ----------------------------------------------------------------------

def multiple_measurements_qfi(per_use_qfi, k: int):
    """Best split of N = len(per_use_qfi) channel uses into k experiments.

    ``per_use_qfi[n-1]`` is the QFI attainable with n uses in one
    experiment; experiment values add. Returns (partition, total) with
    the partition sorted descending; ties prefer the lexicographically
    smallest ascending-sorted partition.
    """
    f = [float(x) for x in per_use_qfi]
    n = len(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("per-use QFI values must be finite")
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")

    def value(m):
        return f[m - 1]

    # best[j][m]: (value, ascending partition) for m uses in j experiments
    best = [dict() for _ in range(k + 1)]
    best[0][0] = (0.0, ())
    for j in range(1, k + 1):
        for m in range(j, n + 1):
            cand = None
            for last in range(1, m - (j - 1) + 1):
                prev = best[j - 1].get(m - last)
                if prev is None:
                    continue
                val = prev[0] + value(last)
                part = tuple(sorted(prev[1] + (last,)))
                if cand is None or val > cand[0] + 1e-12 or (
                    abs(val - cand[0]) <= 1e-12 and part < cand[1]
                ):
                    cand = (val, part)
            if cand is not None:
                best[j][m] = cand
    val, part = best[k][n]
    return tuple(sorted(part, reverse=True)), val
