"""Generic network see-saw (`iss_opt`) and the tensor-network drivers.

Each sweep visits the variable nodes in a fixed chain order and applies
the exact local maximizer for the node kind: leading eigenvector for
states and MPS elements, an SDP over CPTP maps or combs for controls,
the SLD solve for full measurements, and a regularized quadratic solve
on the Hermitian-paired subspace for measurement-MPO elements.  Every
local step maximizes the same global pre-QFI, so the value trace is
nondecreasing up to solver tolerance.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..iss import IssOptions, IssResult, _Convergence, random_cptp_choi
from ..qcore import sld
from ..sdp import (
    SdpProblem,
    hermitian_basis_coords,
    solve_regularized_quadratic,
    solve_sdp,
    _basis_element,
    _ipm,
    _realify,
)
from .engine import NetSpec, PassRunner, Piece
from .spaces import SpaceDict
from .tensors import (
    ConstTensor,
    ParamTensor,
    SolvedMpsTensor,
    TensorNetwork,
    VarTensor,
    array_to_choi,
    choi_to_array,
    contr,
)
from .creators import (
    channel_tensor,
    cptp_var,
    input_state_var,
    measure_var,
    mpo_measure_var_tnet,
    mps_var_tnet,
)

__all__ = ["iss_opt", "iss_tnet_parallel_qfi", "iss_tnet_adaptive_qfi",
           "NetworkValidationError"]

MONOTONE_GUARD = 1e-6


class NetworkValidationError(ValueError):
    pass


# ----------------------------------------------------------------------
# Validation and ordering
# ----------------------------------------------------------------------

def _validate(network: TensorNetwork):
    holders = {}
    for t in network.tensors.values():
        for l in t.spaces:
            holders.setdefault(l, []).append(t.name)
    bad = {l: hs for l, hs in holders.items() if len(hs) != 2}
    if bad:
        raise NetworkValidationError(
            f"every space must connect exactly two tensors; offenders: {bad}"
        )
    vars_ = [t for t in network.tensors.values() if isinstance(t, VarTensor)]
    if not vars_:
        raise NetworkValidationError("network has no variable tensors")
    if not any(isinstance(t, ParamTensor)
               for t in network.tensors.values()):
        raise NetworkValidationError(
            "network has no parametrized tensors; the pre-QFI would vanish"
        )
    meas = [t for t in vars_ if t.kind in ("measurement",
                                           "measurement_mpo_element")]
    if not meas:
        raise NetworkValidationError("network has no measurement tensors")
    names = {t.name for t in meas}
    adj = {t.name: set() for t in meas}
    for l, hs in holders.items():
        inside = [h for h in hs if h in names]
        if len(inside) == 2:
            adj[inside[0]].add(inside[1])
            adj[inside[1]].add(inside[0])
    seen = set()
    stack = [meas[0].name]
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(adj[cur] - seen)
    if seen != names:
        raise NetworkValidationError(
            "measurement tensors form more than one connected set: "
            f"{sorted(map(str, names - seen))} apart from "
            f"{sorted(map(str, seen))}"
        )
    # cycle check on orientable edges (nodes that declare output spaces)
    out_map = {}
    for t in network.tensors.values():
        outs = getattr(t, "output_spaces", None)
        if outs is not None:
            out_map[t.name] = set(outs)
    edges = {t.name: set() for t in network.tensors.values()}
    for l, hs in holders.items():
        a, b = hs
        a_out = a in out_map and l in out_map[a]
        b_out = b in out_map and l in out_map[b]
        if a_out and b_out:
            raise NetworkValidationError(
                f"space {l!r} is an output of both {a!r} and {b!r}"
            )
        if a_out and b in out_map:
            edges[a].add(b)
        elif b_out and a in out_map:
            edges[b].add(a)
    state = {}

    def dfs(u):
        state[u] = 1
        for v in edges[u]:
            if state.get(v) == 1:
                raise NetworkValidationError(
                    f"operation graph has a cycle through {u!r}"
                )
            if v not in state:
                dfs(v)
        state[u] = 2

    for u in edges:
        if u not in state:
            dfs(u)


def _chain_order(network: TensorNetwork) -> list:
    """Greedy fold order keeping the alive index product small."""
    sd = network.sdict
    tensors = list(network.tensors.values())
    index = {t.name: i for i, t in enumerate(tensors)}
    remaining = set(network.tensors)
    alive = {}
    order = []

    def start_key(t):
        is_state = isinstance(t, VarTensor) and t.kind in ("state",
                                                           "mps_element")
        return (0 if is_state else 1, index[t.name])

    while remaining:
        frontier = [network.tensors[n] for n in remaining
                    if any(l in alive for l in network.tensors[n].spaces)]
        if not frontier:
            cand = min((network.tensors[n] for n in remaining), key=start_key)
        else:
            def fold_cost(t):
                counts = dict(alive)
                for l in t.spaces:
                    counts[l] = counts.get(l, 0) + 1
                prod = 1
                for l, cnt in counts.items():
                    if cnt < 2:
                        prod *= sd.irange[l]
                return (prod, index[t.name])

            cand = min(frontier, key=fold_cost)
        order.append(cand.name)
        remaining.discard(cand.name)
        for l in cand.spaces:
            alive[l] = alive.get(l, 0) + 1
        alive = {l: c for l, c in alive.items() if c < 2}
    return order


# ----------------------------------------------------------------------
# Piece construction
# ----------------------------------------------------------------------

def _swap_fused(arr: np.ndarray, node_spaces, sdict) -> np.ndarray:
    """Swap ket/bra inside every fused physical axis ( = transpose)."""
    out = arr
    for i, l in enumerate(node_spaces):
        if sdict.is_bond(l):
            continue
        d = sdict[l]
        shape = out.shape
        out = out.reshape(shape[:i] + (d, d) + shape[i + 1:])
        out = np.swapaxes(out, i, i + 1)
        out = out.reshape(shape)
    return out


def _mps_density_array(psi: np.ndarray, has_left: bool, has_right: bool):
    """psi (bl, d, br) -> fused density element over the node's axes."""
    bl, d, br = psi.shape
    dens = np.einsum("iak,jbl->ijabkl", psi, psi.conj())
    dens = dens.reshape(bl * bl, d * d, br * br)
    if not has_left:
        dens = dens[0]
    if not has_right:
        dens = dens[..., 0]
    return dens


def _squared_measure_piece(x: np.ndarray, spaces, sdict) -> Piece:
    """Two-copy (transposed product) piece of one measurement-MPO site."""
    bonds = [l for l in spaces if sdict.is_bond(l)]
    phys = [l for l in spaces if not sdict.is_bond(l)]
    if len(phys) != 1:
        raise NetworkValidationError(
            "measurement MPO elements must carry exactly one physical space"
        )
    s = phys[0]
    d = sdict[s]
    perm = [spaces.index(l) for l in bonds] + [spaces.index(s)]
    a = x.transpose(perm)
    bshape = a.shape[:-1]
    nb = len(bshape)
    a = a.reshape(bshape + (d, d))
    # copy1 carries (b, c), copy2 carries (c, a); output fused (a, b)
    idx1 = list(range(nb)) + [2 * nb, 2 * nb + 1]              # bonds1, b, c
    idx2 = list(range(nb, 2 * nb)) + [2 * nb + 1, 2 * nb + 2]  # bonds2, c, a
    out_idx = list(range(2 * nb)) + [2 * nb + 2, 2 * nb]       # ..., a, b
    arr = np.einsum(a, idx1, a, idx2, out_idx)
    arr = arr.reshape(bshape + bshape + (d * d,))
    axes = list(bonds) + [("2", l) for l in bonds] + [s]
    return Piece(arr, axes)


def _build_makers(network: TensorNetwork, order):
    sd = network.sdict
    lin_makers, quad_makers = [], []
    lin_idx, quad_idx = {}, {}
    param_names = [n for n in order
                   if isinstance(network.tensors[n], ParamTensor)]
    kpos = {n: i for i, n in enumerate(param_names)}
    nparams = len(param_names)
    if nparams:
        start = Piece(np.array([1.0, 0.0], dtype=complex), [("k", 0)])
        end = Piece(np.array([0.0, 1.0], dtype=complex), [("k", nparams)])
        lin_makers.append(lambda values: [start])

    for name in order:
        t = network.tensors[name]
        if isinstance(t, ParamTensor):
            i = kpos[name]
            arr = np.zeros((2, 2) + t.array.shape, dtype=complex)
            arr[0, 0] = t.array
            arr[0, 1] = t.darray
            arr[1, 1] = t.array
            piece = Piece(arr, [("k", i), ("k", i + 1)] + list(t.spaces))
            lin_idx[name] = len(lin_makers)
            lin_makers.append(lambda values, p=piece: [p])
            qp = Piece(t.array, list(t.spaces))
            quad_idx[name] = len(quad_makers)
            quad_makers.append(lambda values, p=qp: [p])
        elif isinstance(t, VarTensor):
            kind = t.kind
            spaces = list(t.spaces)
            if kind in ("state", "cptp", "comb"):
                def mk(values, name=name, spaces=spaces):
                    return [Piece(values[name], spaces)]

                lin_idx[name] = len(lin_makers)
                lin_makers.append(mk)
                quad_idx[name] = len(quad_makers)
                quad_makers.append(mk)
            elif kind == "mps_element":
                has_l = bool(spaces and sd.is_bond(spaces[0]))
                has_r = bool(spaces and sd.is_bond(spaces[-1]))

                def mk(values, name=name, spaces=spaces, has_l=has_l,
                       has_r=has_r):
                    dens = _mps_density_array(values[name], has_l, has_r)
                    return [Piece(dens, spaces)]

                lin_idx[name] = len(lin_makers)
                lin_makers.append(mk)
                quad_idx[name] = len(quad_makers)
                quad_makers.append(mk)
            elif kind == "measurement":
                def mk_lin(values, name=name, spaces=spaces):
                    return [Piece(_swap_fused(values[name], spaces, sd),
                                  spaces)]

                def mk_quad(values, name=name, spaces=spaces):
                    dims = [sd[l] for l in spaces]
                    mat = array_to_choi(values[name], dims)
                    return [Piece(choi_to_array((mat @ mat).T, dims), spaces)]

                lin_idx[name] = len(lin_makers)
                lin_makers.append(mk_lin)
                quad_idx[name] = len(quad_makers)
                quad_makers.append(mk_quad)
            elif kind == "measurement_mpo_element":
                def mk_lin(values, name=name, spaces=spaces):
                    return [Piece(_swap_fused(values[name], spaces, sd),
                                  spaces)]

                def mk_quad(values, name=name, spaces=spaces):
                    return [_squared_measure_piece(values[name], spaces, sd)]

                lin_idx[name] = len(lin_makers)
                lin_makers.append(mk_lin)
                quad_idx[name] = len(quad_makers)
                quad_makers.append(mk_quad)
            else:
                raise NetworkValidationError(f"unknown var kind {kind!r}")
        elif isinstance(t, ConstTensor):
            p = Piece(t.array, list(t.spaces))
            lin_idx[name] = len(lin_makers)
            lin_makers.append(lambda values, p=p: [p])
            quad_idx[name] = len(quad_makers)
            quad_makers.append(lambda values, p=p: [p])
        else:
            raise NetworkValidationError(
                f"cannot evaluate tensor {name!r} of type {type(t).__name__}"
            )
    if nparams:
        lin_makers.append(lambda values: [end])
    return lin_makers, quad_makers, lin_idx, quad_idx


# ----------------------------------------------------------------------
# Optimizer
# ----------------------------------------------------------------------

def _phase_fix(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v)))
    ph = v[idx] / abs(v[idx]) if abs(v[idx]) > 0 else 1.0
    return v / ph


def _herm(m):
    return (m + m.conj().T) / 2


class _Optimizer:
    def __init__(self, network: TensorNetwork, options: IssOptions):
        _validate(network)
        self.network = network
        self.sd = network.sdict
        self.opts = options
        self.rng = np.random.default_rng(options.seed)
        self.order = _chain_order(network)
        self.vars = [n for n in self.order
                     if isinstance(network.tensors[n], VarTensor)]
        lin, quad, self.lin_idx, self.quad_idx = _build_makers(network,
                                                               self.order)
        self.lin_net = NetSpec(lin)
        self.quad_net = NetSpec(quad)
        self.values = {}
        self._sdp_cache = {}
        self._groups = None
        self._init_values()

    # -- initialization -------------------------------------------------

    def _mps_dims(self, t):
        sd = self.sd
        phys = [l for l in t.spaces if not sd.is_bond(l)]
        if len(phys) != 1:
            raise NetworkValidationError(
                "mps elements must carry exactly one physical space"
            )
        d = sd[phys[0]]
        has_l = bool(t.spaces and sd.is_bond(t.spaces[0]))
        has_r = bool(t.spaces and sd.is_bond(t.spaces[-1]))
        bl = int(round(np.sqrt(sd[t.spaces[0]]))) if has_l else 1
        br = int(round(np.sqrt(sd[t.spaces[-1]]))) if has_r else 1
        return bl, br, d

    def _init_values(self):
        sd = self.sd
        rng = self.rng
        for name in self.vars:
            t = self.network.tensors[name]
            if t.kind == "state":
                dims = [sd[l] for l in t.spaces]
                d = int(np.prod(dims))
                v = rng.normal(size=d) + 1j * rng.normal(size=d)
                v /= np.linalg.norm(v)
                self.values[name] = choi_to_array(np.outer(v, v.conj()), dims)
            elif t.kind == "mps_element":
                bl, br, d = self._mps_dims(t)
                self.values[name] = rng.normal(size=(bl, d, br)) \
                    + 1j * rng.normal(size=(bl, d, br))
            elif t.kind == "cptp":
                douts = int(np.prod([sd[l] for l in t.output_spaces]))
                dins = int(np.prod([sd[l] for l in t.input_spaces]))
                arr = choi_to_array(
                    random_cptp_choi(douts, dins, rng),
                    [sd[l] for l in t.output_spaces + t.input_spaces],
                )
                self.values[name] = _reorder_axes(
                    arr, t.output_spaces + t.input_spaces, t.spaces
                )
            elif t.kind == "comb":
                mat = None
                can_order = []
                for ins, outs in t.comb_teeth:
                    douts = int(np.prod([sd[l] for l in outs]))
                    dins = int(np.prod([sd[l] for l in ins]))
                    part = random_cptp_choi(douts, dins, rng)
                    mat = part if mat is None else np.kron(mat, part)
                    can_order += list(outs) + list(ins)
                arr = choi_to_array(mat, [sd[l] for l in can_order])
                self.values[name] = _reorder_axes(arr, can_order, t.spaces)
            elif t.kind == "measurement":
                dims = [sd[l] for l in t.spaces]
                d = int(np.prod(dims))
                m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                self.values[name] = choi_to_array(_herm(m), dims)
            elif t.kind == "measurement_mpo_element":
                shape = [sd.irange[l] for l in t.spaces]
                x = rng.normal(size=shape) + 1j * rng.normal(size=shape)
                self.values[name] = self._pair_project(x, t)
        self._canonicalize_groups()

    def _pair_project(self, x, t):
        sd = self.sd
        spaces = list(t.spaces)
        phys = [l for l in spaces if not sd.is_bond(l)][0]
        i = spaces.index(phys)
        d = sd[phys]
        shape = x.shape
        xs = x.reshape(shape[:i] + (d, d) + shape[i + 1:])
        xs = (xs + np.conj(np.swapaxes(xs, i, i + 1))) / 2
        return xs.reshape(shape)

    # -- MPS chains -------------------------------------------------------

    def _mps_groups(self):
        if self._groups is not None:
            return self._groups
        groups = []
        seen = set()
        for name in self.vars:
            t = self.network.tensors[name]
            if t.kind != "mps_element" or name in seen:
                continue
            chain = [name]
            seen.add(name)
            grow = True
            while grow:
                grow = False
                head = self.network.tensors[chain[0]]
                if head.spaces and self.sd.is_bond(head.spaces[0]):
                    partner = [h for h in self.network.holders(head.spaces[0])
                               if h != chain[0]]
                    if partner and partner[0] not in seen:
                        chain.insert(0, partner[0])
                        seen.add(partner[0])
                        grow = True
                tail = self.network.tensors[chain[-1]]
                if tail.spaces and self.sd.is_bond(tail.spaces[-1]):
                    partner = [h for h in self.network.holders(tail.spaces[-1])
                               if h != chain[-1]]
                    if partner and partner[0] not in seen:
                        chain.append(partner[0])
                        seen.add(partner[0])
                        grow = True
            groups.append(chain)
        self._groups = groups
        return groups

    def _canonicalize_groups(self):
        """Right-canonicalize every MPS chain and normalize the head."""
        for chain in self._mps_groups():
            psis = [self.values[n] for n in chain]
            for i in range(len(psis) - 1, 0, -1):
                bl, d, br = psis[i].shape
                mat = psis[i].reshape(bl, d * br)
                q1, r1 = np.linalg.qr(mat.conj().T)
                psis[i] = q1.conj().T.reshape(bl, d, br)
                rmat = r1.conj().T  # (bl, bl)
                psis[i - 1] = np.einsum("xdy,yk->xdk", psis[i - 1], rmat)
            nrm = np.linalg.norm(psis[0])
            if nrm > 0:
                psis[0] = psis[0] / nrm
            for n, p in zip(chain, psis):
                self.values[n] = p

    def _group_grams(self, name):
        for chain in self._mps_groups():
            if name in chain:
                idx = chain.index(name)
                left = np.eye(1, dtype=complex)
                for n in chain[:idx]:
                    p = self.values[n]
                    left = np.einsum("ij,iak,jal->kl", left, p, p.conj())
                right = np.eye(1, dtype=complex)
                for n in reversed(chain[idx + 1:]):
                    p = self.values[n]
                    right = np.einsum("iak,jal,kl->ij", p, p.conj(), right)
                return left, right
        raise KeyError(name)

    # -- sweep loop -------------------------------------------------------

    def run(self):
        opts = self.opts
        conv = _Convergence(opts.rel_tol, opts.stall_sweeps)
        trace = []
        status = "max_sweeps"
        direction = 1
        for _ in range(opts.max_sweeps):
            reverse = direction < 0
            lin_run = PassRunner(self.lin_net, self.values, reverse)
            quad_run = PassRunner(self.quad_net, self.values, reverse)
            seq = self.vars if not reverse else list(reversed(self.vars))
            for name in seq:
                self._update_node(name, lin_run, quad_run)
            f = 2 * lin_run.finish() - quad_run.finish()
            trace.append(f)
            if not np.isfinite(f):
                status = "numerical_failure"
                break
            if len(trace) > 1 and f < trace[-2] - MONOTONE_GUARD * max(
                1.0, abs(trace[-2])
            ):
                status = "numerical_failure"
                break
            if conv.step(f):
                status = "converged"
                break
            direction = -direction
            self._canonicalize_groups()
        return trace, status

    def pre_qfi_value(self) -> float:
        return 2 * self.lin_net.value(self.values) - self.quad_net.value(
            self.values
        )

    # -- local updates ------------------------------------------------------

    def _update_node(self, name, lin_run=None, quad_run=None):
        if lin_run is None:
            lin_run = PassRunner(self.lin_net, self.values)
            quad_run = PassRunner(self.quad_net, self.values)
        t = self.network.tensors[name]
        kind = t.kind
        if kind == "state":
            self._update_state(t, lin_run, quad_run)
        elif kind == "mps_element":
            self._update_mps(t, lin_run, quad_run)
        elif kind in ("cptp", "comb"):
            self._update_channel_like(t, lin_run, quad_run)
        elif kind == "measurement":
            self._update_measurement(t, lin_run, quad_run)
        elif kind == "measurement_mpo_element":
            self._update_measure_element(t, lin_run, quad_run)

    def _coeff_env(self, t, lin_run, quad_run) -> np.ndarray:
        spaces = list(t.spaces)
        e_lin = lin_run.env_at(self.lin_idx[t.name], spaces)
        e_quad = quad_run.env_at(self.quad_idx[t.name], spaces)
        return 2 * e_lin.array - e_quad.array

    def _update_state(self, t, lin_run, quad_run):
        e = self._coeff_env(t, lin_run, quad_run)
        dims = [self.sd[l] for l in t.spaces]
        c = _herm(array_to_choi(e, dims).T)
        vals, vecs = np.linalg.eigh(c)
        v = _phase_fix(vecs[:, -1])
        self.values[t.name] = choi_to_array(np.outer(v, v.conj()), dims)

    def _update_mps(self, t, lin_run, quad_run):
        e = self._coeff_env(t, lin_run, quad_run)
        sd = self.sd
        has_l = bool(t.spaces and sd.is_bond(t.spaces[0]))
        has_r = bool(t.spaces and sd.is_bond(t.spaces[-1]))
        bl, br, d = self._mps_dims(t)
        arr = e
        if not has_l:
            arr = arr[None, ...]
        if not has_r:
            arr = arr[..., None]
        # coefficient pairs psi with conj(psi): F = sum E[(mu nu),(a b),
        # (kap lam)] psi[mu,a,kap] conj(psi)[nu,b,lam]; the sesquilinear
        # matrix therefore carries the bra slot first.
        arr = arr.reshape(bl, bl, d, d, br, br)
        nslot = bl * d * br
        h = arr.transpose(1, 3, 5, 0, 2, 4).reshape(nslot, nslot)
        h = _herm(h)
        nl, nr = self._group_grams(t.name)
        nmat = np.einsum("ij,ab,kl->jbliak",
                         nl, np.eye(d), nr).reshape(nslot, nslot)
        nmat = _herm(nmat) + 1e-12 * np.eye(nslot)
        vals, vecs = scipy.linalg.eigh(h, nmat)
        v = _phase_fix(vecs[:, -1])
        v = v / np.sqrt(max(np.real(v.conj() @ nmat @ v), 1e-300))
        self.values[t.name] = v.reshape(bl, d, br)

    def _update_channel_like(self, t, lin_run, quad_run):
        e = self._coeff_env(t, lin_run, quad_run)
        sd = self.sd
        if t.kind == "cptp":
            can = list(t.output_spaces) + list(t.input_spaces)
            douts = int(np.prod([sd[l] for l in t.output_spaces]))
            dins = int(np.prod([sd[l] for l in t.input_spaces]))
            e_can = _reorder_axes(e, list(t.spaces), can)
            dims_can = [sd[l] for l in can]
            c_obj = _herm(array_to_choi(e_can, dims_can).T)
            x_new, f_new, status = self._cptp_max(c_obj, douts, dins)
            if status != "optimal":
                # non-converged iterate: usable if finite and positive
                # enough; the keep-better comparison below preserves
                # monotonicity either way
                if not np.all(np.isfinite(x_new)) or np.min(
                    np.linalg.eigvalsh(x_new)
                ) < -1e-7:
                    f_new = -np.inf
        else:
            can = [l for ins, outs in t.comb_teeth
                   for l in list(outs) + list(ins)]
            dims_sig = tuple(
                (tuple(sd[l] for l in outs), tuple(sd[l] for l in ins))
                for ins, outs in t.comb_teeth
            )
            key = ("comb", dims_sig)
            compiled = self._sdp_cache.get(key)
            if compiled is None:
                compiled = _compile_comb(dims_sig)
                self._sdp_cache[key] = compiled
            e_can = _reorder_axes(e, list(t.spaces), can)
            dims_can = [sd[l] for l in can]
            c_obj = _herm(array_to_choi(e_can, dims_can).T)
            coords = np.zeros(compiled.nvars)
            _, d0, off = compiled.layout[0]
            coords[off:off + d0 * d0] = hermitian_basis_coords(c_obj)
            compiled.set_objective_coords(coords, sign=-1.0)
            sol = solve_sdp(compiled, gap_tol=1e-9, feas_tol=1e-7)
            if sol.status != "optimal":
                raise RuntimeError(f"local SDP for {t.name!r} failed "
                                   f"({sol.status})")
            x_new = sol.variable_values["X"]
            f_new = float(np.real(np.trace(x_new @ c_obj)))
        old_can = _reorder_axes(self.values[t.name], list(t.spaces), can)
        f_old = float(np.real(np.trace(array_to_choi(old_can, dims_can)
                                       @ c_obj)))
        if f_new >= f_old:
            arr = choi_to_array(x_new, dims_can)
            self.values[t.name] = _reorder_axes(arr, can, list(t.spaces))

    def _cptp_max(self, c_obj, dout, din):
        """max Tr(X c_obj) over CPTP Choi X, via the small dual
        min Tr(Y) s.t. 1 (x) Y >= c_obj; the optimal X is the PSD-cone
        multiplier of the dual constraint."""
        key = ("cptp_dual", dout, din)
        cached = self._sdp_cache.get(key)
        if cached is None:
            n = din * din
            mats = np.empty((n, 2 * dout * din, 2 * dout * din))
            chat = np.empty(n)
            for j in range(n):
                b = _basis_element(din, j)
                mats[j] = _realify(np.kron(np.eye(dout), b))
                chat[j] = float(np.real(np.trace(b)))
            cached = (chat, mats)
            self._sdp_cache[key] = cached
        chat, mats = cached
        g0 = _realify(-c_obj)
        status, u, gap, iters, pinf, dinf, mult = _ipm(
            chat, [g0], [mats], 1e-9, 1e-7, 200
        )
        m = dout * din
        xr = mult[0]
        x_c = (xr[:m, :m] + xr[m:, m:]) + 1j * (xr[m:, :m] - xr[:m, m:])
        x_c = _herm(x_c)
        # exact trace-preservation: absorb the residual into a maximally
        # mixed output direction
        tr_out = np.einsum("aiaj->ij", x_c.reshape(dout, din, dout, din))
        x_c = x_c + np.kron(np.eye(dout) / dout, np.eye(din) - tr_out)
        return x_c, float(np.real(np.trace(x_c @ c_obj))), status

    def _update_measurement(self, t, lin_run, quad_run):
        dims = [self.sd[l] for l in t.spaces]
        spaces = list(t.spaces)
        e_lin = lin_run.env_at(self.lin_idx[t.name], spaces)
        e_quad = quad_run.env_at(self.quad_idx[t.name], spaces)
        rho = _herm(array_to_choi(e_quad.array, dims))
        drho = _herm(array_to_choi(e_lin.array, dims))
        self.values[t.name] = choi_to_array(sld(rho, drho), dims)

    def _update_measure_element(self, t, lin_run, quad_run):
        sd = self.sd
        spaces = list(t.spaces)
        bonds = [l for l in spaces if sd.is_bond(l)]
        phys = [l for l in spaces if not sd.is_bond(l)][0]
        d = sd[phys]
        e_lin = lin_run.env_at(self.lin_idx[t.name], spaces)
        l_arr = _swap_fused(e_lin.array, spaces, sd)
        quad_axes = list(bonds) + [("2", l) for l in bonds] + [phys]
        e_quad = quad_run.env_at(self.quad_idx[t.name], quad_axes)
        nb = len(bonds)
        bdims = [sd[l] for l in bonds]
        earr = e_quad.array.reshape(tuple(bdims) + tuple(bdims) + (d, d))
        idx_e = list(range(2 * nb)) + [2 * nb, 2 * nb + 1]       # b1,b2,a,b
        idx_delta = [2 * nb + 2, 2 * nb + 3]                     # c, c'
        out1 = list(range(nb)) + [2 * nb + 1, 2 * nb + 2]        # b1, b, c
        out2 = list(range(nb, 2 * nb)) + [2 * nb + 3, 2 * nb]    # b2, c', a
        q = np.einsum(earr, idx_e, np.eye(d), idx_delta, out1 + out2)
        n_slot = int(np.prod(bdims, dtype=int)) * d * d
        qmat = q.reshape(n_slot, n_slot)
        lvec = self._element_to_slot(l_arr, t).reshape(-1)
        x_old = self._element_to_slot(self.values[t.name], t).reshape(-1)
        x_new = _paired_quadratic_max(qmat, lvec, bdims, d)
        f_new = _local_quad_value(qmat, lvec, x_new)
        f_old = _local_quad_value(qmat, lvec, x_old)
        if f_new >= f_old:
            self.values[t.name] = self._slot_to_element(x_new, t)

    def _element_to_slot(self, arr, t):
        """Node-axis array -> (bonds..., ket, bra) layout."""
        sd = self.sd
        spaces = list(t.spaces)
        bonds = [l for l in spaces if sd.is_bond(l)]
        phys = [l for l in spaces if not sd.is_bond(l)][0]
        perm = [spaces.index(l) for l in bonds] + [spaces.index(phys)]
        a = arr.transpose(perm)
        d = sd[phys]
        return a.reshape(a.shape[:-1] + (d, d))

    def _slot_to_element(self, flat, t):
        sd = self.sd
        spaces = list(t.spaces)
        bonds = [l for l in spaces if sd.is_bond(l)]
        phys = [l for l in spaces if not sd.is_bond(l)][0]
        d = sd[phys]
        bdims = [sd[l] for l in bonds]
        a = flat.reshape(tuple(bdims) + (d * d,))
        cur = bonds + [phys]
        perm = [cur.index(l) for l in spaces]
        return a.transpose(perm)

    # -- results ------------------------------------------------------------

    def solved_network(self) -> TensorNetwork:
        out = TensorNetwork([], self.sd)
        for name, t in self.network.tensors.items():
            if not isinstance(t, VarTensor):
                out.add(t)
                continue
            if t.kind == "mps_element":
                has_l = bool(t.spaces and self.sd.is_bond(t.spaces[0]))
                has_r = bool(t.spaces and self.sd.is_bond(t.spaces[-1]))
                psi = self.values[name]
                dens = _mps_density_array(psi, has_l, has_r)
                phys = [l for l in t.spaces if not self.sd.is_bond(l)][0]
                axes = ([t.spaces[0]] if has_l else []) + [phys] + (
                    [t.spaces[-1]] if has_r else []
                )
                arr = psi
                if not has_l:
                    arr = arr[0]
                if not has_r:
                    arr = arr[..., 0]
                out.add(SolvedMpsTensor(list(t.spaces), dens, self.sd, name,
                                        arr, axes))
            else:
                out.add(ConstTensor(list(t.spaces), array=self.values[name],
                                    sdict=self.sd, name=name))
        return out


def _reorder_axes(arr, from_spaces, to_spaces):
    perm = [from_spaces.index(l) for l in to_spaces]
    return arr.transpose(perm)


def _local_quad_value(qmat, lvec, x):
    return float(np.real(2 * lvec @ x - x @ qmat @ x))


def _paired_quadratic_max(qmat, lvec, bdims, d):
    """Maximize 2 l.x - x.Q.x over Hermitian-paired site elements.

    Pairing means x[..., u, v] = conj(x[..., v, u]); the real
    parametrization uses diagonal real parts and real/imaginary parts
    of the upper triangle per bond index.
    """
    nb = int(np.prod(bdims, dtype=int)) if len(bdims) else 1
    n = nb * d * d
    basis = []
    for u in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[u, u] = 1.0
        basis.append(m)
    for u in range(d):
        for v in range(u + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[u, v] = 1.0
            m[v, u] = 1.0
            basis.append(m / np.sqrt(2))
            m2 = np.zeros((d, d), dtype=complex)
            m2[u, v] = 1j
            m2[v, u] = -1j
            basis.append(m2 / np.sqrt(2))
    p = np.zeros((n, n), dtype=complex)
    col = 0
    buf = np.zeros((nb, d, d), dtype=complex)
    for ib in range(nb):
        for m in basis:
            buf[:] = 0
            buf[ib] = m
            p[:, col] = buf.reshape(-1)
            col += 1
    mq = np.real(p.T @ qmat @ p)
    mq = (mq + mq.T) / 2
    lt = np.real(lvec @ p)
    t = solve_regularized_quadratic(mq, lt, reg=1e-11)
    return p @ t


def _compile_cptp(douts, dins):
    prob = SdpProblem()
    prob.add_var("X", douts * dins)
    prob.add_psd_constraint(lambda v: v["X"])

    def tp(v):
        x = v["X"].reshape(douts, dins, douts, dins)
        return np.einsum("aiaj->ij", x) - np.eye(dins)

    prob.add_equality_constraint(tp)
    return prob.compile()


def _compile_comb(dims_sig):
    """Comb SDP; spaces interleaved (outs_1, ins_1, outs_2, ...)."""
    tooth_dims = [(int(np.prod(o)), int(np.prod(i))) for o, i in dims_sig]
    total = int(np.prod([o * i for o, i in tooth_dims]))
    prob = SdpProblem()
    prob.add_var("X", total)
    nt = len(tooth_dims)
    for k in range(1, nt):
        head = int(np.prod([o * i for o, i in tooth_dims[:k]]))
        prob.add_var(f"Q{k}", head)
    prob.add_psd_constraint(lambda v: v["X"])

    def eq_factory(k):
        head = int(np.prod([o * i for o, i in tooth_dims[:k - 1]])) \
            if k > 1 else 1
        do, di = tooth_dims[k - 1]

        def fn(v):
            q = v["X"] if k == nt else v[f"Q{k}"]
            t = q.reshape(head, do, di, head, do, di)
            traced = np.einsum("aoiboj->aibj", t).reshape(head * di,
                                                          head * di)
            prev = v[f"Q{k-1}"] if k > 1 else np.eye(1, dtype=complex)
            return traced - np.kron(prev, np.eye(di))

        return fn

    for k in range(nt, 0, -1):
        prob.add_equality_constraint(eq_factory(k))
    return prob.compile()


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------

def iss_opt(network: TensorNetwork, options: IssOptions = None):
    """See-saw a strategy network; returns (qfi, trace, solved, status)."""
    opts = options or IssOptions()
    opt = _Optimizer(network, opts)
    trace, status = opt.run()
    qfi = trace[-1] if trace else 0.0
    return qfi, trace, opt.solved_network(), status


def _env_const_nodes(channel, n, sd, env_input_state):
    e = channel.env_dim
    rho_e = env_input_state
    if rho_e is None:
        rho_e = channel.env_input_state
    if rho_e is None:
        rho_e = np.eye(e) / e
    env_labels = sd.arrange_spaces(n + 1, e, "ENV")
    feed = ConstTensor([env_labels[0]], choi=np.asarray(rho_e, dtype=complex),
                       sdict=sd, name="ENV_IN")
    trace_node = ConstTensor([env_labels[n]], choi=np.eye(e), sdict=sd,
                             name="ENV_TRACE")
    return env_labels, feed, trace_node


def iss_tnet_parallel_qfi(channel, n: int, ancilla_dim: int = 1,
                          mps_bond_dim: int = 1, sld_bond_dim: int = None,
                          options: IssOptions = None,
                          env_input_state=None) -> IssResult:
    """Tensor-network see-saw for the parallel strategy.

    The input state is an MPS over the N channel inputs plus one
    ancilla site; the pre-SLD is an MPO over the outputs and ancilla;
    the default MPO bond dimension is mps_bond_dim squared.  Channels
    with an environment are chained through it, fed with the recorded
    environment state and traced after the last use.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    opts = options or IssOptions()
    if sld_bond_dim is None:
        sld_bond_dim = mps_bond_dim * mps_bond_dim
    sd = SpaceDict()
    inp = sd.arrange_spaces(n, channel.input_dim, "INP")
    out = sd.arrange_spaces(n, channel.output_dim, "OUT")
    sd["ANC"] = ancilla_dim
    rho, rho_names, _ = mps_var_tnet(inp + ["ANC"], "RHO0", sd, mps_bond_dim)
    tnet = rho
    env_labels = None
    if channel.env_dim > 1:
        env_labels, feed, trace_node = _env_const_nodes(channel, n, sd,
                                                        env_input_state)
        tnet = contr(tnet, feed)
    for i in range(n):
        kwargs = {}
        if env_labels is not None:
            kwargs = {"env_in": env_labels[i], "env_out": env_labels[i + 1]}
        pt = channel_tensor(channel, [inp[i]], [out[i]], sdict=sd,
                            name=f"CHANNEL{i}", **kwargs)
        tnet = contr(tnet, pt)
    if env_labels is not None:
        tnet = contr(tnet, trace_node)
    pi, pi_names, _ = mpo_measure_var_tnet(out + ["ANC"], "PI", sd,
                                           sld_bond_dim)
    tnet = contr(tnet, pi)
    qfi, trace, solved, status = iss_opt(tnet, opts)
    return IssResult(
        qfi=qfi, trace=trace,
        artifacts={"psis": [solved.tensors[nm] for nm in rho_names],
                   "sld_elements": [solved.tensors[nm].array
                                    for nm in pi_names],
                   "network": solved},
        status=status, seed=opts.seed,
    )


def iss_tnet_adaptive_qfi(channel, n: int, ancilla_dim: int = 1,
                          options: IssOptions = None,
                          env_input_state=None) -> IssResult:
    """Tensor-network see-saw for the adaptive strategy.

    The comb is split into its teeth: a variable input state, N-1
    variable CPTP controls on system and ancilla, and a final
    measurement on the last output and ancilla.  The teeth artifact
    lists [rho0, C_0, ..., C_{N-2}] as CJ matrices.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    opts = options or IssOptions()
    sd = SpaceDict()
    inp = sd.arrange_spaces(n, channel.input_dim, "INP")
    out = sd.arrange_spaces(n, channel.output_dim, "OUT")
    anc = sd.arrange_spaces(n, ancilla_dim, "ANC")
    tnet = input_state_var([inp[0], anc[0]], name="RHO0", sdict=sd)
    env_labels = None
    if channel.env_dim > 1:
        env_labels, feed, trace_node = _env_const_nodes(channel, n, sd,
                                                        env_input_state)
        tnet = contr(tnet, feed)
    for i in range(n):
        kwargs = {}
        if env_labels is not None:
            kwargs = {"env_in": env_labels[i], "env_out": env_labels[i + 1]}
        pt = channel_tensor(channel, [inp[i]], [out[i]], sdict=sd,
                            name=f"CHANNEL{i}", **kwargs)
        tnet = contr(tnet, pt)
    if env_labels is not None:
        tnet = contr(tnet, trace_node)
    for i in range(n - 1):
        vt = cptp_var([out[i], anc[i]], [inp[i + 1], anc[i + 1]], sdict=sd,
                      name=f"CONTROL{i}")
        tnet = contr(tnet, vt)
    pi = measure_var([out[-1], anc[-1]], name="PI", sdict=sd)
    tnet = contr(tnet, pi)
    qfi, trace, solved, status = iss_opt(tnet, opts)
    teeth = [array_to_choi(solved.tensors["RHO0"].array,
                           [sd[inp[0]], sd[anc[0]]])]
    for i in range(n - 1):
        teeth.append(solved.tensors[f"CONTROL{i}"].choi(
            [inp[i + 1], anc[i + 1], out[i], anc[i]]
        ))
    l_op = array_to_choi(solved.tensors["PI"].array,
                         [sd[out[-1]], sd[anc[-1]]])
    return IssResult(
        qfi=qfi, trace=trace,
        artifacts={"teeth": teeth, "sld": l_op, "network": solved},
        status=status, seed=opts.seed,
    )
