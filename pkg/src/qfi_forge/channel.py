"""Parametrized quantum channels and their algebra.

A :class:`ParamChannel` is a CPTP map together with its derivative over
the estimated parameter at a fixed working point (theta = 0 throughout;
finite rotations can always be absorbed into controls or measurements).
Channels may act on an extra environment factor, used to chain noise
correlations between subsequent uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .qcore import (
    ChoiOperator,
    KrausSet,
    Space,
    choi_from_krauses,
    complex_from_json,
    complex_to_json,
    dchoi_from_krauses,
    krauses_from_choi,
    link_product,
    partial_op,
    validate_channel,
)

__all__ = [
    "ParamChannel",
    "LindbladSpec",
    "from_lindblad",
    "compose",
    "kron",
    "kron_pow",
    "linear_combine",
    "link_env",
    "builtin_channel",
    "dephasing",
    "amplitude_damping",
    "markov_dephasing_env",
    "channel_from_spec",
    "channel_to_spec",
]

SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

CPTP_TOL = 1e-8


def _phase_unitary(phi: float) -> np.ndarray:
    """exp(-i phi sz / 2)."""
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


class ParamChannel:
    """A channel and its parameter derivative at the working point.

    Construct from one of:

    * ``krauses=[...]`` (optionally ``dkrauses=[...]``, default zero),
    * ``choi=matrix`` (optionally ``dchoi=matrix``, default zero),
    * ``lindblad=...``, ``dlindblad=...``, ``time=t``, ``input_dim=d``.

    With ``env_dim=d > 1`` the channel acts on environment x system and
    the CJ spaces are ordered E_out, S_out, E_in, S_in.
    """

    def __init__(self, krauses=None, dkrauses=None, choi=None, dchoi=None,
                 lindblad=None, dlindblad=None, time=None, input_dim=None,
                 env_dim: int = 1, env_input_state=None, validate: bool = True,
                 dims=None):
        if lindblad is not None:
            built = from_lindblad(
                LindbladSpec(lindblad, dlindblad, time, input_dim), env_dim=env_dim
            )
            choi, dchoi = built._choi_mat, built._dchoi
            do_tot, di_tot = built._dims
        elif krauses is not None:
            kset = krauses if isinstance(krauses, KrausSet) else KrausSet(
                list(krauses),
                list(dkrauses) if dkrauses is not None else None,
            )
            do_tot, di_tot = kset.dim_out, kset.dim_in
            choi = choi_from_krauses(kset).matrix
            if kset.derivatives is not None:
                dchoi = dchoi_from_krauses(kset)
        elif choi is not None:
            choi = np.asarray(choi, dtype=complex)
            if dchoi is not None:
                dchoi = np.asarray(dchoi, dtype=complex)
            if dims is not None:
                do_tot, di_tot = dims
            else:
                do_tot, di_tot = self._infer_dims(choi, env_dim)
            if do_tot * di_tot != choi.shape[0]:
                raise ValueError(
                    f"dims {dims} inconsistent with CJ matrix size {choi.shape[0]}"
                )
        else:
            raise ValueError("provide krauses=, choi= or lindblad= data")
        if env_dim < 1:
            raise ValueError("env_dim must be >= 1")
        if do_tot % env_dim or di_tot % env_dim:
            raise ValueError(
                f"total dims ({do_tot}, {di_tot}) not divisible by env_dim {env_dim}"
            )
        self.env_dim = int(env_dim)
        self.output_dim = do_tot // env_dim
        self.input_dim = di_tot // env_dim
        self._dims = (do_tot, di_tot)
        self._choi_mat = choi
        self._dchoi = (np.zeros_like(choi) if dchoi is None else dchoi)
        if self._dchoi.shape != choi.shape:
            raise ValueError("dchoi shape does not match choi")
        self.env_input_state = (
            None if env_input_state is None
            else np.asarray(env_input_state, dtype=complex)
        )
        self._kraus_cache = None
        self.cptp_checked = bool(validate)
        if validate:
            self._validate()

    @staticmethod
    def _infer_dims(choi: np.ndarray, env_dim: int):
        d2 = choi.shape[0]
        d = int(round(np.sqrt(d2)))
        if d * d != d2:
            raise ValueError(
                "cannot infer in/out dims from a non-square-total CJ matrix"
            )
        return d, d

    def _validate(self, tol: float = CPTP_TOL):
        rep = validate_channel(self.choi_operator(), tol=tol)
        if not rep.is_cp:
            raise ValueError(f"map is not CP (violation {rep.cp_violation:.3e})")
        if not rep.is_tp:
            raise ValueError(
                f"map is not trace preserving (violation {rep.tp_violation:.3e})"
            )
        d = np.max(np.abs(self._dchoi - self._dchoi.conj().T))
        if d > tol:
            raise ValueError(f"dchoi is not Hermitian (violation {d:.3e})")
        tr = partial_op(
            ChoiOperator(self._dchoi, self.choi_operator().spaces),
            [s.label for s in self.choi_operator().spaces if s.role == "output"],
            "trace",
        )
        dev = np.max(np.abs(tr.matrix))
        if dev > 1e-7:
            raise ValueError(
                f"dchoi does not trace to zero over outputs (violation {dev:.3e})"
            )

    # -- views ----------------------------------------------------------

    def spaces(self):
        do, di = self._dims
        if self.env_dim == 1:
            return [Space("O", do, "output"), Space("I", di, "input")]
        return [
            Space("EO", self.env_dim, "output"),
            Space("O", self.output_dim, "output"),
            Space("EI", self.env_dim, "input"),
            Space("I", self.input_dim, "input"),
        ]

    def choi_operator(self) -> ChoiOperator:
        return ChoiOperator(self._choi_mat, self.spaces())

    def dchoi_operator(self) -> ChoiOperator:
        return ChoiOperator(self._dchoi, self.spaces())

    def choi(self) -> np.ndarray:
        return self._choi_mat.copy()

    def dchoi(self) -> np.ndarray:
        return self._dchoi.copy()

    def krauses(self, rank_tol: float = 1e-10) -> list:
        """Canonical Kraus operators from the CJ eigendecomposition."""
        return self._canonical(rank_tol).operators

    def dkrauses(self, rank_tol: float = 1e-10):
        """Canonical Kraus operators and their derivatives."""
        kset = self._canonical(rank_tol)
        return kset.operators, kset.derivatives

    def _canonical(self, rank_tol: float = 1e-10) -> KrausSet:
        if self._kraus_cache is None:
            do, di = self._dims
            op = ChoiOperator(
                self._choi_mat,
                [Space("O", do, "output"), Space("I", di, "input")],
            )
            self._kraus_cache = krauses_from_choi(op, rank_tol, dchoi=self._dchoi)
        return self._kraus_cache

    @property
    def total_input_dim(self) -> int:
        return self._dims[1]

    @property
    def total_output_dim(self) -> int:
        return self._dims[0]

    # -- action on states -------------------------------------------------

    def __call__(self, rho):
        """Evolve a state: returns (rho_theta, drho_theta)."""
        rho = np.asarray(rho, dtype=complex)
        do, di = self._dims
        if rho.shape != (di, di):
            raise ValueError(f"state dimension {rho.shape} != channel input {di}")
        c = self._choi_mat.reshape(do, di, do, di)
        dc = self._dchoi.reshape(do, di, do, di)
        out = np.einsum("aibj,ij->ab", c, rho)
        dout = np.einsum("aibj,ij->ab", dc, rho)
        return out, dout

    def adjoint_apply(self, y, derivative: bool = False) -> np.ndarray:
        """Heisenberg-picture action on an observable y."""
        y = np.asarray(y, dtype=complex)
        do, di = self._dims
        c = (self._dchoi if derivative else self._choi_mat).reshape(do, di, do, di)
        return np.einsum("ajbi,ba->ij", c, y)

    # -- algebra ----------------------------------------------------------

    def scalar_mul(self, a: float) -> "ParamChannel":
        out = ParamChannel(
            choi=a * self._choi_mat, dchoi=a * self._dchoi,
            env_dim=self.env_dim, validate=False, dims=self._dims,
        )
        out.output_dim, out.input_dim = self.output_dim, self.input_dim
        return out

    def add(self, other: "ParamChannel") -> "ParamChannel":
        if self._dims != other._dims or self.env_dim != other.env_dim:
            raise ValueError("dimension mismatch in channel addition")
        out = ParamChannel(
            choi=self._choi_mat + other._choi_mat,
            dchoi=self._dchoi + other._dchoi,
            env_dim=self.env_dim, validate=False, dims=self._dims,
        )
        out.output_dim, out.input_dim = self.output_dim, self.input_dim
        return out

    def compose(self, other: "ParamChannel") -> "ParamChannel":
        """self after other (acts on other's output)."""
        return compose(self, other)

    def kron(self, other: "ParamChannel") -> "ParamChannel":
        return kron(self, other)

    def kron_pow(self, n: int) -> "ParamChannel":
        return kron_pow(self, n)

    def link_env(self, other: "ParamChannel") -> "ParamChannel":
        """Feed this channel's environment output into other's input."""
        return link_env(self, other)

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        return self.add(other)

    def __mul__(self, other):
        if isinstance(other, ParamChannel):
            return self.link_env(other)
        return self.scalar_mul(float(other))

    def __rmul__(self, other):
        return self.scalar_mul(float(other))

    def tensor(self, in_labels, out_labels, sdict, name=None,
               env_in=None, env_out=None):
        """Wrap this channel as a ParamTensor over registered spaces."""
        from .tnet import channel_tensor

        return channel_tensor(
            self, in_labels, out_labels, sdict, name=name,
            env_in=env_in, env_out=env_out,
        )


# ----------------------------------------------------------------------
# Lindblad construction
# ----------------------------------------------------------------------

@dataclass
class LindbladSpec:
    """Time-independent generator data for a continuous-time channel.

    ``generator`` and ``dgenerator`` are callables rho -> matrix or
    explicit d^2 x d^2 superoperator matrices (row-major vec).
    """

    generator: object
    dgenerator: object = None
    time: float = 1.0
    input_dim: int = None


def _superop_matrix(gen, d: int) -> np.ndarray:
    if gen is None:
        return np.zeros((d * d, d * d), dtype=complex)
    if isinstance(gen, np.ndarray) or (
        hasattr(gen, "shape") and not callable(gen)
    ):
        m = np.asarray(gen, dtype=complex)
        if m.shape != (d * d, d * d):
            raise ValueError(f"superoperator must be {d*d}x{d*d}, got {m.shape}")
        return m
    s = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = 1.0
            s[:, j * d + k] = np.asarray(gen(e), dtype=complex).reshape(-1)
    return s


def _choi_from_superop(s: np.ndarray, d: int) -> np.ndarray:
    return s.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def from_lindblad(spec: LindbladSpec, env_dim: int = 1) -> ParamChannel:
    """Channel exp(t L) with derivative over the generator parameter.

    The derivative is the Frechet derivative of the matrix exponential
    in direction t * dL, computed through the doubled block exponential.
    """
    if spec.time is None or spec.time <= 0:
        raise ValueError("time must be positive")
    if spec.input_dim is None:
        raise ValueError("input_dim is required")
    d = int(spec.input_dim) * int(env_dim)
    ls = _superop_matrix(spec.generator, d)
    dls = _superop_matrix(spec.dgenerator, d)
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = 1.0
            out = (ls @ e.reshape(-1)).reshape(d, d)
            if abs(np.trace(out)) > 1e-9:
                raise ValueError("generator is not trace preserving")
            out_dag = (ls @ e.conj().T.reshape(-1)).reshape(d, d)
            if np.max(np.abs(out.conj().T - out_dag)) > 1e-9:
                raise ValueError("generator does not preserve Hermiticity")
    n = d * d
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, :n] = spec.time * ls
    block[n:, n:] = spec.time * ls
    block[:n, n:] = spec.time * dls
    eblock = scipy.linalg.expm(block)
    s = eblock[:n, :n]
    ds = eblock[:n, n:]
    return ParamChannel(
        choi=_choi_from_superop(s, d), dchoi=_choi_from_superop(ds, d),
        env_dim=env_dim,
    )


# ----------------------------------------------------------------------
# Channel algebra
# ----------------------------------------------------------------------

def _pair(ch: ParamChannel, tag: str):
    """(choi, dchoi) as labeled operators with tagged labels."""
    spaces = ch.choi_operator().spaces
    mapping = {s.label: (tag, s.label) for s in spaces}
    c = ch.choi_operator().relabel(mapping)
    dc = ChoiOperator(ch._dchoi, c.spaces)
    return c, dc


def compose(a: ParamChannel, b: ParamChannel) -> ParamChannel:
    """Composition a(b(.)), derivative by the Leibniz rule."""
    if a.env_dim != b.env_dim:
        raise ValueError("env_dim mismatch in composition")
    if a.total_input_dim != b.total_output_dim:
        raise ValueError(
            f"composition dimension mismatch: a expects {a.total_input_dim}, "
            f"b outputs {b.total_output_dim}"
        )
    ca, da = _pair(a, "a")
    cb, db = _pair(b, "b")
    # contract a's inputs with b's outputs
    mapping = {s.label: ("m", s.label[1]) for s in ca.spaces if s.role == "input"}
    ca, da = ca.relabel(mapping), da.relabel(mapping)
    mapping_b = {}
    for s in cb.spaces:
        if s.role == "output":
            mapping_b[s.label] = ("m", "I" if s.label[1] == "O" else "EI")
    cb, db = cb.relabel(mapping_b), db.relabel(mapping_b)
    c0 = link_product(ca, cb)
    dc0 = link_product(da, cb).matrix + link_product(ca, db).matrix
    order = [s.label for s in ca.spaces if s.label[0] == "a"] + [
        s.label for s in cb.spaces if s.label[0] == "b"
    ]
    c = c0.reorder(order)
    dc = ChoiOperator(dc0, c0.spaces).reorder(order).matrix
    out = ParamChannel(
        choi=c.matrix, dchoi=dc, env_dim=a.env_dim, validate=False,
        dims=(a.total_output_dim, b.total_input_dim),
    )
    out.output_dim, out.input_dim = a.output_dim, b.input_dim
    out.cptp_checked = a.cptp_checked and b.cptp_checked
    return out


def kron(a: ParamChannel, b: ParamChannel) -> ParamChannel:
    """Tensor product channel; inputs and outputs in operand order."""
    if a.env_dim != 1 or b.env_dim != 1:
        raise ValueError("kron is defined for channels without environment")
    doa, dia = a._dims
    dob, dib = b._dims

    def _k(ma, mb):
        ta = ma.reshape(doa, dia, doa, dia)
        tb = mb.reshape(dob, dib, dob, dib)
        t = np.einsum("aibj,ckdl->acikbdjl", ta, tb)
        n = doa * dob * dia * dib
        return t.reshape(n, n)

    c = _k(a._choi_mat, b._choi_mat)
    dc = _k(a._dchoi, b._choi_mat) + _k(a._choi_mat, b._dchoi)
    out = ParamChannel(choi=c, dchoi=dc, env_dim=1, validate=False,
                       dims=(doa * dob, dia * dib))
    out.cptp_checked = a.cptp_checked and b.cptp_checked
    return out


def kron_pow(a: ParamChannel, n: int) -> ParamChannel:
    if n < 1:
        raise ValueError("kron_pow needs n >= 1")
    out = a
    for _ in range(n - 1):
        out = kron(out, a)
    return out


def linear_combine(alpha: float, a: ParamChannel, b: ParamChannel = None):
    out = a.scalar_mul(alpha)
    if b is not None:
        out = out.add(b)
    return out


def link_env(a: ParamChannel, b: ParamChannel) -> ParamChannel:
    """Contract a's environment output with b's environment input.

    System legs are tensored in operand order; the result keeps a's
    environment input and b's environment output.
    """
    if a.env_dim != b.env_dim or a.env_dim < 2:
        raise ValueError("link_env requires matching env_dim > 1")
    ca, da = _pair(a, "a")
    cb, db = _pair(b, "b")
    # a's EO meets b's EI
    ca = ca.relabel({("a", "EO"): ("m", "E")})
    da = da.relabel({("a", "EO"): ("m", "E")})
    cb = cb.relabel({("b", "EI"): ("m", "E")})
    db = db.relabel({("b", "EI"): ("m", "E")})
    c = link_product(ca, cb)
    dc_mat = link_product(da, cb).matrix + link_product(ca, db).matrix
    dc = ChoiOperator(dc_mat, c.spaces)
    order = [("b", "EO")]
    if a.output_dim > 1:
        order.append(("a", "O"))
    if b.output_dim > 1:
        order.append(("b", "O"))
    order.append(("a", "EI"))
    if a.input_dim > 1:
        order.append(("a", "I"))
    if b.input_dim > 1:
        order.append(("b", "I"))
    present = [l for l in order if l in c.labels]
    dropped = [l for l in c.labels if l not in present]  # dim-1 legs
    if dropped:
        c = _drop_trivial(c, dropped)
        dc = _drop_trivial(dc, dropped)
    c = c.reorder(present)
    dc = dc.reorder(present)
    out_dim = a.output_dim * b.output_dim
    in_dim = a.input_dim * b.input_dim
    out = ParamChannel(
        choi=c.matrix, dchoi=dc.matrix, env_dim=a.env_dim, validate=False,
        env_input_state=(a.env_input_state if a.env_input_state is not None
                         else b.env_input_state),
        dims=(out_dim * a.env_dim, in_dim * a.env_dim),
    )
    out.output_dim, out.input_dim = out_dim, in_dim
    out.cptp_checked = a.cptp_checked and b.cptp_checked
    return out


def _drop_trivial(op: ChoiOperator, labels) -> ChoiOperator:
    spaces = [s for s in op.spaces if s.label not in labels]
    for l in labels:
        if op.space(l).dim != 1:
            raise ValueError(f"space {l!r} is not trivial")
    return ChoiOperator(op.matrix, spaces)


# ----------------------------------------------------------------------
# Built-in models
# ----------------------------------------------------------------------

def dephasing(p: float, rot_like: bool = False) -> ParamChannel:
    """Qubit dephasing with phase encoding U_theta = exp(-i theta sz/2).

    ``rot_like`` selects the equivalent random-rotation representation
    with two Kraus operators U(+-eps)/sqrt(2), eps fixed by
    p = cos^2(eps/2).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if rot_like:
        eps = 2.0 * np.arccos(np.sqrt(p))
        ks = [_phase_unitary(eps) / np.sqrt(2), _phase_unitary(-eps) / np.sqrt(2)]
    else:
        ks = [np.sqrt(p) * np.eye(2, dtype=complex), np.sqrt(1 - p) * SZ]
    dks = [-0.5j * SZ @ k for k in ks]
    return ParamChannel(krauses=ks, dkrauses=dks)


def amplitude_damping(p: float) -> ParamChannel:
    """Qubit amplitude damping (p=1 noiseless, p=0 full relaxation)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    k0 = np.diag([1.0, np.sqrt(p)]).astype(complex)
    k1 = np.zeros((2, 2), dtype=complex)
    k1[0, 1] = np.sqrt(1 - p)
    ks = [k0, k1]
    dks = [-0.5j * SZ @ k for k in ks]
    return ParamChannel(krauses=ks, dkrauses=dks)


def builtin_channel(name: str, p: float, rot_like: bool = False) -> ParamChannel:
    if name == "dephasing":
        return dephasing(p, rot_like=rot_like)
    if name == "amplitude_damping":
        return amplitude_damping(p)
    raise ValueError(f"unknown builtin channel {name!r}")


def _sign_state(s: int) -> np.ndarray:
    return np.array([1.0, float(s)]) / np.sqrt(2)


def markov_dephasing_env(p: float, c: float,
                         splitting: str = "one_sided") -> ParamChannel:
    """Dephasing whose rotation signs follow a binary Markov chain.

    The channel acts on a two dimensional environment that carries the
    sign of the previous rotation; the conditional flip probabilities
    are (1 + s s' c)/2. ``one_sided`` applies the sign-transfer map
    after the controlled rotation; ``symmetric`` splits it into two
    half-steps t with t o t equal to the transfer map, which requires a
    completely positive square root (c >= 0).

    The environment input state defaults to the maximally mixed state
    and is recorded on the returned channel.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [-1, 1], got {c}")
    eps = 2.0 * np.arccos(np.sqrt(p))
    kp = _phase_unitary(eps) / np.sqrt(2)
    km = _phase_unitary(-eps) / np.sqrt(2)
    plus, minus = _sign_state(+1), _sign_state(-1)
    v = np.sqrt(2) * (np.kron(np.outer(plus, plus), kp)
                      + np.kron(np.outer(minus, minus), km))
    dv = np.sqrt(2) * (np.kron(np.outer(plus, plus), -0.5j * SZ @ kp)
                       + np.kron(np.outer(minus, minus), -0.5j * SZ @ km))
    phi = ParamChannel(krauses=[v], dkrauses=[dv], env_dim=2)

    def transfer_channel(corr: float) -> ParamChannel:
        ks = []
        for s in (1, -1):
            for r in (1, -1):
                w = (1 + s * r * corr) / 2
                ks.append(np.sqrt(w) * np.outer(_sign_state(s), _sign_state(r)))
        return ParamChannel(krauses=ks, env_dim=2)

    t_full = transfer_channel(c)
    if splitting == "one_sided":
        out = phi.link_env(t_full)
    elif splitting == "symmetric":
        s_mat = _superop_matrix(
            lambda rho: t_full(rho)[0], 2
        )
        root = scipy.linalg.sqrtm(s_mat)
        root_choi = _choi_from_superop(np.asarray(root, dtype=complex), 2)
        herm = np.max(np.abs(root_choi - root_choi.conj().T))
        evs = np.linalg.eigvalsh((root_choi + root_choi.conj().T) / 2)
        if herm > 1e-8 or evs[0] < -1e-8:
            raise ValueError(
                "symmetric splitting failed: the principal square root of the "
                f"sign-transfer map is not completely positive for c={c} "
                f"(hermiticity defect {herm:.2e}, min eigenvalue {evs[0]:.2e}); "
                "use splitting='one_sided'"
            )
        half = ParamChannel(choi=root_choi, env_dim=2)
        out = half.link_env(phi).link_env(half)
    else:
        raise ValueError(f"unknown splitting {splitting!r}")
    out.env_input_state = np.eye(2, dtype=complex) / 2
    out.cptp_checked = True
    return out


# ----------------------------------------------------------------------
# Channel spec files (JSON)
# ----------------------------------------------------------------------

def channel_from_spec(spec: dict) -> ParamChannel:
    """Build a channel from the discriminated-union JSON description."""
    kind = spec.get("kind")
    if kind == "builtin":
        if spec.get("c") is not None:
            if spec.get("name", "dephasing") != "dephasing":
                raise ValueError("correlated builtin exists only for dephasing")
            return markov_dephasing_env(
                spec["p"], spec["c"], spec.get("splitting", "one_sided")
            )
        return builtin_channel(
            spec["name"], spec["p"], rot_like=bool(spec.get("rot_like", False))
        )
    if kind == "kraus":
        ops = [complex_from_json(k) for k in spec["operators"]]
        dops = (
            [complex_from_json(k) for k in spec["derivatives"]]
            if spec.get("derivatives") else None
        )
        return ParamChannel(krauses=ops, dkrauses=dops,
                            env_dim=int(spec.get("env_dim", 1)))
    if kind == "choi":
        dmat = spec.get("dmatrix")
        return ParamChannel(
            choi=complex_from_json(spec["matrix"]),
            dchoi=complex_from_json(dmat) if dmat is not None else None,
            env_dim=int(spec.get("env_dim", 1)),
        )
    if kind == "lindblad":
        dmat = spec.get("dmatrix")
        return from_lindblad(
            LindbladSpec(
                complex_from_json(spec["matrix"]),
                complex_from_json(dmat) if dmat is not None else None,
                float(spec["time"]),
                int(spec["input_dim"]),
            ),
            env_dim=int(spec.get("env_dim", 1)),
        )
    raise ValueError(f"unknown channel spec kind {kind!r}")


def channel_to_spec(ch: ParamChannel) -> dict:
    return {
        "kind": "choi",
        "matrix": complex_to_json(ch._choi_mat),
        "dmatrix": complex_to_json(ch._dchoi),
        "env_dim": ch.env_dim,
    }
