"""Dense complex linear algebra for quantum channels and states.

Everything here works with Choi-Jamiolkowski (CJ) operators over named
spaces, Kraus sets, and density matrices.  Conventions used throughout
the package:

* CJ operators are built from the unnormalized maximally entangled
  state |Phi> = sum_i |ii>, so the CJ matrix of a qubit channel has
  trace 2.
* Output space factors precede input space factors in the matrix
  index order.
* Matrices are row-major: an operator on a product of spaces with
  dimensions (d1, ..., dn) is a (D, D) array with D = d1*...*dn and
  a fused row index (i1, ..., in).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Space",
    "ChoiOperator",
    "KrausSet",
    "Povm",
    "ChannelReport",
    "choi_from_krauses",
    "dchoi_from_krauses",
    "krauses_from_choi",
    "link_product",
    "partial_op",
    "sld",
    "state_qfi",
    "state_cfi",
    "validate_channel",
]

RANK_TOL = 1e-10    # eigenvalue cut for Kraus extraction
EIG_TOL = 1e-12     # support cut for the SLD denominator


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _is_hermitian(m: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(1.0, np.max(np.abs(m))))


@dataclass(frozen=True)
class Space:
    """A named tensor factor of a CJ operator."""

    label: object
    dim: int
    role: str  # "input" or "output"

    def __post_init__(self):
        if self.role not in ("input", "output"):
            raise ValueError(f"role must be 'input' or 'output', got {self.role!r}")
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")


class ChoiOperator:
    """A labeled operator over an ordered list of named spaces.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix of dimension prod(space dims).
    spaces : sequence of Space
        Ordered tensor factors; the fused matrix index runs over them
        row-major.
    """

    def __init__(self, matrix, spaces: Sequence[Space]):
        self.matrix = _as_matrix(matrix)
        self.spaces = tuple(spaces)
        total = int(np.prod([s.dim for s in self.spaces])) if self.spaces else 1
        if self.matrix.shape[0] != total:
            raise ValueError(
                f"matrix dimension {self.matrix.shape[0]} does not match product "
                f"of space dimensions {total}"
            )
        labels = [s.label for s in self.spaces]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate space labels: {labels}")

    # -- basic views ---------------------------------------------------

    @property
    def labels(self) -> tuple:
        return tuple(s.label for s in self.spaces)

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.spaces)

    def space(self, label) -> Space:
        for s in self.spaces:
            if s.label == label:
                return s
        raise KeyError(f"unknown space label {label!r}")

    def tensor_view(self) -> np.ndarray:
        """Matrix reshaped to one ket and one bra axis per space."""
        d = self.dims
        return self.matrix.reshape(d + d)

    def reorder(self, labels: Sequence) -> "ChoiOperator":
        """Same operator with spaces permuted into the given label order."""
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise ValueError(f"label set mismatch: {labels} vs {self.labels}")
        perm = [self.labels.index(l) for l in labels]
        n = len(self.spaces)
        t = self.tensor_view().transpose(perm + [n + p for p in perm])
        dim = self.matrix.shape[0]
        return ChoiOperator(t.reshape(dim, dim), [self.spaces[p] for p in perm])

    def relabel(self, mapping: dict) -> "ChoiOperator":
        spaces = [
            Space(mapping.get(s.label, s.label), s.dim, s.role) for s in self.spaces
        ]
        return ChoiOperator(self.matrix, spaces)

    def with_roles(self, roles: dict) -> "ChoiOperator":
        spaces = [
            Space(s.label, s.dim, roles.get(s.label, s.role)) for s in self.spaces
        ]
        return ChoiOperator(self.matrix, spaces)

    def copy_with(self, matrix) -> "ChoiOperator":
        return ChoiOperator(matrix, self.spaces)

    def __repr__(self):
        parts = ", ".join(f"{s.label}:{s.dim}:{s.role[0]}" for s in self.spaces)
        return f"ChoiOperator({parts})"

    # -- serialization (nested [re, im] pairs) --------------------------

    def to_json(self) -> dict:
        return {
            "spaces": [
                {"label": list(s.label) if isinstance(s.label, tuple) else s.label,
                 "dim": s.dim, "role": s.role}
                for s in self.spaces
            ],
            "matrix": complex_to_json(self.matrix),
        }

    @staticmethod
    def from_json(data: dict) -> "ChoiOperator":
        spaces = [
            Space(tuple(s["label"]) if isinstance(s["label"], list) else s["label"],
                  int(s["dim"]), s["role"])
            for s in data["spaces"]
        ]
        return ChoiOperator(complex_from_json(data["matrix"]), spaces)


def complex_to_json(a: np.ndarray) -> list:
    """Nested lists of [re, im] pairs for a complex array."""
    stacked = np.stack([np.real(a), np.imag(a)], axis=-1)
    return stacked.tolist()


def complex_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


@dataclass
class KrausSet:
    """Kraus operators of a channel, optionally with parameter derivatives."""

    operators: list
    derivatives: list | None = None

    def __post_init__(self):
        self.operators = [np.asarray(k, dtype=complex) for k in self.operators]
        if not self.operators:
            raise ValueError("need at least one Kraus operator")
        shape = self.operators[0].shape
        for k in self.operators:
            if k.shape != shape:
                raise ValueError(f"Kraus shape mismatch: {k.shape} vs {shape}")
        if self.derivatives is not None:
            self.derivatives = [np.asarray(k, dtype=complex) for k in self.derivatives]
            if len(self.derivatives) != len(self.operators):
                raise ValueError("derivative list length must match operator list")
            for k in self.derivatives:
                if k.shape != shape:
                    raise ValueError("derivative shape mismatch")

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    def completeness_defect(self) -> float:
        """Max-abs deviation of sum_k K^dag K from the identity."""
        acc = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(acc - np.eye(self.dim_in))))


@dataclass
class Povm:
    """A generalized measurement: PSD elements summing to the identity."""

    elements: list

    def __post_init__(self):
        self.elements = [_as_matrix(e) for e in self.elements]

    def validate(self, tol: float = 1e-9):
        d = self.elements[0].shape[0]
        for e in self.elements:
            if not _is_hermitian(e, tol):
                raise ValueError("POVM element is not Hermitian")
            if np.min(np.linalg.eigvalsh((e + e.conj().T) / 2)) < -tol:
                raise ValueError("POVM element is not PSD")
        if np.max(np.abs(sum(self.elements) - np.eye(d))) > tol:
            raise ValueError("POVM elements do not sum to the identity")


# ----------------------------------------------------------------------
# Choi / Kraus conversions
# ----------------------------------------------------------------------

def choi_from_krauses(krauses, out_label="O", in_label="I") -> ChoiOperator:
    """CJ operator of the channel with the given Kraus operators.

    The result lives on output x input, built from the unnormalized
    |Phi>; for a single identity Kraus on a qubit this is the rank-1
    matrix |Phi><Phi| with trace 2.
    """
    if isinstance(krauses, KrausSet):
        ops = krauses.operators
    else:
        ops = [np.asarray(k, dtype=complex) for k in krauses]
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise ValueError(f"Kraus shape mismatch: {k.shape} vs {shape}")
    do, di = ops[0].shape
    mat = np.zeros((do * di, do * di), dtype=complex)
    for k in ops:
        v = k.reshape(-1)  # vec(K) = (K (x) 1)|Phi>, row-major
        mat += np.outer(v, v.conj())
    return ChoiOperator(
        mat, [Space(out_label, do, "output"), Space(in_label, di, "input")]
    )


def dchoi_from_krauses(krauses, dkrauses=None) -> np.ndarray:
    """Parameter derivative of the CJ matrix from Kraus derivatives.

    Accepts a KrausSet carrying derivatives, or separate lists.
    """
    if isinstance(krauses, KrausSet):
        if krauses.derivatives is None:
            raise ValueError("KrausSet has no derivatives")
        ops, dops = krauses.operators, krauses.derivatives
    else:
        if dkrauses is None:
            raise ValueError("missing Kraus derivatives")
        ops = [np.asarray(k, dtype=complex) for k in krauses]
        dops = [np.asarray(k, dtype=complex) for k in dkrauses]
    if len(ops) != len(dops):
        raise ValueError("operator and derivative counts differ")
    do, di = ops[0].shape
    mat = np.zeros((do * di, do * di), dtype=complex)
    for k, dk in zip(ops, dops):
        v, dv = k.reshape(-1), dk.reshape(-1)
        term = np.outer(dv, v.conj())
        mat += term + term.conj().T
    return mat


def _sld_from_eigh(eigvals, eigvecs, drho, cut: float) -> np.ndarray:
    """SLD in the given eigenbasis, zeroing blocks with lam_i+lam_j <= cut."""
    d = drho.shape[0]
    dr = eigvecs.conj().T @ drho @ eigvecs
    denom = eigvals[:, None] + eigvals[None, :]
    coeff = np.zeros((d, d), dtype=complex)
    mask = denom > cut
    coeff[mask] = 2.0 * dr[mask] / denom[mask]
    return eigvecs @ coeff @ eigvecs.conj().T


def krauses_from_choi(choi, rank_tol: float = RANK_TOL, dchoi=None) -> KrausSet:
    """Canonical Kraus operators from the eigenvectors of a CJ operator.

    Eigenvalues above ``rank_tol`` are kept; a negative eigenvalue below
    ``-rank_tol`` raises, since the map is then not completely positive.
    When ``dchoi`` is given, matching Kraus derivatives are produced by
    transporting the CJ derivative through the eigenbasis; the pair then
    reproduces ``dchoi`` exactly whenever the input is a valid channel
    family derivative.

    Each Kraus operator's largest-magnitude entry is made real positive
    so outputs are reproducible.
    """
    if isinstance(choi, ChoiOperator):
        if len(choi.spaces) != 2:
            raise ValueError("expected a two-space (output, input) CJ operator")
        mat = choi.matrix
        do, di = choi.spaces[0].dim, choi.spaces[1].dim
    else:
        mat = _as_matrix(choi)
        d = int(round(np.sqrt(mat.shape[0])))
        if d * d != mat.shape[0]:
            raise ValueError("cannot infer output/input split; pass a ChoiOperator")
        do = di = d
    if not _is_hermitian(mat):
        raise ValueError("CJ matrix is not Hermitian")
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    if vals[0] < -rank_tol * max(1.0, vals[-1]):
        raise ValueError(
            f"CJ operator has negative eigenvalue {vals[0]:.3e}; map is not CP"
        )
    keep = vals > rank_tol
    ops = []
    phases = []
    for lam, v in zip(vals[keep], vecs[:, keep].T):
        w = np.sqrt(lam) * v
        k = w.reshape(do, di)
        idx = np.unravel_index(np.argmax(np.abs(k)), k.shape)
        ph = k[idx] / abs(k[idx]) if abs(k[idx]) > 0 else 1.0
        ops.append(k / ph)
        phases.append(ph)
    if not ops:
        raise ValueError("CJ operator is numerically zero")
    dops = None
    if dchoi is not None:
        dmat = _as_matrix(dchoi)
        # Solve A C + C A^dag = dC with A = L/2, the half-SLD of (C, dC);
        # then each vec(dK_k) = A vec(K_k) reproduces dC exactly.
        a = 0.5 * _sld_from_eigh(np.maximum(vals, 0.0), vecs, dmat, EIG_TOL)
        dops = []
        for lam, v, ph in zip(vals[keep], vecs[:, keep].T, phases):
            dw = a @ (np.sqrt(lam) * v)
            dops.append(dw.reshape(do, di) / ph)
    return KrausSet(ops, dops)


# ----------------------------------------------------------------------
# Link product and partial operations
# ----------------------------------------------------------------------

def _fused_tensor(op: ChoiOperator) -> np.ndarray:
    """Tensor representation: one fused (ket, bra) axis of range d^2 per space."""
    n = len(op.spaces)
    t = op.tensor_view()
    perm = []
    for i in range(n):
        perm += [i, n + i]
    t = t.transpose(perm)
    return t.reshape([s.dim * s.dim for s in op.spaces])


def _unfuse_to_matrix(t: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`_fused_tensor` for the given per-space dimensions."""
    n = len(dims)
    shape = []
    for d in dims:
        shape += [d, d]
    t = t.reshape(shape)
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    t = t.transpose(perm)
    total = int(np.prod(dims)) if n else 1
    return t.reshape(total, total)


def link_product(a: ChoiOperator, b: ChoiOperator) -> ChoiOperator:
    """Link product of two CJ operators over their shared space labels.

    Shared labels are contracted (this is the partial-transpose-and-trace
    composition rule); the result carries the symmetric difference of the
    operand spaces, a's own spaces first. Each shared label must be an
    output of one operand and an input of the other, with equal dimension.
    """
    shared = [l for l in a.labels if l in b.labels]
    for l in shared:
        sa, sb = a.space(l), b.space(l)
        if sa.dim != sb.dim:
            raise ValueError(f"dimension mismatch on shared space {l!r}: "
                             f"{sa.dim} vs {sb.dim}")
        if sa.role == sb.role:
            raise ValueError(
                f"shared space {l!r} is {sa.role} in both operands; "
                "link requires an output matched with an input"
            )
    ta, tb = _fused_tensor(a), _fused_tensor(b)
    idx_a = list(range(len(a.spaces)))
    next_idx = len(a.spaces)
    idx_b = []
    for s in b.spaces:
        if s.label in shared:
            idx_b.append(idx_a[a.labels.index(s.label)])
        else:
            idx_b.append(next_idx)
            next_idx += 1
    out_spaces = [s for s in a.spaces if s.label not in shared] + [
        s for s in b.spaces if s.label not in shared
    ]
    out_idx = [idx_a[i] for i, s in enumerate(a.spaces) if s.label not in shared]
    out_idx += [idx_b[i] for i, s in enumerate(b.spaces) if s.label not in shared]
    t = np.einsum(ta, idx_a, tb, idx_b, out_idx)
    if not out_spaces:
        return t.item()
    mat = _unfuse_to_matrix(t, [s.dim for s in out_spaces])
    return ChoiOperator(mat, out_spaces)


def partial_op(op: ChoiOperator, labels, mode: str) -> ChoiOperator:
    """Partial trace or partial transpose over the given space labels."""
    if isinstance(labels, (str, tuple)) and not isinstance(labels, list):
        labels = [labels]
    labels = list(labels)
    known = set(op.labels)
    for l in labels:
        if l not in known:
            raise KeyError(f"unknown space label {l!r}")
    n = len(op.spaces)
    t = op.tensor_view()
    if mode == "trace":
        keep = [i for i, s in enumerate(op.spaces) if s.label not in labels]
        drop = [i for i, s in enumerate(op.spaces) if s.label in labels]
        idx = list(range(2 * n))
        for i in drop:
            idx[n + i] = idx[i]
        out_idx = [idx[i] for i in keep] + [idx[n + i] for i in keep]
        t = np.einsum(t, idx, out_idx)
        spaces = [op.spaces[i] for i in keep]
        dim = int(np.prod([s.dim for s in spaces])) if spaces else 1
        if not spaces:
            return t.item()
        return ChoiOperator(t.reshape(dim, dim), spaces)
    if mode == "transpose":
        perm = list(range(2 * n))
        for i, s in enumerate(op.spaces):
            if s.label in labels:
                perm[i], perm[n + i] = n + i, i
        t = t.transpose(perm)
        return ChoiOperator(t.reshape(op.matrix.shape), op.spaces)
    raise ValueError(f"mode must be 'trace' or 'transpose', got {mode!r}")


# ----------------------------------------------------------------------
# State-level Fisher information
# ----------------------------------------------------------------------

def sld(rho, drho, eig_tol: float = EIG_TOL) -> np.ndarray:
    """Symmetric logarithmic derivative of (rho, drho).

    In rho's eigenbasis L_ij = 2 drho_ij / (lam_i + lam_j) on the
    support (lam_i + lam_j > eig_tol), zero elsewhere.
    """
    rho = _as_matrix(rho)
    drho = _as_matrix(drho)
    if not _is_hermitian(rho) or not _is_hermitian(drho):
        raise ValueError("rho and drho must be Hermitian")
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    return _sld_from_eigh(vals, vecs, drho, eig_tol)


def state_qfi(rho, drho, eig_tol: float = EIG_TOL) -> float:
    """Quantum Fisher information Tr(rho L^2) of a parametrized state."""
    l = sld(rho, drho, eig_tol)
    return float(np.real(np.trace(_as_matrix(rho) @ l @ l)))


def state_cfi(rho, drho, povm: Povm, tol: float = 1e-10) -> float:
    """Classical Fisher information of measuring ``povm`` on (rho, drho).

    Outcomes with p <= tol and |dp| <= tol are skipped; p <= tol with
    |dp| > tol is a degenerate diverging term and raises.
    """
    rho = _as_matrix(rho)
    drho = _as_matrix(drho)
    if not isinstance(povm, Povm):
        povm = Povm(list(povm))
    povm.validate()
    total = 0.0
    for i, e in enumerate(povm.elements):
        p = float(np.real(np.trace(rho @ e)))
        dp = float(np.real(np.trace(drho @ e)))
        if p <= tol:
            if abs(dp) <= tol:
                continue
            raise ValueError(
                f"outcome {i} has vanishing probability but |dp|={abs(dp):.3e}; "
                "CFI diverges"
            )
        total += dp * dp / p
    return total


# ----------------------------------------------------------------------
# Channel validation
# ----------------------------------------------------------------------

@dataclass
class ChannelReport:
    """Diagnostic flags for a CJ operator, with max violation magnitudes."""

    is_cp: bool
    is_tp: bool
    is_unital: bool
    cp_violation: float
    tp_violation: float
    unital_violation: float


def validate_channel(choi: ChoiOperator, tol: float = 1e-8) -> ChannelReport:
    """Check complete positivity, trace preservation and unitality."""
    if isinstance(choi, ChoiOperator):
        outs = [s.label for s in choi.spaces if s.role == "output"]
        ins = [s.label for s in choi.spaces if s.role == "input"]
        mat = choi.matrix
        op = choi
    else:
        raise TypeError("validate_channel expects a ChoiOperator")
    herm = np.max(np.abs(mat - mat.conj().T))
    vals = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    cp_violation = float(max(0.0, -vals[0], herm))
    din = int(np.prod([choi.space(l).dim for l in ins])) if ins else 1
    dout = int(np.prod([choi.space(l).dim for l in outs])) if outs else 1
    if outs:
        tr_out = partial_op(op, outs, "trace")
        tr_out_mat = tr_out.matrix if ins else np.array([[tr_out]])
        tp_violation = float(np.max(np.abs(tr_out_mat - np.eye(din))))
    else:
        tp_violation = float(np.max(np.abs(mat - np.eye(din))))
    if ins:
        tr_in = partial_op(op, ins, "trace")
        tr_in_mat = tr_in.matrix if outs else np.array([[tr_in]])
        unital_violation = float(np.max(np.abs(tr_in_mat - np.eye(dout))))
    else:
        unital_violation = float(np.max(np.abs(mat - np.eye(dout))))
    return ChannelReport(
        is_cp=cp_violation <= tol,
        is_tp=tp_violation <= tol,
        is_unital=unital_violation <= tol,
        cp_violation=cp_violation,
        tp_violation=tp_violation,
        unital_violation=unital_violation,
    )
