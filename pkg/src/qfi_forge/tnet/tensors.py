"""Tensor classes for symbolic strategy networks.

Tensors carry arrays in the fused representation: one axis per space,
with physical axes running over fused (ket, bra) index pairs of range
d^2 and bond axes of range d.  Contracting shared physical axes of two
fused arrays implements the link product of the underlying CJ
operators; bonds contract as plain sums.

Contraction result types follow the table: Const*Const -> Const,
anything with Param -> Param (Leibniz derivative), anything with Var
or a network -> TensorNetwork.  The abstract base class cannot be
contracted.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "GeneralTensor",
    "ConstTensor",
    "ParamTensor",
    "VarTensor",
    "SolvedMpsTensor",
    "TensorNetwork",
    "contr",
]


def choi_to_array(matrix: np.ndarray, dims) -> np.ndarray:
    """Fused tensor representation of an operator over physical spaces."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(matrix, dtype=complex).reshape(dims + dims)
    perm = []
    for i in range(n):
        perm += [i, n + i]
    t = t.transpose(perm)
    return t.reshape([d * d for d in dims])


def array_to_choi(array: np.ndarray, dims) -> np.ndarray:
    """Inverse of :func:`choi_to_array`."""
    dims = list(dims)
    n = len(dims)
    shape = []
    for d in dims:
        shape += [d, d]
    t = np.asarray(array, dtype=complex).reshape(shape)
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    t = t.transpose(perm)
    total = int(np.prod(dims)) if dims else 1
    return t.reshape(total, total)


class GeneralTensor:
    """Common shape bookkeeping; not usable in contractions itself."""

    def __init__(self, spaces, sdict, name=None):
        self.sdict = sdict
        self.spaces = list(spaces)
        if len(set(map(self._key, self.spaces))) != len(self.spaces):
            raise ValueError(f"duplicate spaces in {self.spaces}")
        for l in self.spaces:
            if l not in sdict:
                raise KeyError(f"space {l!r} is not registered")
        self.name = name if name is not None else sdict.fresh_name(
            type(self).__name__[0] + "T"
        )

    @staticmethod
    def _key(label):
        return label

    @property
    def shape(self):
        return tuple(self.sdict.irange[l] for l in self.spaces)

    def contr(self, other):
        return contr(self, other)

    def __mul__(self, other):
        return contr(self, other)

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, spaces={self.spaces})"


class ConstTensor(GeneralTensor):
    """A fixed tensor, initialized from a CJ matrix or a fused array."""

    def __init__(self, spaces, choi=None, sdict=None, name=None, array=None):
        if sdict is None:
            raise ValueError("sdict is required")
        super().__init__(spaces, sdict, name)
        if (choi is None) == (array is None):
            raise ValueError("provide exactly one of choi= or array=")
        if choi is not None:
            if any(sdict.is_bond(l) for l in self.spaces):
                raise ValueError("choi initialization needs all-physical spaces")
            dims = [sdict[l] for l in self.spaces]
            self.array = choi_to_array(choi, dims)
        else:
            self.array = np.asarray(array, dtype=complex).reshape(self.shape)

    def choi(self, spaces=None) -> np.ndarray:
        """CJ matrix with the factors ordered as requested."""
        order = list(spaces) if spaces is not None else list(self.spaces)
        if set(map(str, order)) != set(map(str, self.spaces)):
            raise ValueError(f"space set mismatch: {order} vs {self.spaces}")
        if any(self.sdict.is_bond(l) for l in self.spaces):
            raise ValueError("tensor has bond legs; contract them first")
        perm = [self.spaces.index(l) for l in order]
        arr = self.array.transpose(perm)
        return array_to_choi(arr, [self.sdict[l] for l in order])


class ParamTensor(ConstTensor):
    """A constant tensor carrying its parameter derivative."""

    def __init__(self, spaces, choi=None, sdict=None, name=None,
                 array=None, dchoi=None, darray=None):
        super().__init__(spaces, choi=choi, sdict=sdict, name=name, array=array)
        if (dchoi is None) == (darray is None):
            raise ValueError("provide exactly one of dchoi= or darray=")
        if dchoi is not None:
            dims = [self.sdict[l] for l in self.spaces]
            self.darray = choi_to_array(dchoi, dims)
        else:
            self.darray = np.asarray(darray, dtype=complex).reshape(self.shape)

    def dchoi(self, spaces=None) -> np.ndarray:
        order = list(spaces) if spaces is not None else list(self.spaces)
        perm = [self.spaces.index(l) for l in order]
        return array_to_choi(self.darray.transpose(perm),
                             [self.sdict[l] for l in order])


class SolvedMpsTensor(ConstTensor):
    """Density-MPO element produced by the optimizer.

    Carries the underlying pure-state element; ``to_mps`` returns it
    with axes ordered by the requested labels (bond axes use the pure,
    un-squared dimensions).
    """

    def __init__(self, spaces, array, sdict, name, psi, psi_axes):
        super().__init__(spaces, array=array, sdict=sdict, name=name)
        self.psi = psi
        self.psi_axes = list(psi_axes)

    def to_mps(self, spaces) -> np.ndarray:
        order = list(spaces)
        if set(map(str, order)) != set(map(str, self.psi_axes)):
            raise ValueError(
                f"requested axes {order} do not match {self.psi_axes}"
            )
        perm = [self.psi_axes.index(l) for l in order]
        return self.psi.transpose(perm)


class VarTensor(GeneralTensor):
    """A symbolic tensor to be optimized; carries no value.

    The kind is derived from the constructor arguments:

    * ``is_measurement`` and bond spaces -> ``measurement_mpo_element``,
    * ``is_measurement`` alone -> ``measurement``,
    * ``output_spaces`` equal to all physical spaces, with bonds ->
      ``mps_element`` (a density-MPO element; bond dims are the fused
      squares of the underlying pure-state bond dims),
    * ``output_spaces`` equal to all physical spaces, no bonds ->
      ``state`` (the default when nothing is specified),
    * ``output_spaces`` a proper subset -> ``cptp``,
    * ``comb_teeth`` (a list of (input_labels, output_labels) pairs in
      causal order) -> ``comb``.
    """

    def __init__(self, spaces, sdict, output_spaces=None, is_measurement=False,
                 name=None, comb_teeth=None):
        super().__init__(spaces, sdict, name)
        self.is_measurement = bool(is_measurement)
        self.comb_teeth = comb_teeth
        bonds = [l for l in self.spaces if sdict.is_bond(l)]
        phys = [l for l in self.spaces if not sdict.is_bond(l)]
        self.bonds = bonds
        self.phys = phys
        if comb_teeth is not None:
            teeth_labels = [l for pair in comb_teeth for part in pair for l in part]
            if set(teeth_labels) != set(phys):
                raise ValueError("comb teeth must cover the tensor's spaces")
            self.kind = "comb"
            self.output_spaces = [l for pair in comb_teeth for l in pair[1]]
            return
        if self.is_measurement:
            self.kind = "measurement_mpo_element" if bonds else "measurement"
            self.output_spaces = []
            return
        if output_spaces is None:
            output_spaces = list(phys)
        output_spaces = list(output_spaces)
        for l in output_spaces:
            if l not in phys:
                raise ValueError(f"output space {l!r} not among {phys}")
        self.output_spaces = output_spaces
        if set(map(str, output_spaces)) == set(map(str, phys)):
            if bonds:
                self.kind = "mps_element"
                for b in bonds:
                    r = sdict[b]
                    if int(round(np.sqrt(r))) ** 2 != r:
                        raise ValueError(
                            f"mps element bond {b!r} must have a perfect-square "
                            f"dimension (fused ket/bra pair), got {r}"
                        )
            else:
                self.kind = "state"
        else:
            if bonds:
                raise ValueError("cptp tensors cannot carry bond legs")
            self.kind = "cptp"
        self.input_spaces = [l for l in phys if l not in self.output_spaces]


class TensorNetwork:
    """A named collection of tensors glued by shared space labels."""

    def __init__(self, tensors, sdict):
        self.sdict = sdict
        self.tensors = {}
        for t in tensors:
            self.add(t)

    def add(self, tensor):
        if tensor.sdict is not self.sdict:
            raise ValueError("tensor belongs to a different space dictionary")
        if tensor.name in self.tensors:
            raise ValueError(f"duplicate tensor name {tensor.name!r}")
        for l in tensor.spaces:
            holders = self.holders(l)
            if len(holders) >= 2:
                raise ValueError(
                    f"space {l!r} already connects {holders}; a label may "
                    "join at most two tensors"
                )
        self.tensors[tensor.name] = tensor

    def holders(self, label) -> list:
        return [t.name for t in self.tensors.values() if label in t.spaces]

    def dangling(self) -> list:
        out = []
        for t in self.tensors.values():
            for l in t.spaces:
                if len(self.holders(l)) == 1:
                    out.append(l)
        return out

    def copy(self) -> "TensorNetwork":
        tn = TensorNetwork([], self.sdict)
        tn.tensors = dict(self.tensors)
        return tn

    def __repr__(self):
        return f"TensorNetwork({list(self.tensors)})"


def _as_network(x) -> list:
    if isinstance(x, TensorNetwork):
        return list(x.tensors.values())
    return [x]


def contr(x, y):
    """Contract two tensors or networks; the result type follows the
    contraction table (Const stays Const, Param propagates the Leibniz
    derivative, Var or network input yields a TensorNetwork)."""
    for t in (x, y):
        if type(t) is GeneralTensor:
            raise TypeError("GeneralTensor is abstract and cannot be contracted")
        if not isinstance(t, (GeneralTensor, TensorNetwork)):
            raise TypeError(f"cannot contract {type(t).__name__}")
    if x.sdict is not y.sdict:
        raise ValueError("operands use different space dictionaries")
    x_var = isinstance(x, (TensorNetwork, VarTensor))
    y_var = isinstance(y, (TensorNetwork, VarTensor))
    if x_var or y_var:
        tn = TensorNetwork([], x.sdict)
        for t in _as_network(x) + _as_network(y):
            tn.add(t)
        return tn
    return _contract_dense(x, y)


def _contract_dense(x: ConstTensor, y: ConstTensor):
    shared = [l for l in x.spaces if l in y.spaces]
    out_spaces = [l for l in x.spaces if l not in shared] + [
        l for l in y.spaces if l not in shared
    ]
    arr = _einsum_pair(x.array, x.spaces, y.array, y.spaces, out_spaces)
    x_param = isinstance(x, ParamTensor)
    y_param = isinstance(y, ParamTensor)
    sdict = x.sdict
    if not (x_param or y_param):
        if not out_spaces:
            return arr.item()
        return ConstTensor(out_spaces, array=arr, sdict=sdict)
    darr = np.zeros_like(arr)
    if x_param:
        darr = darr + _einsum_pair(x.darray, x.spaces, y.array, y.spaces,
                                   out_spaces)
    if y_param:
        darr = darr + _einsum_pair(x.array, x.spaces, y.darray, y.spaces,
                                   out_spaces)
    return ParamTensor(out_spaces, array=arr, darray=darr, sdict=sdict)


def _einsum_pair(ax, sx, ay, sy, out_spaces):
    idx = {}

    def ids(labels):
        out = []
        for l in labels:
            if l not in idx:
                idx[l] = len(idx)
            out.append(idx[l])
        return out

    ix = ids(sx)
    iy = ids(sy)
    iout = ids(out_spaces)
    return np.einsum(ax, ix, ay, iy, iout)
