"""Registry of named spaces shared by the tensors of one network."""

from __future__ import annotations

__all__ = ["SpaceDict"]


class _IRange:
    """Index-range view: d^2 for physical spaces, d for bonds."""

    def __init__(self, sdict):
        self._sdict = sdict

    def __getitem__(self, label):
        dim, kind = self._sdict._entries[label]
        return dim * dim if kind == "physical" else dim


class SpaceDict:
    """Names, dimensions and kinds (physical or bond) of tensor spaces.

    Physical spaces index fused (ket, bra) pairs of a CJ-operator
    factor, so their index range is the dimension squared; bond spaces
    index internal MPS/MPO legs and range over the dimension itself.
    """

    def __init__(self):
        self._entries = {}
        self.irange = _IRange(self)
        self._name_counters = {}

    def __setitem__(self, label, dim: int):
        self._register(label, dim, "physical")

    def set_bond(self, label, dim: int):
        self._register(label, dim, "bond")

    def _register(self, label, dim: int, kind: str):
        dim = int(dim)
        if dim < 1:
            raise ValueError(f"dimension of {label!r} must be positive")
        if label in self._entries:
            old_dim, old_kind = self._entries[label]
            if (old_dim, old_kind) != (dim, kind):
                raise ValueError(
                    f"space {label!r} already registered as {old_kind} of "
                    f"dimension {old_dim}; cannot redefine to {kind}/{dim}"
                )
            return
        self._entries[label] = (dim, kind)

    def __getitem__(self, label) -> int:
        return self._entries[label][0]

    def __contains__(self, label) -> bool:
        return label in self._entries

    def kind(self, label) -> str:
        return self._entries[label][1]

    def is_bond(self, label) -> bool:
        return self.kind(label) == "bond"

    def labels(self):
        return list(self._entries)

    def arrange_spaces(self, count: int, dim: int, prefix: str,
                       kind: str = "physical") -> list:
        """Register (prefix, 0) .. (prefix, count-1) and return the labels."""
        labels = [(prefix, i) for i in range(count)]
        for l in labels:
            self._register(l, dim, kind)
        return labels

    def fresh_name(self, stem: str) -> str:
        k = self._name_counters.get(stem, 0)
        self._name_counters[stem] = k + 1
        return f"{stem}{k}"
