"""Contraction engine for strategy-network see-saw.

The pre-QFI of a strategy network splits into a linear term
2 Tr(drho_theta L) and a quadratic term Tr(rho_theta L^2).  Both are
evaluated as folds over per-node pieces along a fixed chain order:

* non-measurement nodes contribute their fused arrays; parametrized
  nodes additionally thread a two-dimensional derivative-order bond so
  that a single contraction accumulates the Leibniz sum,
* the measurement layer enters transposed in the linear term, and as a
  per-site two-copy (squared) layer in the quadratic term.

Environments for local updates are folds of all pieces but the
target's, with the target's axes kept open.  Arrays at play are small
(bond times fused-physical ranges), so folding from scratch per update
keeps a full sweep linear in the number of nodes times the chain
length.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Piece", "fold", "scalar_value", "NetSpec", "PassRunner"]


class Piece:
    """An array with hashable axis keys."""

    __slots__ = ("array", "axes")

    def __init__(self, array, axes):
        self.array = np.asarray(array)
        self.axes = tuple(axes)
        if self.array.ndim != len(self.axes):
            raise ValueError(
                f"axes {self.axes} do not match array rank {self.array.ndim}"
            )

    def __repr__(self):
        return f"Piece(axes={self.axes}, shape={self.array.shape})"


def _merge(a: Piece, b: Piece, hold) -> Piece:
    hold = set(hold)
    idx = {}

    def ids(axes):
        out = []
        for l in axes:
            if l not in idx:
                idx[l] = len(idx)
            out.append(idx[l])
        return out

    ia = ids(a.axes)
    ib = ids(b.axes)
    out_axes = [l for l in a.axes if l in hold]
    out_axes += [l for l in b.axes if l in hold and l not in out_axes]
    io = [idx[l] for l in out_axes]
    arr = np.einsum(a.array, ia, b.array, ib, io)
    return Piece(arr, out_axes)


def fold(pieces, keep=()) -> Piece:
    """Fold a piece list in order, keeping axes with pending uses open."""
    keep = set(keep)
    remaining = {}
    for p in pieces:
        for l in p.axes:
            remaining[l] = remaining.get(l, 0) + 1
    env = None
    for p in pieces:
        for l in p.axes:
            remaining[l] -= 1
        if env is None:
            env = p
            continue
        hold = [l for l in dict.fromkeys(env.axes + p.axes)
                if remaining.get(l, 0) > 0 or l in keep]
        env = _merge(env, p, hold)
    if env is None:
        return Piece(np.array(1.0 + 0j), ())
    return env


def scalar_value(pieces) -> complex:
    env = fold(pieces)
    if env.axes:
        raise ValueError(f"dangling axes {env.axes} in scalar contraction")
    return complex(env.array)


class NetSpec:
    """One evaluation layer (linear or quadratic) of a strategy network.

    ``makers`` is an ordered list of callables ``values -> [Piece]``;
    the pieces of all makers concatenate into the chain.  Environments
    are taken with respect to one maker's pieces removed.
    """

    def __init__(self, makers):
        self.makers = makers
        self._labels = None

    def label_spans(self, values):
        """First/last maker index using each label (static per network)."""
        if self._labels is None:
            first, last = {}, {}
            for i, mk in enumerate(self.makers):
                for p in mk(values):
                    for l in p.axes:
                        first.setdefault(l, i)
                        last[l] = i
            self._labels = (first, last)
        return self._labels

    def pieces(self, values, skip=None):
        out = []
        for i, mk in enumerate(self.makers):
            if skip is not None and i == skip:
                continue
            out.extend(mk(values))
        return out

    def value(self, values) -> float:
        return scalar_value(self.pieces(values)).real

    def environment(self, values, target: int, target_axes) -> Piece:
        """Contraction of everything but the target maker's pieces.

        Prefix and suffix of the chain are folded separately and merged
        at the end, so intermediate tensors carry one cut plus the
        target axes instead of dragging the target axes along the
        whole chain.
        """
        prefix, suffix = [], []
        for i, mk in enumerate(self.makers):
            if i == target:
                continue
            (prefix if i < target else suffix).extend(mk(values))
        target_set = set(target_axes)
        suffix_labels = set(l for p in suffix for l in p.axes)
        prefix_labels = set(l for p in prefix for l in p.axes)
        left = fold(prefix, keep=(suffix_labels | target_set) & prefix_labels)
        right = fold(suffix, keep=(prefix_labels | target_set) & suffix_labels)
        env = fold([left, right], keep=target_set)
        if set(target_axes) != set(env.axes):
            raise ValueError(
                f"environment axes {env.axes} do not match target {target_axes}"
            )
        perm = [env.axes.index(l) for l in target_axes]
        return Piece(env.array.transpose(perm), target_axes)


class PassRunner:
    """One directional sweep over a NetSpec with cached partial folds.

    The opposite-side fold stack is built once from the values at pass
    start; the near-side fold grows as nodes are finalized, so every
    environment uses exactly the current network values (nodes past the
    frontier have not been touched yet this pass).  ``reverse`` runs the
    pass from the chain's far end.
    """

    def __init__(self, net: NetSpec, values, reverse: bool = False):
        self.net = net
        self.values = values
        self.reverse = reverse
        n = len(net.makers)
        self.order = list(range(n - 1, -1, -1)) if reverse else list(range(n))
        first, last = net.label_spans(values)
        if reverse:
            self.pos_first = {l: n - 1 - last[l] for l in last}
            self.pos_last = {l: n - 1 - first[l] for l in first}
        else:
            self.pos_first, self.pos_last = first, last
        # opp[k] = fold of pass positions >= k, keeping labels that also
        # occur at positions < k
        self.opp = [None] * (n + 1)
        self.opp[n] = Piece(np.array(1.0 + 0j), ())
        for k in range(n - 1, -1, -1):
            env = self.opp[k + 1]
            for p in reversed(net.makers[self.order[k]](values)):
                hold = [l for l in dict.fromkeys(p.axes + env.axes)
                        if self.pos_first[l] < k]
                env = _merge(p, env, hold)
            self.opp[k] = env
        self.left = Piece(np.array(1.0 + 0j), ())
        self.pos = 0  # pass positions [0, pos) folded into self.left
        self._rank = {m: k for k, m in enumerate(self.order)}

    def _advance_to(self, k):
        while self.pos < k:
            for p in self.net.makers[self.order[self.pos]](self.values):
                hold = [l for l in dict.fromkeys(self.left.axes + p.axes)
                        if self.pos_last[l] > self.pos]
                self.left = _merge(self.left, p, hold)
            self.pos += 1

    def env_at(self, maker_idx, target_axes) -> Piece:
        k = self._rank[maker_idx]
        self._advance_to(k)
        env = fold([self.left, self.opp[k + 1]], keep=set(target_axes))
        if set(target_axes) != set(env.axes):
            raise ValueError(
                f"environment axes {env.axes} do not match {target_axes}"
            )
        perm = [env.axes.index(l) for l in target_axes]
        return Piece(env.array.transpose(perm), target_axes)

    def finish(self) -> float:
        self._advance_to(len(self.order))
        if self.left.axes:
            raise ValueError(f"dangling axes {self.left.axes} at pass end")
        return complex(self.left.array).real
