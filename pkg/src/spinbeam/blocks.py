"""Labeled linear blocks and their feedback interconnection algebra.

A block is a (possibly static) LTI system with named input and output
channel groups.  Two-port substructure blocks expose a wrench input and a
motion output at the child point plus a motion input and a wrench output at
the parent point; interconnection closes wrench/motion pairs between blocks
as explicit feedback, eliminating the algebraic loop through the
feedthrough matrices in one dense solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AlgebraicLoopError, PortError

__all__ = ["ChannelGroup", "StateBlock", "combine", "close_loops"]

# condition number above which a closed algebraic loop is reported as
# ill-posed rather than silently inverted
LOOP_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ChannelGroup:
    """Contiguous group of scalar channels with a frame annotation."""

    name: str
    size: int
    frame: str = ""
    bound: bool = False   # outputs only: already consumed by a connection
    fanout: bool = False  # outputs only: may feed any number of connections


@dataclass(frozen=True)
class EnergyPartition:
    """Quadratic form tagging a mode family on a subset of the states.

    ``value(x) = 0.5 * x[idx].conj() @ weight @ x[idx]`` approximates the
    modal energy carried by this coordinate partition.
    """

    family: str
    idx: np.ndarray
    weight: np.ndarray

    def value(self, x: np.ndarray) -> float:
        xs = x[self.idx]
        return float(np.real(0.5 * xs.conj() @ self.weight @ xs))


class StateBlock:
    """State-space block ``(A, B, C, D)`` with named channel groups.

    All arrays are dense float ndarrays; a static block has zero states.
    Instances are immutable by convention: every operation returns a new
    block.
    """

    def __init__(self, A, B, C, D, inputs, outputs, state_labels=(),
                 partitions=(), name=""):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        self.C = np.atleast_2d(np.asarray(C, dtype=float))
        self.D = np.atleast_2d(np.asarray(D, dtype=float))
        self.inputs = list(inputs)
        self.outputs = list(outputs)
        self.state_labels = list(state_labels)
        self.partitions = list(partitions)
        self.name = name
        n_u = sum(g.size for g in self.inputs)
        n_y = sum(g.size for g in self.outputs)
        n_x = self.A.shape[0] if self.A.size else 0
        if self.A.size == 0:
            self.A = np.zeros((0, 0))
            self.B = np.zeros((0, n_u))
            self.C = np.zeros((n_y, 0))
        if self.D.shape != (n_y, n_u):
            raise PortError(
                f"D shape {self.D.shape} does not match channel groups "
                f"({n_y} outputs, {n_u} inputs)")
        if self.B.shape != (n_x, n_u) or self.C.shape != (n_y, n_x):
            raise PortError("state-space dimensions inconsistent with channels")
        if self.state_labels and len(self.state_labels) != n_x:
            raise PortError("state label count does not match state dimension")

    # -- channel bookkeeping -------------------------------------------------

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def _find(self, groups, name):
        for i, g in enumerate(groups):
            if g.name == name:
                return i, g
        raise PortError(f"block {self.name!r} has no channel group {name!r}; "
                        f"available: {[g.name for g in groups]}")

    def input_slice(self, name) -> slice:
        i, g = self._find(self.inputs, name)
        start = sum(h.size for h in self.inputs[:i])
        return slice(start, start + g.size)

    def output_slice(self, name) -> slice:
        i, g = self._find(self.outputs, name)
        start = sum(h.size for h in self.outputs[:i])
        return slice(start, start + g.size)

    def input_group(self, name) -> ChannelGroup:
        return self._find(self.inputs, name)[1]

    def output_group(self, name) -> ChannelGroup:
        return self._find(self.outputs, name)[1]

    def has_input(self, name) -> bool:
        return any(g.name == name for g in self.inputs)

    def has_output(self, name) -> bool:
        return any(g.name == name for g in self.outputs)

    # -- elementary operations -----------------------------------------------

    def renamed(self, prefix: str) -> "StateBlock":
        """Prefix every channel group and state label with ``prefix:``."""
        pre = lambda g: replace(g, name=f"{prefix}:{g.name}")
        return StateBlock(
            self.A, self.B, self.C, self.D,
            [pre(g) for g in self.inputs], [pre(g) for g in self.outputs],
            [f"{prefix}:{s}" for s in self.state_labels],
            [EnergyPartition(p.family, p.idx, p.weight) for p in self.partitions],
            name=prefix)

    def drop_inputs(self, names) -> "StateBlock":
        """Remove input groups entirely (equivalent to forcing them to zero)."""
        keep_cols, keep_groups = [], []
        for g in self.inputs:
            sl = self.input_slice(g.name)
            if g.name in names:
                continue
            keep_cols.extend(range(sl.start, sl.stop))
            keep_groups.append(g)
        missing = set(names) - {g.name for g in self.inputs}
        if missing:
            raise PortError(f"cannot drop unknown inputs {sorted(missing)}")
        return StateBlock(self.A, self.B[:, keep_cols], self.C,
                          self.D[:, keep_cols], keep_groups, self.outputs,
                          self.state_labels, self.partitions, self.name)

    def select(self, output_names, input_names) -> "StateBlock":
        """Subsystem restricted to the named output/input groups."""
        rows, out_groups = [], []
        for nm in output_names:
            sl = self.output_slice(nm)
            rows.extend(range(sl.start, sl.stop))
            out_groups.append(self.output_group(nm))
        cols, in_groups = [], []
        for nm in input_names:
            sl = self.input_slice(nm)
            cols.extend(range(sl.start, sl.stop))
            in_groups.append(self.input_group(nm))
        return StateBlock(self.A, self.B[:, cols], self.C[rows, :],
                          self.D[np.ix_(rows, cols)], in_groups, out_groups,
                          self.state_labels, self.partitions, self.name)

    def mark_output_bound(self, name) -> "StateBlock":
        i, g = self._find(self.outputs, name)
        if g.fanout:
            return self
        if g.bound:
            raise PortError(f"output group {name!r} is already connected")
        outs = list(self.outputs)
        outs[i] = replace(g, bound=True)
        return StateBlock(self.A, self.B, self.C, self.D, self.inputs, outs,
                          self.state_labels, self.partitions, self.name)

    def open_channel_count(self):
        """(open input channels, open output channels) for port bookkeeping."""
        n_in = sum(g.size for g in self.inputs)
        n_out = sum(g.size for g in self.outputs if not g.bound)
        return n_in, n_out


def combine(blocks) -> StateBlock:
    """Block-diagonal aggregation of independent blocks."""
    from scipy.linalg import block_diag

    A = block_diag(*[b.A for b in blocks]) if blocks else np.zeros((0, 0))
    B = block_diag(*[b.B for b in blocks])
    C = block_diag(*[b.C for b in blocks])
    D = block_diag(*[b.D for b in blocks])
    inputs, outputs, labels, parts = [], [], [], []
    offset = 0
    for b in blocks:
        inputs.extend(b.inputs)
        outputs.extend(b.outputs)
        labels.extend(b.state_labels)
        for p in b.partitions:
            parts.append(EnergyPartition(p.family, p.idx + offset, p.weight))
        offset += b.n_states
    return StateBlock(A, B, C, D, inputs, outputs, labels, parts, name="+".join(
        b.name for b in blocks if b.name))


def close_loops(block: StateBlock, connections) -> tuple:
    """Close feedback loops ``u[in_name] = gain @ y[out_name]`` and eliminate
    the connected inputs.

    ``connections`` is a list of ``(out_name, in_name, gain)``; a gain of
    None means identity.  Returns ``(closed_block, loop_condition_number)``.
    Raises :class:`AlgebraicLoopError` when the loop matrix ``I - T D`` is
    singular or numerically unusable.
    """
    closed_in_names = [c[1] for c in connections]
    if len(set(closed_in_names)) != len(closed_in_names):
        raise PortError("an input group appears in more than one connection")

    cols, col_of = [], {}
    for nm in closed_in_names:
        sl = block.input_slice(nm)
        col_of[nm] = (len(cols), sl.stop - sl.start)
        cols.extend(range(sl.start, sl.stop))
    n_c = len(cols)
    T = np.zeros((n_c, block.n_outputs))
    for out_name, in_name, gain in connections:
        osl = block.output_slice(out_name)
        if block.output_group(out_name).bound:
            raise PortError(f"output group {out_name!r} is already connected")
        start, size = col_of[in_name]
        g = np.eye(size) if gain is None else np.asarray(gain, dtype=float)
        if g.shape != (size, osl.stop - osl.start):
            raise PortError(
                f"gain shape {g.shape} incompatible with connection "
                f"{out_name!r} ({osl.stop - osl.start}) -> {in_name!r} ({size})")
        T[start:start + size, osl] = g

    open_cols = [j for j in range(block.n_inputs) if j not in set(cols)]
    B_c, B_o = block.B[:, cols], block.B[:, open_cols]
    D_c, D_o = block.D[:, cols], block.D[:, open_cols]

    L = np.eye(n_c) - T @ D_c
    cond = float(np.linalg.cond(L)) if n_c else 1.0
    if not np.isfinite(cond) or cond > LOOP_COND_LIMIT:
        raise AlgebraicLoopError(
            f"algebraic loop matrix is singular or ill-conditioned "
            f"(cond={cond:.3e}) for connections {[c[:2] for c in connections]}")
    K = np.linalg.solve(L, np.hstack([T @ block.C, T @ D_o]))
    KC, KD = K[:, :block.n_states], K[:, block.n_states:]

    A_new = block.A + B_c @ KC
    B_new = B_o + B_c @ KD
    C_new = block.C + D_c @ KC
    D_new = D_o + D_c @ KD

    in_groups = [g for g in block.inputs if g.name not in set(closed_in_names)]
    out_groups = list(block.outputs)
    closed = block.__class__(A_new, B_new, C_new, D_new, in_groups, out_groups,
                             block.state_labels, block.partitions, block.name)
    for out_name, _, _ in connections:
        closed = closed.mark_output_bound(out_name)
    return closed, cond


def transfer_matrix(block: StateBlock, s: complex) -> np.ndarray:
    """Evaluate ``C (sI - A)^{-1} B + D`` at one complex frequency."""
    if block.n_states == 0:
        return block.D.astype(complex)
    n = block.n_states
    return block.C @ np.linalg.solve(s * np.eye(n) - block.A, block.B) + block.D
