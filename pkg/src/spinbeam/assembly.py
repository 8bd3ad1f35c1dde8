"""Multibody interconnection of two-port blocks.

Spacecraft-style topologies are open trees: a central body (or a clamped
rotor) with chains of beams, rigid appendages and end masses.  The graph
carries the geometry; equilibrium is propagated forward (velocities, from
root to leaves) and backward (centrifugal wrenches, from leaves to root)
before the blocks are built and closed into one model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import beam as beam_mod
from . import rigid as rigid_mod
from .beam import BeamProperties, EquilibriumState
from .blocks import StateBlock, close_loops, combine
from .errors import InvalidParameterError, PortError, TopologyError
from .rigid import (RigidBodyProperties, dcm_motion_map, dcm_wrench_map,
                    equilibrium_root_wrench, skew, tau, upsilon)

__all__ = [
    "UncertainScalar",
    "DeltaStructure",
    "AssemblyGraph",
    "connect",
    "apply_boundary",
    "build_parametric_family",
]


@dataclass(frozen=True)
class UncertainScalar:
    """Scalar parameter with a symmetric relative uncertainty range."""

    nominal: float
    r: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise InvalidParameterError("relative half-range must be >= 0")

    def realize(self, delta: float) -> float:
        if abs(delta) > 1.0:
            raise InvalidParameterError(
                f"normalized uncertainty must lie in [-1, 1], got {delta}")
        return self.nominal * (1.0 + self.r * delta)


@dataclass(frozen=True)
class DeltaStructure:
    """Block-diagonal structure of the normalized uncertainty channels.

    ``entries`` lists ``(name, repetition)`` pairs.  The repetition counts
    reported here are implementation-defined (number of graph nodes whose
    model depends on the parameter); a minimal linear-fractional
    realization is out of scope, so published occurrence counts for
    comparable scenarios are carried as reference metadata only.
    """

    entries: tuple
    reference_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, count in self.entries:
            if int(count) <= 0:
                raise InvalidParameterError(
                    f"repetition count for {name!r} must be positive")


# ---------------------------------------------------------------------------
# graph nodes

@dataclass
class BeamNode:
    name: str
    props: BeamProperties
    elements: int = 1
    damping: tuple = None  # optional (alpha, beta)


@dataclass
class RigidNode:
    name: str
    props: RigidBodyProperties


@dataclass
class TipMassNode:
    name: str
    m: float
    J: np.ndarray = None


@dataclass
class MainBodyNode:
    name: str
    props: RigidBodyProperties
    ports: list  # (port_name, offset from mass center, body frame)


@dataclass
class Edge:
    parent: str
    child: str
    dcm: np.ndarray = None  # parent attachment frame -> child frame
    parent_port: str = None  # main-body parent only

    def dcm_or_identity(self):
        return np.eye(3) if self.dcm is None else np.asarray(self.dcm, dtype=float)


class AssemblyGraph:
    """Tree of substructure nodes with frame and geometry annotations.

    The root is either a main body (free-floating spacecraft) or a clamped
    rotor of radius ``root_offset`` spinning about the z axis, to which the
    first substructure is attached with its x axis radial.
    """

    def __init__(self):
        self.nodes = {}
        self.edges = []
        self.root_offset = 0.0
        self._root_clamped = False

    # -- construction --------------------------------------------------------

    def _add(self, node):
        if node.name in self.nodes:
            raise TopologyError(f"duplicate node name {node.name!r}")
        self.nodes[node.name] = node
        return node

    def add_beam(self, name, props, elements=1, damping=None):
        if elements < 1:
            raise InvalidParameterError("a beam needs at least one element")
        return self._add(BeamNode(name, props, elements, damping))

    def add_rigid(self, name, props):
        return self._add(RigidNode(name, props))

    def add_tip_mass(self, name, m, J=None):
        return self._add(TipMassNode(name, m, J))

    def add_main_body(self, name, props, ports):
        if any(isinstance(n, MainBodyNode) for n in self.nodes.values()):
            raise TopologyError("only one main body is supported")
        return self._add(MainBodyNode(name, props, list(ports)))

    def connect_nodes(self, parent, child, dcm=None, parent_port=None):
        for nm in (parent, child):
            if nm not in self.nodes:
                raise TopologyError(f"unknown node {nm!r}")
        if isinstance(self.nodes[parent], MainBodyNode):
            port_names = [p[0] for p in self.nodes[parent].ports]
            if parent_port not in port_names:
                raise TopologyError(
                    f"main body {parent!r} has no port {parent_port!r}")
        if isinstance(self.nodes[parent], TipMassNode):
            raise TopologyError("a tip mass cannot carry children")
        self.edges.append(Edge(parent, child, dcm, parent_port))

    def clamp_root(self, offset=0.0):
        """Declare the root boundary as a clamped rotor with radius offset."""
        self.root_offset = float(offset)
        self._root_clamped = True

    # -- topology ------------------------------------------------------------

    def root_name(self) -> str:
        mains = [n.name for n in self.nodes.values()
                 if isinstance(n, MainBodyNode)]
        if mains:
            return mains[0]
        children = {e.child for e in self.edges}
        roots = [nm for nm in self.nodes if nm not in children]
        if len(roots) != 1:
            raise TopologyError(f"expected a single root, found {roots}")
        if not self._root_clamped:
            raise TopologyError(
                "no main body present: declare the boundary with clamp_root()")
        return roots[0]

    def children_of(self, name):
        return [e for e in self.edges if e.parent == name]

    def validate_tree(self):
        root = self.root_name()
        parents = {}
        for e in self.edges:
            if e.child in parents:
                raise TopologyError(
                    f"node {e.child!r} has two parents; only trees are supported")
            parents[e.child] = e.parent
        # reachability and acyclicity
        seen = set()
        stack = [root]
        while stack:
            nm = stack.pop()
            if nm in seen:
                raise TopologyError("interconnection graph contains a cycle")
            seen.add(nm)
            stack.extend(e.child for e in self.children_of(nm))
        unreachable = set(self.nodes) - seen
        if unreachable:
            raise TopologyError(f"nodes not connected to the root: {sorted(unreachable)}")
        for e in self.edges:
            parent = self.nodes[e.parent]
            if not isinstance(parent, MainBodyNode):
                if len(self.children_of(e.parent)) > 1:
                    raise TopologyError(
                        f"node {e.parent!r} has several children; chains only")
        return root

    # -- equilibrium propagation ----------------------------------------------

    def propagate_equilibrium(self, spin: float):
        """Forward/backward equilibrium pass at spin rate ``spin`` (z axis).

        Returns a dict mapping node name to its equilibrium record: for a
        beam, the list of per-element :class:`EquilibriumState`; for end
        and intermediate rigid bodies, a dict with the port kinematics and
        the wrench applied to the parent.
        """
        root = self.validate_tree()
        out = {}

        def forward(name, x_P, v_P, w_P):
            node = self.nodes[name]
            if isinstance(node, MainBodyNode):
                out[name] = {"omega": np.array([0.0, 0.0, spin]),
                             "v": np.zeros(3)}
                for e in self.children_of(name):
                    off = dict((p, o) for p, o in node.ports)[e.parent_port]
                    off = np.asarray(off, dtype=float)
                    P = e.dcm_or_identity()
                    v_c = np.cross(w_P, off)
                    forward(e.child, P @ off, P @ v_c, P @ w_P)
                return
            if isinstance(node, BeamNode):
                le = node.props.l / node.elements
                states = []
                for k in range(node.elements):
                    dx = np.array([k * le, 0.0, 0.0])
                    states.append(EquilibriumState.kinematic(
                        x_P=x_P + dx, v_P=v_P + np.cross(w_P, dx), omega_P=w_P))
                out[name] = states
                x_C = x_P + np.array([node.props.l, 0.0, 0.0])
                v_C = v_P + np.cross(w_P, [node.props.l, 0.0, 0.0])
            elif isinstance(node, RigidNode):
                out[name] = {"x": x_P, "v": v_P, "omega": w_P}
                x_C = x_P + node.props.pc
                v_C = v_P + np.cross(w_P, node.props.pc)
            else:  # TipMassNode
                out[name] = {"x": x_P, "v": v_P, "omega": w_P}
                return
            for e in self.children_of(name):
                P = e.dcm_or_identity()
                forward(e.child, P @ x_C, P @ v_C, P @ w_P)

        def backward(name):
            """Wrench applied by the subtree rooted at ``name`` to its parent,
            expressed in this node's frame at its P point."""
            node = self.nodes[name]
            W_C = np.zeros(6)
            for e in self.children_of(name):
                P = e.dcm_or_identity()
                W_child = backward(e.child)
                W_C = W_C + dcm_wrench_map(P.T) @ W_child
            if isinstance(node, TipMassNode):
                rec = out[name]
                props = RigidBodyProperties(
                    m=node.m, J_A=np.zeros((3, 3)) if node.J is None else node.J)
                W_P = equilibrium_root_wrench(props, rec["v"], rec["omega"])
                rec["W_P"] = W_P
                return W_P
            if isinstance(node, RigidNode):
                rec = out[name]
                rec["W_C"] = W_C
                rec["W_P"] = equilibrium_root_wrench(
                    node.props, rec["v"], rec["omega"], W_C)
                return rec["W_P"]
            if isinstance(node, BeamNode):
                states = out[name]
                for k in reversed(range(node.elements)):
                    el_props = node.props.with_length(node.props.l / node.elements)
                    states[k] = beam_mod.compute_equilibrium(
                        el_props, states[k], W_C)
                    W_C = states[k].W_P
                return W_C
            raise TopologyError(f"cannot propagate through node {name!r}")

        node = self.nodes[root]
        if isinstance(node, MainBodyNode):
            forward(root, np.zeros(3), np.zeros(3), np.array([0.0, 0.0, spin]))
            W_ports = {}
            for e in self.children_of(root):
                W_child = backward(e.child)
                P = e.dcm_or_identity()
                W_ports[e.parent_port] = dcm_wrench_map(P.T) @ W_child
            out[root]["W_ports"] = W_ports
        else:
            r = self.root_offset
            forward(root, np.array([r, 0.0, 0.0]),
                    np.array([0.0, r * spin, 0.0]), np.array([0.0, 0.0, spin]))
            backward(root)
        return out

    # -- model build -----------------------------------------------------------

    def build(self, spin: float, equilibria=None) -> StateBlock:
        """Assemble the closed model of the whole tree at spin rate ``spin``.

        Boundary conditions are applied automatically: the root is clamped
        (or free-floating for a main body) and unloaded leaf ports are
        free.  The wrench inputs of the main body (external plus reserved
        port channels) remain as exogenous inputs.
        """
        root = self.validate_tree()
        eqs = self.propagate_equilibrium(spin) if equilibria is None else equilibria

        blocks = {}
        for name, node in self.nodes.items():
            if isinstance(node, BeamNode):
                el_props = node.props.with_length(node.props.l / node.elements)
                sub = [beam_mod.build_titop_beam(el_props, st, node.damping,
                                                 name=f"{name}.el{k+1}")
                       for k, st in enumerate(eqs[name])]
                sub = [b.renamed(f"{name}.el{k+1}") for k, b in enumerate(sub)]
                blk = combine(sub)
                for k in range(node.elements - 1):
                    blk, _ = close_loops(blk, [
                        (f"{name}.el{k+1}:m_C", f"{name}.el{k+2}:m_P", None),
                        (f"{name}.el{k+2}:W_P", f"{name}.el{k+1}:W_C", None),
                    ])
                # expose the chain ends under the node name
                blk = _rename_groups(blk, {
                    f"{name}.el1:m_P": f"{name}:m_P",
                    f"{name}.el{node.elements}:W_C": f"{name}:W_C",
                    f"{name}.el{node.elements}:m_C": f"{name}:m_C",
                    f"{name}.el1:W_P": f"{name}:W_P"})
                blocks[name] = blk
            elif isinstance(node, RigidNode):
                rec = eqs[name]
                blk = rigid_mod.build_rigid_titop(node.props, rec["v"],
                                                  rec["omega"], name=name)
                blocks[name] = blk.renamed(name)
            elif isinstance(node, TipMassNode):
                rec = eqs[name]
                blk = rigid_mod.point_mass_block(node.m, rec["v"], rec["omega"],
                                                 J=node.J, name=name)
                blocks[name] = blk.renamed(name)
            else:  # MainBodyNode
                blk = rigid_mod.build_main_body(
                    node.props, node.ports, np.array([0.0, 0.0, spin]), name=name)
                blocks[name] = blk.renamed(name)

        system = combine(list(blocks.values()))
        conns = []
        for e in self.edges:
            P = e.dcm_or_identity()
            parent, child = self.nodes[e.parent], self.nodes[e.child]
            if isinstance(parent, MainBodyNode):
                off = dict((p, o) for p, o in parent.ports)[e.parent_port]
                motion_gain = dcm_motion_map(P) @ upsilon(-np.asarray(off, float))
                conns.append((f"{e.parent}:m_B", f"{e.child}:m_P", motion_gain))
                conns.append((f"{e.child}:W_P", f"{e.parent}:{e.parent_port}",
                              dcm_wrench_map(P.T)))
            else:
                conns.append((f"{e.parent}:m_C", f"{e.child}:m_P",
                              dcm_motion_map(P)))
                conns.append((f"{e.child}:W_P", f"{e.parent}:W_C",
                              dcm_wrench_map(P.T)))
        system, cond = close_loops(system, conns) if conns else (system, 1.0)
        self.last_loop_condition = cond

        # boundary closures
        if isinstance(self.nodes[root], MainBodyNode):
            pass  # free-floating: wrench inputs stay exogenous
        else:
            system = apply_boundary(system, "clamp", f"{root}")
        for name, node in self.nodes.items():
            if isinstance(node, (BeamNode, RigidNode)) and not self.children_of(name):
                system = apply_boundary(system, "free", f"{name}")
        return system


def _rename_groups(block: StateBlock, mapping) -> StateBlock:
    ins = [replace(g, name=mapping.get(g.name, g.name)) for g in block.inputs]
    outs = [replace(g, name=mapping.get(g.name, g.name)) for g in block.outputs]
    return StateBlock(block.A, block.B, block.C, block.D, ins, outs,
                      block.state_labels, block.partitions, block.name)


def connect(parent: StateBlock, child: StateBlock, dcm=None,
            parent_prefix="parent", child_prefix="child") -> StateBlock:
    """Close the wrench/motion feedback pair between two two-port blocks.

    The parent's child-point motion output drives the child's parent-point
    motion input through the frame change ``dcm`` (parent tip frame to
    child frame); the child's root wrench returns through the transpose.
    The composite exposes the parent's P port and the child's C port.
    """
    p = parent if any(":" in g.name for g in parent.inputs) else parent.renamed(parent_prefix)
    c = child if any(":" in g.name for g in child.inputs) else child.renamed(child_prefix)
    pname = p.outputs[0].name.split(":")[0]
    cname = c.inputs[0].name.split(":")[0]
    P = np.eye(3) if dcm is None else np.asarray(dcm, dtype=float)
    system = combine([p, c])
    conns = [(f"{pname}:m_C", f"{cname}:m_P", dcm_motion_map(P))]
    if system.has_input(f"{pname}:W_C"):
        conns.append((f"{cname}:W_P", f"{pname}:W_C", dcm_wrench_map(P.T)))
    closed, _ = close_loops(system, conns)
    return closed


def apply_boundary(block: StateBlock, closure: str, port: str) -> StateBlock:
    """Apply a clamped or free boundary at a named port.

    Clamping zeroes (removes) the 18 motion inputs at the port; a free end
    zeroes the 6 wrench inputs.  Closing a port that was already closed or
    connected raises :class:`PortError`.
    """
    if closure == "clamp":
        target = f"{port}:m_P" if block.has_input(f"{port}:m_P") else f"{port}"
        if not block.has_input(target):
            raise PortError(f"no open motion input at port {port!r}")
        return block.drop_inputs([target])
    if closure == "free":
        target = f"{port}:W_C" if block.has_input(f"{port}:W_C") else f"{port}"
        if not block.has_input(target):
            raise PortError(f"no open wrench input at port {port!r}")
        return block.drop_inputs([target])
    raise InvalidParameterError(f"unknown boundary closure {closure!r}")


def build_parametric_family(graph: AssemblyGraph, spin: UncertainScalar,
                            masses=None):
    """Deterministic factory over normalized uncertainties plus metadata.

    ``masses`` maps tip-mass node names to :class:`UncertainScalar`.  The
    factory takes a dict of normalized deltas in [-1, 1] (missing entries
    default to zero), re-propagates the equilibrium (the centrifugal loads
    scale with the spin rate squared and the masses) and returns the
    assembled model.  Results are cached on the realized parameter values.
    """
    masses = dict(masses or {})
    for nm in masses:
        if nm not in graph.nodes or not isinstance(graph.nodes[nm], TipMassNode):
            raise InvalidParameterError(f"{nm!r} is not a tip-mass node")

    cache = {}

    def factory(deltas=None) -> StateBlock:
        deltas = dict(deltas or {})
        unknown = set(deltas) - ({"Omega"} | set(masses))
        if unknown:
            raise InvalidParameterError(f"unknown uncertainty names {sorted(unknown)}")
        om = spin.realize(deltas.get("Omega", 0.0))
        realized = {nm: us.realize(deltas.get(nm, 0.0)) for nm, us in masses.items()}
        key = (om, tuple(sorted(realized.items())))
        if key in cache:
            return cache[key]
        saved = {}
        for nm, m in realized.items():
            saved[nm] = graph.nodes[nm].m
            graph.nodes[nm].m = m
        try:
            model = graph.build(om)
        finally:
            for nm, m in saved.items():
                graph.nodes[nm].m = m
        cache[key] = model
        return model

    # a parameter repeats once per node whose model depends on it
    def path_to_root(name):
        parents = {e.child: e.parent for e in graph.edges}
        out = [name]
        while out[-1] in parents:
            out.append(parents[out[-1]])
        return out

    entries = [("Omega", len(graph.nodes))]
    for nm in masses:
        entries.append((nm, len(path_to_root(nm))))
    delta = DeltaStructure(tuple(entries))
    return factory, delta
