"""Two-port models of spinning rigid bodies and frame/kinematic utilities.

Covers the static 24x24 two-port appendage block, its one-port reduction
(used for tip masses), the twelfth-order spinning main-body model, and the
wrench/motion transport maps between offset points and rotated frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import ChannelGroup, StateBlock
from .errors import (InvalidParameterError, PortError,
                     UnsupportedEquilibriumError)

__all__ = [
    "RigidBodyProperties",
    "skew",
    "tau",
    "upsilon",
    "gyric_matrix",
    "dcm_wrench_map",
    "dcm_motion_map",
    "dcm_transport",
    "build_rigid_titop",
    "reduce_one_port",
    "build_main_body",
]


def skew(v) -> np.ndarray:
    """Skew-symmetric cross-product matrix: skew(v) @ w == cross(v, w)."""
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def tau(pb) -> np.ndarray:
    """6x6 kinematic transport between two points of the same rigid body.

    ``pb`` is the vector from the model point P to the target point B; the
    map sends [v; omega] at B to [v; omega] at P (and its transpose carries
    wrenches the other way).
    """
    out = np.eye(6)
    out[:3, 3:] = skew(pb)
    return out


def upsilon(pb) -> np.ndarray:
    """18x18 motion-vector transport diag(tau, tau, I6)."""
    t = tau(pb)
    out = np.eye(18)
    out[:6, :6] = t
    out[6:12, 6:12] = t
    return out


@dataclass(frozen=True)
class RigidBodyProperties:
    """Mass properties and port geometry of one rigid body.

    ``ap`` runs from the center of mass A to the parent point P, ``pc``
    from P to the child point C.  A zero inertia tensor models an ideal
    point mass.
    """

    m: float
    J_A: np.ndarray
    ap: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pc: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "J_A", np.asarray(self.J_A, dtype=float).reshape(3, 3))
        object.__setattr__(self, "ap", np.asarray(self.ap, dtype=float).reshape(3))
        object.__setattr__(self, "pc", np.asarray(self.pc, dtype=float).reshape(3))
        if self.m < 0:
            raise InvalidParameterError(f"mass must be nonnegative, got {self.m}")
        if not np.allclose(self.J_A, self.J_A.T):
            raise InvalidParameterError("inertia tensor must be symmetric")
        eig = np.linalg.eigvalsh(self.J_A)
        if np.any(eig < -1e-12 * max(1.0, abs(eig).max())):
            raise InvalidParameterError("inertia tensor must be positive semidefinite")

    @property
    def D_P(self) -> np.ndarray:
        """6x6 rigid dynamic model at P: tau_AP^T diag(mI, J_A) tau_AP."""
        t = tau(self.ap)
        return t.T @ np.block([[self.m * np.eye(3), np.zeros((3, 3))],
                               [np.zeros((3, 3)), self.J_A]]) @ t

    @property
    def J_P(self) -> np.ndarray:
        return self.J_A - self.m * skew(self.ap) @ skew(self.ap)


def gyric_matrix(props: RigidBodyProperties, v_bar, omega_bar) -> np.ndarray:
    """Velocity-feedback matrix of the linearized rigid dynamics at P.

    Vanishes at rest; at a spinning equilibrium it carries the Coriolis and
    gyroscopic coupling of the body.
    """
    v = np.asarray(v_bar, dtype=float)
    w = np.asarray(omega_bar, dtype=float)
    m, ap, J_P = props.m, props.ap, props.J_P
    sw, sv, sap = skew(w), skew(v), skew(ap)
    top_right = m * (2.0 * sw @ sap - sap @ sw - sv)
    bot_left = -m * sap @ sw
    bot_right = m * sap @ sv + sw @ J_P - skew(J_P @ w)
    return np.block([[m * sw, top_right], [bot_left, bot_right]])


def equilibrium_root_wrench(props: RigidBodyProperties, v_bar, omega_bar,
                            W_bar_C=None) -> np.ndarray:
    """Wrench applied by the body to its parent at P in equilibrium.

    Transports the child-side equilibrium wrench to P and adds the
    centrifugal/gyroscopic resultant of the body's own motion.
    """
    vw = np.concatenate([np.asarray(v_bar, float), np.asarray(omega_bar, float)])
    sw, sv = skew(vw[3:]), skew(vw[:3])
    gyr = np.block([[sw, np.zeros((3, 3))], [sv, sw]])
    out = -gyr @ (props.D_P @ vw)
    if W_bar_C is not None:
        out = out + tau(props.pc).T @ np.asarray(W_bar_C, dtype=float)
    return out


def dcm_wrench_map(dcm) -> np.ndarray:
    """6x6 block-diagonal frame change for wrenches."""
    P = np.asarray(dcm, dtype=float)
    out = np.zeros((6, 6))
    out[:3, :3] = P
    out[3:, 3:] = P
    return out


def dcm_motion_map(dcm) -> np.ndarray:
    """18x18 block-diagonal frame change for motion vectors.

    Applies the rotation to every 3-component slot, including the Euler
    angle variations (valid to first order)."""
    P = np.asarray(dcm, dtype=float)
    out = np.zeros((18, 18))
    for k in range(6):
        out[3 * k:3 * k + 3, 3 * k:3 * k + 3] = P
    return out


def dcm_transport(dcm):
    """Pair of frame-change maps ``(wrench 6x6, motion 18x18)``.

    The input direction-cosine matrix must be orthonormal."""
    P = np.asarray(dcm, dtype=float)
    if P.shape != (3, 3) or not np.allclose(P.T @ P, np.eye(3),
                                            rtol=0.0, atol=1e-9):
        raise InvalidParameterError("dcm must be a 3x3 orthonormal matrix")
    return dcm_wrench_map(P), dcm_motion_map(P)


# channel layout shared by every two-port block:
#   inputs  [W_C (6, child frame), m_P (18, body frame)]
#   outputs [m_C (18, child frame), W_P (6, body frame)]


def build_rigid_titop(props: RigidBodyProperties, v_bar=None, omega_bar=None,
                      name="rigid") -> StateBlock:
    """Static 24x24 two-port block of a rigid appendage.

    The wrench output at P combines the direct dynamics (mass and gyric
    feedback on the P-point motion) with the transport of the child-side
    wrench; the motion output at C is the rigid transport of the P-point
    motion.
    """
    v = np.zeros(3) if v_bar is None else np.asarray(v_bar, dtype=float)
    w = np.zeros(3) if omega_bar is None else np.asarray(omega_bar, dtype=float)
    D_P = props.D_P
    X_P = gyric_matrix(props, v, w)
    t_cp = tau(-props.pc)  # argument is the vector C -> P

    # D rows: [m_C; W_P], cols: [W_C; m_P]
    D = np.zeros((24, 24))
    D[:18, 6:24] = upsilon(-props.pc)
    D[18:, :6] = t_cp.T
    D[18:, 6:12] = -D_P          # accelerations
    D[18:, 12:18] = -X_P         # velocities
    inputs = [ChannelGroup("W_C", 6, frame="child"),
              ChannelGroup("m_P", 18, frame="body")]
    outputs = [ChannelGroup("m_C", 18, frame="child"),
               ChannelGroup("W_P", 6, frame="body")]
    blk = StateBlock(np.zeros((0, 0)), np.zeros((0, 24)), np.zeros((24, 0)), D,
                     inputs, outputs, name=name)
    return blk


def reduce_one_port(block: StateBlock) -> StateBlock:
    """Drop the child port of a two-port rigid block.

    Keeps the wrench output at P against the motion input at P only; used
    for end bodies such as tip masses.  Refuses blocks that do not carry
    both ports (in particular, an already reduced block).
    """
    if not (block.has_input("W_C") and block.has_input("m_P")
            and block.has_output("m_C") and block.has_output("W_P")):
        raise PortError("reduce_one_port expects a full two-port block")
    return block.select(["W_P"], ["m_P"])


def point_mass_block(m: float, v_bar=None, omega_bar=None, J=None,
                     name="tip") -> StateBlock:
    """One-port block of an end mass (optionally with inertia) at its port."""
    props = RigidBodyProperties(m=m, J_A=np.zeros((3, 3)) if J is None else J)
    return reduce_one_port(build_rigid_titop(props, v_bar, omega_bar, name=name))


def build_main_body(props: RigidBodyProperties, ports, omega_bar,
                    name="main") -> StateBlock:
    """Twelfth-order model of the spinning central body at its mass center.

    ``ports`` is a list of ``(port_name, offset)`` pairs with the offset
    running from the mass center to the attachment point, expressed in the
    body frame.  Inputs are the external wrench plus one wrench per port
    (each expressed in the body frame at its attachment point); the output
    is the 18-component motion vector at the mass center.  The spin axis
    must be the z body axis.
    """
    w = np.asarray(omega_bar, dtype=float)
    if abs(w[0]) > 0 or abs(w[1]) > 0:
        raise UnsupportedEquilibriumError(
            "main-body linearization assumes spin about the z body axis; "
            f"got omega_bar={w}")
    if np.any(np.asarray(props.ap) != 0):
        raise InvalidParameterError("main-body model is written at the mass center")
    omega = float(w[2])
    J = props.J_A
    if omega != 0.0 and np.linalg.norm(J - np.diag(np.diag(J))) < 1e-12 * max(
            1.0, abs(J).max()):
        jx, jy, jz = np.diag(J)
        if min(jx, jy) < jz < max(jx, jy):
            import warnings
            warnings.warn(
                "spin axis carries the intermediate principal inertia; the "
                "spinning equilibrium is unstable", stacklevel=2)

    D_B = props.D_P  # ap = 0, so this is diag(mI, J_A)
    X_B = gyric_matrix(props, np.zeros(3), w)
    H = np.zeros((6, 6))
    H[:3, :3] = skew(w)
    H[3:, 3:] = skew(w)

    Dinv = np.linalg.inv(D_B)
    # states [dv, domega, dx, dTheta]
    A = np.zeros((12, 12))
    A[:6, :6] = -Dinv @ X_B
    A[6:, :6] = np.eye(6)
    A[6:, 6:] = -H

    names = ["W_ext"] + [p[0] for p in ports]
    # wrench at an offset point transported to the mass center: the lever
    # arm adds offset x F to the torque rows
    maps = [np.eye(6)] + [tau(-np.asarray(off, dtype=float)).T for _, off in ports]
    n_u = 6 * len(names)
    B = np.zeros((12, n_u))
    for k, Mk in enumerate(maps):
        B[:6, 6 * k:6 * k + 6] = Dinv @ Mk

    # outputs: full motion vector at the mass center
    C = np.zeros((18, 12))
    C[:6, :6] = -Dinv @ X_B      # acceleration rows repeat the state equation
    C[6:12, :6] = np.eye(6)
    C[12:, 6:] = np.eye(6)
    Dmat = np.zeros((18, n_u))
    for k, Mk in enumerate(maps):
        Dmat[:6, 6 * k:6 * k + 6] = Dinv @ Mk

    inputs = [ChannelGroup(nm, 6, frame="body") for nm in names]
    outputs = [ChannelGroup("m_B", 18, frame="body", fanout=True)]
    labels = [f"{name}.{s}" for s in
              ("vx", "vy", "vz", "wx", "wy", "wz", "x", "y", "z", "thx", "thy", "thz")]
    from .blocks import EnergyPartition
    parts = [EnergyPartition("rigid", np.arange(6), D_B)]
    return StateBlock(A, B, C, Dmat, inputs, outputs, labels, parts, name=name)
