"""Spinning uniform flexible beam: quasi-coordinate matrices, equilibrium
solve, and the 24-channel two-port state-space model.

The beam carries ten internal elastic coordinates (four bending per plane,
one traction, one torsion).  All matrices are built from exact polynomial
integrals of the shape basis.  The quasi-coordinate ordering is fixed as
``[v_P(3), omega_P(3), q_f(10)]`` for velocities and ``[x_P(3), Theta_P(3),
q_f(10)]`` for positions, with the rigid/flexible partition at index 6.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .blocks import ChannelGroup, EnergyPartition, StateBlock
from .errors import InvalidParameterError, ModelInvalidError, RankDeficiencyError
from .rigid import skew, tau
from .shapes import (GeometricIntegrals, Polynomial, ShapeBasis,
                     geometric_integral_family, integrate_product,
                     make_shape_basis, stiffness_integral_matrix)

__all__ = [
    "BeamProperties",
    "GeneralizedCoords",
    "EquilibriumState",
    "BeamMatrixSet",
    "build_matrix_set",
    "compute_equilibrium",
    "build_titop_beam",
    "deformed_frame_dcm",
]

N_ELASTIC = 10  # 2 bending planes x 4 modes + traction + torsion

# static-deflection bounds under which the linearized model is accepted:
# tip deflections within 1% of the length, elongation within 0.1%, twist
# within 0.01 rad
TIP_DEFLECTION_LIMIT = 0.01
ELONGATION_LIMIT = 0.001
TWIST_LIMIT = 0.01

EQUILIBRIUM_COND_LIMIT = 1e10


@dataclass(frozen=True)
class BeamProperties:
    """Geometric and material parameters of one uniform beam element."""

    rho: float   # mass density, kg/m^3
    S: float     # cross-section area, m^2
    l: float     # length, m
    E: float     # Young's modulus, N/m^2
    nu: float    # Poisson ratio
    Jy: float    # second moment of area about y, m^4
    Jz: float    # second moment of area about z, m^4
    Jpx: float   # polar second moment about x, m^4
    G: float = None  # shear modulus; derived from E and nu unless overridden

    def __post_init__(self):
        if self.G is None:
            object.__setattr__(self, "G", self.E / (2.0 * (1.0 + self.nu)))
        for name in ("rho", "S", "l", "E", "G", "Jy", "Jz", "Jpx"):
            if not (getattr(self, name) > 0.0):
                raise InvalidParameterError(
                    f"beam parameter {name} must be positive, got {getattr(self, name)}")
        if not (0.0 <= self.nu < 0.5):
            raise InvalidParameterError(f"Poisson ratio out of range: {self.nu}")

    @property
    def mass(self) -> float:
        return self.rho * self.S * self.l

    def with_length(self, l: float) -> "BeamProperties":
        return replace(self, l=l)


@dataclass(frozen=True)
class GeneralizedCoords:
    """Elastic coordinates ``[q_y(4), q_z(4), delta_u, delta_phi]``.

    Per bending plane the entries are the root curvature, tip deflection,
    tip slope and tip curvature.
    """

    q_y: np.ndarray
    q_z: np.ndarray
    delta_u: float
    delta_phi: float

    @classmethod
    def from_vector(cls, q) -> "GeneralizedCoords":
        q = np.asarray(q, dtype=float).reshape(N_ELASTIC)
        return cls(q[:4].copy(), q[4:8].copy(), float(q[8]), float(q[9]))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q_y, self.q_z,
                               [self.delta_u, self.delta_phi]])


@dataclass(frozen=True)
class EquilibriumState:
    """Kinematic equilibrium of the beam plus the child-side load.

    The derived fields (root wrench, static elastic coordinates, validity)
    are absent until :func:`compute_equilibrium` fills them in.
    """

    x_P: np.ndarray
    theta_P: np.ndarray
    v_P: np.ndarray
    omega_P: np.ndarray
    W_C: np.ndarray
    W_P: np.ndarray = None        # derived: wrench applied to the parent at P
    q_static: np.ndarray = None   # derived: static elastic coordinates
    valid: bool = None            # derived: smallness criterion outcome
    condition_number: float = None

    def __post_init__(self):
        for name in ("x_P", "theta_P", "v_P", "omega_P"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float).reshape(3))
        object.__setattr__(self, "W_C", np.asarray(self.W_C, dtype=float).reshape(6))

    @classmethod
    def kinematic(cls, x_P=(0, 0, 0), theta_P=(0, 0, 0), v_P=(0, 0, 0),
                  omega_P=(0, 0, 0), W_C=(0, 0, 0, 0, 0, 0)) -> "EquilibriumState":
        return cls(x_P, theta_P, v_P, omega_P, W_C)

    @classmethod
    def spinning(cls, r: float, omega: float, W_C=(0, 0, 0, 0, 0, 0)):
        """Root offset ``r`` on a hub spinning about z at rate ``omega``."""
        return cls([r, 0, 0], [0, 0, 0], [0, r * omega, 0], [0, 0, omega], W_C)


def _m1_values(basis: ShapeBasis, x: float) -> np.ndarray:
    """3x10 placement matrix of the elastic shape functions at ``x``.

    Rows are the x/y/z displacement components; columns follow the elastic
    coordinate ordering."""
    out = np.zeros((3, N_ELASTIC))
    out[0, 8] = basis.tau(x)
    out[1, :4] = basis.phi_vec("y", x)
    out[2, 4:8] = basis.phi_vec("z", x)
    return out


def _m2_values(basis: ShapeBasis, x: float) -> np.ndarray:
    """3x10 rotation map of the elastic coordinates at ``x`` (twist and
    bending slopes)."""
    out = np.zeros((3, N_ELASTIC))
    out[0, 9] = basis.sigma(x)
    out[1, 4:8] = -basis.dphi_vec("z", x)
    out[2, :4] = basis.dphi_vec("y", x)
    return out


def _m1_polys(basis: ShapeBasis):
    """10x3 array of shape polynomials (transpose layout of _m1_values)."""
    zero = Polynomial([0.0])
    M1 = np.full((N_ELASTIC, 3), zero, dtype=object)
    for i in range(4):
        M1[i, 1] = basis.phi_y[i]
        M1[4 + i, 2] = basis.phi_z[i]
    M1[8, 0] = basis.tau
    return M1


def _poly_mat_integral(A, B, W=None, weight_power: int = 0, upper: float = 1.0):
    """Exact ``int_0^upper x^w A(x) W B(x)^T dx`` for polynomial matrices.

    ``A`` is p x 3 and ``B`` is q x 3 (object arrays of Polynomial); ``W``
    is a constant 3x3 weight, identity when omitted."""
    p, q = A.shape[0], B.shape[0]
    out = np.zeros((p, q))
    if W is None:
        W = np.eye(3)
    for a in range(3):
        for b in range(3):
            w_ab = W[a, b]
            if w_ab == 0.0:
                continue
            for i in range(p):
                pa = A[i, a]
                if pa.coef.size == 1 and pa.coef[0] == 0.0:
                    continue
                for j in range(q):
                    pb = B[j, b]
                    if pb.coef.size == 1 and pb.coef[0] == 0.0:
                        continue
                    out[i, j] += w_ab * integrate_product(
                        pa, pb, weight_power, 0.0, upper)
    return out


@dataclass(frozen=True)
class BeamMatrixSet:
    """Every constant matrix of the spinning-beam model at one equilibrium.

    Names follow the roles in the equations of motion: ``M_T/K_T/G_T`` are
    the kinetic-energy expansion blocks on the 16 quasi-coordinates,
    ``K_V`` the elastic stiffness, ``C_Q/C_Qdot`` the energy gradients,
    ``M_L/J_L/C_L`` the gyroscopic correction rows, ``F_c`` the
    follower-load stiffness of the child-side equilibrium wrench, and
    ``N_bar`` the generalized-force input map.  ``M/Dmat/Kmat`` are the
    assembled coefficient matrices whose r/f partitions (rigid 0:6,
    flexible 6:16) feed the state-space build.
    """

    props: BeamProperties
    eq: EquilibriumState
    basis: ShapeBasis = field(repr=False)
    geom: GeometricIntegrals = field(repr=False)
    M_T: np.ndarray = field(repr=False)
    K_T: np.ndarray = field(repr=False)
    G_T: np.ndarray = field(repr=False)
    K_V: np.ndarray = field(repr=False)
    C_Q: np.ndarray = field(repr=False)
    C_Qdot: np.ndarray = field(repr=False)
    M_L: np.ndarray = field(repr=False)
    J_L: np.ndarray = field(repr=False)
    C_L: np.ndarray = field(repr=False)
    N_bar: np.ndarray = field(repr=False)
    W_C_mat: np.ndarray = field(repr=False)
    K_c: np.ndarray = field(repr=False)
    F_c: np.ndarray = field(repr=False)
    tau_CP: np.ndarray = field(repr=False)
    E_i: np.ndarray = field(repr=False)
    E_ix: np.ndarray = field(repr=False)
    E_l: np.ndarray = field(repr=False)
    K_soft: np.ndarray = field(repr=False)
    D_soft: np.ndarray = field(repr=False)
    M_l: np.ndarray = field(repr=False)
    D_l: np.ndarray = field(repr=False)
    K_l: np.ndarray = field(repr=False)
    M_r: np.ndarray = field(repr=False)
    D_r: np.ndarray = field(repr=False)
    K_r: np.ndarray = field(repr=False)
    G_vv: np.ndarray = field(repr=False)
    G_vp: np.ndarray = field(repr=False)
    G_p: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    Dmat: np.ndarray = field(repr=False)
    Kmat: np.ndarray = field(repr=False)

    def blocks(self, which: str):
        """r/f partition of an assembled coefficient matrix.

        ``which`` is one of 'M', 'D', 'K', 'N'; returns the four blocks
        (rr, rf, fr, ff) with the split at index 6 (N splits its columns at
        the 6 wrench inputs of each port)."""
        if which == "N":
            m = self.N_bar
            return m[:6, :6], m[:6, 6:], m[6:, :6], m[6:, 6:]
        m = {"M": self.M, "D": self.Dmat, "K": self.Kmat}[which]
        return m[:6, :6], m[:6, 6:], m[6:, :6], m[6:, 6:]


def build_matrix_set(props: BeamProperties, eq: EquilibriumState) -> BeamMatrixSet:
    """Populate every model matrix for the given kinematic equilibrium.

    Only the kinematic fields and the child-side wrench of ``eq`` are used;
    derived equilibrium fields are not required.
    """
    l, rho, S = props.l, props.rho, props.S
    rhoS = rho * S
    mA = rhoS * l
    basis = make_shape_basis(l)
    geom = geometric_integral_family(basis)

    v = eq.v_P
    w = eq.omega_P
    sv, sw = skew(v), skew(w)
    ex = np.array([1.0, 0.0, 0.0])
    sex = skew(ex)

    M1 = _m1_polys(basis)
    x_poly = Polynomial([0.0, 1.0])

    # first moments of the shape functions (without the rhoS factor)
    int_m1 = np.zeros((N_ELASTIC, 3))
    int_x_m1 = np.zeros((N_ELASTIC, 3))
    for i in range(N_ELASTIC):
        for a in range(3):
            p = M1[i, a]
            if p.coef.size == 1 and p.coef[0] == 0.0:
                continue
            int_m1[i, a] = p.integral(0.0, l)
            int_x_m1[i, a] = integrate_product(p, x_poly, 0, 0.0, l)

    M_p = rhoS * skew([l**2 / 2.0, 0.0, 0.0])
    M_m = rhoS * int_m1
    M_sigma = rhoS * l / 2.0
    M_sigmasigma = rhoS * l / 3.0

    P_sigma1 = np.diag([mA * props.Jpx / S, 0.0, 0.0])
    P_sigma2 = np.zeros((N_ELASTIC, 3))
    P_sigma2[9, 0] = props.Jpx / S * M_sigma
    P_sigma3 = np.zeros((N_ELASTIC, N_ELASTIC))
    P_sigma3[9, 9] = props.Jpx / S * M_sigmasigma

    J_P = rhoS * np.diag([0.0, l**3 / 3.0, l**3 / 3.0]) + P_sigma1
    M_mp = rhoS * int_x_m1 @ sex.T + P_sigma2
    M_mm = rhoS * _poly_mat_integral(M1, M1, upper=l) + P_sigma3
    K_soft = rhoS * _poly_mat_integral(M1, M1, W=-sw @ sw, upper=l)
    D_soft = rhoS * _poly_mat_integral(M1, M1, W=sw, upper=l)
    M_mpw = rhoS * int_x_m1 @ (sw @ sex)

    E_i = rhoS * geom.int_e
    E_ix = rhoS * geom.int_xe
    E_l = geom.e_end

    M_T = np.zeros((16, 16))
    M_T[:3, :3] = mA * np.eye(3)
    M_T[:3, 3:6] = M_p.T
    M_T[3:6, :3] = M_p
    M_T[3:6, 3:6] = J_P
    M_T[:3, 6:] = M_m.T
    M_T[6:, :3] = M_m
    M_T[3:6, 6:] = M_mp.T
    M_T[6:, 3:6] = M_mp
    M_T[6:, 6:] = M_mm

    K_T = np.zeros((16, 16))
    K_T[6:, 6:] = (K_soft + (w[1] * v[2] - w[2] * v[1]) * E_i
                   - (w[2]**2 + w[1]**2) * E_ix)

    G_T = np.zeros((16, 16))
    G_T[6:, 0:3] = -2.0 * M_m @ sw
    G_T[6:, 3:6] = 2.0 * M_m @ sv + 2.0 * M_mp @ sw + 4.0 * M_mpw
    G_T[6:, 6:] = -2.0 * v[0] * E_i - 2.0 * D_soft

    C_Q = np.zeros(16)
    C_Q[6:] = M_m @ (sw.T @ v) + M_mpw @ w
    C_Qdot = M_T[:6, :].T @ np.concatenate([v, w])

    gyr = np.block([[sw, np.zeros((3, 3))], [sv, sw]])
    corr = np.zeros((6, 16))
    cross_block = mA * sv + skew(M_p.T @ w)
    corr[0:3, 3:6] = cross_block
    corr[3:6, 0:3] = cross_block
    corr[3:6, 3:6] = skew(M_p @ v) + skew(J_P @ w)
    M_L = gyr @ M_T[:6, :] - corr
    J_L = gyr @ (0.5 * G_T[:, :6].T)
    C_L = gyr @ C_Qdot[:6]

    # elastic stiffness: bending in each plane, traction, torsion
    K_by = stiffness_integral_matrix(basis, props.E * props.Jz)
    K_bz = stiffness_integral_matrix(basis, props.E * props.Jy)
    K_V = np.zeros((16, 16))
    K_V[6:10, 6:10] = K_by
    K_V[10:14, 10:14] = K_bz
    K_V[14, 14] = props.E * S / l
    K_V[15, 15] = props.G * props.Jpx / l

    tau_CP = tau([-l, 0.0, 0.0])
    M1T_l = _m1_values(basis, l)
    M2T_l = _m2_values(basis, l)
    N_bar = np.zeros((16, 12))
    N_bar[:6, :6] = -np.eye(6)
    N_bar[:6, 6:] = tau_CP.T
    N_bar[6:, 6:9] = M1T_l.T
    N_bar[6:, 9:12] = M2T_l.T

    # follower-load stiffness of the child-side equilibrium wrench: the
    # wrench input lives in the deformed tip frame, so its projection back
    # to the body frame, the lever arm of the tip force, and the
    # foreshortening work of the axial component all contribute
    # elastic-coordinate stiffness terms
    W_bar = eq.W_C
    W_C_mat = np.vstack([-skew(W_bar[:3]) @ M2T_l, -skew(W_bar[3:]) @ M2T_l])
    K_c = skew(W_bar[:3]) @ M1T_l
    F_c = np.zeros((16, 16))
    F_c[3:6, 6:] = K_c
    F_c[6:, 6:] = E_l * W_bar[0]
    F_c[:, 6:] -= N_bar[:, 6:] @ W_C_mat

    # output maps at the child point
    x_C = eq.x_P + np.array([l, 0.0, 0.0])
    v_C = v + np.cross(w, [l, 0.0, 0.0])
    M3T = skew(v_C) @ M2T_l
    G_vv = np.vstack([M1T_l, M2T_l])
    G_vp = np.vstack([sw @ M1T_l + M3T, sw @ M2T_l])
    G_p = np.vstack([skew(x_C) @ M2T_l + M1T_l, M2T_l])

    Z6 = np.zeros((6, 6))
    Z6_10 = np.zeros((6, N_ELASTIC))
    M_l = np.vstack([tau_CP, Z6, Z6])
    D_l = np.vstack([Z6, tau_CP, Z6])
    K_l = np.vstack([Z6, Z6, np.eye(6)])
    M_r = np.vstack([G_vv, Z6_10, Z6_10])
    D_r = np.vstack([G_vp, G_vv, Z6_10])
    K_r = np.vstack([Z6_10, G_vp, G_p])

    pad = np.zeros((N_ELASTIC, 16))
    M = M_T
    Dmat = 0.5 * (G_T.T - G_T) + np.vstack([M_L, pad])
    Kmat = K_V - K_T + np.vstack([J_L, pad]) + F_c

    return BeamMatrixSet(
        props=props, eq=eq, basis=basis, geom=geom, M_T=M_T, K_T=K_T, G_T=G_T,
        K_V=K_V, C_Q=C_Q, C_Qdot=C_Qdot, M_L=M_L, J_L=J_L, C_L=C_L,
        N_bar=N_bar, W_C_mat=W_C_mat, K_c=K_c, F_c=F_c, tau_CP=tau_CP,
        E_i=E_i, E_ix=E_ix, E_l=E_l, K_soft=K_soft, D_soft=D_soft,
        M_l=M_l, D_l=D_l, K_l=K_l, M_r=M_r, D_r=D_r, K_r=K_r,
        G_vv=G_vv, G_vp=G_vp, G_p=G_p, M=M, Dmat=Dmat, Kmat=Kmat)


def compute_equilibrium(props: BeamProperties, kinematics: EquilibriumState,
                        W_bar_C=None) -> EquilibriumState:
    """Solve the static equilibrium for the root wrench and elastic set.

    The 16 unknowns are the wrench applied to the parent at P (6) and the
    static elastic coordinates (10).  The validity flag records whether the
    static deflections stay within the smallness bounds; the root wrench is
    then recomputed from the zero-deformation balance, which is the value
    propagated to parent substructures.
    """
    eq = kinematics
    if W_bar_C is not None:
        eq = replace(eq, W_C=np.asarray(W_bar_C, dtype=float).reshape(6))
    ms = build_matrix_set(props, eq)

    pad = np.zeros((N_ELASTIC, 16))
    S_mat = ms.K_V - ms.K_T + np.vstack([ms.J_L, pad])
    A_sys = np.hstack([-ms.N_bar[:, :6], S_mat[:, 6:]])
    rhs = ms.C_Q.copy()
    rhs[:6] -= ms.C_L
    rhs += ms.N_bar[:, 6:] @ eq.W_C

    # equilibrate before conditioning: the rows and columns mix physical
    # dimensions, so the raw condition number reflects units, not rank
    r_scale = np.linalg.norm(A_sys, axis=1)
    c_scale = np.linalg.norm(A_sys / r_scale[:, None], axis=0)
    cond = float(np.linalg.cond(A_sys / r_scale[:, None] / c_scale[None, :]))
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        _, _, vt = np.linalg.svd(A_sys / r_scale[:, None] / c_scale[None, :])
        raise RankDeficiencyError(
            "equilibrium system is singular", null_direction=vt[-1] / c_scale)
    sol = np.linalg.solve(A_sys, rhs)
    W_P, q_static = sol[:6], sol[6:]

    l = props.l
    valid = (abs(q_static[1]) <= TIP_DEFLECTION_LIMIT * l
             and abs(q_static[5]) <= TIP_DEFLECTION_LIMIT * l
             and abs(q_static[8]) <= ELONGATION_LIMIT * l
             and abs(q_static[9]) <= TWIST_LIMIT)

    # zero-deformation balance for the propagated root wrench
    W_P_recomputed = ms.tau_CP.T @ eq.W_C + ms.C_Q[:6] - ms.C_L
    if valid:
        W_P = W_P_recomputed

    return replace(eq, W_P=W_P, q_static=q_static, valid=bool(valid),
                   condition_number=cond)


def build_titop_beam(props: BeamProperties, eq: EquilibriumState,
                     damping=None, name="beam") -> StateBlock:
    """Two-port state-space model of the spinning beam.

    Inputs are the child-side wrench variation (6, deformed-tip frame) and
    the parent-side motion variation (18, body frame); outputs are the
    child-side motion (18, deformed-tip frame) and the wrench applied to
    the parent (6, body frame).  ``damping`` is an optional ``(alpha,
    beta)`` pair adding ``alpha*M_ff + beta*K_ff`` to the elastic velocity
    feedback.
    """
    if eq.valid is None:
        eq = compute_equilibrium(props, eq)
    if not eq.valid:
        raise ModelInvalidError(
            "static elastic deflections violate the smallness assumption",
            q_static=eq.q_static)
    ms = build_matrix_set(props, eq)

    M_rr, M_rf, M_fr, M_ff = ms.blocks("M")
    D_rr, D_rf, D_fr, D_ff = ms.blocks("D")
    K_rr, K_rf, K_fr, K_ff = ms.blocks("K")
    N_rr, N_rf, N_fr, N_ff = ms.blocks("N")

    if damping is not None:
        alpha, beta = damping
        D_ff = D_ff + alpha * M_ff + beta * K_ff

    n = N_ELASTIC
    Mff_inv = np.linalg.inv(M_ff)
    MDK_fr = np.hstack([M_fr, D_fr, K_fr])          # 10 x 18
    MDK_rr = np.hstack([M_rr, D_rr, K_rr])          # 6 x 18
    MDK_l = np.hstack([ms.M_l, ms.D_l, ms.K_l])     # 18 x 18
    Nrr_inv = np.linalg.inv(N_rr)                   # = -I6 by construction

    A = np.block([[np.zeros((n, n)), np.eye(n)],
                  [-Mff_inv @ K_ff, -Mff_inv @ D_ff]])
    B = np.block([[np.zeros((n, 6)), np.zeros((n, 18))],
                  [Mff_inv @ N_ff, -Mff_inv @ MDK_fr]])
    C = np.block([[-ms.M_r @ Mff_inv @ K_ff + ms.K_r,
                   -ms.M_r @ Mff_inv @ D_ff + ms.D_r],
                  [-Nrr_inv @ (M_rf @ Mff_inv @ K_ff - K_rf),
                   -Nrr_inv @ (M_rf @ Mff_inv @ D_ff - D_rf)]])
    D = np.block([[ms.M_r @ Mff_inv @ N_ff,
                   -ms.M_r @ Mff_inv @ MDK_fr + MDK_l],
                  [Nrr_inv @ (M_rf @ Mff_inv @ N_ff - N_rf),
                   Nrr_inv @ (MDK_rr - M_rf @ Mff_inv @ MDK_fr)]])

    inputs = [ChannelGroup("W_C", 6, frame="child"),
              ChannelGroup("m_P", 18, frame="body")]
    outputs = [ChannelGroup("m_C", 18, frame="child"),
               ChannelGroup("W_P", 6, frame="body")]
    labels = ([f"qy{i}" for i in range(1, 5)] + [f"qz{i}" for i in range(1, 5)]
              + ["du", "dphi"])
    labels = labels + [s + "_dot" for s in labels]

    def part(family, idx):
        idx = np.asarray(idx)
        weight = np.zeros((2 * idx.size, 2 * idx.size))
        weight[:idx.size, :idx.size] = K_ff[np.ix_(idx, idx)]
        weight[idx.size:, idx.size:] = M_ff[np.ix_(idx, idx)]
        return EnergyPartition(family, np.concatenate([idx, idx + n]), weight)

    partitions = [part("in-plane bending", np.arange(0, 4)),
                  part("out-of-plane bending", np.arange(4, 8)),
                  part("traction", np.array([8])),
                  part("torsion", np.array([9]))]
    return StateBlock(A, B, C, D, inputs, outputs, labels, partitions, name=name)


def deformed_frame_dcm(basis: ShapeBasis, q_f) -> np.ndarray:
    """First-order rotation from the deformed tip frame to the body frame.

    Identity at zero elastic coordinates; the rotation vector collects the
    tip twist and the two tip bending slopes."""
    if isinstance(q_f, GeneralizedCoords):
        q_f = q_f.as_vector()
    q_f = np.asarray(q_f, dtype=float).reshape(N_ELASTIC)
    theta = _m2_values(basis, basis.l) @ q_f
    return np.eye(3) + skew(theta)
