import numpy as np
import pytest

from spinbeam.beam import BeamProperties
from spinbeam.rigid import RigidBodyProperties


@pytest.fixture
def boom():
    """Spacecraft boom of the case-study scenario."""
    return BeamProperties(rho=2700.0, S=3.14e-4, l=50.0, E=7e10, nu=0.33,
                          Jy=7.85e-9, Jz=7.85e-9, Jpx=1.57e-8)


@pytest.fixture
def hub():
    return RigidBodyProperties(m=500.0, J_A=np.diag([570.42, 570.42, 1000.0]))


def bending_scale(props, plane="y"):
    J = props.Jz if plane == "y" else props.Jy
    return np.sqrt(props.rho * props.S * props.l**4 / (props.E * J))


def spacecraft_graph(boom, hub, m_tip=5.0, elements=1, damping=None):
    from spinbeam.assembly import AssemblyGraph

    g = AssemblyGraph()
    g.add_main_body("hub", hub, [("P1", [-2.0, 0.0, 0.0]),
                                 ("P2", [2.0, 0.0, 0.0])])
    g.add_beam("boom1", boom, elements=elements, damping=damping)
    g.add_beam("boom2", boom, elements=elements, damping=damping)
    g.add_tip_mass("tip1", m_tip)
    g.add_tip_mass("tip2", m_tip)
    g.connect_nodes("hub", "boom1", dcm=np.diag([-1.0, -1.0, 1.0]),
                    parent_port="P1")
    g.connect_nodes("hub", "boom2", parent_port="P2")
    g.connect_nodes("boom1", "tip1")
    g.connect_nodes("boom2", "tip2")
    return g


def cantilever_graph(props, mu=0.0, alpha=0.0, elements=1, damping=None):
    from spinbeam.assembly import AssemblyGraph

    g = AssemblyGraph()
    g.add_beam("beam", props, elements=elements, damping=damping)
    if mu > 0:
        g.add_tip_mass("tip", mu * props.mass)
        g.connect_nodes("beam", "tip")
    g.clamp_root(alpha * props.l)
    return g
