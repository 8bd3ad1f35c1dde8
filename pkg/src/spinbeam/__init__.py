"""Two-port dynamic models of spinning rigid bodies and flexible beams.

Build individual substructure blocks, assemble them into multibody
spacecraft models with propagated spin equilibria, and run modal,
spin-sweep and frequency-response analyses.
"""

from .analysis import (CampbellCurve, DimensionlessSetup, ModalResult,
                       campbell_sweep, frequency_ratio, frequency_response,
                       modal_frequencies)
from .assembly import (AssemblyGraph, DeltaStructure, UncertainScalar,
                       apply_boundary, build_parametric_family, connect)
from .beam import (BeamProperties, EquilibriumState, GeneralizedCoords,
                   build_matrix_set, build_titop_beam, compute_equilibrium,
                   deformed_frame_dcm)
from .blocks import ChannelGroup, StateBlock
from .errors import (AlgebraicLoopError, InvalidParameterError,
                     ModelInvalidError, PortError, RankDeficiencyError,
                     SpinbeamError, TopologyError, UnsupportedEquilibriumError)
from .oracle_fe import (FeBeamMesh, fe_in_plane_frequencies,
                        fe_out_of_plane_frequencies)
from .rigid import (RigidBodyProperties, build_main_body, build_rigid_titop,
                    dcm_transport, reduce_one_port, skew)
from .shapes import (Polynomial, ShapeBasis, geometric_integral_family,
                     integrate_product, make_shape_basis,
                     stiffness_integral_matrix)

__version__ = "0.1.0"
