"""qik: quiver computations for the universal SU(n) hyperkahler implosion.

Moment-map evaluation and solving for chain quivers, stratum classification
through eigenvalue chains and Jordan data, the hypertoric locus of diagonal
configurations, rigid standard forms, and a matrix Nahm-flow toolbox with
the regularised Bielawski pairing.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DecompositionError, FormError,
                     QikError, RankError, RegularityError, ShapeError)
from .quiver import (GroupElement, MomentValue, Quiver, ScalarChain,
                     UnitQuaternion, apply_group, big_x,
                     complex_moment_residual, direct_sum, is_hk_stable,
                     moment_value, quiver_from_json, quiver_to_json,
                     real_moment_residual, rotate_structure,
                     su2_rotation_matrix)
from .solver import FlowReport, kempf_ness_flow, orbit_closed
from .strata import (ClassifyResult, EquivRelation, StratumLabel, classify,
                     check_kostant_identity, contract,
                     decompose_by_eigenspaces, enumerate_labels,
                     equivalence_from_levels, generic_rotation, kappa_spectrum,
                     label_from_json, label_from_sim_orbits, label_to_json,
                     split_closed_orbit_quiver, symplectic_stratum)
from .forms import (StandardizedQuiver, alpha_from_x, find_torus_transition,
                    standardize_beta, to_diagonal, to_jcf)
from .hypertoric import (ArrangementPoint, DiagonalQuiver, build_diagonal,
                         is_diag_hks, root_arrangement_stratum,
                         stabilizer_subtorus, torus_moment_residual)
from .nahm import (AsymptoticData, NahmSolution, bielawski_norm,
                   common_centralizer, fit_asymptotics, gauge_transform,
                   integrate, nahm_residual, su2_triple)

__all__ = [name for name in dir() if not name.startswith("_")]
