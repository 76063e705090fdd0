"""Exact partial information decomposition built on the Blackwell order.

Redundancy is the most informative channel that every source can simulate;
union information is the least informative channel that can simulate every
source.  Probabilities are exact rationals throughout and information is
reported in bits.
"""

from .blackwell import (
    DecisionProblem,
    GarblingResult,
    best_response_utility,
    blackwell_consistency_check,
    is_garbling,
)
from .errors import InputError, InvariantError, NonConvergenceError, PIDError, ResourceError
from .fixtures import generate_fixture
from .geometry import HPolytope, LinearProgram, VertexSet, enumerate_vertices, lp_solve
from .io import load, load_channel
from .prob import (
    Alphabet,
    Channel,
    JointDistribution,
    channel_mutual_information,
    compose,
    condition,
    conditional_mutual_information,
    entropy,
    marginalize,
    mutual_information,
)
from .redundancy import (
    CommonPartition,
    RedundancyResult,
    build_lambda_system,
    gk_common_information,
    redundancy_gh,
    redundancy_star,
    redundancy_wedge,
    unique_information,
)
from .union import UnionResult, broja_redundancy, excluded_information, synergy, union_star

__version__ = "0.1.0"
