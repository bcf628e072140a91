"""Binary XOR tree erasure code for distributed full recovery."""

from .augmentation import (
    AugmentationDecision,
    augment_replicate,
    augment_sibling,
    survival_after_losses,
)
from .codec import Codeword, decode, decode_codeword, encode, encode_bytes
from .combinatorics import (
    count_decodable,
    replication_decode_prob,
    stirling2,
    uniform_decode_prob,
)
from .cost import CostTables, cost_tables, expected_cost
from .errors import (
    BadHeader,
    BudgetTooSmall,
    DegenerateModel,
    InvalidInput,
    InvalidLoss,
    NonDecodable,
    TreeplicationError,
)
from .health import (
    DiagonalCover,
    cover_survival_prob,
    decodable_via_cover,
    principal_cover,
    principal_l_health,
)
from .nonuniform import SelectionDistribution, decode_prob_Q, n_to_p
from .optimizer import (
    SearchResult,
    min_n_for_target,
    optimal_distribution,
    verify_optimality_properties,
)
from .recovery import RecoverySchedule, plan_recovery, recovery_cost
from .simulator import (
    BirthDeathConfig,
    RunStats,
    SamplingModel,
    birth_death_run,
    mc_comm_cost,
    mc_decodability,
    mc_mds_cost,
    sample_multiset,
)
from .tree import Multiset, TreeShape, VertexId, is_decodable

__version__ = "0.1.0"
