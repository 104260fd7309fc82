"""Fine-grained uncertainty relations, steering and the values of XOR games."""

from .clifford import effects_from_observable, gamma_generators, observable
from .complementarity import (
    SequentialPoint,
    max_p_second,
    p_second,
    parity_residual,
    post_measurement_certainty,
    tradeoff_curve,
)
from .games import (
    GameValueReport,
    QuantumStrategy,
    XorGame,
    box_value,
    classical_value,
    game_from_relation,
    make_chsh,
    make_retrieval,
    ns_value,
    optimize_xor_vectors,
    quantum_value,
)
from .linalg import hermitian_eig, partial_trace, tensor_product, validate_density
from .models import NoSignallingBox, is_no_signalling, lhv_game_value, lhv_model, pr_box
from .steering import Ensemble, ensembles_consistent, measurement_for_ensemble, steer
from .uncertainty import (
    FineGrainedRelation,
    MeasurementSet,
    fine_grained_relation,
    min_entropic_bound,
    min_entropy,
    shannon_entropy,
    uncertainty_operator,
    zeta,
    zeta_clifford,
)

__version__ = "0.1.0"
