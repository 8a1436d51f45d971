"""Cycle contextuality behaviors, quantum realizations, and a unitary
friend/superobserver record protocol, with brute-force cross checks."""

from .linalg import ALG_TOL, PROB_TOL, commutator_norm, is_unitary, kron
from .scenario import (
    Behavior,
    ChainResult,
    ContextualityVerdict,
    PossibilisticBehavior,
    Scenario,
    check_no_disturbance,
    enumerate_global_assignments,
    is_logically_contextual,
    make_cycle_scenario,
    possibilistic_collapse,
    propagate_chain,
)
from .ncycle import (
    FlipMask,
    even_ncycle_behavior,
    even_to_unified_mask,
    odd_ncycle_behavior,
    odd_to_unified_mask,
    relabel,
    unified_ncycle_behavior,
)
from .quantum import (
    PairDistribution,
    QuantumRealization,
    SearchFailure,
    behavior_from_realization,
    born_pair,
    find_quantum_realization,
    kcbs_realization,
    verify_compatibility,
)
from .ewf import (
    ParadoxReport,
    Protocol,
    SimulationTrace,
    build_counterfactual_protocol,
    build_measure_undo_protocol,
    build_protocol,
    commutation_certificates,
    measurement_unitary,
    paradox_report,
    record_distribution,
    register_marginal,
    simulate,
)
from .oracles import OracleResult, exhaustive_support_check, projection_sequential

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
