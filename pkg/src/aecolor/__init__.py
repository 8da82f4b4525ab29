"""Acyclic edge coloring of high-girth regular graphs: iterative semi-random
nibble with reserved-color finishing, schedule calculus, verifiers and
brute-force oracles."""

__version__ = "0.1.0"

from .coloring import (
    UNCOLORED,
    BicoloredCycle,
    EdgeColoring,
    brute_force_acyclic_index,
    empty_coloring,
    find_bicolored_cycles,
    load_coloring,
    properness_violations,
    save_coloring,
)
from .cycles import (
    INCOMPATIBLE,
    LABEL_BOTH,
    LABEL_C,
    LABEL_D,
    LABEL_NONE,
    CycleRegistry,
    build_cycle_registry,
    cycle_multiplicity,
)
from .finisher import build_final_lists, check_finishing_hypotheses, complete_coloring, final_gamma
from .graphs import (
    GIRTH_UNBOUNDED,
    Graph,
    build_graph,
    generate_high_girth_regular,
    generate_random_regular,
    girth,
    load_graph,
    save_graph,
)
from .nibble import (
    IterationStats,
    NibblePolicy,
    NibbleResult,
    NibbleState,
    check_properties,
    init_state,
    p_keep,
    q_keep,
    retention_trials,
    run_iteration,
    run_nibble,
    significant_pairs,
)
from .regularizer import (
    EmbedResult,
    bipartite_regular_edge_coloring,
    embed_regular,
    embed_step,
    power_coloring,
)
from .reservation import (
    ReservedSets,
    check_reservation,
    resample_until_valid,
    reserve_probability,
    sample_reserved_sets,
)
from .schedule import (
    ScheduleParams,
    check_weighted_lll,
    compute_schedule,
    palette_size,
    primed_sequences,
    stopping_threshold,
    verify_schedule_lemmas,
)
from .baselines import compare, repair_color, run_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
