"""Timed-system emptiness via split-width decompositions and tree automata.

The pipeline: timed behaviors become words with timing constraints,
well-timed words decompose into bounded-width split-trees, split-trees
compile into special tree terms, and two layered bottom-up tree automata
(realizability, then system conformance) decide emptiness with witness
extraction.
"""

from .errors import (
    BackwardConstraint,
    ClockMatchViolation,
    ColorClash,
    IllFormedRun,
    InternalInconsistency,
    LabelMismatch,
    ModelError,
    NotLinear,
    SplitwidthError,
    StackCrossing,
    TermSyntaxError,
    TooManyRounds,
    Unrealizable,
    WellTimedViolation,
    WidthExceeded,
)
from .tcw import (
    Constraint,
    Interval,
    Owner,
    RawGraph,
    Stcw,
    UNTAGGED,
    ZETA,
    brute_force_realizable,
    check_realization,
    check_well_timed,
    is_simple,
    realize,
    stcw_from_json,
    stcw_to_dot,
    stcw_to_json,
    validate_split_tcw,
    validate_tcw,
)
from .stt import (
    Atom,
    AddConstraint,
    AddSucc,
    Combine,
    ColoredGraph,
    Forget,
    Rename,
    SttTerm,
    eval_term,
    is_km_stt,
    is_monotonic,
    parse_term,
    serialize_term,
    term_from_json,
    term_to_json,
)
from .decompose import (
    SplitTree,
    decompose_mpda,
    decompose_ta,
    decompose_tpda,
    required_width,
    split_tree_to_dot,
    split_tree_to_json,
    split_tree_to_stt,
)
from .validity import ValidityState, accepts, is_accepting, reachable_states
from .systems import (
    Nop,
    Pop,
    Push,
    SystemAutomaton,
    SystemState,
    TimedSystem,
    Transition,
    enumerate_accepting_runs,
    micro_decompose,
    round_normalize,
    sem_stcw,
    system_from_json,
    system_to_json,
)
from .emptiness import (
    EmptinessResult,
    Witness,
    brute_force_emptiness,
    check_emptiness,
    tree_automaton_emptiness,
    witness_to_run,
)

__version__ = "0.1.0"
