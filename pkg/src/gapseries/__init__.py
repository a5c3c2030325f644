"""Numerics for entire gap series: maximal term, central index, modulus
extrema, exceptional sets and their generalized measures."""

from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    GapSeriesError,
    HorizonExceeded,
    InvalidTolerance,
    MonotoneViolation,
    OutsideExceptionalSetWarning,
    QuadratureError,
    TailNotCertified,
)
from .series import (
    CentralIndexTable,
    EvalResult,
    ExponentSequence,
    MaximalTerm,
    ModulusResult,
    PhaseSearchOpts,
    SeriesSpec,
    TermValue,
    central_index_table,
    evaluate,
    geometric_exponents,
    log_maximal_term,
    max_modulus,
    min_modulus,
    power_exponents,
    sum_modulus,
    term_value,
)
from .measure import (
    IntervalSet,
    MonotoneFn,
    affine,
    builtin,
    check_class_tag,
    density_measure,
    exponential,
    h_log_measure,
    h_measure,
    identity,
    log_measure,
    log_shifted,
    numeric_inverse,
    power,
)
from .criteria import (
    ClassMembershipParams,
    CriterionReport,
    LowerOrderEstimate,
    MembershipReport,
    class_membership,
    criterion_exp_inverse,
    criterion_gap,
    criterion_inverse_shifted,
    criterion_plain_inverse,
    criterion_power_growth,
    criterion_scaled_inverse,
    criterion_scaled_inverse_shifted,
    estimate_lower_order,
    make_report,
)
from .constructions import (
    DampingGadget,
    WitnessSeries,
    build_damping_gadget,
    build_witness_series,
    covered_transitions,
    damped_series,
    domination_margin,
    leading_term_residual,
    residual_threshold,
    transition_exceptional_set,
    transition_measure_bound,
    transition_zones,
    witness_exceptional_set,
    witness_measure_partials,
    witness_ratio,
)

__version__ = "0.1.0"
