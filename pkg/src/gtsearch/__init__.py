"""Multistage group testing: concatenated test codes, staged strategies and bounds."""

from .bounds import (
    general_bound,
    info_bound,
    optimize_params,
    optimize_rate,
    rate_f,
    rate_finite,
    stage_costs,
    stationarity_residual,
    worst_case_total,
)
from .codes import BinaryCode, ConcatParams, build_code, consistent_sets, layer_weights, outcome
from .session import Oracle, Session, Transcript, check_unique_consistency, run_session, verify_exhaustive
from .strategy_general import GeneralStrategy, run_general
from .strategy_two import TwoStageStrategy, run_two

__version__ = "0.1.0"
