"""Maximum-range analysis for destination-led distributed transmit beamforming.

Chains a link budget, closed-form synchronization error variances, an
integer preamble-length optimizer and a Gamma model of the random
coherent combining gain to find the largest deployment distance meeting
a post-beamforming SNR requirement with a given probability. Monte-Carlo
phase sampling and a waveform-level protocol simulator serve as the
empirical cross-checks.
"""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig, parse_config, snr_grid
from .gain_dist import (
    GainDistribution,
    gain_cdf,
    gain_quantile,
    gamma_params,
    guaranteed_gain,
    reg_lower_gamma,
)
from .link_budget import (
    LinkBudget,
    PathLossModel,
    db_to_linear,
    distance_from_snr,
    downlink_snr,
    linear_to_db,
    noise_power_dbm,
    prebf_snr,
)
from .montecarlo import (
    GainSampleSet,
    draw_gain_samples,
    empirical_outage,
    empirical_quantile,
    sample_gain,
    sample_gains,
    split_seeds,
)
from .optimizer import (
    InfeasibleBudgetError,
    PreambleAllocation,
    count_feasible,
    enumerate_feasible,
    minimum_overhead,
    optimize_preambles,
)
from .range_solver import (
    GainCurve,
    NoFeasiblePointError,
    RangeSolution,
    SweepRow,
    gain_curve,
    max_range,
    min_feasible_snr,
    required_gain,
    sweep,
)
from .signal_sim import (
    ComplexBaseband,
    TrialOutcome,
    decode_feedback,
    encode_feedback,
    estimate_freq_offset,
    estimate_phase,
    kalman_track,
    run_protocol_trial,
    run_protocol_trials,
    zc_sequence,
)
from .variance import (
    ProtocolConfig,
    VarianceBreakdown,
    combining_phase_variance,
    feedback_variance,
    freq_est_variance,
    kalman_steady_variance,
    overhead_samples,
    phase_est_variance,
)
