"""Interference-aligned precoding with subspace conditioning for the
three-user SISO frequency-selective interference channel."""

from .channel_model import (
    AlignmentOperator,
    ChannelGenConfig,
    ChannelSet,
    DegenerateChannelError,
    compute_alignment_operator,
    generate_channels,
    trial_seed,
)
from .precoding import (
    AlignmentReport,
    PrecoderSet,
    SubspaceBases,
    WeightVector,
    build_bases,
    cj_precoders,
    precoders_from_weights,
    verify_alignment,
)
from .rate_eval import (
    EffectiveMatrices,
    LowerBoundContext,
    RateReport,
    build_effective_matrices,
    compute_lb_context,
    lower_bound,
    sum_rate_compact,
    sum_rate_direct,
    sum_rate_general,
    sum_rate_gradient,
)
from .schemes import (
    SolveTrace,
    SolverOptions,
    kt_op_weights,
    kt_sop1_weights,
    kt_sop2_weights,
    shv_orthonormalize,
)

__all__ = [
    "AlignmentOperator", "ChannelGenConfig", "ChannelSet", "DegenerateChannelError",
    "compute_alignment_operator", "generate_channels", "trial_seed",
    "AlignmentReport", "PrecoderSet", "SubspaceBases", "WeightVector", "build_bases",
    "cj_precoders", "precoders_from_weights", "verify_alignment",
    "EffectiveMatrices", "LowerBoundContext", "RateReport", "build_effective_matrices",
    "compute_lb_context", "lower_bound", "sum_rate_compact", "sum_rate_direct",
    "sum_rate_general", "sum_rate_gradient",
    "SolveTrace", "SolverOptions", "kt_op_weights", "kt_sop1_weights", "kt_sop2_weights",
    "shv_orthonormalize",
]
