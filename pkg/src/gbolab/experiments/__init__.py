"""Numerical experiments: smoothing-estimate ratios, the high-frequency
ill-posedness pipeline, and the scaling-law check, plus shared report
plumbing."""

from .illposed import (
    FrequencyProfile,
    IllposedParams,
    QuadratureError,
    convolution_power,
    convolution_power_oracle,
    hN_sobolev_norm,
    illposed_build_hN,
    illposed_compute_v,
    illposed_growth_fit,
    illposed_phase_P,
    illposed_v_details,
    oracle_agreement,
    support_audit,
    torus_duhamel_oracle,
)
from .linear_ratios import (
    estimate_ratio,
    free_evolution_spacetime,
    kato_smoothing_ratio,
    lowfreq_ratio,
    maximal_function_ratio,
    plane_wave_growth_exponent,
    xst_group_ratio,
)
from .packets import (
    check_wraparound,
    embed_field,
    make_packet_ensemble,
    max_active_frequency,
    plane_wave,
)
from .reporting import (
    ExperimentReport,
    RatioStatistics,
    write_report_csv,
    write_report_json,
)
from .scaling import scaling_invariance_check

__all__ = [
    "ExperimentReport",
    "FrequencyProfile",
    "IllposedParams",
    "QuadratureError",
    "RatioStatistics",
    "check_wraparound",
    "convolution_power",
    "convolution_power_oracle",
    "embed_field",
    "estimate_ratio",
    "free_evolution_spacetime",
    "hN_sobolev_norm",
    "illposed_build_hN",
    "illposed_compute_v",
    "illposed_growth_fit",
    "illposed_phase_P",
    "illposed_v_details",
    "kato_smoothing_ratio",
    "lowfreq_ratio",
    "make_packet_ensemble",
    "maximal_function_ratio",
    "max_active_frequency",
    "oracle_agreement",
    "plane_wave",
    "plane_wave_growth_exponent",
    "scaling_invariance_check",
    "support_audit",
    "torus_duhamel_oracle",
    "write_report_csv",
    "write_report_json",
    "xst_group_ratio",
]
