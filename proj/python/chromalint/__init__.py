"""Color-constancy benchmark harness and dataset-hygiene linter.

The heavy lifting lives in the C++ extension; this package re-exports it and
adds nothing else on purpose: Python results must be bit-identical to what the
CLI computes.
"""

from ._chromalint import (  # noqa: F401
    DataError,
    ErrorStats,
    EstimatorSpec,
    Finding,
    GroundTruthTable,
    Illuminant,
    LinearImage,
    PipelineError,
    angular_error,
    angular_error_rgb,
    camera_split_findings,
    compute_stats,
    detect_unsubtracted_black,
    diff_ground_truths,
    estimate,
    extract_ground_truth,
    make_folds,
    oracle_mismatch_medians,
    planckian_spd,
    rb_chromaticity,
    read_ppm16,
    saturation_mask_flags,
    spd_wavelengths,
    subtract_black,
    uniform_illumination_check,
    write_benchmark,
    write_ppm16,
    write_sidecar,
)

__version__ = "0.1.0"
