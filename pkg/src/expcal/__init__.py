"""Post-hoc temperature calibration (expectation consistency and temperature
scaling) together with the high-dimensional asymptotic theory of calibration
for ridge-penalized logistic regression."""
from .calibrate import (
    TemperatureFit,
    UnsatisfiableTargetError,
    apply_temperature,
    fit_ec,
    fit_ec_topn,
    fit_ts,
    mean_confidence,
)
from .metrics import (
    InvalidInputError,
    LabeledLogits,
    MetricsReport,
    ReliabilityBins,
    accuracy,
    binned_ece,
    brier,
    nll,
    reliability_curve,
    report,
    softmax_confidence,
)
from .synthetic import GenerativeModel, SyntheticDataset, corrupt_labels, erm_train, sample_dataset

__version__ = "0.1.0"

__all__ = [
    "GenerativeModel", "InvalidInputError", "LabeledLogits", "MetricsReport", "ReliabilityBins",
    "SyntheticDataset", "TemperatureFit", "UnsatisfiableTargetError", "accuracy", "apply_temperature",
    "binned_ece", "brier", "corrupt_labels", "erm_train", "fit_ec", "fit_ec_topn", "fit_ts",
    "mean_confidence", "nll", "reliability_curve", "report", "sample_dataset", "softmax_confidence",
]
