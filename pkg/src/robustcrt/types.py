"""
Type definitions for robustcrt payloads.

Separated from the estimator modules to avoid circular imports; these are the
shapes written to JSON files and printed by the CLI.
"""

from typing import List, Optional, TypedDict


class EstimateRecord(TypedDict, total=False):
    """One reconstructed number as emitted by `robustcrt solve`."""
    index: int
    Y_hat: float
    mu_hat: float
    Q: int
    proper: bool
    ec_used: bool
    ec_consistency: Optional[int]
    ec_valid: Optional[bool]


class MetricsRecord(TypedDict, total=False):
    """One aggregated (snr, configuration) row of an experiment."""
    snr: float
    n: int
    l: int  # noqa: E741
    algo: str
    objective: str
    ensemble: str
    ec: bool
    trials: int
    avg_success: float
    perfect_success: float
    mean_iters: float
    mean_runtime_ms: Optional[float]
    avg_strict_success: Optional[float]


class HistogramRecord(TypedDict):
    """Iteration count frequency for one (n, snr) cell."""
    n: int
    snr: float
    scenario: str
    iterations: int
    count: int


class ObservationPayload(TypedDict, total=False):
    """On-disk observation file layout."""
    gamma: float
    M: List[int]
    R: List[List[float]]
    D: float
    sigma: List[float]
