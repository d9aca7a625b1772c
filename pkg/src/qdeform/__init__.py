"""Photon statistics of q-deformed optical states and the quantum limits
to estimating the deformation strength from intensity measurements."""

from .algebra import (
    DeformationKind,
    DeformationParams,
    delta_series,
    g_product,
    gamma_coefficient,
    log_delta,
    q_number,
)
from .errors import (
    BenchmarkError,
    DerivativeInstabilityError,
    DivergenceError,
    DomainError,
    OutOfSupportError,
)
from .estimation import (
    DerivativeConfig,
    EstimationReport,
    calibrate_intensity,
    classical_fisher,
    estimation_report,
    leading_order_qsnr,
    measurements_needed,
    qfi_diagonal,
    qfi_pure,
    qsnr,
)
from .montecarlo import (
    CountSample,
    CrbBenchmark,
    MleResult,
    crb_benchmark,
    log_likelihood,
    mle_epsilon,
    sample_counts,
)
from .states import (
    AmplitudeVector,
    CatSpec,
    CoherentSpec,
    PhotonDistribution,
    ProbeSpec,
    ThermalSpec,
    build_distribution,
    cat_distribution,
    coherent_distribution,
    extend_truncation,
    mean_photon,
    mean_photon_expansion,
    thermal_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "DeformationKind",
    "DeformationParams",
    "q_number",
    "log_delta",
    "g_product",
    "delta_series",
    "gamma_coefficient",
    "CoherentSpec",
    "ThermalSpec",
    "CatSpec",
    "ProbeSpec",
    "PhotonDistribution",
    "AmplitudeVector",
    "coherent_distribution",
    "thermal_distribution",
    "cat_distribution",
    "build_distribution",
    "mean_photon",
    "mean_photon_expansion",
    "extend_truncation",
    "DerivativeConfig",
    "EstimationReport",
    "classical_fisher",
    "qfi_pure",
    "qfi_diagonal",
    "qsnr",
    "measurements_needed",
    "leading_order_qsnr",
    "estimation_report",
    "calibrate_intensity",
    "CountSample",
    "MleResult",
    "CrbBenchmark",
    "sample_counts",
    "log_likelihood",
    "mle_epsilon",
    "crb_benchmark",
    "DomainError",
    "DivergenceError",
    "DerivativeInstabilityError",
    "OutOfSupportError",
    "BenchmarkError",
    "__version__",
]
