"""Time series forecasting as vector completion: nuclear-norm minimization of
convolution matrices over a learned orthonormal transform, plus the transform
learners, data augmentation, model-size selection, diagnostics, and a
benchmark harness."""

from .convolution import (
    ConvOperator,
    DftFactors,
    SamplingMask,
    TargetVector,
    TimeSeries,
    circular_shift,
    conv_adjoint,
    conv_matrix,
    dft_factors,
    fourier_l1,
    numerical_rank,
    project_mask,
    reconstruct_principal,
)
from .diagnostics import (
    CoherenceReport,
    SpectrumSummary,
    coherence,
    coherence_report,
    generalized_conv_coherence,
    spectral_entropy,
    spectral_gini,
    spectrum_summary,
    transform_coherences,
)
from .solvers import (
    AdmmConfig,
    PcpResult,
    SolveInfo,
    cpcp,
    lbcnnm_solve,
    orthonormal_fit_l1,
    orthonormal_fit_l2,
    pcp,
    soft_threshold,
    svt,
)
from .transform import (
    ConvolutionalTransform,
    TransformModel,
    learn_pca,
    learn_pcp,
    learn_pcp_incomplete,
    load_transform,
    save_transform,
)
from .augmentation import (
    AugmentedDataMatrix,
    avg_sample,
    cnnm_samples,
    combine,
    exps_samples,
    filter_by_fit,
    generation_matrix,
    line_samples,
)
from .model_selection import (
    ModelSizeSearch,
    estimate_model_size,
    sdr,
    spectral_frequency,
)
from .metrics import nrmse, smape
from .forecasters import (
    AverageForecaster,
    CNNMForecaster,
    DriftForecaster,
    ExpSForecaster,
    ForecastReport,
    LbCNNMForecaster,
    LsrForecaster,
    NaiveForecaster,
    forecast_baseline,
    forecast_lbcnnm,
    forecast_missing,
    forecast_multi_kernel,
)
from .datasets import M4_HORIZONS, load_dataset
from .benchmark import BenchmarkConfig, run_benchmark

__version__ = "0.1.0"
