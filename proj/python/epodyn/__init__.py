"""Expressed-private opinion dynamics for code-review panels."""

from ._core import (
    EpoParameters,
    Error,
    EvalReport,
    FitResult,
    InfluenceGraph,
    InputError,
    NumericalError,
    PcaModel,
    QualityReport,
    ValidationError,
    __version__,
    aggregate_jsonl,
    build_graph,
    epo_step,
    error_metrics,
    evaluate_objective,
    explained_variance_spectrum,
    fit,
    pca_fit,
    pca_project,
    pca_transform_normalized,
    predict,
    project_simplex,
    quality_report,
    random_feasible_params,
    run_cli,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
