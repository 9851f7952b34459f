"""Distributed state estimation for two-time-scale systems (CSTR benchmark)."""

from ._twoscale import (
    CstrParams,
    ExperimentConfig,
    RunRecord,
    SchemeResult,
    cstr_rhs,
    decompose_check,
    export_csv,
    fast_steady_temperature,
    import_csv,
    load_config,
    metrics,
    refine_steady_state,
    rmse_index,
    run,
    sigma_index,
)

__all__ = [
    "CstrParams",
    "ExperimentConfig",
    "RunRecord",
    "SchemeResult",
    "cstr_rhs",
    "decompose_check",
    "export_csv",
    "fast_steady_temperature",
    "import_csv",
    "load_config",
    "metrics",
    "refine_steady_state",
    "rmse_index",
    "run",
    "sigma_index",
]
