"""Python bindings for the adrl C++ core."""

from ._adrl import (
    ConfigError,
    Dataset,
    DivergenceError,
    apply_missingness,
    complete_views,
    evaluate,
    format_mean_std,
    generate_synthetic,
    gradcheck,
    split_dataset,
    train,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DivergenceError",
    "apply_missingness",
    "complete_views",
    "evaluate",
    "format_mean_std",
    "generate_synthetic",
    "gradcheck",
    "split_dataset",
    "train",
]
