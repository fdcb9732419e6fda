"""Canonical correlation forests and multispectral pixel classification."""

from ._core import (
    CcaResult,
    ConfigError,
    DegenerateInputError,
    Forest,
    ForestParams,
    ImbalanceError,
    InputError,
    LoadError,
    ParseError,
    UnsupportedVersionError,
    canonical_correlation,
    deserialize,
    generate_samples,
    load_forest,
    map_survey_class,
    normalize_reflectance,
    one_hot,
    prototypes_json,
    rotated_two_class,
    run_cli,
    train_forest,
)

__all__ = [
    "CcaResult",
    "ConfigError",
    "DegenerateInputError",
    "Forest",
    "ForestParams",
    "ImbalanceError",
    "InputError",
    "LoadError",
    "ParseError",
    "UnsupportedVersionError",
    "canonical_correlation",
    "deserialize",
    "generate_samples",
    "load_forest",
    "map_survey_class",
    "normalize_reflectance",
    "one_hot",
    "prototypes_json",
    "rotated_two_class",
    "run_cli",
    "train_forest",
]
