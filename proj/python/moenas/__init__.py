"""Surrogate-assisted multiobjective architecture search."""

from ._core import (
    GENE_CARDINALITY,
    GENE_NAMES,
    SPACE_SIZE,
    CheckpointError,
    ConfigError,
    EngineConfig,
    EvaluationError,
    Genome,
    InvalidGenome,
    MoenasError,
    ObjectiveConfig,
    RandomForest,
    RangeError,
    TrainingMetrics,
    ValueScoreTable,
    assess,
    count_params,
    decode,
    dominates,
    ese,
    ese_max,
    execute_run,
    f2,
    hypervolume,
    igd,
    init_weights,
    neighborhoods,
    nondominated,
    objectives,
    pbi,
    resume_run,
    run,
    subproblem_probs,
    synthetic_metrics,
    true_front,
)

__all__ = [
    "GENE_CARDINALITY",
    "GENE_NAMES",
    "SPACE_SIZE",
    "CheckpointError",
    "ConfigError",
    "EngineConfig",
    "EvaluationError",
    "Genome",
    "InvalidGenome",
    "MoenasError",
    "ObjectiveConfig",
    "RandomForest",
    "RangeError",
    "TrainingMetrics",
    "ValueScoreTable",
    "assess",
    "count_params",
    "decode",
    "dominates",
    "ese",
    "ese_max",
    "execute_run",
    "f2",
    "hypervolume",
    "igd",
    "init_weights",
    "neighborhoods",
    "nondominated",
    "objectives",
    "pbi",
    "resume_run",
    "run",
    "subproblem_probs",
    "synthetic_metrics",
    "true_front",
]
