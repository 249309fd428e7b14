"""Feature screening for cluster analysis by one-dimensional clustering scores."""

from .errors import CalibrationError, CosciError, FitError, IngestionError, InputError
from .evalmetrics import (ConfusionCounts, cer, confusion_counts, kmeans_lloyd,
                          per_signal_cer, rand_index)
from .fdr_selector import (FdrConfig, MixtureDensity, NullModel, PsiStats,
                           SelectionResult, compute_psi, data_driven_alpha,
                           fit_empirical_null, lindsey_density, local_fdr,
                           two_stage_select)
from .interactions import (DirectionGrid, PairScore, circle_grid, direction_grid,
                           pair_score, pair_scores, pairwise_screen)
from .merge_engine import (FeatureScore, MergeEvent, MergeTrace, SortedFeature,
                           clustering_score, merge_path, merge_size,
                           restricted_score, score_columns, score_feature,
                           sort_feature)
from .screening import (ScreenResult, ThresholdSpec, calibrate_threshold,
                        detection_table, screen_fixed)
from .simgen import (CopulaSpec, DatasetMatrix, DistributionSpec, sample_copula,
                     sample_distribution, sample_experiment)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "CosciError", "FitError", "IngestionError", "InputError",
    "ConfusionCounts", "cer", "confusion_counts", "kmeans_lloyd",
    "per_signal_cer", "rand_index",
    "FdrConfig", "MixtureDensity", "NullModel", "PsiStats", "SelectionResult",
    "compute_psi", "data_driven_alpha", "fit_empirical_null", "lindsey_density",
    "local_fdr", "two_stage_select",
    "DirectionGrid", "PairScore", "circle_grid", "direction_grid", "pair_score",
    "pair_scores", "pairwise_screen",
    "FeatureScore", "MergeEvent", "MergeTrace", "SortedFeature",
    "clustering_score", "merge_path", "merge_size", "restricted_score",
    "score_columns", "score_feature", "sort_feature",
    "ScreenResult", "ThresholdSpec", "calibrate_threshold", "detection_table",
    "screen_fixed",
    "CopulaSpec", "DatasetMatrix", "DistributionSpec", "sample_copula",
    "sample_distribution", "sample_experiment",
]
