from .dataset import (
    COMMENT_FAMILIES,
    FEATURE_FAMILIES,
    POST_FAMILIES,
    Dataset,
    Featurizer,
    IngestReport,
    dataset_from_records,
    load_dataset,
    parse_feature_spec,
)
from .harness import (
    DEFAULT_T_GRID,
    EvalReport,
    PopularityNullResult,
    SweepResult,
    popularity_labels,
    popularity_null,
    run_config,
    time_sweep,
)
from .significance import corrected_resampled_t, significance, wilcoxon_signed_rank
from .splits import FoldSplit, make_splits
from .transfer import TransferResult, transfer_degradation, transfer_matrix

__all__ = [
    "COMMENT_FAMILIES", "DEFAULT_T_GRID", "FEATURE_FAMILIES", "POST_FAMILIES", "Dataset", "EvalReport",
    "Featurizer", "FoldSplit", "IngestReport", "PopularityNullResult", "SweepResult", "TransferResult",
    "corrected_resampled_t", "dataset_from_records", "load_dataset", "make_splits", "parse_feature_spec",
    "popularity_labels", "popularity_null", "run_config", "significance", "time_sweep",
    "transfer_degradation", "transfer_matrix", "wilcoxon_signed_rank",
]
