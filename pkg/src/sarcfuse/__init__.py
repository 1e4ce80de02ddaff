"""Four-branch sarcasm classifier: adapted encoder, frozen affective
extractors, convolutional word-vector branch, late fusion head."""

__version__ = "0.1.0"

from .corpus import (
    BENCHMARK_COUNTS,
    DatasetBundle,
    Example,
    LengthStats,
    compute_length_stats,
    load_dataset,
    merge_training_corpora,
    write_bundle,
)
from .errors import (
    CheckpointError,
    ConfigError,
    CoverageError,
    DivergenceError,
    EmptyCorpusError,
    LabelError,
    ManifestMismatchError,
    ParseError,
    SarcfuseError,
    ShapeError,
    VectorFormatError,
)
from .evalkit import MetricsReport, render_results_table, score
from .extractors import (
    EmotionExtractor,
    FeatureCache,
    SentimentExtractor,
    extract_batched,
)
from .fusion import (
    FusionConfig,
    SarcasmPipeline,
    TrainConfig,
    load_pipeline,
    train_fused,
)
from .lexical import (
    EmbeddingTable,
    Vocabulary,
    build_vocabulary,
    load_embeddings,
    porter_stem,
    word_tokenize,
)
from .sarc_encoder import MlmConfig, SarcasmEncoder, mlm_pretrain
from .cnn_branch import CnnBranch, CnnConfig
from .baselines import (
    BaselineSpec,
    cnn_baseline_train_eval,
    cnn_lstm_dnn_train_eval,
    import_external_predictions,
    nbow_train_eval,
)
from .config import RunConfig, load_run_config

__all__ = [
    "BENCHMARK_COUNTS",
    "BaselineSpec",
    "CheckpointError",
    "CnnBranch",
    "CnnConfig",
    "ConfigError",
    "CoverageError",
    "DatasetBundle",
    "DivergenceError",
    "EmbeddingTable",
    "EmotionExtractor",
    "EmptyCorpusError",
    "Example",
    "FeatureCache",
    "FusionConfig",
    "LabelError",
    "LengthStats",
    "ManifestMismatchError",
    "MetricsReport",
    "MlmConfig",
    "ParseError",
    "RunConfig",
    "SarcasmEncoder",
    "SarcasmPipeline",
    "SarcfuseError",
    "SentimentExtractor",
    "ShapeError",
    "TrainConfig",
    "VectorFormatError",
    "Vocabulary",
    "build_vocabulary",
    "cnn_baseline_train_eval",
    "cnn_lstm_dnn_train_eval",
    "compute_length_stats",
    "extract_batched",
    "import_external_predictions",
    "load_dataset",
    "load_embeddings",
    "load_pipeline",
    "load_run_config",
    "merge_training_corpora",
    "mlm_pretrain",
    "nbow_train_eval",
    "porter_stem",
    "render_results_table",
    "score",
    "train_fused",
    "word_tokenize",
    "write_bundle",
]
