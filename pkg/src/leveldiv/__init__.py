"""Tile-pattern divergence metrics and evolutionary level generation."""

from .analysis import (
    Dendrogram,
    DendrogramMerge,
    DistanceMatrix,
    HeatmapCell,
    HeatmapTable,
    average_linkage,
    compare_sets,
    cut_dendrogram,
    pairwise_matrix,
)
from .corpus import (
    SMB_LEVEL_TYPES,
    load_smb_corpus,
    load_smb_level,
    load_tiny_patch,
    smb_level_names,
    smb_level_path,
    tiny_patch_path,
)
from .divergence import (
    ContributionEntry,
    ContributionReport,
    DivergenceConfig,
    DivergenceResult,
    contributions,
    fitness,
    kl_div,
    smoothed_prob,
    weighted_fitness,
    write_contributions_csv,
)
from .errors import (
    DimsMismatchError,
    DuplicateNameError,
    EmptyDistributionError,
    EmptyInputError,
    FilterTooLargeError,
    InvalidCharacterError,
    InvalidCutError,
    LevelDivError,
    LevelIoError,
    NegativeDistanceError,
    RaggedRowsError,
    SnippetTooWideError,
)
from .evolve import (
    CandidateCounts,
    Conv,
    EvolutionConfig,
    EvolutionResult,
    FitnessEvaluator,
    Flip,
    GridEdit,
    Trace,
    TraceEntry,
    conv_mutate,
    flip_mutate,
    hill_climb,
    incremental_fitness_update,
    random_init,
    snippet_fitness,
)
from .levels import (
    MARIO_ALPHABET,
    MARIO_TILE_NAMES,
    LevelSet,
    TileAlphabet,
    TileGrid,
    load_level,
    load_level_set,
    parse_level,
    serialize_level,
)
from .patterns import (
    FilterDims,
    Pattern,
    PatternDistribution,
    distributions_for,
    extract_distribution,
    frequency_report,
    merge_distributions,
    window_count,
    write_frequency_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateCounts",
    "ContributionEntry",
    "ContributionReport",
    "Conv",
    "Dendrogram",
    "DendrogramMerge",
    "DimsMismatchError",
    "DistanceMatrix",
    "DivergenceConfig",
    "DivergenceResult",
    "DuplicateNameError",
    "EmptyDistributionError",
    "EmptyInputError",
    "EvolutionConfig",
    "EvolutionResult",
    "FilterDims",
    "FilterTooLargeError",
    "FitnessEvaluator",
    "Flip",
    "GridEdit",
    "HeatmapCell",
    "HeatmapTable",
    "InvalidCharacterError",
    "InvalidCutError",
    "LevelDivError",
    "LevelIoError",
    "LevelSet",
    "MARIO_ALPHABET",
    "MARIO_TILE_NAMES",
    "NegativeDistanceError",
    "Pattern",
    "PatternDistribution",
    "RaggedRowsError",
    "SMB_LEVEL_TYPES",
    "SnippetTooWideError",
    "TileAlphabet",
    "TileGrid",
    "Trace",
    "TraceEntry",
    "average_linkage",
    "compare_sets",
    "contributions",
    "conv_mutate",
    "cut_dendrogram",
    "distributions_for",
    "extract_distribution",
    "fitness",
    "flip_mutate",
    "frequency_report",
    "hill_climb",
    "incremental_fitness_update",
    "kl_div",
    "load_level",
    "load_level_set",
    "load_smb_corpus",
    "load_smb_level",
    "load_tiny_patch",
    "merge_distributions",
    "pairwise_matrix",
    "parse_level",
    "random_init",
    "serialize_level",
    "smb_level_names",
    "smb_level_path",
    "smoothed_prob",
    "snippet_fitness",
    "tiny_patch_path",
    "weighted_fitness",
    "window_count",
    "write_contributions_csv",
    "write_frequency_csv",
]
