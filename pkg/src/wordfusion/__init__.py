"""Knowledge-fused word embeddings.

Pretrained word vectors are combined with ConceptNet related words, refined
with Kohonen-style grid updates, projected by PCA, and scored on similarity
benchmarks. Every stage is deterministic: identical inputs give byte-identical
outputs.
"""

__version__ = "0.1.0"

from . import conceptnet, embedding_store, evaluation, fusion, pca, pipeline, som
from .conceptnet import ConceptEdge, Neighbor, NeighborSet, fetch_neighbors_http, parse_dump
from .embedding_store import EmbeddingTable, load_text, save_text
from .errors import BuildStageError, ConfigError, FetchError, FormatError, WordFusionError
from .evaluation import EvalReport, SimilarityPair, evaluate, parse_simlex, spearman
from .fusion import CombineConfig, FusedVector, combine_word, fuse, scale
from .pca import PcaModel, fit, jacobi_eigh, project_embeddings, transform
from .pipeline import PipelineConfig, RunManifest, run_build
from .som import SomConfig, refine_vocabulary, refine_word

__all__ = [
    "__version__",
    "BuildStageError",
    "CombineConfig",
    "ConceptEdge",
    "ConfigError",
    "EmbeddingTable",
    "EvalReport",
    "FetchError",
    "FormatError",
    "FusedVector",
    "Neighbor",
    "NeighborSet",
    "PcaModel",
    "PipelineConfig",
    "RunManifest",
    "SimilarityPair",
    "SomConfig",
    "WordFusionError",
    "combine_word",
    "conceptnet",
    "embedding_store",
    "evaluate",
    "evaluation",
    "fetch_neighbors_http",
    "fit",
    "fuse",
    "fusion",
    "jacobi_eigh",
    "load_text",
    "parse_dump",
    "parse_simlex",
    "pca",
    "pipeline",
    "project_embeddings",
    "refine_vocabulary",
    "refine_word",
    "run_build",
    "save_text",
    "scale",
    "som",
    "spearman",
    "transform",
]
