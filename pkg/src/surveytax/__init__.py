"""surveytax: survey-paper taxonomy classification with attributed graphs.

Builds text / co-author / co-category graphs from paper metadata, trains a
two-layer GCN with explicit gradients, evaluates against LLM zero-/few-shot
judging, and exports GCN weak labels for a fine-tuning harness.
"""

from .corpus import PaperRecord, SubsetSpec, Taxonomy
from .graphs import AttributedGraph, NormalizedAdjacency
from .gcn import GcnModel, TrainConfig, TrainRun
from .evaluation import EvalReport
from .splits import SplitSpec

__version__ = "0.1.0"

__all__ = [
    "PaperRecord",
    "SubsetSpec",
    "Taxonomy",
    "AttributedGraph",
    "NormalizedAdjacency",
    "GcnModel",
    "TrainConfig",
    "TrainRun",
    "EvalReport",
    "SplitSpec",
    "__version__",
]
