"""lmft: fine-tune one compact text encoder on ground-truth vs weak labels.

Consumes the classifier pipeline's file contracts only: corpus JSON Lines in,
weak-label CSV in, report JSON and comparison CSV out.
"""

from .trainer import FinetuneConfig, finetune, finetune_multi
from .compare import compare, write_comparison_csv

__version__ = "0.1.0"

__all__ = [
    "FinetuneConfig",
    "finetune",
    "finetune_multi",
    "compare",
    "write_comparison_csv",
    "__version__",
]
