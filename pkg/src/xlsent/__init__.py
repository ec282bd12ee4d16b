"""Cross-lingual review polarity with a bidirectional RNN and translation pivoting.

Reviews in any language are machine-translated into English and classified
by a model trained on English data only: first on a broad general corpus,
then fine-tuned on a smaller in-domain one.
"""

__version__ = "0.1.0"

from .corpus import Label, LabeledDataset, Review, load_jsonl, save_jsonl
from .estimators import BiRNNSentimentClassifier, LexiconClassifier, MajorityClassifier
from .model import CellType, Hyperparams, Prediction
from .training import TrainConfig, finetune, pretrain

__all__ = [
    "BiRNNSentimentClassifier", "CellType", "Hyperparams", "Label", "LabeledDataset",
    "LexiconClassifier", "MajorityClassifier", "Prediction", "Review", "TrainConfig",
    "finetune", "load_jsonl", "pretrain", "save_jsonl",
]
