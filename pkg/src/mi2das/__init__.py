"""Multi-layer adaptive intrusion detection engine: hierarchical traffic
pooling, open-set attack recognition, fine-grained attack classification,
and an incremental update loop driven by semi-supervised and active learning.
"""

__version__ = "0.1.0"

from .labels import ATTACK_CLASSES, CLASS_ORDER, ClassLabel

__all__ = ["ClassLabel", "CLASS_ORDER", "ATTACK_CLASSES", "__version__"]
