"""sigaware: measure and improve the signal awareness of code classifiers.

The toolkit is built around a self-contained mini imperative language
with an exact buffer-overflow analyzer, so every stage of the loop is
checkable: corpus generation with ground-truth labels, token-level
delta-debugging reduction, signal-preserving augmentation, a reference
classifier with complexity-ranked training, signal-aware-recall audits,
and complexity-distribution introspection of model predictions.
"""

from sigaware._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
