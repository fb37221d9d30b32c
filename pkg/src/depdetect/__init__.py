"""Detection of AI-generated text from dependency-relation label n-grams."""

from . import conllu, evalrep, featurize, gbdt, pipeline

__all__ = ["conllu", "evalrep", "featurize", "gbdt", "pipeline"]
__version__ = "0.1.0"
