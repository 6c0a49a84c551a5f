"""Offensive-language identification for code-mixed Dravidian social-media text.

Classical pipeline: normalization, bag-of-words or unigram-subword tokens,
mutual-information feature selection, naive Bayes / linear SVM / random
forest, weighted-F1 evaluation and probability-averaging ensembles.
"""

__version__ = "0.1.0"
