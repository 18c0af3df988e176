"""Code-to-text matching: subword tokenization, AST linearization, four
ranking models, training/evaluation, and a search service."""

__version__ = "0.1.0"
