"""raggednn - graph neural networks over ragged mini-batches of variable-size graphs."""

__version__ = "0.1.0"
