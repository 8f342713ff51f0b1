"""Reference fine-tuning and serving of a token model as a fitness predictor."""

__version__ = "0.1.0"
