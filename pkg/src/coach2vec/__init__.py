"""coach2vec: encode soccer coaches' playing style from match event streams."""

__version__ = "0.1.0"
