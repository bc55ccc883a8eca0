"""Error-exponent regions, type encoders and decoders for two-node hypothesis testing with constant-bit messages."""

__version__ = "0.1.0"
