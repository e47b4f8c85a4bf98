"""Quantum ciphertext-policy attribute-based encryption, simulated end to end."""

__version__ = "0.1.0"
