"""Adaptive sky-pixel detection for outdoor imagery.

Thirteen parameterized detection variants (Sobel-probability, mean-shift,
K-means/HSL), a Sobel/flood-fill benchmark, a trainable per-image technique
selector, evaluation metrics, and a synthetic scene generator.
"""

from .techniques import ALL_NAMES, BENCHMARK, TECHNIQUES, run_technique

__all__ = ["ALL_NAMES", "BENCHMARK", "TECHNIQUES", "run_technique"]

__version__ = "0.1.0"
