"""Render run artifacts (metrics CSVs, trace JSONL) into figure images.

This package never computes statistics and never touches model
checkpoints; it draws exactly what the documented file schemas contain.
"""

__version__ = "0.1.0"
