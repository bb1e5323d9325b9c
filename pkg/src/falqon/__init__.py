"""Feedback-based quantum optimization for MaxCut on a statevector simulator."""

__version__ = "0.1.0"
