"""Exact intersection numbers, nef cones and integrality analysis on moduli of stable curves."""
from __future__ import annotations

__version__ = "0.1.0"
