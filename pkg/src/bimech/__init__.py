"""Truthful scheduling mechanisms from bi-criterion approximation algorithms."""

from __future__ import annotations

__version__ = "0.1.0"
BUILD_ID = f"bimech-{__version__}"
