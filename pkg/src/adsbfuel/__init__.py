"""Interval and instantaneous aircraft fuel burn from surveillance tracks."""

from __future__ import annotations

__version__ = "0.1.0"
