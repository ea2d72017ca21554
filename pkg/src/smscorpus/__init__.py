"""SMS corpus toolchain: ingest, anonymize, moderate, reward, release."""

from __future__ import annotations

__version__ = "0.1.0"
