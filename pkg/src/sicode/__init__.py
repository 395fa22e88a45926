"""Shift-interleave coding over an insertion/deletion/substitution channel with block erasures."""

__version__ = "0.1.0"
