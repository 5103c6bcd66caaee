"""Forbidden configurations of r-matrices, choices and triangular choice multigraphs."""

from __future__ import annotations
