"""Exact finite models of measure algebras, finitely additive measures and
probability trees, with witness search for FAM-limit conditions."""

__version__ = "0.1.0"
