"""Chains of two-dimensional evolution algebras."""
