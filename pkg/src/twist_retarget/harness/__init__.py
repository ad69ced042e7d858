"""Synthetic scenarios, file formats, the per-frame pipeline and method comparison."""
