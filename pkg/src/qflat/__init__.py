"""Lattice and continuum propagators for free and interacting flat-space fields."""
