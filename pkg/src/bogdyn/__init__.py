"""Hartree dynamics with Bogoliubov fluctuations on periodic lattices."""

__version__ = "0.1.0"
