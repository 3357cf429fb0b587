"""Two-step laser excitation of positronium to Rydberg levels in a magnetic field."""

__version__ = "0.1.0"
