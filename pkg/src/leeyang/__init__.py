"""Edge-coloured graph polynomials, their zeros and the critical-point landscape."""

__version__ = "0.1.0"
