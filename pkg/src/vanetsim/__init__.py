"""VANET/MANET simulation and analytic model library."""
