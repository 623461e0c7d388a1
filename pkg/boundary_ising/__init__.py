"""
Exact Grassmann/Pfaffian solver for boundary spin correlations of the 2D Ising
model on finite cylinders, with the critical propagator toolkit and the
first-order boundary spin renormalization.
"""
__version__ = "1.0.0"
