"""Blow-up lifespans for u_tt - Δu = |u|^p: exponent laws, an executable
slicing-iteration argument, a finite-difference solver, and ε-sweep fits."""

__version__ = "0.1.0"
