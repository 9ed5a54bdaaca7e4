"""Complex quasiprobability distributions in phase space.

Numerical routes to the J distribution (Fresnel transform of the
characteristic function), the Wigner, s-ordered and Kirkwood distributions,
a fractional Fourier transform engine, and a simulation of the dispersive
atom-field protocol that reads J from atomic polarizations.
"""

__version__ = "0.1.0"
