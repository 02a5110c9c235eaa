"""extlab: a desk-scale laboratory for self-adjoint extensions of the
circle Dirac operator — deficiency spaces, boundary conditions, spectra,
K-homology index pairings, and an exact integer K-class calculus."""

__version__ = "0.1.0"
