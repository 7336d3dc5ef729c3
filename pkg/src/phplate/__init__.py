"""Port-Hamiltonian finite element models of the Euler-Bernoulli beam and the Kirchhoff plate."""

__version__ = "0.1.0"
