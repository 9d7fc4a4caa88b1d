"""Convergence of cuspidal integrals on SL(n,R)/S(GL(n-1,R) x GL(1,R))."""

__version__ = "0.1.0"
