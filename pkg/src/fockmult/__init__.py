"""Weighted Fock-space sampling and interpolation with multiplicities."""
