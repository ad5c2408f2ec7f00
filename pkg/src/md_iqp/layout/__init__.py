"""Qubit layouts and random Hamiltonian paths."""
