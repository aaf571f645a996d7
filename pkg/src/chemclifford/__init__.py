"""Clifford-based Hamiltonian engineering for hardware-efficient VQE."""

__version__ = "0.1.0"
