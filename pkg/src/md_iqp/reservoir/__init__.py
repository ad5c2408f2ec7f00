"""Quantum-reservoir phase classification and the expressivity-gap demonstration."""
