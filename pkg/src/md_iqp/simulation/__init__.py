"""Dense state-vector simulation and stochastic noise."""
