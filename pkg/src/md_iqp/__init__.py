"""md_iqp package.

Measurement-driven constant-depth IQP sampling: GF(2) algebra, fan-out staircase
construction, dense dynamic-circuit simulation, randomness diagnostics and the
measurement-based reservoir benchmark.
"""

__all__ = [
    "__version__",
]

__version__ = "0.1.0"
