"""Verification laboratory for perturbed three-variable exponential sums.

Deterministic evaluators for triple exponential sums with a constant
perturbation in the denominator, the bilinear dispersion inequality with an
explicit proof constant, lattice-point correlation counts, the arithmetic
decomposition of Mangoldt sums into bilinear pieces, an exact rational
exponent calculus, and the floor-ratio sum sum_{n<=x} Lambda([x/n]) with
its main-term constant and empirical error slope.
"""

__version__ = "0.1.0"
