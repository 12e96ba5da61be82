"""Optimality certification for AC optimal power flow.

Builds strengthened convex relaxations of the ACOPF problem (clique-wise
determinant cuts combined with current-based RLT cuts and convex envelopes)
and runs a parallel optimality-based bound-tightening loop that shrinks the
gap between a feasible dispatch cost and the relaxation lower bound.
"""

__version__ = "0.1.0"
