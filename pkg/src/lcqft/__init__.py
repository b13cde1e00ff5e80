"""Lattice toolkit for free scalar field structures on 1+1d spacetimes.

Verifies, at desk scale, the interlocking structures of a multiplet of free
scalar fields: symplectic solution spaces and their causal propagator, the
CCR-deformed polynomial field algebra, quasifree states, the orthogonal-and-
shift gauge group action, the fixed-point algebra of observables, and a
numerical classification of the translation-covariant, stress-energy-
preserving endomorphisms of the solution space.
"""

__version__ = "0.1.0"
