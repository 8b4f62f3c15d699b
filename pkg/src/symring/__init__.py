"""Exact group rings of free products, truncated ideal lattices, and simplicial groups.

Subpackages and modules:

- ``groups``: free products of Z and finite groups, homomorphisms, subgroups.
- ``groupring``: integral group-ring elements and norm windows.
- ``intlinalg``: Hermite/Smith normal forms and integer lattices.
- ``ideals``: exact and inner ideal lattices, certificates, finite quotients.
- ``simplicial``: Milnor and Carlsson constructions, Moore complexes.
- ``magnus``: the Magnus embedding and lower central series degrees.
- ``cli``: the ``symring`` experiment runner.
"""

from .intlinalg import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
