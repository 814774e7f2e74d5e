"""Sato-Tate trace statistics for degree-two K3 surfaces at desk scale.

Exact trace moments of compact Lie groups by constant-term extraction,
numerical trace densities, brute-force point counts on seven sextic double
covers of the plane, and statistics comparing the two.
"""

__version__ = "0.1.0"
