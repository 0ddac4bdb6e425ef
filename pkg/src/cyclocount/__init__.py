"""cyclocount: exact enumeration and statistics of cyclic number fields.

Modules mirror the pipeline: arith (characters and factorization),
family (the field enumeration), census (counts, densities, constants),
zeta (the two-sided Dirichlet-coefficient identity), classgroup (binary
quadratic forms), heights (Mahler measures and generator heights), and
sieve (the split-prime second-moment sieve).
"""

from . import arith, census, classgroup, family, heights, sieve, zeta

__all__ = ["arith", "census", "classgroup", "family", "heights", "sieve", "zeta"]
__version__ = "0.1.0"
