"""Query-accounting simulator for output-sensitive quantum Boolean matrix
multiplication via graph collision.

Submodules: ``oracle``, ``search``, ``graphcollision``, ``bmm``,
``instances``, ``bench``, ``validate`` and ``cli``.
"""

from .oracle import BooleanMatrix, QueryLedger, brute_force_product
from .search import FAITHFUL, FORCED, SearchConfig

__version__ = "0.1.0"
