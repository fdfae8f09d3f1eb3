"""rtamc: a zone-based model checker for networks of timed automata.

Supports standard reachability and robust reachability under infinitesimal
clock drift (stable-zone algorithm), a small textual modeling language
(.rta models, .rtq queries), and bundled case-study models.
"""

__version__ = "0.1.0"

from .zones import INF, Zone

__all__ = ["INF", "Zone", "__version__"]
