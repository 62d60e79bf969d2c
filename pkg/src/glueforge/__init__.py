"""glueforge: a finite-instance gluing engine.

Computes glued-up objects of gluing functors over (split) truncated
power-set index categories in the concrete categories of finite sets and
finite topological spaces, and decides the effectiveness, covering, sheaf
and refinement conditions on explicit finite data.
"""

from .errors import GlueforgeError, StructuralError, ResourceError

__version__ = "0.1.0"

__all__ = ["GlueforgeError", "StructuralError", "ResourceError", "__version__"]
