"""Hot-kernel backend selection.

The compiled extension (built from ``_fast.pyx``; see ``setup_ext.py`` at the
repository root) is preferred when importable; otherwise the vectorized numpy
fallbacks in ``_pure`` are used.  Both expose the same three entry points and
the test suite holds them to identical outputs.

``BACKEND`` is ``"compiled"`` or ``"python"``.
"""

try:
    from ._fast import torus_tail_min, torus_first_below, word_greedy_net
    BACKEND = "compiled"
except ImportError:                      # extension not built; numpy fallback
    from ._pure import torus_tail_min, torus_first_below, word_greedy_net
    BACKEND = "python"

from . import _pure as pure_backend

try:
    from . import _fast as compiled_backend
except ImportError:
    compiled_backend = None

__all__ = [
    "BACKEND",
    "torus_tail_min",
    "torus_first_below",
    "word_greedy_net",
    "pure_backend",
    "compiled_backend",
]
