"""Locally adaptive translation embeddings for knowledge graphs.

Thin re-export of the compiled ``_transa`` module: graph ingestion, adaptive
margin tables, SGD training, link-prediction ranking, triple classification
and stability-bound diagnostics.
"""

try:
    from . import _transa as _core
    from ._transa import *  # noqa: F401,F403
except ImportError:  # in-tree builds put the extension on PYTHONPATH instead
    import _transa as _core
    from _transa import *  # type: ignore[no-redef]  # noqa: F401,F403

__version__ = _core.__version__
__all__ = [name for name in dir(_core) if not name.startswith("_")]
