"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
fallback. Both expose the same functions with identical semantics and
identical deterministic output; ``BACKEND`` names the active one. Set
CASEPATH_PURE_PYTHON=1 to force the fallback even when the extension is
built (useful for benchmarking and debugging).
"""

import os

if os.environ.get("CASEPATH_PURE_PYTHON"):
    from ._pykernels import BACKEND, decode_path, encode_path, follow_bag, sample_walks
else:
    try:
        from ._kernels import (  # type: ignore[attr-defined]
            BACKEND,
            decode_path,
            encode_path,
            follow_bag,
            sample_walks,
        )
    except ImportError:
        from ._pykernels import (
            BACKEND,
            decode_path,
            encode_path,
            follow_bag,
            sample_walks,
        )

__all__ = ["BACKEND", "decode_path", "encode_path", "follow_bag", "sample_walks"]
