"""Kernel backend selection: compiled extension when built, pure Python otherwise.

Set FAIRDIV_PURE=1 to force the pure backend regardless of what is installed.
"""

from __future__ import annotations

import os

if os.environ.get("FAIRDIV_PURE"):
    from fairdiv import _kernels_py as kernels
else:
    try:
        from fairdiv import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from fairdiv import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    return "compiled" if kernels.__name__.endswith("._kernels") else "pure"
