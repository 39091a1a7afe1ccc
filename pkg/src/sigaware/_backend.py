"""Kernel backend selection.

The hot kernels (sigaware._core.*) exist as plain Python and, when the
package was built with Cython, as compiled extension modules shadowing
the same module names.  Importing a kernel normally picks the compiled
variant if present.  Setting ``SIGAWARE_PURE=1`` forces the interpreted
sources, which is also how the benchmark compares the two.
"""

from __future__ import annotations

import importlib
import importlib.util
import os
import sys
from pathlib import Path

_KERNELS = ("lang_impl", "interval_impl", "feats_impl")
_EXT_SUFFIXES = (".so", ".pyd")


def _load_pure(name: str):
    """Load sigaware._core.<name> from its .py source, bypassing any extension."""
    alias = f"sigaware._core.{name}__pure"
    if alias in sys.modules:
        return sys.modules[alias]
    path = Path(__file__).parent / "_core" / f"{name}.py"
    spec = importlib.util.spec_from_file_location(alias, path)
    module = importlib.util.module_from_spec(spec)
    sys.modules[alias] = module
    spec.loader.exec_module(module)
    return module


def _load(name: str):
    if os.environ.get("SIGAWARE_PURE", "") not in ("", "0"):
        return _load_pure(name)
    return importlib.import_module(f"sigaware._core.{name}")


def _is_compiled(module) -> bool:
    return str(getattr(module, "__file__", "")).endswith(_EXT_SUFFIXES)


lang_impl = _load("lang_impl")
interval_impl = _load("interval_impl")
feats_impl = _load("feats_impl")

BACKEND = "compiled" if all(map(_is_compiled, (lang_impl, interval_impl, feats_impl))) else "pure"


def pure_backend() -> dict:
    """The interpreted kernel modules, regardless of what is active."""
    return {name: _load_pure(name) for name in _KERNELS}
