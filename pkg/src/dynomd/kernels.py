"""Backend selection for the round loops.

The compiled ``_ckernels`` module is used when it imports; otherwise the pure
Python ``_pykernels`` module. Set ``DYNOMD_PURE_PYTHON=1`` to force the
fallback.
"""

import importlib
import os

from . import _pykernels


def _select():
    if os.environ.get("DYNOMD_PURE_PYTHON", "").strip() not in ("", "0"):
        return _pykernels
    try:
        return importlib.import_module("dynomd._ckernels")
    except ImportError:
        return _pykernels


_impl = _select()
BACKEND = _impl.BACKEND

aomd_loop = _impl.aomd_loop
game_loop = _impl.game_loop
selfplay = _impl.selfplay
player_step = _impl.player_step
doubling_fires = _impl.doubling_fires

GEOM_SIMPLEX = _pykernels.GEOM_SIMPLEX
GEOM_BALL = _pykernels.GEOM_BALL
FAMILY_LINEAR = _pykernels.FAMILY_LINEAR
FAMILY_QUADRATIC = _pykernels.FAMILY_QUADRATIC
PRED_ZERO = _pykernels.PRED_ZERO
PRED_LAST = _pykernels.PRED_LAST
PRED_SMOOTH = _pykernels.PRED_SMOOTH
PRED_EXTERNAL = _pykernels.PRED_EXTERNAL
TUNING_ADAPTIVE = _pykernels.TUNING_ADAPTIVE
TUNING_STATIC = _pykernels.TUNING_STATIC


def available_backends():
    """Map backend name to module for every backend that imports here."""
    out = {"python": _pykernels}
    try:
        out["cython"] = importlib.import_module("dynomd._ckernels")
    except ImportError:
        pass
    return out
