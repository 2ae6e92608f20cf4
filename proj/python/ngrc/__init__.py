"""Next-generation reservoir computing for the Li-Sprott system."""

from ._ngrc import *  # noqa: F401,F403
from ._ngrc import LABELS, compute_basin

__all__ = [name for name in dir() if not name.startswith("_")]


def agreement(truth, model):
    """Per-label fraction of truth pixels reproduced by model, plus the overall match."""
    import numpy as np

    truth = np.asarray(truth)
    model = np.asarray(model)
    if truth.shape != model.shape:
        raise ValueError("grids differ in shape")
    out = {}
    for code, name in enumerate(LABELS):
        mask = truth == code
        out[name] = float((model[mask] == code).mean()) if mask.any() else None
    out["overall"] = float((truth == model).mean())
    return out
