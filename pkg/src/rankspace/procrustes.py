"""Rigid alignment of point configurations (rotation/reflection + translation)."""

from __future__ import annotations

import warnings

import numpy as np


def procrustes_align(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Rigidly move ``source`` as close as possible to ``target``.

    Finds the orthogonal matrix (rotations and reflections) and translation
    minimizing the Frobenius distance to ``target``; no scaling.  Degenerate
    sources (all rows coincident) are translated onto the target centroid
    with a warning.
    """
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.shape != target.shape:
        raise ValueError(f"shape mismatch: {source.shape} vs {target.shape}")
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    A = source - mu_s
    if not np.any(A):
        warnings.warn("degenerate source configuration: translation only",
                      stacklevel=2)
        return A + mu_t
    U, _, Vt = np.linalg.svd(A.T @ (target - mu_t))
    return A @ (U @ Vt) + mu_t
