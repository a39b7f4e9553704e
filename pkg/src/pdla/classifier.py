"""Temporal classifier: tolerance-count accuracy and nearest-exemplar labels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import EmptyDataset, ExemplarSet


BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class MapcaReport:
    hits: int
    n_z: int
    tol: float
    accuracy_percent: float


def mapca(y, yhat, tol: float) -> MapcaReport:
    """Percentage of elements whose absolute error is strictly below ``tol``.

    ``n_z`` is the element count of the observation matrix, not its row count.
    Errors within ``BOUNDARY_RTOL`` of ``tol`` count as equal to it (a miss), so
    decimal data such as 5.05 vs 5.0 at tol 0.05 is not decided by binary
    rounding noise.
    """
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ValueError(f"shape mismatch: y{y.shape} vs yhat{yhat.shape}")
    if y.size == 0:
        raise ValueError("mapca of an empty observation matrix")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    err = np.abs(y - yhat)
    hits = int(np.count_nonzero((err < tol) & ~np.isclose(err, tol, rtol=BOUNDARY_RTOL, atol=0.0)))
    return MapcaReport(hits, int(y.size), float(tol), 100.0 * hits / y.size)


def assign_label(predicted_features, reference: ExemplarSet) -> str:
    """Label of the L1-nearest reference exemplar; earliest wins ties."""
    if len(reference) == 0:
        raise EmptyDataset("reference set")
    x = np.asarray(predicted_features, dtype=np.float64)
    if x.shape != (reference.arity,):
        raise ValueError(f"expected {reference.arity} features, got {x.size}")
    dists = np.abs(reference.feature_matrix() - x).sum(axis=1)
    return reference[int(np.argmin(dists))].label
