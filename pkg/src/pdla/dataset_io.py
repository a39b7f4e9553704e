"""Labeled pipeline feature datasets: CSV load/save, the bundled threat sample,
and a seeded synthetic incident generator.

CSV layout is one exemplar per line, ``label,f1,...,fk``. Labels must not
contain commas.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    pass


class EmptyDataset(DatasetError):
    def __init__(self, what: str = "dataset"):
        super().__init__(f"{what} is empty")


class ArityMismatch(DatasetError):
    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        super().__init__(f"row {row}: expected {expected} features, got {got}")


class NonNumericCell(DatasetError):
    def __init__(self, row: int, column: int, text: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column}: not a number: {text!r}")


@dataclass(frozen=True)
class Exemplar:
    label: str
    features: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        if not self.label:
            raise DatasetError("exemplar label is empty")
        if not self.features:
            raise DatasetError("exemplar has no features")
        if not all(math.isfinite(v) for v in self.features):
            raise DatasetError(f"non-finite feature in exemplar {self.label!r}")


@dataclass(frozen=True)
class ExemplarSet:
    exemplars: tuple[Exemplar, ...]
    arity: int = field(init=False)
    classes: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "exemplars", tuple(self.exemplars))
        if not self.exemplars:
            raise EmptyDataset()
        arity = len(self.exemplars[0].features)
        for i, ex in enumerate(self.exemplars, start=1):
            if len(ex.features) != arity:
                raise ArityMismatch(i, arity, len(ex.features))
        object.__setattr__(self, "arity", arity)
        # dict preserves first-appearance order
        object.__setattr__(self, "classes", tuple(dict.fromkeys(ex.label for ex in self.exemplars)))

    def __len__(self):
        return len(self.exemplars)

    def __iter__(self):
        return iter(self.exemplars)

    def __getitem__(self, i):
        return self.exemplars[i]

    @property
    def labels(self) -> list[str]:
        return [ex.label for ex in self.exemplars]

    def feature_matrix(self) -> np.ndarray:
        return np.array([ex.features for ex in self.exemplars], dtype=np.float64)


def load_csv(path, has_header: bool = False) -> ExemplarSet:
    """Read a label-first CSV file into an ExemplarSet, preserving row order.

    Row numbers in error messages are 1-based data rows (the header, if any,
    is not counted).
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such dataset file: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    if has_header and lines:
        lines = lines[1:]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise EmptyDataset(str(path))

    exemplars = []
    arity = None
    for row, line in enumerate(lines, start=1):
        cells = line.split(",")
        label = cells[0].strip()
        if len(cells) < 2:
            raise DatasetError(f"row {row}: expected a label followed by at least one feature")
        feats = []
        for col, cell in enumerate(cells[1:], start=2):
            try:
                feats.append(float(cell))
            except ValueError:
                raise NonNumericCell(row, col, cell) from None
        if arity is None:
            arity = len(feats)
        elif len(feats) != arity:
            raise ArityMismatch(row, arity, len(feats))
        exemplars.append(Exemplar(label, tuple(feats)))
    return ExemplarSet(tuple(exemplars))


def format_value(v: float) -> str:
    return f"{v:.6g}"


def save_csv(data: ExemplarSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in data:
            fh.write(",".join([ex.label, *map(format_value, ex.features)]) + "\n")


# Four labeled threat-event feature rows (vehicle, excavation, digging).
_THREAT_ROWS = (
    ("Vehicle passing", (2.02, 49.78, 40.75, 2.42, 4.57, 0.27, 0.08, 0.03, 0.06, 20)),
    ("Machine excavation", (0.31, 46.78, 48.39, 1.58, 2.45, 0.35, 0.06, 0.02, 0.03, 34)),
    ("Machine excavation", (0.17, 40.01, 55.23, 1.27, 2.73, 0.52, 0.05, 0.01, 0.01, 36)),
    ("Manual digging", (25.97, 0.81, 9.37, 39.77, 6.61, 6.21, 7.91, 1.85, 1.47, 22)),
)


def bundled_threat_sample() -> ExemplarSet:
    return ExemplarSet(tuple(Exemplar(label, feats) for label, feats in _THREAT_ROWS))


def synth_incident_set(n: int = 190, arity: int = 10, n_classes: int = 4, seed: int = 7,
                       jitter_units: int = 3) -> ExemplarSet:
    """Seeded stand-in for a pipeline incident dataset.

    Each class gets a centroid drawn uniformly from [0, 50) per feature. An
    exemplar is its class centroid plus an integer jitter of at most
    ``jitter_units`` hundredths per feature, so every value has two decimals.
    Classes are assigned cyclically (exemplar i belongs to class i mod
    n_classes), which gives the stream a fixed temporal structure.
    """
    if n_classes < 1 or n < n_classes:
        raise DatasetError(f"need n >= n_classes >= 1, got n={n}, n_classes={n_classes}")
    if arity < 1:
        raise DatasetError(f"arity must be >= 1, got {arity}")
    if jitter_units < 0:
        raise DatasetError("jitter_units must be >= 0")

    rng = np.random.default_rng(seed)
    centroids = np.round(rng.uniform(0.0, 50.0, size=(n_classes, arity)), 2)
    jitter = rng.integers(-jitter_units, jitter_units + 1, size=(n, arity)) / 100.0
    classes = np.arange(n) % n_classes
    feats = np.round(centroids[classes] + jitter, 2)
    return ExemplarSet(tuple(
        Exemplar(f"class_{c}", tuple(float(v) for v in row)) for c, row in zip(classes, feats)
    ))
