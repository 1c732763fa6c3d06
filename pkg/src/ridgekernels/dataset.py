"""CSV ingestion and per-feature standardization.

A dataset is a dense numeric design matrix with 1-based integer class
labels; label strings map to integers in order of first appearance.  A copy
of the classic 150-flower iris table ships with the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class Dataset:
    """Design matrix plus integer labels 1..K and the associated names."""

    X: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    class_names: tuple

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if X.shape[0] < 1:
            raise ValueError("dataset needs at least one row")
        if labels.shape[0] != X.shape[0]:
            raise ValueError("label count must match row count")
        k = len(self.class_names)
        if labels.min() < 1 or labels.max() > k:
            raise ValueError(f"labels must lie in 1..{k}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def iris_path() -> Path:
    """Filesystem path of the bundled iris CSV."""
    return Path(str(resources.files("ridgekernels").joinpath("data/iris.csv")))


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def load_csv(path) -> Dataset:
    """Read rows of d numeric fields plus a trailing label string.

    A header line (detected by a non-numeric first field alongside a
    non-numeric... i.e. all-text row) provides feature names.  Malformed
    rows raise ParseError with their 1-based line number.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    rows = []
    labels = []
    feature_names = None
    arity = None
    class_order: dict[str, int] = {}
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) < 2:
                raise ParseError(f"row has {len(fields)} fields, need >= 2", line=lineno)
            if feature_names is None and arity is None and not any(
                _is_number(f) for f in fields[:-1]
            ):
                feature_names = tuple(fields[:-1])
                arity = len(fields)
                continue
            if arity is None:
                arity = len(fields)
            if len(fields) != arity:
                raise ParseError(
                    f"row has {len(fields)} fields, expected {arity}", line=lineno
                )
            try:
                values = [float(f) for f in fields[:-1]]
            except ValueError:
                bad = next(f for f in fields[:-1] if not _is_number(f))
                raise ParseError(f"non-numeric field {bad!r}", line=lineno) from None
            label = fields[-1]
            if label not in class_order:
                class_order[label] = len(class_order) + 1
            rows.append(values)
            labels.append(class_order[label])
    if not rows:
        raise ParseError(f"no data rows in {path}")
    if feature_names is None:
        feature_names = tuple(f"f{i + 1}" for i in range(len(rows[0])))
    return Dataset(
        X=np.array(rows, dtype=float),
        labels=np.array(labels, dtype=int),
        feature_names=feature_names,
        class_names=tuple(class_order),
    )


@dataclass(frozen=True)
class StandardizeStats:
    """Per-feature mean and (population) standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def inverse_transform(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) * self.std + self.mean


def standardize(ds: Dataset):
    """Shift and scale every feature to zero mean, unit population variance.

    Returns the transformed dataset and the stats needed to undo or reapply
    the transform.  A zero-variance feature is an error.
    """
    mean = ds.X.mean(axis=0)
    std = ds.X.std(axis=0)
    dead = np.nonzero(std == 0)[0]
    if dead.size:
        name = ds.feature_names[int(dead[0])]
        raise ValueError(f"feature {name!r} has zero variance; cannot standardize")
    stats = StandardizeStats(mean=mean, std=std)
    out = Dataset(
        X=stats.transform(ds.X),
        labels=ds.labels,
        feature_names=ds.feature_names,
        class_names=ds.class_names,
    )
    return out, stats
