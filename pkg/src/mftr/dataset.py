"""Datasets for binary classification.

A :class:`Dataset` stores the feature matrix with one sample per column,
mirroring the data-matrix convention used throughout the optimizer: features
are rows, samples are columns. Parsing follows the LIBSVM text format,
``<label> <index>:<value> ...`` with 1-based, strictly increasing indices.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .projection import Projection


class LibsvmFormatError(ValueError):
    """Raised on malformed LIBSVM input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Dataset:
    """Dense labeled dataset.

    features : (n, q) float64 array, one sample per column.
    labels   : (q,) float64 array with entries in {-1.0, +1.0}.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asfortranarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.labels, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"features must be a nonempty 2-d matrix, got shape {X.shape}")
        if y.ndim != 1 or y.size != X.shape[1]:
            raise ValueError(f"labels length {y.size} does not match {X.shape[1]} samples")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain NaN/Inf entries")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be exactly -1 or +1")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self):
        """Feature dimension."""
        return self.features.shape[0]

    @property
    def q(self):
        """Sample count."""
        return self.features.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


_LABELS = {"+1": 1.0, "1": 1.0, "-1": -1.0, "0": -1.0}


def parse_libsvm(text, n_features=None):
    """Parse LIBSVM-format text into a Dataset.

    ``text`` is a string or an iterable of lines. Labels 0/1 are remapped to
    -1/+1; -1/+1 pass through; anything else is rejected. Feature indices are
    1-based and must be strictly increasing within a line; absent indices are
    filled with 0. The feature dimension is the maximum index seen, unless
    ``n_features`` forces a (possibly larger) dimension.
    """
    if isinstance(text, str):
        lines = text.split("\n")
    else:
        lines = text

    labels = []
    rows = []  # per sample: list of (0-based index, value)
    max_index = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        label = _LABELS.get(tokens[0])
        if label is None:
            raise LibsvmFormatError(f"label {tokens[0]!r} outside {{-1, 0, +1}}", line=lineno)
        entries = []
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmFormatError(f"malformed token {tok!r}", line=lineno)
            try:
                idx = int(idx_s)
            except ValueError:
                raise LibsvmFormatError(f"malformed index in token {tok!r}", line=lineno) from None
            try:
                val = float(val_s)
            except ValueError:
                raise LibsvmFormatError(f"malformed value in token {tok!r}", line=lineno) from None
            if idx < 1:
                raise LibsvmFormatError(f"index {idx} is not 1-based", line=lineno)
            if idx <= prev:
                raise LibsvmFormatError(f"index {idx} not strictly increasing", line=lineno)
            if not np.isfinite(val):
                raise LibsvmFormatError(f"non-finite value in token {tok!r}", line=lineno)
            prev = idx
            entries.append((idx - 1, val))
        labels.append(label)
        rows.append(entries)
        max_index = max(max_index, prev)

    if not labels:
        raise LibsvmFormatError("no samples found")
    n = max_index if n_features is None else int(n_features)
    if n < max_index:
        raise LibsvmFormatError(f"n_features={n} smaller than max index {max_index} in data")
    if n < 1:
        raise LibsvmFormatError("feature dimension is zero; pass n_features to force one")

    X = np.zeros((n, len(labels)), order="F")
    for i, entries in enumerate(rows):
        for j, val in entries:
            X[j, i] = val
    return Dataset(X, np.asarray(labels))


def load_libsvm(path, n_features=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, n_features=n_features)


def serialize_libsvm(d):
    """Write a Dataset back to LIBSVM text.

    Labels are written as 1/-1 and values with 17 significant digits, so a
    parse round-trip is exact. Zero entries are omitted, as is conventional;
    pass ``n_features=d.n`` when re-parsing if trailing feature rows of the
    dataset could be entirely zero.
    """
    out = []
    X, y = d.features, d.labels
    for i in range(d.q):
        parts = ["1" if y[i] > 0 else "-1"]
        col = X[:, i]
        for j in np.nonzero(col)[0]:
            parts.append(f"{j + 1}:{col[j]:.17g}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def save_libsvm(d, path):
    Path(path).write_text(serialize_libsvm(d), encoding="utf-8")


def reduce_features(d, S):
    """Apply a feature projection to every sample: columns become S @ x_i.

    Labels are carried over unchanged. ``S`` is a Projection whose column
    dimension must equal ``d.n``.
    """
    if not isinstance(S, Projection):
        raise TypeError(f"expected a Projection, got {type(S).__name__}")
    if S.n != d.n:
        raise ValueError(f"projection expects {S.n} features, dataset has {d.n}")
    return Dataset(S.matrix @ d.features, d.labels)
