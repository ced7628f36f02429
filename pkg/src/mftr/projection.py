"""Feature-space projectors.

A Projection is a t x n matrix S mapping full feature vectors to a reduced
space. Three kinds are supported: a seeded Gaussian sketch with N(0, 1/t)
entries, the transposed leading left singular vectors of a data matrix, and
the identity. Reduced steps are lifted back to full space with S^T.

Randomness comes from numpy's PCG64 generator via ``Generator.standard_normal``
(ziggurat transform); the same (n, t, seed) triple always yields the same
matrix. :func:`prng_description` reports the exact generator for run manifests.
"""

import enum
import struct
from dataclasses import dataclass, field

import numpy as np


class ProjectionKind(enum.Enum):
    GAUSSIAN_SKETCH = "gaussian_sketch"
    TRUNCATED_SVD = "truncated_svd"
    IDENTITY = "identity"


@dataclass(frozen=True)
class Projection:
    """Immutable t x n projector with provenance metadata.

    ``seed`` is set for Gaussian sketches only. ``rank_deficient`` flags a
    truncated-SVD projector whose requested t exceeded the numerical rank of
    the data; the extra rows are an orthonormal completion.
    """

    matrix: np.ndarray
    kind: ProjectionKind
    seed: int | None = None
    rank_deficient: bool = field(default=False, compare=False)

    def __post_init__(self):
        M = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("projection matrix must be 2-d")
        t, n = M.shape
        if not 1 <= t <= n:
            raise ValueError(f"need 1 <= t <= n, got t={t}, n={n}")
        M.flags.writeable = False
        object.__setattr__(self, "matrix", M)

    @property
    def t(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]

    def lift(self, p_low):
        """Map a reduced vector back to full space: S^T @ p_low."""
        p_low = np.asarray(p_low, dtype=np.float64)
        if p_low.shape != (self.t,):
            raise ValueError(f"expected a length-{self.t} vector, got shape {p_low.shape}")
        return self.matrix.T @ p_low


def prng_description():
    """Identification of the generator behind gaussian_sketch, for manifests."""
    return {
        "generator": "numpy.random.PCG64",
        "normal_transform": "ziggurat (numpy Generator.standard_normal)",
        "numpy_version": np.__version__,
    }


def sketch_seed(base_seed, k):
    """Per-iteration sketch seed: derived from the base seed and index only."""
    return int(base_seed) + int(k)


def gaussian_sketch(n, t, seed):
    """t x n sketch with i.i.d. N(0, 1/t) entries, deterministic in the seed."""
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n, got t={t}, n={n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    M = rng.standard_normal((t, n)) / np.sqrt(t)
    return Projection(M, ProjectionKind.GAUSSIAN_SKETCH, seed=int(seed))


def identity_projection(n):
    return Projection(np.eye(n), ProjectionKind.IDENTITY)


def truncated_svd(X, t):
    """Projector onto the span of the top-t left singular vectors of X.

    Rows are ordered by nonincreasing singular value; each row is signed so
    its largest-magnitude entry is positive. If t exceeds the numerical rank
    of X the trailing rows are an orthonormal completion and the result is
    flagged ``rank_deficient``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    n, q = X.shape
    if not 1 <= t <= min(n, q):
        raise ValueError(f"need 1 <= t <= min(n, q) = {min(n, q)}, got t={t}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains NaN/Inf entries")

    U, svals, _ = np.linalg.svd(X, full_matrices=False)
    tol = max(n, q) * np.finfo(np.float64).eps * (svals[0] if svals.size else 0.0)
    rank = int(np.sum(svals > tol))

    S = U[:, :t].T.copy()
    for row in S:
        j = np.argmax(np.abs(row))
        if row[j] < 0.0:
            row *= -1.0
    return Projection(S, ProjectionKind.TRUNCATED_SVD, rank_deficient=rank < t)


_MAGIC = b"MFTRPROJ"
_KIND_CODES = {
    ProjectionKind.GAUSSIAN_SKETCH: 1,
    ProjectionKind.TRUNCATED_SVD: 2,
    ProjectionKind.IDENTITY: 3,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}
_HEADER = struct.Struct("<8sBqqq")  # magic, kind, n, t, seed (-1 when absent)


def save_projection(S, path):
    """Write a Projection to a binary file: header then row-major float64."""
    seed = -1 if S.seed is None else S.seed
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _KIND_CODES[S.kind], S.n, S.t, seed))
        fh.write(np.ascontiguousarray(S.matrix, dtype="<f8").tobytes())


def load_projection(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, code, n, t, seed = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a projection file")
        payload = fh.read(t * n * 8)
        if len(payload) != t * n * 8:
            raise ValueError(f"{path}: truncated payload")
    M = np.frombuffer(payload, dtype="<f8").reshape(t, n)
    return Projection(M, _CODE_KINDS[code], seed=None if seed == -1 else int(seed))
