"""Deterministic synthetic benchmark instances.

Desk-scale stand-ins shaped like three classic binary-classification
datasets (matching their feature and sample counts). Each instance is a
pair of Gaussian clusters: samples share a covariance with a geometrically
decaying spectrum over the leading ``rank`` directions and a flat noise
floor over the rest, and the two classes are separated by a mean shift
whose per-direction magnitude follows the same spectrum. Fitting the labels
therefore requires progress along directions of very different curvature,
which is what makes the instances non-trivial for a trust-region solver at
tight gradient tolerances.

Everything is drawn from a seeded PCG64 stream, so the same seed always
yields the same dataset. Run ``python -m mftr.synth <outdir>`` to write the
two small instances as LIBSVM text files (add ``--gisette`` for the large
one; the file is around 100 MB).
"""

import argparse
from pathlib import Path

import numpy as np

from .dataset import Dataset, save_libsvm


def two_cluster_gaussian(n, q, rank, top, ratio, floor, offset, floor_offset, seed):
    """Two Gaussian clusters with a structured shared covariance.

    The covariance has eigenvalues decaying geometrically from ``top`` to
    ``top/ratio`` over the first ``rank`` random orthonormal directions and
    equal to ``floor`` on the remaining ones. Class means sit at +/- mu where
    mu has component ``offset * sigma_j`` along signal direction j and
    ``floor_offset * floor`` along each floor direction. Labels are balanced
    Bernoulli; each sample is its class mean plus covariance-shaped noise.
    """
    if not 1 <= rank <= n:
        raise ValueError(f"need 1 <= rank <= n, got rank={rank}, n={n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    sigma = np.empty(n)
    if rank == 1:
        sigma[:1] = top
    else:
        sigma[:rank] = top * (1.0 / ratio) ** (np.arange(rank) / (rank - 1))
    sigma[rank:] = floor
    labels = np.where(rng.random(q) < 0.5, 1.0, -1.0)
    coords = rng.standard_normal((n, q))
    coef = np.empty(n)
    coef[:rank] = offset * sigma[:rank]
    coef[rank:] = floor_offset * sigma[rank:]
    mu = basis @ coef
    X = mu[:, None] * labels[None, :] + (basis * sigma) @ coords
    return Dataset(X, labels)


def australian_like(seed=1402, q=690):
    """Dense 14-feature instance: 8 signal directions, 6 noise-floor ones."""
    return two_cluster_gaussian(
        n=14, q=q, rank=8, top=6.0, ratio=16.0, floor=0.3,
        offset=0.95, floor_offset=0.2, seed=seed,
    )


def mushroom_like(seed=1979, q=6499):
    """112-feature instance: 56 signal directions, 56 noise-floor ones."""
    return two_cluster_gaussian(
        n=112, q=q, rank=56, top=6.0, ratio=16.0, floor=1.0,
        offset=0.95, floor_offset=0.2, seed=seed,
    )


def gisette_like(seed=4871, q=6000):
    """5000-feature instance with axis-aligned covariance.

    Same cluster geometry as the small instances, but the random rotation is
    skipped (the covariance eigenbasis is the coordinate basis) to keep
    generation time and memory reasonable at this scale.
    """
    n, rank = 5000, 250
    rng = np.random.Generator(np.random.PCG64(seed))
    sigma = np.empty(n)
    sigma[:rank] = 6.0 * (1.0 / 16.0) ** (np.arange(rank) / (rank - 1))
    sigma[rank:] = 0.3
    labels = np.where(rng.random(q) < 0.5, 1.0, -1.0)
    coef = np.empty(n)
    coef[:rank] = 0.95 * sigma[:rank]
    coef[rank:] = 0.2 * sigma[rank:]
    X = sigma[:, None] * rng.standard_normal((n, q))
    X += coef[:, None] * labels[None, :]
    return Dataset(X, labels)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="python -m mftr.synth",
        description="Write the synthetic benchmark instances as LIBSVM files.",
    )
    parser.add_argument("outdir", nargs="?", default="data", type=Path)
    parser.add_argument(
        "--gisette", action="store_true",
        help="also write the 5000-feature instance (large file, slow)",
    )
    args = parser.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    pairs = [("australian_like", australian_like), ("mushroom_like", mushroom_like)]
    if args.gisette:
        pairs.append(("gisette_like", gisette_like))
    for name, build in pairs:
        d = build()
        path = args.outdir / f"{name}.libsvm"
        save_libsvm(d, path)
        print(f"wrote {path} (n={d.n}, q={d.q})")


if __name__ == "__main__":
    main()
