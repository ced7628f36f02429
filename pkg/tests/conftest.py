import numpy as np
import pytest

import mftr
from mftr import synth


def small_instance(seed, n=8, q=25):
    """Random dense instance for unit tests, labels balanced by construction."""
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.standard_normal((n, q))
    y = np.where(rng.random(q) < 0.5, 1.0, -1.0)
    return mftr.Dataset(X, y)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jit kernels once so timed assertions measure algorithm
    # cost, not compilation
    d = small_instance(0, n=4, q=6)
    w = np.zeros(4)
    v = np.ones(4)
    for kind in (mftr.LossKind.LOG_LOSS, mftr.LossKind.LEAST_SQUARES):
        m = mftr.LossModel.for_dataset(kind, d)
        m.value(d, w)
        m.gradient(d, w)
        m.hvp(d, w, v)
        m.curvature_diagonal(d, w)


@pytest.fixture(scope="session")
def aus():
    return synth.australian_like()


@pytest.fixture(scope="session")
def mush():
    return synth.mushroom_like()


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory, aus, mush):
    """Session directory holding the benchmark instances as LIBSVM files."""
    root = tmp_path_factory.mktemp("data")
    mftr.save_libsvm(aus, root / "australian_like.libsvm")
    mftr.save_libsvm(mush, root / "mushroom_like.libsvm")
    return root
