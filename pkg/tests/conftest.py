import os

import pytest

import mnist_synth

CACHE_ROOT = os.environ.get(
    "SPIXEL_TEST_CACHE", os.path.expanduser("~/.cache/spixel-tests")
)


def _looks_like_mnist(path: str) -> bool:
    return all(
        os.path.exists(os.path.join(path, name)) or os.path.exists(os.path.join(path, name + ".gz"))
        for name in (
            "train-images-idx3-ubyte",
            "train-labels-idx1-ubyte",
            "t10k-images-idx3-ubyte",
            "t10k-labels-idx1-ubyte",
        )
    )


@pytest.fixture(scope="session")
def data_dir() -> str:
    """Real MNIST when SPIXEL_DATA_DIR points at it; otherwise a full-size
    deterministic synthetic stand-in corpus (cached across sessions)."""
    configured = os.environ.get("SPIXEL_DATA_DIR")
    if configured and _looks_like_mnist(configured):
        return configured
    os.makedirs(CACHE_ROOT, exist_ok=True)
    return mnist_synth.ensure_corpus(CACHE_ROOT, n_train=60000, n_test=10000, seed=0)


@pytest.fixture(scope="session")
def small_data_dir() -> str:
    """A small synthetic corpus for fast pipeline tests."""
    os.makedirs(CACHE_ROOT, exist_ok=True)
    return mnist_synth.ensure_corpus(CACHE_ROOT, n_train=600, n_test=200, seed=7)
