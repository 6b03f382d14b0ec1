"""Toy 2D datasets, 200 samples each, living inside the [-1, 1]^2 box."""

from __future__ import annotations

import hashlib

import numpy as np
from sklearn.datasets import make_moons

__all__ = ["two_moons", "synthetic_random", "dataset_sha256", "make_dataset"]

N_SAMPLES = 200


def two_moons(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two interleaved half-circles (noise 0.1), rescaled into [-1, 1]^2."""
    X, y = make_moons(n_samples=N_SAMPLES, noise=0.1, random_state=seed)
    lo, hi = X.min(axis=0), X.max(axis=0)
    X = 2.0 * (X - lo) / (hi - lo) - 1.0
    return X.astype(np.float64), y.astype(np.int64)


def synthetic_random(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points on the box with random binary labels."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(N_SAMPLES, 2))
    y = rng.integers(0, 2, size=N_SAMPLES)
    return X, y.astype(np.int64)


def make_dataset(name: str, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if name == "two_moons":
        return two_moons(seed)
    if name == "synthetic_random":
        return synthetic_random(seed)
    raise ValueError(f"unknown dataset {name!r}")


def dataset_sha256(X: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X).tobytes())
    h.update(np.ascontiguousarray(y).tobytes())
    return h.hexdigest()
