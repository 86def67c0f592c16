"""Point sets as CSV, one point per row (for cross-checking with other tools)."""

from __future__ import annotations

import os

import numpy as np


def save_points_csv(points, path) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    np.savetxt(os.fspath(path), pts, delimiter=",", fmt="%.17g")


def load_points_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(os.fspath(path), delimiter=",", dtype=np.float64, ndmin=2))
