"""Observed counts with the covariates of both model parts."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "add_intercept"]


def add_intercept(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return np.column_stack([np.ones(x.shape[0]), x])


@dataclass
class Dataset:
    """Counts plus covariate matrices (without intercept columns).

    ``z`` defaults to ``x``.  ``rows_rejected`` is filled in by loaders that
    drop incomplete records.
    """

    counts: np.ndarray
    x: np.ndarray
    x_names: list = None
    z: np.ndarray = None
    z_names: list = None
    rows_rejected: int = 0
    transforms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float).ravel()
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        if self.x.shape[0] != self.counts.size:
            raise ValueError("x must have one row per count")
        if self.x_names is None:
            self.x_names = [f"x{j + 1}" for j in range(self.x.shape[1])]
        if self.z is None:
            self.z, self.z_names = self.x, list(self.x_names)
        else:
            self.z = np.asarray(self.z, dtype=float)
            if self.z.ndim == 1:
                self.z = self.z[:, None]
            if self.z.shape[0] != self.counts.size:
                raise ValueError("z must have one row per count")
            if self.z_names is None:
                self.z_names = [f"z{j + 1}" for j in range(self.z.shape[1])]
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise ValueError("counts must be finite and nonnegative")

    @property
    def n(self):
        return self.counts.size

    def design_x(self):
        return add_intercept(self.x)

    def design_z(self):
        return add_intercept(self.z)

    def subset(self, mask):
        return Dataset(
            self.counts[mask],
            self.x[mask],
            list(self.x_names),
            self.z[mask],
            list(self.z_names),
            transforms=dict(self.transforms),
        )
