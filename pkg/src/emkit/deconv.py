"""Particle size distribution from diffusion battery port counts.

Complete data are Poisson counts ``Z[i, j]`` of size-``j`` particles exiting
port ``i`` with mean ``P0 * w[i, j] * f[j]``. Only the row totals (port counts)
are observed. ``P0``, the zero-port count, is a known scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation, DegenerateInput, ImpossibleData

MIN_COLUMN_WEIGHT = 1e-12


@dataclass
class BatteryMeasurement:
    P0: float
    counts: np.ndarray  # P_1..P_m
    kernel: np.ndarray  # m x J, kernel[i, j] = P(size j exits at port i)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float).ravel()
        self.kernel = np.atleast_2d(np.asarray(self.kernel, dtype=float))
        if not (self.P0 > 0 and math.isfinite(self.P0)):
            raise ConstraintViolation(f"P_0 must be positive, got {self.P0!r}")
        if self.counts.size == 0:
            raise DegenerateInput("no port counts")
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise ConstraintViolation("port counts must be non-negative")
        m = self.counts.size
        if self.kernel.shape[0] != m:
            raise ConstraintViolation(f"kernel has {self.kernel.shape[0]} rows but there are {m} port counts")
        if np.any(self.kernel < 0) or np.any(self.kernel > 1) or not np.all(np.isfinite(self.kernel)):
            raise ConstraintViolation("kernel entries must lie in [0, 1]")
        weak = np.flatnonzero(self.column_weights < MIN_COLUMN_WEIGHT)
        if weak.size:
            raise ConstraintViolation(f"size classes {weak.tolist()} are never counted (W_j ~ 0)")

    @property
    def column_weights(self):
        """W_j: probability that a size-j particle is counted at some port."""
        return self.kernel.sum(axis=0)

    @property
    def n_sizes(self):
        return self.kernel.shape[1]


def initial_distribution(meas: BatteryMeasurement) -> np.ndarray:
    """Flat start that already satisfies the flux identity."""
    level = meas.counts.sum() / (meas.P0 * meas.column_weights.sum())
    return np.full(meas.n_sizes, level)


def deconv_e_step(f, meas: BatteryMeasurement):
    """Split each port count across size classes in proportion to ``w[i, j] f[j]``.

    Returns the expected complete-data array ``Z`` and its column totals ``N``.
    """
    f = np.asarray(f, dtype=float)
    contrib = meas.kernel * f
    rows = contrib.sum(axis=1)
    bad = np.flatnonzero((rows <= 0) & (meas.counts > 0))
    if bad.size:
        raise ImpossibleData(f"port {int(bad[0]) + 1} has counts but zero expected flux")
    scale = np.divide(meas.counts, rows, out=np.zeros_like(rows), where=rows > 0)
    Z = contrib * scale[:, None]
    return Z, Z.sum(axis=0)


def deconv_m_step(N, P0, column_weights) -> np.ndarray:
    """f_j = N_j / (P0 * W_j)."""
    return np.asarray(N, dtype=float) / (P0 * np.asarray(column_weights, dtype=float))


def fitted_means(f, meas: BatteryMeasurement) -> np.ndarray:
    return meas.P0 * (meas.kernel @ np.asarray(f, dtype=float))


def deconv_log_likelihood(f, meas: BatteryMeasurement) -> float:
    """Poisson log-likelihood of the port counts, dropping the log(P_i!) terms."""
    mu = fitted_means(f, meas)
    P = meas.counts
    if np.any((mu <= 0) & (P > 0)):
        return -math.inf
    pos = P > 0
    return float((P[pos] * np.log(mu[pos])).sum() - mu.sum())


def normalize_distribution(f):
    """Return ``(f / sum(f), sum(f))``."""
    f = np.asarray(f, dtype=float)
    total = float(f.sum())
    if not total > 0:
        raise DegenerateInput("size distribution has zero total mass")
    return f / total, total


class DeconvModel:
    """EM model contract; data is a BatteryMeasurement."""

    def e_step(self, params, data):
        return deconv_e_step(params, data)[1]

    def m_step(self, stats, data):
        return deconv_m_step(stats, data.P0, data.column_weights)

    def log_likelihood(self, params, data):
        return deconv_log_likelihood(params, data)

    def validate(self, params, data):
        params = np.asarray(params, dtype=float)
        if params.shape != (data.n_sizes,):
            raise ConstraintViolation(f"f has shape {params.shape}, expected ({data.n_sizes},)")
        if np.any(params < 0) or not np.all(np.isfinite(params)):
            raise ConstraintViolation("size distribution must be non-negative")

    def is_degenerate(self, data):
        return not data.counts.any()


def synthetic_kernel(n_ports=10, n_sizes=8, seed=None):
    """Penetration-like kernel for tests and demos. Not derived from screen physics.

    Port ``i`` sits behind a growing number of screens; small size classes are
    trapped faster. Entry ``[i, j]`` is the fraction of size-``j`` particles that
    survive to port ``i``. Screen counts and trapping rates are both spread
    geometrically, which keeps the default 10 x 8 kernel well conditioned.
    """
    screens = np.concatenate([[0.0], np.geomspace(1.0, 1000.0, n_ports - 1)])
    decay = np.geomspace(1.0, 1e-3, n_sizes)
    kernel = np.exp(-np.outer(screens, decay))
    if seed is not None:
        rng = np.random.default_rng(seed)
        kernel *= rng.uniform(0.9, 1.0, size=kernel.shape)
    return kernel
