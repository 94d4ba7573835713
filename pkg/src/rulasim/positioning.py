"""Gaussian positioning error and Rayleigh accuracy quantiles."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PositioningModel:
    sigma_e_sq: float = 0.1  # per-axis error variance, m^2

    def __post_init__(self):
        if self.sigma_e_sq < 0:
            raise ValueError("positioning error variance must be nonnegative")

    @classmethod
    def from_db(cls, sigma_e_sq_db):
        return cls(db_to_sigma_sq(sigma_e_sq_db))

    @property
    def sigma_e(self):
        return float(np.sqrt(self.sigma_e_sq))


def db_to_sigma_sq(value_db):
    return 10.0 ** (value_db / 10.0)


def sigma_sq_to_db(sigma_sq):
    return 10.0 * np.log10(sigma_sq)


def sample_position_estimate(true_pos, model, rng):
    """Estimated positions ``true + eps`` with eps ~ N(0, sigma_e^2 I_2).

    Estimates are not clipped to the coverage area.
    """
    true_pos = np.asarray(true_pos, dtype=float)
    return true_pos + model.sigma_e * rng.standard_normal(true_pos.shape)


def rayleigh_quantile(F, sigma_e):
    """F-quantile of a Rayleigh(sigma_e) distribution."""
    F = np.asarray(F, dtype=float)
    if np.any((F < 0) | (F >= 1)):
        raise ValueError("quantile level must satisfy 0 <= F < 1")
    return sigma_e * np.sqrt(-2.0 * np.log1p(-F))


def sigma_for_quantile(target, F):
    """Per-axis variance sigma_e^2 whose Rayleigh F-quantile equals ``target``."""
    if not 0 < F < 1:
        raise ValueError("quantile level must satisfy 0 < F < 1")
    if target <= 0:
        raise ValueError("target accuracy must be positive")
    return target**2 / (-2.0 * np.log1p(-F))
