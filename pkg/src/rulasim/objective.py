"""Location-based rotation objective built on full-LoS pseudo channels."""
import numpy as np

from . import kernels
from .channel import large_scale_gain, los_channels, noise_power, stack_ap_major
from .geometry import compute_geometry
from .receiver import DEFAULT_COND_CAP


def build_pseudo_channels(est_positions, deployment, rotations, rf, n_antennas, device_height=1.5):
    """(Q*S, K) full-LoS channels seen from the estimated device positions."""
    geo = compute_geometry(deployment, est_positions, device_height, rotations)
    return stack_ap_major(los_channels(geo, rf, n_antennas))


class LocationObjective:
    """Mean per-user ZF spectral efficiency of the pseudo channels.

    Deterministic in the rotation vector. Distances (and so the estimated
    large-scale gains) do not depend on the rotation, so they are computed
    once here. Singular pseudo-channel matrices score ``-inf``.
    """

    def __init__(self, est_positions, deployment, rf, n_antennas, device_height=1.5,
                 cond_cap=DEFAULT_COND_CAP):
        geo = compute_geometry(deployment, est_positions, device_height)
        self.base_azimuths = geo.azimuths
        self.beta = large_scale_gain(geo.distances, rf)
        self.n_antennas = n_antennas
        self.spacing = rf.antenna_spacing
        self.power = rf.tx_power
        self.noise = noise_power(rf)
        self.cond_cap = cond_cap
        self.n_vars = deployment.n_aps

    def batch(self, thetas):
        """Scores for a (P, Q) array of rotation vectors."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        return kernels.swarm_scores(
            thetas, self.base_azimuths, self.beta, self.n_antennas, self.spacing,
            self.power, self.noise, self.cond_cap,
        )

    def __call__(self, theta):
        return float(self.batch(np.reshape(theta, (1, -1)))[0])


def score_rotations(rotations, est_positions, deployment, rf, n_antennas, device_height=1.5,
                    cond_cap=DEFAULT_COND_CAP):
    objective = LocationObjective(est_positions, deployment, rf, n_antennas, device_height, cond_cap)
    return objective(rotations)
