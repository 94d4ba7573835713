"""Large-scale fading, ULA steering, local-scattering covariances and Rician sampling.

Channel matrices are (M, K) with M = Q*S, stacked AP-major: rows
``q*S:(q+1)*S`` of column k hold the channel between device k and AP q.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .geometry import wavelength

log = logging.getLogger(__name__)

# Number of distances clamped up to the reference distance (diagnostic only).
clamp_count = 0


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class RfConfig:
    carrier_hz: float = 3.5e9
    bandwidth_hz: float = 20e6
    noise_psd: float = 4e-21  # W/Hz
    noise_figure_db: float = 9.0
    tx_power: float = 0.1  # W
    path_loss_exponent: float = 2.0
    reference_distance: float = 1.0  # m
    antenna_spacing: float = 0.5  # wavelengths

    def __post_init__(self):
        for name in ("carrier_hz", "bandwidth_hz", "noise_psd", "tx_power",
                     "reference_distance", "antenna_spacing"):
            if not getattr(self, name) > 0:
                raise ChannelError(f"{name} must be strictly positive")
        if self.path_loss_exponent < 1:
            raise ChannelError("path_loss_exponent must be >= 1")

    @property
    def wavelength(self):
        return wavelength(self.carrier_hz)


@dataclass(frozen=True)
class RicianConfig:
    kappa: float = 10.0  # linear
    n_clusters: int = 6
    cluster_spread_deg: float = 40.0
    angular_std_deg: float = 5.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ChannelError("Rician factor must be nonnegative")
        if self.n_clusters < 1:
            raise ChannelError("need at least one scattering cluster")
        if not self.angular_std_deg > 0:
            raise ChannelError("angular standard deviation must be positive")

    @classmethod
    def from_db(cls, kappa_db, **kwargs):
        return cls(kappa=10.0 ** (kappa_db / 10.0), **kwargs)


def reference_loss_db(rf):
    """Free-space (Friis) loss at the reference distance, in dB."""
    return 20.0 * np.log10(4.0 * np.pi * rf.reference_distance / rf.wavelength)


def path_loss_db(d, rf):
    """Log-distance large-scale gain (negative dB) at distance ``d``.

    Distances below the reference distance are clamped to it.
    """
    global clamp_count
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ChannelError("distance must be positive")
    close = d < rf.reference_distance
    if np.any(close):
        clamp_count += int(np.count_nonzero(close))
        log.debug("clamped %d distances to d0", np.count_nonzero(close))
        d = np.maximum(d, rf.reference_distance)
    out = -reference_loss_db(rf) - 10.0 * rf.path_loss_exponent * np.log10(d / rf.reference_distance)
    return out[()] if out.ndim == 0 else out


def large_scale_gain(d, rf):
    """Linear power gain beta = 10^(path_loss_db/10)."""
    return 10.0 ** (path_loss_db(d, rf) / 10.0)


def noise_power(rf):
    return rf.noise_psd * rf.bandwidth_hz * 10.0 ** (rf.noise_figure_db / 10.0)


def csi_error_variance(rf, n_users):
    """Per-entry channel estimation error variance, 1 / (K * p / sigma_n^2)."""
    if n_users < 1:
        raise ChannelError("need at least one user")
    return noise_power(rf) / (n_users * rf.tx_power)


def los_steering(beta, phi, n_antennas, spacing=0.5):
    """LoS array response sqrt(beta) * exp(-j 2 pi s spacing sin(phi)).

    ``beta`` and ``phi`` broadcast together; the antenna index is appended as
    the last axis.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < 0):
        raise ChannelError("large-scale gain must be nonnegative")
    phi = np.asarray(phi, dtype=float)
    s = np.arange(n_antennas)
    phase = -2.0j * np.pi * spacing * np.sin(phi)[..., None] * s
    return np.sqrt(beta)[..., None] * np.exp(phase)


def local_scattering_covariance(beta, nominal_angles, angular_std, n_antennas, clamp=True):
    """Gaussian local scattering covariance for a half-wavelength ULA.

    Parameters
    ----------
    beta : float or array_like
        Large-scale gain, shape ``batch``.
    nominal_angles : array_like
        Cluster angles in radians, shape ``batch + (N,)``.
    angular_std : float
        Angular standard deviation in radians.
    n_antennas : int
    clamp : bool
        Symmetrize and clip negative eigenvalues to zero.

    Returns
    -------
    ndarray, shape ``batch + (S, S)``

    Notes
    -----
    The phase sign follows the LoS steering convention, so that with a single
    cluster and vanishing spread the matrix equals ``a a^H``.
    """
    beta = np.asarray(beta, dtype=float)
    psi = np.asarray(nominal_angles, dtype=float)
    lag = np.subtract.outer(np.arange(n_antennas), np.arange(n_antennas))
    sin_psi = np.sin(psi)[..., None, None]
    cos_psi = np.cos(psi)[..., None, None]
    terms = np.exp(-1j * np.pi * lag * sin_psi) * np.exp(
        -0.5 * angular_std**2 * (np.pi * lag * cos_psi) ** 2
    )
    R = beta[..., None, None] * terms.mean(axis=-3)
    if not clamp:
        return R
    R = 0.5 * (R + np.conj(np.swapaxes(R, -1, -2)))
    w, U = np.linalg.eigh(R)
    w = np.maximum(w, 0.0)
    return (U * w[..., None, :]) @ np.conj(np.swapaxes(U, -1, -2))


def draw_nominal_angles(phi, rng, n_clusters=6, spread=np.deg2rad(40.0)):
    """Cluster angles uniform on [phi - spread, phi + spread], appended as last axis."""
    phi = np.asarray(phi, dtype=float)
    u = rng.uniform(-1.0, 1.0, size=phi.shape + (n_clusters,))
    return phi[..., None] + spread * u


def covariance_factor(R, tol=1e-8):
    """Hermitian square-root factor F with R = F F^H via eigendecomposition."""
    w, U = np.linalg.eigh(R)
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    if np.any(w < -tol * np.maximum(scale, np.finfo(float).tiny)):
        raise ChannelError("correlation matrix is not positive semi-definite")
    return U * np.sqrt(np.maximum(w, 0.0))[..., None, :]


def complex_normal(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def stack_ap_major(blocks):
    """(..., K, Q, S) per-AP blocks -> (..., Q*S, K) channel matrices."""
    *lead, K, Q, S = blocks.shape
    return np.swapaxes(blocks.reshape(*lead, K, Q * S), -1, -2)


def los_channels(geometry, rf, n_antennas):
    """Deterministic LoS blocks, shape (K, Q, S)."""
    beta = large_scale_gain(geometry.distances, rf)
    return los_steering(beta, geometry.azimuths, n_antennas, rf.antenna_spacing).transpose(1, 0, 2)


def sample_channel(geometry, rician, rf, correlations, rng, n_samples=None, factors=None):
    """Draw Rician channel matrices.

    Parameters
    ----------
    geometry : GeometryTable
        True (rotated) geometry, (Q, K).
    rician : RicianConfig
    rf : RfConfig
    correlations : ndarray, shape (K, Q, S, S)
        NLoS covariance per (device, AP) pair.
    rng : numpy.random.Generator
    n_samples : int, optional
        Draw a (n_samples, M, K) batch instead of a single (M, K) matrix.
    factors : ndarray, optional
        Precomputed ``covariance_factor(correlations)``.

    Returns
    -------
    ndarray
    """
    correlations = np.asarray(correlations)
    K, Q, S, _ = correlations.shape
    if geometry.distances.shape != (Q, K):
        raise ChannelError("geometry does not match the correlation matrices")
    if factors is None:
        factors = covariance_factor(correlations)
    los = los_channels(geometry, rf, S)
    kappa = rician.kappa
    if np.isinf(kappa):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = np.sqrt(kappa / (1.0 + kappa)), np.sqrt(1.0 / (1.0 + kappa))
    batch = () if n_samples is None else (n_samples,)
    z = complex_normal(rng, batch + (K, Q, S))
    nlos = np.einsum("kqst,...kqt->...kqs", factors, z)
    return stack_ap_major(w_los * los + w_nlos * nlos)


def perturb_csi(channels, rf, n_users, rng):
    """Noisy channel estimate: true channel plus i.i.d. CN(0, sigma_csi^2) error."""
    var = csi_error_variance(rf, n_users)
    return channels + complex_normal(rng, np.shape(channels), var)
