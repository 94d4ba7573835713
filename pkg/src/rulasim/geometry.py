"""AP layouts, AP-device distances/azimuths and far-field checks."""
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ApDeployment:
    """Q access points at a common height.

    ``positions`` is a (Q, 2) array of ground coordinates in meters and
    ``boresights`` holds the un-rotated array orientation of each AP in
    radians (0 means the array axis lies along x).
    """

    positions: np.ndarray
    height: float = 12.0
    boresights: np.ndarray = field(default=None)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise GeometryError(f"AP positions must have shape (Q, 2), got {pos.shape}")
        if self.boresights is None:
            bs = np.zeros(pos.shape[0])
        else:
            bs = np.asarray(self.boresights, dtype=float).reshape(-1)
        if bs.shape[0] != pos.shape[0]:
            raise GeometryError("one boresight orientation per AP is required")
        if np.any(np.abs(bs) > np.pi):
            raise GeometryError("boresight orientations must lie in [-pi, pi]")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "boresights", bs)

    @property
    def n_aps(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class GeometryTable:
    distances: np.ndarray  # (Q, K) 3D distances, m
    azimuths: np.ndarray  # (Q, K) angle w.r.t. the rotated boresight, rad


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def standard_layout(n_aps, side, height=12.0):
    """Symmetric grid layouts for Q in {1, 2, 4, 8} on an ``side`` x ``side`` square."""
    a, h, b = side / 4.0, side / 2.0, 3.0 * side / 4.0
    layouts = {
        1: [(h, h)],
        2: [(a, h), (b, h)],
        4: [(a, a), (a, b), (b, a), (b, b)],
        8: [(a, a), (a, b), (b, a), (b, b), (h, a), (h, b), (a, h), (b, h)],
    }
    if n_aps not in layouts:
        raise GeometryError(f"no standard layout for Q={n_aps}; supported: 1, 2, 4, 8")
    return ApDeployment(np.array(layouts[n_aps]), height=height)


def compute_geometry(deployment, devices, device_height, rotations=None):
    """Distances and rotated azimuths between every AP and device.

    Parameters
    ----------
    deployment : ApDeployment
    devices : array_like, shape (K, 2)
        Device ground positions; estimates outside the area are accepted.
    device_height : float
    rotations : array_like, shape (Q,), optional
        Mechanical rotation of each array. Zero gives the static geometry.

    Returns
    -------
    GeometryTable
    """
    devices = np.atleast_2d(np.asarray(devices, dtype=float))
    n_aps = deployment.n_aps
    if rotations is None:
        rotations = np.zeros(n_aps)
    rotations = np.asarray(rotations, dtype=float).reshape(-1)
    if rotations.shape[0] != n_aps:
        raise GeometryError(f"expected {n_aps} rotations, got {rotations.shape[0]}")
    if not np.all(np.isfinite(rotations)):
        raise GeometryError("rotations must be finite")

    delta = devices[None, :, :] - deployment.positions[:, None, :]
    ground = np.hypot(delta[..., 0], delta[..., 1])
    dh = deployment.height - device_height
    distances = np.sqrt(ground**2 + dh**2)
    if np.any(distances <= 0.0):
        raise GeometryError("device coincides with an AP (zero distance)")
    azimuths = wrap_angle(
        np.arctan2(delta[..., 1], delta[..., 0])
        - deployment.boresights[:, None]
        - rotations[:, None]
    )
    return GeometryTable(distances, azimuths)


def wavelength(carrier_hz):
    return SPEED_OF_LIGHT / carrier_hz


def fraunhofer_distance(n_antennas, carrier_hz, spacing=0.5):
    """Far-field boundary 2 D^2 / lambda of an S-element ULA."""
    if n_antennas < 2:
        raise GeometryError("a ULA needs at least two elements to have an aperture")
    if carrier_hz <= 0:
        raise GeometryError("carrier frequency must be positive")
    lam = wavelength(carrier_hz)
    aperture = (n_antennas - 1) * spacing * lam
    return 2.0 * aperture**2 / lam


def assert_far_field(deployment, device_height, n_antennas, carrier_hz, spacing=0.5):
    """True iff the AP/device height gap already clears the Fraunhofer distance.

    The height gap lower-bounds every AP-device distance, so this holds for
    any device position.
    """
    gap = abs(deployment.height - device_height)
    return bool(gap >= fraunhofer_distance(n_antennas, carrier_hz, spacing))
