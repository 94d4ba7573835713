"""Monte Carlo driver: network realizations, rotation search and sweeps.

Random streams are keyed by (master seed, network realization index,
purpose), so every scenario evaluated at the same index sees the same device
positions, position errors, cluster draws and fading samples (common random
numbers), and the worker count never changes a result.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .channel import (
    RfConfig, RicianConfig, complex_normal, covariance_factor, csi_error_variance,
    draw_nominal_angles, large_scale_gain, local_scattering_covariance, noise_power,
    sample_channel,
)
from .geometry import ApDeployment, assert_far_field, compute_geometry, standard_layout
from .objective import LocationObjective
from .positioning import PositioningModel, sample_position_estimate
from .pso import PsoConfig, maximize
from .receiver import DEFAULT_COND_CAP

log = logging.getLogger(__name__)

MODES = ("static_ula", "rotary_ula")
SWEEP_VARIABLES = ("kappa_db", "sigma_e_sq_db", "layout_split", "area_side", "mode")

# stream ids inside one network realization
_POSITIONS, _POS_ERROR, _PSO, _CLUSTERS, _FADING, _CSI = range(6)


class SimulationError(RuntimeError):
    pass


class RealizationError(SimulationError):
    pass


@dataclass(frozen=True)
class Scenario:
    area_side: float = 50.0
    n_aps: int = 4
    n_antennas: int = 4
    n_users: int = 10
    kappa_db: float = 10.0
    sigma_e_sq_db: float = -10.0
    mode: str = "rotary_ula"
    ap_height: float = 12.0
    device_height: float = 1.5
    rf: RfConfig = field(default_factory=RfConfig)
    n_clusters: int = 6
    cluster_spread_deg: float = 40.0
    angular_std_deg: float = 5.0
    ap_positions: tuple = None  # custom layout; standard grid when None
    cond_cap: float = DEFAULT_COND_CAP
    max_retries: int = 10
    # Center the scattering-cluster window on the rotated azimuth instead of
    # the un-rotated one. Off by default: clusters are then the same for
    # static and rotary arrays and only the LoS part sees the rotation.
    clusters_follow_rotation: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise SimulationError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.n_users < 1 or self.n_antennas < 1:
            raise SimulationError("need at least one user and one antenna per AP")
        if self.n_aps * self.n_antennas < self.n_users:
            raise SimulationError("ZF needs at least as many antennas as users")

    @property
    def total_antennas(self):
        return self.n_aps * self.n_antennas

    @property
    def deployment(self):
        if self.ap_positions is not None:
            dep = ApDeployment(np.array(self.ap_positions, dtype=float), height=self.ap_height)
            if dep.n_aps != self.n_aps:
                raise SimulationError("custom AP positions do not match n_aps")
            return dep
        return standard_layout(self.n_aps, self.area_side, self.ap_height)

    @property
    def rician(self):
        return RicianConfig.from_db(
            self.kappa_db, n_clusters=self.n_clusters,
            cluster_spread_deg=self.cluster_spread_deg, angular_std_deg=self.angular_std_deg,
        )

    @property
    def positioning(self):
        return PositioningModel.from_db(self.sigma_e_sq_db)

    def far_field_ok(self):
        if self.n_antennas < 2:
            return True
        return assert_far_field(self.deployment, self.device_height, self.n_antennas,
                                self.rf.carrier_hz, self.rf.antenna_spacing)

    def rotation_key(self):
        """Fields the rotation search depends on (fading and mode do not matter)."""
        return replace(self, kappa_db=0.0, mode="rotary_ula", n_clusters=1,
                       cluster_spread_deg=0.0, angular_std_deg=1.0, max_retries=0,
                       clusters_follow_rotation=False)


@dataclass
class NetworkOutcome:
    per_user_se: np.ndarray  # (K,) mean over channel realizations
    rotations: np.ndarray
    n_excluded: int
    pso_iterations: int = 0


def stream(master_seed, index, purpose):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index, purpose)))


def optimize_rotations(scenario, est_positions, rng, pso_overrides=None):
    deployment = scenario.deployment
    objective = LocationObjective(est_positions, deployment, scenario.rf, scenario.n_antennas,
                                  scenario.device_height, scenario.cond_cap)
    config = PsoConfig.for_rotations(deployment.n_aps, **(pso_overrides or {}))
    return maximize(objective.batch, config, rng, vectorized=True)


def run_network_realization(scenario, master_seed, index, n_channel, rotations=None,
                            pso_overrides=None):
    """Simulate one set of active devices.

    Parameters
    ----------
    scenario : Scenario
    master_seed, index : int
        Select the random streams.
    n_channel : int
        Channel realizations averaged per user.
    rotations : ndarray, optional
        Reuse a rotation vector found earlier for the same positions.

    Returns
    -------
    NetworkOutcome
    """
    K, S = scenario.n_users, scenario.n_antennas
    deployment = scenario.deployment
    rf = scenario.rf

    true_pos = stream(master_seed, index, _POSITIONS).uniform(0.0, scenario.area_side, (K, 2))
    est_pos = sample_position_estimate(true_pos, scenario.positioning,
                                       stream(master_seed, index, _POS_ERROR))

    iterations = 0
    if scenario.mode == "static_ula":
        rotations = np.zeros(deployment.n_aps)
    elif rotations is None:
        result = optimize_rotations(scenario, est_pos, stream(master_seed, index, _PSO),
                                    pso_overrides)
        rotations, iterations = result.x, result.iterations

    geo = compute_geometry(deployment, true_pos, scenario.device_height, rotations)
    if scenario.clusters_follow_rotation:
        cluster_center = geo.azimuths
    else:
        cluster_center = compute_geometry(deployment, true_pos, scenario.device_height).azimuths
    rician = scenario.rician
    psi = draw_nominal_angles(cluster_center.T, stream(master_seed, index, _CLUSTERS),
                              rician.n_clusters, np.deg2rad(rician.cluster_spread_deg))
    beta = large_scale_gain(geo.distances.T, rf)
    R = local_scattering_covariance(beta, psi, np.deg2rad(rician.angular_std_deg), S)
    factors = covariance_factor(R)

    fading_rng = stream(master_seed, index, _FADING)
    csi_rng = stream(master_seed, index, _CSI)
    err_var = csi_error_variance(rf, K)
    noise = noise_power(rf)

    h = sample_channel(geo, rician, rf, R, fading_rng, n_samples=n_channel, factors=factors)
    h_est = h + complex_normal(csi_rng, h.shape, err_var)
    sinr, ok = kernels.zf_sinr(h, h_est, rf.tx_power, noise, scenario.cond_cap)

    n_excluded = 0
    for i in np.flatnonzero(~ok):
        for _ in range(scenario.max_retries):
            n_excluded += 1
            h1 = sample_channel(geo, rician, rf, R, fading_rng, n_samples=1, factors=factors)
            e1 = h1 + complex_normal(csi_rng, h1.shape, err_var)
            s1, ok1 = kernels.zf_sinr(h1, e1, rf.tx_power, noise, scenario.cond_cap)
            if ok1[0]:
                sinr[i] = s1[0]
                break
        else:
            raise RealizationError(
                f"network realization {index}: channel draw {i} stayed ill-conditioned "
                f"after {scenario.max_retries} retries (cond cap {scenario.cond_cap:g}, "
                f"Q={scenario.n_aps}, S={S}, K={K})"
            )
    se = np.log2(1.0 + sinr)
    return NetworkOutcome(se.mean(axis=0), np.asarray(rotations), n_excluded, iterations)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise SimulationError(
                f"invalid sweep variable {self.variable!r}; expected one of {SWEEP_VARIABLES}"
            )
        if len(self.values) == 0:
            raise SimulationError("sweep needs at least one value")
        if self.variable == "mode" and any(v not in MODES for v in self.values):
            raise SimulationError(f"mode sweep values must be in {MODES}")


@dataclass
class SweepResult:
    variable: str
    value: object
    mode: str
    n_aps: int
    n_antennas: int
    mean_se: float
    std_error: float
    n_network: int
    n_channel: int
    n_excluded: int
    seed: int
    network_means: np.ndarray  # per network realization, mean over users


def _apply(base, variable, value, n_aps, n_antennas, mode):
    scen = replace(base, n_aps=n_aps, n_antennas=n_antennas, mode=mode)
    if variable == "kappa_db":
        return replace(scen, kappa_db=float(value))
    if variable == "sigma_e_sq_db":
        return replace(scen, sigma_e_sq_db=float(value))
    if variable == "area_side":
        return replace(scen, area_side=float(value), ap_positions=None)
    if variable == "layout_split":
        q = int(value)
        total = base.total_antennas
        if total % q:
            raise SimulationError(f"layout split Q={q} does not divide M={total}")
        return replace(scen, n_aps=q, n_antennas=total // q, ap_positions=None)
    if variable == "mode":
        return replace(scen, mode=value)
    raise SimulationError(f"invalid sweep variable {variable!r}")


def sweep_grid(base, sweep, layouts=None, modes=MODES):
    """Scenarios in output order: sweep value, then layout, then mode.

    ``layouts`` holds (Q, S) pairs applied to ``base`` or complete Scenario
    objects (e.g. with custom AP positions).
    """
    if layouts is None:
        layouts = [(base.n_aps, base.n_antennas)]
    if sweep.variable == "layout_split":
        layouts = [None]
    if sweep.variable == "mode":
        modes = [None]
    grid = []
    for value in sweep.values:
        for layout in layouts:
            layout_base = base
            if layout is None:
                q, s = base.n_aps, base.n_antennas
            elif isinstance(layout, Scenario):
                layout_base, q, s = layout, layout.n_aps, layout.n_antennas
            else:
                q, s = layout
            for mode in modes:
                scen = _apply(layout_base, sweep.variable, value, q, s, mode or base.mode)
                grid.append((value, scen))
    return grid


def _run_index(args):
    scenarios, master_seed, index, n_channel, pso_overrides = args
    cache = {}
    out = []
    for scen in scenarios:
        rotations = None
        if scen.mode == "rotary_ula":
            rotations = cache.get(scen.rotation_key())
        res = run_network_realization(scen, master_seed, index, n_channel, rotations,
                                      pso_overrides)
        if scen.mode == "rotary_ula":
            cache[scen.rotation_key()] = res.rotations
        out.append((float(res.per_user_se.mean()), res.n_excluded))
    return out


def run_sweep(base, sweep, n_network, n_channel, master_seed, layouts=None, modes=MODES,
              workers=1, pso_overrides=None):
    """Evaluate every (sweep value, layout, mode) point on shared network realizations.

    Returns
    -------
    list of SweepResult, ordered by sweep value, then layout, then mode.
    """
    if n_network < 1 or n_channel < 1:
        raise SimulationError("realization counts must be positive")
    grid = sweep_grid(base, sweep, layouts, modes)
    scenarios = [scen for _, scen in grid]
    tasks = [(scenarios, master_seed, i, n_channel, pso_overrides) for i in range(n_network)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_index = list(pool.map(_run_index, tasks))
    else:
        per_index = [_run_index(t) for t in tasks]

    results = []
    for j, (value, scen) in enumerate(grid):
        means = np.array([per_index[i][j][0] for i in range(n_network)])
        excluded = sum(per_index[i][j][1] for i in range(n_network))
        std_error = float(means.std(ddof=1) / np.sqrt(n_network)) if n_network > 1 else float("nan")
        results.append(SweepResult(
            sweep.variable, value, scen.mode, scen.n_aps, scen.n_antennas,
            float(means.mean()), std_error, n_network, n_channel, excluded, master_seed, means,
        ))
    return results
