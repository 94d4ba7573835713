"""Experiment configuration file (YAML, schema version 1)."""
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .channel import RfConfig
from .sim import MODES, SWEEP_VARIABLES, Scenario, SweepSpec

SCHEMA_VERSION = 1

PROFILES = {"fast": (8, 50), "paper": (32, 250)}


class ConfigError(ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LayoutModel(_Strict):
    n_aps: int = Field(ge=1)
    antennas_per_ap: int = Field(ge=1)
    ap_positions_m: Optional[List[Tuple[float, float]]] = None


class ScenarioModel(_Strict):
    area_side_m: float = Field(50.0, gt=0)
    total_antennas: int = Field(16, ge=1)
    layouts: List[LayoutModel] = Field(default_factory=lambda: [
        LayoutModel(n_aps=1, antennas_per_ap=16), LayoutModel(n_aps=2, antennas_per_ap=8),
        LayoutModel(n_aps=4, antennas_per_ap=4), LayoutModel(n_aps=8, antennas_per_ap=2),
    ])
    n_users: int = Field(10, ge=1)
    tx_power_w: float = Field(0.1, gt=0)
    noise_psd_w_per_hz: float = Field(4e-21, gt=0)
    bandwidth_hz: float = Field(20e6, gt=0)
    noise_figure_db: float = 9.0
    carrier_hz: float = Field(3.5e9, gt=0)
    antenna_spacing_wavelengths: float = Field(0.5, gt=0)
    path_loss_exponent: float = Field(2.0, ge=1)
    reference_distance_m: float = Field(1.0, gt=0)
    ap_height_m: float = 12.0
    device_height_m: float = 1.5
    kappa_db: float = 10.0
    sigma_e_sq_db: float = -10.0
    n_clusters: int = Field(6, ge=1)
    cluster_spread_deg: float = Field(40.0, ge=0)
    angular_std_deg: float = Field(5.0, gt=0)
    clusters_follow_rotation: bool = False
    cond_cap: float = Field(1e8, gt=1)


class SweepModel(_Strict):
    variable: Literal[SWEEP_VARIABLES]
    values: List = Field(min_length=1)


class RealizationsModel(_Strict):
    n_network: int = Field(32, ge=1)
    n_channel: int = Field(250, ge=1)


class PsoModel(_Strict):
    swarm_size: Optional[int] = Field(None, ge=1)
    max_iters: Optional[int] = Field(None, ge=1)
    max_stall_iters: Optional[int] = Field(None, ge=1)
    tolerance: Optional[float] = Field(None, gt=0)
    inertia_schedule: Optional[Literal["adaptive", "linear"]] = None
    periodic: Optional[bool] = None

    def overrides(self):
        return {k: v for k, v in self.model_dump().items() if v is not None}


class OutputModel(_Strict):
    dir: str = "results"
    format: Literal["csv"] = "csv"


class ExperimentConfig(_Strict):
    schema_version: Literal[SCHEMA_VERSION]
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    sweep: SweepModel
    modes: List[Literal[MODES]] = Field(default_factory=lambda: list(MODES), min_length=1)
    realizations: RealizationsModel = Field(default_factory=RealizationsModel)
    master_seed: int = 2024
    pso: PsoModel = Field(default_factory=PsoModel)
    output: OutputModel = Field(default_factory=OutputModel)

    @model_validator(mode="after")
    def _check_sweep(self):
        try:
            SweepSpec(self.sweep.variable, tuple(self.sweep.values))
        except Exception as exc:
            raise ValueError(str(exc)) from exc
        return self

    def rf(self):
        s = self.scenario
        return RfConfig(
            carrier_hz=s.carrier_hz, bandwidth_hz=s.bandwidth_hz, noise_psd=s.noise_psd_w_per_hz,
            noise_figure_db=s.noise_figure_db, tx_power=s.tx_power_w,
            path_loss_exponent=s.path_loss_exponent, reference_distance=s.reference_distance_m,
            antenna_spacing=s.antenna_spacing_wavelengths,
        )

    def scenarios(self):
        """One base Scenario per configured layout."""
        s = self.scenario
        out = []
        for layout in s.layouts:
            positions = None
            if layout.ap_positions_m is not None:
                positions = tuple(tuple(p) for p in layout.ap_positions_m)
            out.append(Scenario(
                area_side=s.area_side_m, n_aps=layout.n_aps, n_antennas=layout.antennas_per_ap,
                n_users=s.n_users, kappa_db=s.kappa_db, sigma_e_sq_db=s.sigma_e_sq_db,
                mode=self.modes[0], ap_height=s.ap_height_m, device_height=s.device_height_m,
                rf=self.rf(), n_clusters=s.n_clusters, cluster_spread_deg=s.cluster_spread_deg,
                angular_std_deg=s.angular_std_deg, ap_positions=positions, cond_cap=s.cond_cap,
                clusters_follow_rotation=s.clusters_follow_rotation,
            ))
        return out

    def sweep_spec(self):
        return SweepSpec(self.sweep.variable, tuple(self.sweep.values))

    def layout_inconsistencies(self):
        total = self.scenario.total_antennas
        return [
            f"Q={l.n_aps}, S={l.antennas_per_ap}: Q*S={l.n_aps * l.antennas_per_ap} != M={total}"
            for l in self.scenario.layouts if l.n_aps * l.antennas_per_ap != total
        ]


def load_config(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}".replace("\n", " ")) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(p) for p in err["loc"])
        raise ConfigError(f"{loc}: {err['msg']}", field=loc) from exc
