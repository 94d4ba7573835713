"""Command line entry point: ``rulasim run`` and ``rulasim validate``."""
import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, kernels
from .channel import csi_error_variance, noise_power, reference_loss_db
from .config import PROFILES, ConfigError, load_config
from .geometry import GeometryError, fraunhofer_distance
from .sim import RealizationError, SimulationError, run_sweep

CSV_COLUMNS = ("sweep_value", "mode", "Q", "S", "mean_se", "std_error", "n_excluded", "seed")

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_ERROR = 2


def _fail(kind, message, field=None):
    parts = [f"error kind={kind}"]
    if field:
        parts.append(f"field={field}")
    parts.append("message=" + json.dumps(str(message)))
    print(" ".join(parts), file=sys.stderr)
    return EXIT_ERROR


def _far_field_violations(config):
    out = []
    for scen in config.scenarios():
        if not scen.far_field_ok():
            d_f = fraunhofer_distance(scen.n_antennas, scen.rf.carrier_hz, scen.rf.antenna_spacing)
            gap = abs(scen.ap_height - scen.device_height)
            out.append(f"S={scen.n_antennas}: height gap {gap:g} m < Fraunhofer distance {d_f:.4g} m")
    return out


def derived_quantities(config):
    rf = config.rf()
    k = config.scenario.n_users
    layouts = []
    for layout in config.scenario.layouts:
        s = layout.antennas_per_ap
        layouts.append({
            "Q": layout.n_aps,
            "S": s,
            "M": layout.n_aps * s,
            "fraunhofer_distance_m": fraunhofer_distance(s, rf.carrier_hz, rf.antenna_spacing)
            if s >= 2 else 0.0,
        })
    return {
        "noise_power_w": noise_power(rf),
        "reference_loss_db": float(reference_loss_db(rf)),
        "csi_error_variance": csi_error_variance(rf, k),
        "wavelength_m": rf.wavelength,
        "layouts": layouts,
    }


def format_results(results):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow([r.value, r.mode, r.n_aps, r.n_antennas, repr(r.mean_se),
                         repr(r.std_error), r.n_excluded, r.seed])
    return buf.getvalue()


def cmd_validate(args):
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return _fail("schema", exc, exc.field)
    report = {
        "config": config.model_dump(mode="json"),
        "derived": derived_quantities(config),
        "flags": config.layout_inconsistencies() + _far_field_violations(config),
    }
    print(json.dumps(report, indent=2))
    return EXIT_FLAGGED if report["flags"] else EXIT_OK


def cmd_run(args):
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return _fail("schema", exc, exc.field)
    inconsistent = config.layout_inconsistencies()
    if inconsistent:
        return _fail("consistency", "; ".join(inconsistent), "scenario.layouts")
    try:
        violations = _far_field_violations(config)
    except (GeometryError, SimulationError) as exc:
        return _fail("schema", exc, "scenario")
    if violations:
        return _fail("far_field", "; ".join(violations), "scenario.ap_height_m")

    n_network = config.realizations.n_network
    n_channel = config.realizations.n_channel
    if args.profile:
        n_network, n_channel = PROFILES[args.profile]
    seed = config.master_seed if args.seed is None else args.seed
    out_dir = args.out_dir or config.output.dir

    started = time.time()
    try:
        bases = config.scenarios()
        results = run_sweep(
            bases[0], config.sweep_spec(), n_network, n_channel, seed,
            layouts=bases, modes=config.modes, workers=args.workers,
            pso_overrides=config.pso.overrides(),
        )
    except RealizationError as exc:
        return _fail("realization", exc)
    except (SimulationError, GeometryError) as exc:
        return _fail("simulation", exc)
    wall = time.time() - started

    text = format_results(results)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(text)
    manifest = {
        "schema_version": config.schema_version,
        "config": config.model_dump(mode="json"),
        "resolved": {"n_network": n_network, "n_channel": n_channel, "master_seed": seed,
                     "profile": args.profile, "workers": args.workers},
        "derived": derived_quantities(config),
        "versions": {
            "rulasim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": kernels.BACKEND,
        },
        "results_file": "results.csv",
        "results_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "wall_time_s": wall,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"wrote {csv_path} ({len(results)} rows, {wall:.1f} s)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rulasim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured sweep")
    run.add_argument("config")
    run.add_argument("--profile", choices=sorted(PROFILES),
                     help="fast: 8 x 50 realizations, paper: 32 x 250")
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out-dir", default=None)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config and print derived quantities")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
