"""Acceptance criteria, one printed PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""
import math
import os
import sys
import time

import numpy as np
import pytest
from scipy import stats

from rulasim import cli
from rulasim.channel import (
    RfConfig, RicianConfig, draw_nominal_angles, large_scale_gain, local_scattering_covariance,
    los_channels, noise_power, reference_loss_db, sample_channel,
)
from rulasim.geometry import assert_far_field, compute_geometry, fraunhofer_distance, standard_layout
from rulasim.objective import LocationObjective
from rulasim.positioning import PositioningModel, rayleigh_quantile, sample_position_estimate
from rulasim.receiver import zf_combiner
from rulasim.sim import Scenario, SweepSpec, optimize_rotations, run_sweep

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "configs")
SEED = 2024
LAYOUTS = [(1, 16), (2, 8), (4, 4)]
SIGMA_5DEG = np.deg2rad(5.0)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, started):
        status = "PASS" if ok else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number}: {status} ({time.time() - started:.1f} s) {detail}")
    return emit


def test_criterion_1_closed_forms(report):
    t0 = time.time()
    rf = RfConfig()
    lam = 299792458.0 / 3.5e9
    l0_exact = 20 * math.log10(4 * math.pi * 1.0 / lam)
    n0_exact = 4e-21 * 20e6 * 10 ** 0.9
    df_exact = 15**2 * lam / 2
    sigma_e = math.sqrt(10 ** 0.176)
    q_exact = sigma_e * math.sqrt(-2 * math.log(0.05))

    checks = {
        "L0": (reference_loss_db(rf), l0_exact, 43.30, 0.05),
        "noise": (noise_power(rf), n0_exact, 6.355e-13, 1e-3 * 6.355e-13),
        "d_F": (fraunhofer_distance(16, 3.5e9), df_exact, 9.64, 0.01),
        "q95": (rayleigh_quantile(0.95, PositioningModel.from_db(1.76).sigma_e), q_exact, 3.0, 0.02),
    }
    ok = True
    parts = []
    for name, (got, exact, quoted, tol) in checks.items():
        good = abs(got - exact) <= 1e-9 * abs(exact) and abs(got - quoted) <= tol
        ok &= good
        parts.append(f"{name}={got:.6g}")
    far = assert_far_field(standard_layout(1, 50.0, 12.0), 1.5, 16, 3.5e9)
    ok &= far
    report(1, ok, " ".join(parts) + f" far_field={far}", t0)
    assert ok


def _zf_instances(n, seed):
    rng = np.random.default_rng(seed)
    rf = RfConfig()
    dep = standard_layout(4, 50.0)
    out = []
    while len(out) < n:
        geo = compute_geometry(dep, rng.uniform(0, 50, (10, 2)), 1.5)
        psi = draw_nominal_angles(geo.azimuths.T, rng)
        R = local_scattering_covariance(large_scale_gain(geo.distances.T, rf), psi, SIGMA_5DEG, 4)
        h = sample_channel(geo, RicianConfig.from_db(rng.uniform(-20, 30)), rf, R, rng)
        if np.linalg.cond(h) < 1e6:
            out.append(h)
    return out


def test_criterion_2_zf_exactness(report):
    t0 = time.time()
    K = 10
    worst_res = worst_leak = 0.0
    for h in _zf_instances(100, 1):
        v = zf_combiner(h)
        g = v.conj().T @ h
        worst_res = max(worst_res, np.linalg.norm(g - np.eye(K)) / math.sqrt(K))
        power = np.abs(g) ** 2
        signal = np.diag(power).copy()
        np.fill_diagonal(power, 0.0)
        leak = power.sum(axis=1) / signal
        worst_leak = max(worst_leak, leak.max())
    ok = worst_res <= 1e-8 and worst_leak <= 1e-12
    report(2, ok, f"max residual/sqrt(K)={worst_res:.2e} max interference ratio={worst_leak:.2e}", t0)
    assert ok


def test_criterion_3_channel_statistics(report):
    t0 = time.time()
    rng = np.random.default_rng(3)
    rf = RfConfig()
    n = 100_000
    dep = standard_layout(2, 50.0)
    K, S = 3, 8
    geo = compute_geometry(dep, rng.uniform(0, 50, (K, 2)), 1.5)
    psi = draw_nominal_angles(geo.azimuths.T, rng)
    R = local_scattering_covariance(large_scale_gain(geo.distances.T, rf), psi, SIGMA_5DEG, S)
    rician = RicianConfig.from_db(10.0)
    h = sample_channel(geo, rician, rf, R, rng, n_samples=n)  # (n, M, K)
    kappa = rician.kappa
    mean_ref = math.sqrt(kappa / (1 + kappa)) * los_channels(geo, rf, S)  # (K, Q, S)
    mean_ref = mean_ref.reshape(K, -1).T
    mean_err = np.linalg.norm(h.mean(axis=0) - mean_ref) / np.linalg.norm(mean_ref)

    cov_err = 0.0
    nlos = (h - mean_ref) * math.sqrt(1 + kappa)
    for k in range(K):
        for q in range(dep.n_aps):
            block = nlos[:, q * S:(q + 1) * S, k]
            emp = block.T @ block.conj() / n
            cov_err = max(cov_err, np.linalg.norm(emp - R[k, q]) / np.linalg.norm(R[k, q]))

    model = PositioningModel.from_db(-10.0)
    true = rng.uniform(0, 50, (n, 2))
    err = np.linalg.norm(sample_position_estimate(true, model, rng) - true, axis=1)
    ks = stats.kstest(err, stats.rayleigh(scale=model.sigma_e).cdf).statistic

    ok = mean_err < 0.02 and cov_err < 0.05 and ks < 0.02
    report(3, ok, f"mean err={mean_err:.4f} cov err={cov_err:.4f} KS={ks:.4f}", t0)
    assert ok


def test_criterion_4_pso_vs_grid(report):
    t0 = time.time()
    scen = Scenario(n_aps=1, n_antennas=16, n_users=10, kappa_db=10.0)
    grid = np.deg2rad(np.arange(0.0, 180.0 + 1e-9, 0.5))[:, None]
    gaps = []
    for i in range(10):
        rng = np.random.default_rng([SEED, i])
        pos = rng.uniform(0, scen.area_side, (scen.n_users, 2))  # sigma_e^2 = 0
        obj = LocationObjective(pos, scen.deployment, scen.rf, scen.n_antennas, scen.device_height)
        best_grid = obj.batch(grid).max()
        res = optimize_rotations(scen, pos, rng)
        gaps.append(res.score - best_grid)
    ok = min(gaps) >= -1e-3
    report(4, ok, f"min(PSO - grid)={min(gaps):.2e} over 10 instances", t0)
    assert ok


@pytest.fixture(scope="module")
def kappa_sweep():
    t0 = time.time()
    res = run_sweep(Scenario(area_side=50.0, sigma_e_sq_db=-10.0),
                    SweepSpec("kappa_db", (-20.0, -10.0, 0.0, 10.0, 20.0)), 8, 50, SEED,
                    layouts=LAYOUTS)
    return res, time.time() - t0


def _pick(results, value, q, mode):
    return next(r for r in results if r.value == value and r.n_aps == q and r.mode == mode)


def test_criterion_5_kappa_trends(kappa_sweep, report):
    results, elapsed = kappa_sweep
    t0 = time.time() - elapsed
    kappas = (-20.0, -10.0, 0.0, 10.0, 20.0)
    ok = True
    parts = []
    for q, _ in LAYOUTS:
        static = [_pick(results, k, q, "static_ula") for k in kappas]
        rho = stats.spearmanr(kappas, [r.mean_se for r in static]).statistic
        jumps_ok = True
        for a, b in zip(static, static[1:]):
            d = b.network_means - a.network_means
            se = d.std(ddof=1) / math.sqrt(len(d))
            jumps_ok &= d.mean() <= 2 * se
        rot20, st20 = _pick(results, 20.0, q, "rotary_ula"), _pick(results, 20.0, q, "static_ula")
        p = stats.ttest_rel(rot20.network_means, st20.network_means, alternative="greater").pvalue
        rot_m20, st_m20 = _pick(results, -20.0, q, "rotary_ula"), _pick(results, -20.0, q, "static_ula")
        gap = abs(rot_m20.mean_se - st_m20.mean_se)
        tol = 2 * max(rot_m20.std_error, st_m20.std_error)
        good = rho <= 0 and jumps_ok and p < 0.05 and gap <= tol
        ok &= good
        parts.append(f"Q={q}: rho={rho:.2f} p20={p:.1e} gap-20={gap:.3f}<={tol:.3f}")
    report(5, ok, "; ".join(parts), t0)
    assert ok


def test_criterion_6_position_error_trends(report):
    t0 = time.time()
    sigmas = (-30.0, -20.0, -10.0, 0.0, 5.0)
    results = run_sweep(Scenario(area_side=50.0, kappa_db=10.0),
                        SweepSpec("sigma_e_sq_db", sigmas), 8, 50, SEED, layouts=LAYOUTS)
    ok = True
    parts = []
    for q, _ in LAYOUTS:
        rot = [_pick(results, s, q, "rotary_ula") for s in sigmas]
        sta = [_pick(results, s, q, "static_ula") for s in sigmas]
        low = [r for r, s in zip(rot, sigmas) if s <= -10.0]
        spread = max(r.mean_se for r in low) - min(r.mean_se for r in low)
        tol = 2 * max(r.std_error for r in low)
        margin = min(r.mean_se - s.mean_se for r, s in zip(rot, sta))
        good = spread < tol and margin > 0
        ok &= good
        parts.append(f"Q={q}: spread={spread:.3f}<{tol:.3f} min gain={margin:.3f}")
    report(6, ok, "; ".join(parts), t0)
    assert ok


def test_criterion_7_determinism(tmp_path, report):
    t0 = time.time()
    config = os.path.join(CONFIG_DIR, "kappa_sweep.yaml")
    outs = []
    for workers, name in ((1, "a"), (2, "b")):
        out = tmp_path / name
        code = cli.main(["run", config, "--profile", "fast", "--seed", str(SEED),
                         "--workers", str(workers), "--out-dir", str(out)])
        assert code == 0
        outs.append((out / "results.csv").read_bytes())
    rows = outs[0].count(b"\n") - 1
    ok = outs[0] == outs[1] and rows == 88
    report(7, ok, f"{rows} rows, workers 1 vs 2 byte-identical={outs[0] == outs[1]}", t0)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
