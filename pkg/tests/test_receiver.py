import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulasim.receiver import (
    SingularChannelError, SinrReport, compute_sinr, mean_per_user_se, per_user_se, zf_combiner,
)


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_single_user_combiner(rng):
    h = cgauss(rng, (6, 1))
    v = zf_combiner(h)
    np.testing.assert_allclose(v, h / np.linalg.norm(h) ** 2, rtol=1e-12)


def test_orthonormal_columns(rng):
    q, _ = np.linalg.qr(cgauss(rng, (8, 3)))
    np.testing.assert_allclose(zf_combiner(q), q, atol=1e-12)


def test_zf_residual(rng):
    h = cgauss(rng, (16, 10))
    v = zf_combiner(h)
    assert np.linalg.norm(v.conj().T @ h - np.eye(10)) <= 1e-8 * np.sqrt(10)


def test_zf_matches_normal_equations(rng):
    h = cgauss(rng, (16, 10))
    np.testing.assert_allclose(zf_combiner(h), h @ np.linalg.inv(h.conj().T @ h), atol=1e-10)


def test_zf_rejects_singular(rng):
    h = cgauss(rng, (8, 2))
    h[:, 1] = 2 * h[:, 0]
    with pytest.raises(SingularChannelError):
        zf_combiner(h)
    with pytest.raises(SingularChannelError):
        zf_combiner(cgauss(rng, (3, 4)))


def test_single_user_snr(rng):
    h = cgauss(rng, (16, 1)) * 1e-3
    p, noise = 0.1, 6e-13
    rep = compute_sinr(h, zf_combiner(h), p, noise)
    assert rep.sinr[0] == pytest.approx(p * np.linalg.norm(h) ** 2 / noise, rel=1e-10)


def test_perfect_csi_nulls_interference(rng):
    h = cgauss(rng, (16, 10))
    v = zf_combiner(h)
    g = np.abs(v.conj().T @ h) ** 2
    interference = g.sum(axis=1) - np.diag(g)
    assert np.all(interference <= 1e-12 * np.diag(g))
    rep = compute_sinr(h, v, 1.0, 0.5)
    np.testing.assert_allclose(rep.sinr, 1.0 / (0.5 * np.sum(np.abs(v) ** 2, axis=0)), rtol=1e-9)


def test_imperfect_csi_loses_on_average(rng):
    h = cgauss(rng, (16, 10))
    p, noise = 1.0, 1e-3
    perfect = compute_sinr(h, zf_combiner(h), p, noise).se
    worse = np.mean([
        compute_sinr(h, zf_combiner(h + 0.05 * cgauss(rng, h.shape)), p, noise).se
        for _ in range(1000)
    ], axis=0)
    assert np.all(worse < perfect)


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        compute_sinr(cgauss(rng, (4, 2)), cgauss(rng, (4, 3)), 1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-4, 1e4), st.floats(-np.pi, np.pi))
def test_scale_invariance(seed, mag, phase):
    rng = np.random.default_rng(seed)
    h = cgauss(rng, (8, 4))
    est = h + 0.1 * cgauss(rng, h.shape)
    c = mag * np.exp(1j * phase)
    a = compute_sinr(h, zf_combiner(est), 1.0, 0.1).sinr
    b = compute_sinr(c * h, zf_combiner(c * est), 1.0, 0.1 * abs(c) ** 2).sinr
    np.testing.assert_allclose(a, b, rtol=1e-8)


def test_se_monotone_in_power(rng):
    h = cgauss(rng, (16, 10))
    v = zf_combiner(h + 0.1 * cgauss(rng, h.shape))
    se = [compute_sinr(h, v, p, 1.0).se for p in (0.1, 1.0, 10.0)]
    assert np.all(se[0] < se[1]) and np.all(se[1] < se[2])


def test_mean_per_user_se():
    reps = [SinrReport(np.ones(4))]
    assert mean_per_user_se(reps) == pytest.approx(1.0)
    reps = [SinrReport(np.array([1.0, 3.0, 7.0])), SinrReport(np.array([3.0, 1.0, 0.0]))]
    assert mean_per_user_se(reps) == pytest.approx(np.mean([1.5, 1.5, 1.5]))
    np.testing.assert_allclose(per_user_se(reps), [1.5, 1.5, 1.5])
    flipped = [SinrReport(r.sinr[::-1]) for r in reps]
    assert mean_per_user_se(flipped) == pytest.approx(mean_per_user_se(reps))
    with pytest.raises(ValueError):
        mean_per_user_se([])
