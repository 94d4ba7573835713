"""Hot loops: batched ZF/SINR evaluation and swarm scoring.

Each kernel has a vectorized numpy implementation (``*_numpy``) and a
numba-compiled loop (``*_numba``). The public names point at the numba
version unless numba is missing or ``RULASIM_DISABLE_NUMBA=1``.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def zf_sinr_numpy(h_true, h_est, power, noise, cond_cap):
    """ZF combining from ``h_est`` evaluated on ``h_true``.

    Parameters
    ----------
    h_true, h_est : ndarray, shape (n, M, K)
    power, noise : float
    cond_cap : float
        Realizations with cond(h_est) above this are flagged and get zero SINR.

    Returns
    -------
    sinr : ndarray, shape (n, K)
    ok : ndarray of bool, shape (n,)
    """
    q, r = np.linalg.qr(h_est)
    sv = np.linalg.svd(r, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = sv[:, 0] / sv[:, -1]
    ok = np.isfinite(cond) & (cond <= cond_cap)
    K = r.shape[-1]
    r = np.where(ok[:, None, None], r, np.eye(K))
    # V^H = R^{-1} Q^H, i.e. V = H (H^H H)^{-1}
    vh = np.linalg.solve(r, np.conj(np.swapaxes(q, -1, -2)))
    g = np.abs(vh @ h_true) ** 2
    signal = np.diagonal(g, axis1=-2, axis2=-1)
    interference = g.sum(axis=-1) - signal
    vnorm = np.sum(np.abs(vh) ** 2, axis=-1)
    sinr = power * signal / (power * interference + noise * vnorm)
    sinr[~ok] = 0.0
    return sinr, ok


@njit
def _zf_sinr_one(h_true, h_est, power, noise, cond_cap, out):
    M, K = h_est.shape
    q, r = np.linalg.qr(h_est)
    c = np.linalg.cond(r)
    if not np.isfinite(c) or c > cond_cap:
        for k in range(K):
            out[k] = 0.0
        return False
    vh = np.linalg.solve(r, np.ascontiguousarray(np.conj(q.T)))
    for k in range(K):
        vnorm = 0.0
        for m in range(M):
            vnorm += vh[k, m].real ** 2 + vh[k, m].imag ** 2
        signal = 0.0
        interference = 0.0
        for j in range(K):
            acc = 0j
            for m in range(M):
                acc += vh[k, m] * h_true[m, j]
            g = acc.real**2 + acc.imag**2
            if j == k:
                signal = g
            else:
                interference += g
        out[k] = power * signal / (power * interference + noise * vnorm)
    return True


@njit
def zf_sinr_numba(h_true, h_est, power, noise, cond_cap):
    n, M, K = h_est.shape
    sinr = np.zeros((n, K))
    ok = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        ok[i] = _zf_sinr_one(
            np.ascontiguousarray(h_true[i]), np.ascontiguousarray(h_est[i]),
            power, noise, cond_cap, sinr[i],
        )
    return sinr, ok


def pseudo_channels_numpy(thetas, base_azimuths, beta, n_antennas, spacing):
    """Full-LoS channels for a batch of rotation vectors.

    thetas (P, Q), base_azimuths (Q, K), beta (Q, K) -> (P, Q*S, K).
    """
    phi = base_azimuths[None, :, :] - thetas[:, :, None]
    s = np.arange(n_antennas)
    blocks = np.sqrt(beta)[None, :, :, None] * np.exp(
        -2.0j * np.pi * spacing * np.sin(phi)[..., None] * s
    )
    P, Q, K, S = blocks.shape
    return blocks.transpose(0, 1, 3, 2).reshape(P, Q * S, K)


def swarm_scores_numpy(thetas, base_azimuths, beta, n_antennas, spacing, power, noise, cond_cap):
    """Mean per-user SE of the pseudo channels for each rotation vector (-inf if singular)."""
    h = pseudo_channels_numpy(np.atleast_2d(thetas), base_azimuths, beta, n_antennas, spacing)
    sinr, ok = zf_sinr_numpy(h, h, power, noise, cond_cap)
    score = np.log2(1.0 + sinr).mean(axis=-1)
    score[~ok] = -np.inf
    return score


@njit
def swarm_scores_numba(thetas, base_azimuths, beta, n_antennas, spacing, power, noise, cond_cap):
    P, Q = thetas.shape
    K = base_azimuths.shape[1]
    M = Q * n_antennas
    out = np.empty(P)
    h = np.empty((M, K), dtype=np.complex128)
    sinr = np.empty(K)
    for p in range(P):
        for q in range(Q):
            for k in range(K):
                amp = np.sqrt(beta[q, k])
                step = -2.0 * np.pi * spacing * np.sin(base_azimuths[q, k] - thetas[p, q])
                for s in range(n_antennas):
                    h[q * n_antennas + s, k] = amp * np.exp(1j * step * s)
        if _zf_sinr_one(h, h, power, noise, cond_cap, sinr):
            acc = 0.0
            for k in range(K):
                acc += np.log2(1.0 + sinr[k])
            out[p] = acc / K
        else:
            out[p] = -np.inf
    return out


if HAVE_NUMBA:
    def zf_sinr(h_true, h_est, power, noise, cond_cap):
        return zf_sinr_numba(
            np.ascontiguousarray(h_true, dtype=np.complex128),
            np.ascontiguousarray(h_est, dtype=np.complex128),
            float(power), float(noise), float(cond_cap),
        )

    def swarm_scores(thetas, base_azimuths, beta, n_antennas, spacing, power, noise, cond_cap):
        return swarm_scores_numba(
            np.ascontiguousarray(np.atleast_2d(thetas), dtype=np.float64),
            np.ascontiguousarray(base_azimuths, dtype=np.float64),
            np.ascontiguousarray(beta, dtype=np.float64),
            int(n_antennas), float(spacing), float(power), float(noise), float(cond_cap),
        )
else:
    zf_sinr = zf_sinr_numpy
    swarm_scores = swarm_scores_numpy
