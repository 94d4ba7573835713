"""Zero-forcing combining, per-user SINR and spectral efficiency."""
from dataclasses import dataclass

import numpy as np

DEFAULT_COND_CAP = 1e8


class SingularChannelError(np.linalg.LinAlgError):
    """Estimated channel matrix is rank deficient or too ill-conditioned for ZF."""


@dataclass(frozen=True)
class SinrReport:
    sinr: np.ndarray  # (K,) linear

    @property
    def se(self):
        return np.log2(1.0 + self.sinr)


def zf_combiner(h_est, cond_cap=DEFAULT_COND_CAP):
    """ZF combining matrix V = H (H^H H)^{-1}, computed from a thin QR of H.

    Raises
    ------
    SingularChannelError
        If M < K or cond(H) exceeds ``cond_cap``.
    """
    h_est = np.asarray(h_est, dtype=complex)
    if h_est.ndim == 1:
        h_est = h_est[:, None]
    M, K = h_est.shape
    if M < K:
        raise SingularChannelError(f"ZF needs M >= K (M={M}, K={K})")
    q, r = np.linalg.qr(h_est)
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[-1] == 0 or not sv[0] / sv[-1] <= cond_cap:
        raise SingularChannelError(f"channel condition number above cap {cond_cap:g}")
    # H = QR  =>  V = Q R^{-H}
    return np.conj(np.linalg.solve(r, np.conj(q.T)).T)


def compute_sinr(h_true, combiner, power, noise):
    """Per-user SINR of linear combining ``combiner`` on the true channels."""
    h_true = np.asarray(h_true)
    combiner = np.asarray(combiner)
    if h_true.shape != combiner.shape:
        raise ValueError(f"shape mismatch: channels {h_true.shape}, combiner {combiner.shape}")
    if power <= 0 or noise <= 0:
        raise ValueError("power and noise must be positive")
    g = np.abs(np.conj(combiner.T) @ h_true) ** 2
    signal = np.diag(g)
    interference = g.sum(axis=1) - signal
    vnorm = np.sum(np.abs(combiner) ** 2, axis=0)
    return SinrReport(power * signal / (power * interference + noise * vnorm))


def per_user_se(reports):
    """Per-user SE averaged over channel realizations, shape (K,)."""
    if len(reports) == 0:
        raise ValueError("no SINR reports to average")
    return np.mean([r.se for r in reports], axis=0)


def mean_per_user_se(reports):
    """Average over channel realizations per user, then over users."""
    return float(np.mean(per_user_se(reports)))
