"""Exact finite-dimensional channel realizations and their metrics.

These are the Monte Carlo counterparts of the deterministic equivalents:
relay chains with realized power normalization, double-scattering MAC
channels, and the exact mutual information / MMSE SINR of a realization.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import logdet_hpd, sample_standard_complex_gaussian

__all__ = [
    "RelayRealization",
    "sample_relay",
    "relay_covariances",
    "relay_mutual_info_exact",
    "relay_mutual_info_example1",
    "correlation_matrix_G",
    "sample_double_scattering",
    "stream_channels",
    "mac_mutual_info_exact",
    "mac_mmse_sinr_exact",
    "mac_mmse_sinrs_exact",
]


@dataclass
class RelayRealization:
    H: list
    betas: tuple
    R: list
    alphas: tuple

    @property
    def K(self):
        return len(self.H)

    @property
    def dims(self):
        return (self.H[0].shape[1],) + tuple(h.shape[0] for h in self.H)


def _next_cov(R_prev, H, alpha, beta, n_prev):
    HR = H @ R_prev
    R = np.eye(H.shape[0]) + (alpha * beta / n_prev) * (HR @ H.conj().T)
    return 0.5 * (R + R.conj().T)


def sample_relay(config, rng):
    """Draw ``H_1..H_K`` and run the covariance / normalization recursion.

    ``beta_k`` is computed from the realized covariance ``R_k`` (short-term
    power constraint). No transmit or noise vectors are sampled: the
    expectation over them is exactly ``R_k``.
    """
    dims = config.dims
    H = [
        sample_standard_complex_gaussian(dims[k], dims[k - 1], rng)
        for k in range(1, config.K + 1)
    ]
    R = [np.eye(dims[0], dtype=complex)]
    betas = [config.rhos[0]]
    for k in range(1, config.K + 1):
        R.append(_next_cov(R[-1], H[k - 1], config.alphas[k - 1], betas[k - 1], dims[k - 1]))
        if k < config.K:
            betas.append(config.rhos[k] / (np.trace(R[k]).real / dims[k]))
    return RelayRealization(H=H, betas=tuple(betas), R=R, alphas=tuple(config.alphas))


def relay_covariances(real, betas):
    """Covariances ``R_0..R_K`` of ``real``'s channels under normalizers ``betas``."""
    dims = real.dims
    R = [np.eye(dims[0], dtype=complex)]
    for k in range(1, real.K + 1):
        R.append(_next_cov(R[-1], real.H[k - 1], real.alphas[k - 1], betas[k - 1], dims[k - 1]))
    return R


def relay_mutual_info_exact(real, k, K=None):
    """Normalized mutual information between source and hop-``k`` output (nats).

    ``(J_k(beta) - J_k(beta')) / K`` with ``J_k = log det R_k / n_k`` and
    ``beta'`` the realized normalizers with the source power zeroed.
    """
    K = real.K if K is None else K
    if not 1 <= k <= real.K:
        raise ValueError("hop index out of range")
    n_k = real.dims[k]
    muted = relay_covariances(real, (0.0,) + tuple(real.betas[1:]))
    j_full = logdet_hpd(real.R[k]) / n_k
    j_muted = logdet_hpd(muted[k]) / n_k
    return (j_full - j_muted) / K


def relay_mutual_info_example1(real, K=None):
    """Two-hop mutual information written directly in terms of ``H_1, H_2``."""
    K = real.K if K is None else K
    n, n1, n2 = real.dims[:3]
    H1, H2 = real.H[:2]
    a1, a2 = real.alphas[:2]
    b0, b1 = real.betas[:2]
    A = np.eye(n2) + (a2 * b1 / n1) * (H2 @ H2.conj().T)
    G = H2 @ H1
    B = (a2 * b1 * a1 * b0 / (n1 * n)) * (G @ G.conj().T)
    M = np.eye(n2) + np.linalg.solve(A, B)
    sign, logdet = np.linalg.slogdet(M)
    return float(logdet) / (K * n2)


def correlation_matrix_G(phi, d, n):
    """Uniform-array correlation matrix for angular spread ``phi`` and spacing ``d``.

    ``[G]_{k,l} = (1/n) sum_j exp(i 2 pi d (k-l) sin(j phi / (1-n)))`` with
    ``j`` running over ``(1-n)/2, ..., (n-1)/2``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    j = np.arange(n) - (n - 1) / 2.0
    angles = np.sin(j * phi / (1.0 - n))
    diff = np.subtract.outer(np.arange(n), np.arange(n))
    G = np.exp(2j * np.pi * d * diff[:, :, None] * angles[None, None, :]).mean(axis=2)
    G = 0.5 * (G + G.conj().T)
    np.fill_diagonal(G, 1.0)
    return G


def sample_double_scattering(cfg, rng):
    """One realization ``H_k = R^{1/2} W1 S^{1/2} W2 T^{1/2} / sqrt(N_k n_k)`` per transmitter.

    ``S_k`` is applied through its eigenvalues (unitary invariance of
    ``W1``/``W2``). Draw order: ``W1`` then ``W2`` for ``k = 1..K``.
    """
    H = []
    for k in range(cfg.K):
        N, Nk, nk = cfg.N, cfg.N_k[k], cfg.n_k[k]
        W1 = sample_standard_complex_gaussian(N, Nk, rng)
        W2 = sample_standard_complex_gaussian(Nk, nk, rng)
        inner = (cfg.R_sqrt[k] @ W1) * np.sqrt(cfg.s[k])[None, :]
        H.append(inner @ W2 @ cfg.T_sqrt[k] / np.sqrt(Nk * nk))
    return H


def stream_channels(H, cfg):
    """Per-stream effective channels ``H_k U_k diag(sqrt(p_k))``.

    Column ``j`` of entry ``k`` carries stream ``(k, j)`` of the MMSE
    receiver, in the joint eigenbasis of ``T_k`` and ``Q_k``.
    """
    out = []
    for k in range(cfg.K):
        U, _, p = cfg.joint_basis(k)
        out.append((H[k] @ U) * np.sqrt(p)[None, :])
    return out


def mac_mutual_info_exact(H, Q, rho):
    """``(1/N) log det(I + rho sum_k H_k Q_k H_k^H)``."""
    N = H[0].shape[0]
    A = np.eye(N, dtype=complex)
    for Hk, Qk in zip(H, Q):
        A = A + rho * (Hk @ Qk @ Hk.conj().T)
    A = 0.5 * (A + A.conj().T)
    return float(logdet_hpd(A)) / N


def _gram(H):
    N = H[0].shape[0]
    A = np.zeros((N, N), dtype=complex)
    for Hk in H:
        A = A + Hk @ Hk.conj().T
    return A


def mac_mmse_sinr_exact(H, k, j, rho):
    """MMSE SINR of stream ``j`` of transmitter ``k`` (stream channels in ``H``).

    The stream itself is removed from the covariance explicitly before a
    Hermitian solve.
    """
    h = H[k][:, j]
    N = h.shape[0]
    A = _gram(H) - np.outer(h, h.conj()) + np.eye(N) / rho
    A = 0.5 * (A + A.conj().T)
    x = sla.solve(A, h, assume_a="pos")
    return float(np.real(np.vdot(h, x)))


def mac_mmse_sinrs_exact(H, rho):
    """All stream SINRs at once via ``q = h^H A^{-1} h`` and ``gamma = q / (1 - q)``.

    Here ``A`` contains every stream, so a single Cholesky factorization
    serves all of them (matrix-inversion lemma).
    """
    N = H[0].shape[0]
    A = _gram(H) + np.eye(N) / rho
    A = 0.5 * (A + A.conj().T)
    factor = sla.cho_factor(A, lower=True)
    out = []
    for Hk in H:
        X = sla.cho_solve(factor, Hk)
        q = np.real(np.einsum("ij,ij->j", Hk.conj(), X))
        out.append(q / (1.0 - q))
    return out

