"""Deterministic equivalents for the double-scattering MIMO multiple-access channel.

Transmitter ``k`` reaches an ``N``-antenna receiver through

    H_k = R_k^{1/2} W_{1,k} S_k^{1/2} W_{2,k} T_k^{1/2} / sqrt(N_k n_k)

with ``N_k`` scatterers and ``n_k`` transmit antennas. The large-system
behaviour is captured by three positive numbers per transmitter,
``(gbar_k, g_k, delta_k)``, the solution of the coupled "fundamental
equations" solved by :func:`solve_fundamental`. Mutual information, MMSE
SINR, sum rate and the optimal precoders are closed-form functions of that
solution.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfig, NonConvergence, NotCodiagonalizable, NotPSD
from .linalg import herm_sqrt, logdet_hpd, psd_eigh, solve_cubic_in_interval

__all__ = [
    "MacConfig",
    "FundamentalSolution",
    "WaterfillResult",
    "RayleighProduct",
    "solve_fundamental",
    "fundamental_residual",
    "interference_map",
    "mutual_info_deteq",
    "mmse_sinr_deteq",
    "sum_rate_deteq",
    "sic_term",
    "waterfill_optimal_Q",
    "water_level",
    "rayleigh_product_closed_form",
    "rayleigh_product_config",
    "kronecker_deteq",
    "solve_kronecker",
    "fig4_config",
]

DELTA_FLOOR = 1e-300


def _as_matrix(a, shape, name):
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape != shape:
        raise InvalidConfig("%s has shape %s, expected %s" % (name, a.shape, shape))
    return a


@dataclass(frozen=True, eq=False)
class MacConfig:
    """Double-scattering MAC parameters.

    Parameters
    ----------
    R : list of (N, N) arrays
        Receive correlation per transmitter.
    s : list of 1-D arrays
        Scatterer correlation eigenvalues ``s_{k,1..N_k}`` (``S_k`` is
        diagonal without loss of generality). Use :meth:`from_matrices` to
        pass full ``S_k`` matrices.
    T, Q : list of (n_k, n_k) arrays
        Transmit correlation and precoder (input covariance).
    rho : float
        SNR (inverse noise variance).
    """

    R: tuple
    s: tuple
    T: tuple
    Q: tuple
    rho: float

    def __post_init__(self):
        K = len(self.R)
        if K < 1 or not (len(self.s) == len(self.T) == len(self.Q) == K):
            raise InvalidConfig("R, s, T, Q must all list the same K >= 1 transmitters")
        N = np.asarray(self.R[0]).shape[0]
        R = tuple(_as_matrix(r, (N, N), "R_%d" % (k + 1)) for k, r in enumerate(self.R))
        s = []
        for k, sk in enumerate(self.s):
            sk = np.atleast_1d(np.asarray(sk, dtype=float))
            if sk.ndim != 1 or sk.size < 1 or np.any(sk < 0) or not np.all(np.isfinite(sk)):
                raise InvalidConfig("s_%d must be a nonempty vector of nonnegative reals" % (k + 1))
            s.append(sk)
        T, Q = [], []
        for k in range(K):
            nk = np.asarray(self.T[k]).shape[0]
            T.append(_as_matrix(self.T[k], (nk, nk), "T_%d" % (k + 1)))
            Q.append(_as_matrix(self.Q[k], (nk, nk), "Q_%d" % (k + 1)))
        if not (self.rho > 0 and np.isfinite(self.rho)):
            raise InvalidConfig("rho must be positive and finite")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "s", tuple(s))
        object.__setattr__(self, "T", tuple(T))
        object.__setattr__(self, "Q", tuple(Q))
        object.__setattr__(self, "rho", float(self.rho))
        # PSD checks (and the square roots the samplers need)
        try:
            self.R_sqrt, self.T_sqrt, self.tq_eigs
            for k, q in enumerate(Q):
                psd_eigh(q, "Q_%d" % (k + 1))
        except NotPSD as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def from_matrices(cls, R, S, T, Q, rho):
        """Build a config from full ``S_k`` matrices (only their spectra are kept)."""
        s = []
        for k, Sk in enumerate(S):
            Sk = np.atleast_2d(np.asarray(Sk, dtype=complex))
            if Sk.shape[0] != Sk.shape[1]:
                raise InvalidConfig("S_%d is not square" % (k + 1))
            try:
                w, _ = psd_eigh(Sk, "S_%d" % (k + 1))
            except NotPSD as exc:
                raise InvalidConfig(str(exc)) from exc
            s.append(w)
        return cls(R=tuple(R), s=tuple(s), T=tuple(T), Q=tuple(Q), rho=rho)

    @property
    def K(self):
        return len(self.R)

    @property
    def N(self):
        return self.R[0].shape[0]

    @property
    def N_k(self):
        return tuple(sk.size for sk in self.s)

    @property
    def n_k(self):
        return tuple(t.shape[0] for t in self.T)

    @cached_property
    def R_sqrt(self):
        return tuple(herm_sqrt(r, "R_%d" % (k + 1)) for k, r in enumerate(self.R))

    @cached_property
    def T_sqrt(self):
        return tuple(herm_sqrt(t, "T_%d" % (k + 1)) for k, t in enumerate(self.T))

    @cached_property
    def TQT(self):
        out = []
        for ts, q in zip(self.T_sqrt, self.Q):
            m = ts @ q @ ts
            out.append(0.5 * (m + m.conj().T))
        return tuple(out)

    @cached_property
    def tq_eigs(self):
        """Eigenvalues of ``T_k^{1/2} Q_k T_k^{1/2}``."""
        return tuple(psd_eigh(m, "T^1/2 Q T^1/2")[0] for m in self.TQT)

    @cached_property
    def _R_diag(self):
        if all(np.count_nonzero(r - np.diag(np.diag(r))) == 0 for r in self.R):
            return np.array([np.real(np.diag(r)) for r in self.R])
        return None

    def with_rho(self, rho):
        return replace(self, rho=rho)

    def with_Q(self, Q):
        return replace(self, Q=tuple(Q))

    def joint_basis(self, k):
        """Common eigenbasis ``U`` of ``T_k`` and ``Q_k`` with their spectra ``t``, ``p``.

        Diagonal ``T_k``, ``Q_k`` keep the identity basis (stream ``j`` is
        antenna ``j``). Otherwise the pair must commute.
        """
        T, Q = self.T[k], self.Q[k]
        n = T.shape[0]
        if _is_diag(T) and _is_diag(Q):
            return np.eye(n, dtype=complex), np.real(np.diag(T)).copy(), np.real(np.diag(Q)).copy()
        scale = 1.0 + np.linalg.norm(T, 2) * np.linalg.norm(Q, 2)
        if np.linalg.norm(T @ Q - Q @ T, 2) > 1e-10 * scale:
            raise NotCodiagonalizable("T_%d and Q_%d do not commute" % (k + 1, k + 1))
        # a generic combination separates eigenvalues shared by one of them
        _, U = np.linalg.eigh(T + np.pi * Q)
        t = np.real(np.einsum("ji,jk,ki->i", U.conj(), T, U))
        p = np.real(np.einsum("ji,jk,ki->i", U.conj(), Q, U))
        off = U.conj().T @ T @ U - np.diag(t)
        if np.linalg.norm(off, 2) > 1e-8 * scale:
            raise NotCodiagonalizable("no common eigenbasis found for T_%d, Q_%d" % (k + 1, k + 1))
        return U, np.clip(t, 0.0, None), np.clip(p, 0.0, None)


def _is_diag(a):
    return np.count_nonzero(a - np.diag(np.diag(a))) == 0


@dataclass
class FundamentalSolution:
    g: np.ndarray
    gbar: np.ndarray
    delta: np.ndarray
    iterations: int
    residual: float


@dataclass
class WaterfillResult:
    U: list
    powers: list
    mu: np.ndarray
    g: np.ndarray
    iterations: int
    Q: list = field(default_factory=list)
    config: MacConfig = None


# fundamental equations ------------------------------------------------------


def _gbar(cfg, g):
    return np.array([np.sum(lam / (gk * lam + 1.0)) / lam.size for lam, gk in zip(cfg.tq_eigs, g)])


def _g(cfg, gbar, delta):
    return np.array(
        [
            np.sum(sk * d / (1.0 + gb * sk * d)) / n
            for sk, gb, d, n in zip(cfg.s, gbar, delta, cfg.n_k)
        ]
    )


def _delta(cfg, gbar, g, delta):
    """``(1/N_k) tr R_k (sum_i (n_i/N_i)(gbar_i g_i / delta_i) R_i + I/rho)^{-1}``."""
    coef = np.array(cfg.n_k) / np.array(cfg.N_k) * gbar * g / np.maximum(delta, DELTA_FLOOR)
    Rd = cfg._R_diag
    if Rd is not None:
        inv = 1.0 / (coef @ Rd + 1.0 / cfg.rho)
        return (Rd @ inv) / np.array(cfg.N_k)
    M = np.eye(cfg.N, dtype=complex) / cfg.rho
    for c, r in zip(coef, cfg.R):
        M = M + c * r
    M = 0.5 * (M + M.conj().T)
    X = np.linalg.solve(M, np.stack(cfg.R))
    tr = np.real(np.trace(X, axis1=-2, axis2=-1))
    return tr / np.array(cfg.N_k)


def fundamental_residual(cfg, gbar, g, delta):
    """Largest absolute mismatch over all ``3K`` fundamental equations."""
    gbar, g, delta = (np.asarray(v, dtype=float) for v in (gbar, g, delta))
    r1 = np.abs(_gbar(cfg, g) - gbar)
    r2 = np.abs(_g(cfg, gbar, delta) - g)
    r3 = np.abs(_delta(cfg, gbar, g, delta) - delta)
    return float(max(r1.max(), r2.max(), r3.max()))


def solve_fundamental(cfg, tol=1e-12, max_iter=100_000, init=None):
    """Solve the ``3K`` fundamental equations by Gauss-Seidel sweeps.

    Each sweep updates ``gbar`` from ``g``, then ``g`` from ``(gbar, delta)``,
    then ``delta`` from ``(gbar, g, delta)``. Iteration stops when the
    largest componentwise update (relative to ``max(1, |value|)``) is below
    ``tol``.

    Parameters
    ----------
    cfg : MacConfig
    tol : float
    max_iter : int
    init : tuple of arrays, optional
        Starting ``(gbar, g, delta)``; all ones by default.

    Raises
    ------
    NonConvergence
        After ``max_iter`` sweeps, or if a ``delta`` collapses to the floor.
    """
    K = cfg.K
    if init is None:
        gbar = np.ones(K)
        g = np.ones(K)
        delta = np.ones(K)
    else:
        gbar, g, delta = (np.array(v, dtype=float).reshape(K) for v in init)
    for it in range(1, max_iter + 1):
        gbar_new = _gbar(cfg, g)
        g_new = _g(cfg, gbar_new, delta)
        delta_new = _delta(cfg, gbar_new, g_new, delta)
        step = max(
            np.max(np.abs(gbar_new - gbar) / np.maximum(1.0, np.abs(gbar_new))),
            np.max(np.abs(g_new - g) / np.maximum(1.0, np.abs(g_new))),
            np.max(np.abs(delta_new - delta) / np.maximum(1.0, np.abs(delta_new))),
        )
        gbar, g, delta = gbar_new, g_new, delta_new
        if step <= tol:
            if np.any(delta <= DELTA_FLOOR):
                raise NonConvergence("delta collapsed to the floor", iterations=it)
            res = fundamental_residual(cfg, gbar, g, delta)
            return FundamentalSolution(g=g, gbar=gbar, delta=delta, iterations=it, residual=res)
    raise NonConvergence(
        "fundamental equations: no convergence after %d sweeps" % max_iter,
        iterations=max_iter,
        residual=step,
    )


def interference_map(cfg, x, tol=1e-13, max_iter=100_000):
    """The vector map ``h(x)`` whose fixed point is ``(g_1, .., g_K)``.

    ``gbar_k`` is computed from ``x_k`` and ``delta`` is solved to its own
    fixed point for that ``gbar`` and ``x``; then
    ``h_k = (1/n_k) sum_j s_{k,j} delta_k / (1 + gbar_k s_{k,j} delta_k)``.
    """
    x = np.asarray(x, dtype=float)
    gbar = _gbar(cfg, x)
    delta = np.ones(cfg.K)
    for _ in range(max_iter):
        new = _delta_given(cfg, gbar, delta)
        if np.max(np.abs(new - delta) / np.maximum(1.0, new)) <= tol:
            delta = new
            break
        delta = new
    else:
        raise NonConvergence("inner delta iteration of h did not converge")
    return _g(cfg, gbar, delta)


def _delta_given(cfg, gbar, delta):
    # g_i / delta_i written out so that it stays well defined in delta
    coef = np.array(
        [
            gb * np.sum(sk / (1.0 + gb * sk * d)) / Nk
            for sk, gb, d, Nk in zip(cfg.s, gbar, delta, cfg.N_k)
        ]
    )
    Rd = cfg._R_diag
    if Rd is not None:
        inv = 1.0 / (coef @ Rd + 1.0 / cfg.rho)
        return (Rd @ inv) / np.array(cfg.N_k)
    M = np.eye(cfg.N, dtype=complex) / cfg.rho
    for c, r in zip(coef, cfg.R):
        M = M + c * r
    X = np.linalg.solve(0.5 * (M + M.conj().T), np.stack(cfg.R))
    return np.real(np.trace(X, axis1=-2, axis2=-1)) / np.array(cfg.N_k)


# performance measures -------------------------------------------------------


def _mi_terms(cfg, sol):
    N = cfg.N
    coef = np.array(cfg.n_k) / np.array(cfg.N_k) * sol.gbar * sol.g / sol.delta
    M = np.eye(N, dtype=complex)
    for c, r in zip(coef, cfg.R):
        M = M + cfg.rho * c * r
    first = float(logdet_hpd(0.5 * (M + M.conj().T))) / N
    second = sum(np.sum(np.log1p(gb * d * sk)) for gb, d, sk in zip(sol.gbar, sol.delta, cfg.s)) / N
    third = sum(np.sum(np.log1p(gk * lam)) for gk, lam in zip(sol.g, cfg.tq_eigs)) / N
    fourth = -2.0 * float(np.sum(np.array(cfg.n_k) * sol.g * sol.gbar)) / N
    return first, second, third, fourth


def mutual_info_deteq(cfg, sol=None, **solver_kw):
    """Deterministic equivalent of ``(1/N) log det(I + rho sum_k H_k Q_k H_k^H)``."""
    if sol is None:
        sol = solve_fundamental(cfg, **solver_kw)
    return float(sum(_mi_terms(cfg, sol)))


def sic_term(cfg, sol=None, **solver_kw):
    """The ``(1/N) sum_k log det(I + g_k T_k^{1/2} Q_k T_k^{1/2})`` part of the mutual information."""
    if sol is None:
        sol = solve_fundamental(cfg, **solver_kw)
    return float(_mi_terms(cfg, sol)[2])


def mmse_sinr_deteq(cfg, sol=None, **solver_kw):
    """Per-stream MMSE SINR approximations ``p_{k,j} t_{k,j} g_k``.

    Streams are indexed in the joint eigenbasis returned by
    :meth:`MacConfig.joint_basis` (antenna order when ``T_k``, ``Q_k`` are
    diagonal).
    """
    bases = [cfg.joint_basis(k) for k in range(cfg.K)]
    if sol is None:
        sol = solve_fundamental(cfg, **solver_kw)
    return [p * t * gk for (_, t, p), gk in zip(bases, sol.g)]


def sum_rate_deteq(cfg, sol=None, **solver_kw):
    """``(1/N) sum_{k,j} log(1 + sinr_{k,j})`` with the deterministic SINRs."""
    sinr = mmse_sinr_deteq(cfg, sol, **solver_kw)
    return float(sum(np.sum(np.log1p(v)) for v in sinr)) / cfg.N


# water-filling ---------------------------------------------------------------


def water_level(gains, budget, n_modes, tol=1e-12):
    """Water level and powers for ``(1/n_modes) sum_j (mu - 1/gain_j)^+ = budget``.

    Modes with zero gain get zero power. The level is bracketed on
    ``[0, budget + max_j 1/gain_j]`` and bisected until the budget is met
    to ``tol``; the active set found that way then gives ``mu`` exactly.
    """
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros(gains.size)
    active = gains > 0
    if budget <= 0 or not np.any(active):
        return 0.0, powers
    floor = 1.0 / gains[active]
    total = budget * n_modes

    def used(mu):
        return np.sum(np.maximum(mu - floor, 0.0))

    lo, hi = 0.0, budget + floor.max()
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        u = used(mu)
        if abs(u - total) <= tol * max(1.0, total):
            break
        if u < total:
            lo = mu
        else:
            hi = mu
    on = floor < mu
    if np.any(on):
        mu = (total + floor[on].sum()) / on.sum()
    p = np.maximum(mu - floor, 0.0)
    powers[active] = p
    return float(mu), powers


def waterfill_optimal_Q(cfg, budgets, eps=1e-8, max_outer=500, **solver_kw):
    """Iterative water-filling for the precoders maximizing the deterministic mutual information.

    Starting from uniform loading ``p_{k,j} = P_k``, alternate between
    solving the fundamental equations for the current precoders and
    water-filling each transmitter over the eigenmodes of ``T_k`` with
    gains ``g_k t_{k,j}``, until no power changes by more than ``eps``.

    The returned ``g`` is the one that produced the final powers, so the
    water-filling conditions hold exactly for ``(powers, mu, g)``.
    """
    budgets = np.broadcast_to(np.asarray(budgets, dtype=float), (cfg.K,))
    if np.any(budgets <= 0):
        raise InvalidConfig("power budgets must be positive")
    U, t = [], []
    for k in range(cfg.K):
        w, v = psd_eigh(cfg.T[k], "T_%d" % (k + 1))
        U.append(v)
        t.append(w)
    powers = [np.full(cfg.n_k[k], budgets[k]) for k in range(cfg.K)]

    def precoders(pw):
        return [(u * p) @ u.conj().T for u, p in zip(U, pw)]

    sol = None
    for it in range(1, max_outer + 1):
        current = cfg.with_Q(precoders(powers))
        init = None if sol is None else (sol.gbar, sol.g, sol.delta)
        sol = solve_fundamental(current, init=init, **solver_kw)
        new, mus = [], []
        for k in range(cfg.K):
            mu, p = water_level(sol.g[k] * t[k], budgets[k], cfg.n_k[k])
            new.append(p)
            mus.append(mu)
        change = max(np.max(np.abs(a - b)) for a, b in zip(new, powers))
        powers = new
        if change <= eps:
            Q = precoders(powers)
            return WaterfillResult(
                U=U,
                powers=powers,
                mu=np.array(mus),
                g=sol.g.copy(),
                iterations=it,
                Q=Q,
                config=cfg.with_Q(Q),
            )
    raise NonConvergence("water-filling did not converge in %d iterations" % max_outer, iterations=max_outer)


# special cases ---------------------------------------------------------------


class RayleighProduct(NamedTuple):
    gbar: float
    ibar: float
    gamma: float


def rayleigh_product_closed_form(N, S, K, rho):
    """Closed forms for ``K`` uncorrelated double-scattering links, ``N`` antennas, ``S`` scatterers.

    ``gbar`` is the root of a cubic in ``[1 - min(1/K, S/N), 1)``.
    """
    if min(N, S, K) < 1 or not rho > 0:
        raise InvalidConfig("need N, S, K >= 1 and rho > 0")
    r = S / N
    c3 = 1.0
    c2 = -(2.0 - r - 1.0 / K)
    c1 = 1.0 - r - 1.0 / K + r / K * (1.0 + 1.0 / rho)
    c0 = -r / K / rho
    lo = 1.0 - min(1.0 / K, r)
    gb = solve_cubic_in_interval(c3, c2, c1, c0, lo, 1.0)
    ibar = (
        np.log1p(rho * N * K / S * gb * (gb + r - 1.0))
        - K * r * np.log1p((gb - 1.0) / r)
        - K * np.log(gb)
        - 2.0 * K * (1.0 - gb)
    )
    return RayleighProduct(gbar=gb, ibar=float(ibar), gamma=(1.0 - gb) / gb)


def rayleigh_product_config(N, S, K, rho):
    """The general-model configuration matching :func:`rayleigh_product_closed_form`."""
    eye = np.eye(N)
    return MacConfig(
        R=[eye] * K, s=[np.ones(S)] * K, T=[eye] * K, Q=[eye] * K, rho=rho
    )


def fig4_config(rho=1.0, N=4, n=3, Nk=11, phis=(np.pi / 4, np.pi / 2, np.pi), uniform=True):
    """Three-transmitter correlated MAC used for the precoding experiments.

    ``R_k = G(phi_k, 0.25, N)``, ``S_k = G(pi/8, 50, N_k)``,
    ``T_k = G(phi_k, 0.25, n)`` and uniform precoders ``Q_k = P_k I`` with
    ``P_k = 1/n``.
    """
    from .channels import correlation_matrix_G

    R = [correlation_matrix_G(p, 0.25, N) for p in phis]
    S = [correlation_matrix_G(np.pi / 8, 50.0, Nk) for _ in phis]
    T = [correlation_matrix_G(p, 0.25, n) for p in phis]
    Q = [np.eye(n) / n for _ in phis]
    return MacConfig.from_matrices(R, S, T, Q, rho)


# Kronecker model --------------------------------------------------------------


def solve_kronecker(Z, Tq, rho, tol=1e-12, max_iter=100_000):
    """Fixed point ``(ebar_k, e_k)`` for ``H_k = Z_k W_k Tq_k^{1/2} / sqrt(n_k)``."""
    K = len(Z)
    N = Z[0].shape[0]
    ZZ = [z @ z.conj().T for z in Z]
    lam = [psd_eigh(t, "Tq_%d" % (k + 1))[0] for k, t in enumerate(Tq)]
    n = np.array([t.shape[0] for t in Tq], dtype=float)
    e = np.ones(K)
    ebar = np.ones(K)
    for it in range(1, max_iter + 1):
        ebar_new = np.array([np.sum(l / (ek * l + 1.0)) / l.size for l, ek in zip(lam, e)])
        M = np.eye(N, dtype=complex) / rho
        for c, zz in zip(ebar_new, ZZ):
            M = M + c * zz
        X = np.linalg.solve(0.5 * (M + M.conj().T), np.stack(ZZ))
        e_new = np.real(np.trace(X, axis1=-2, axis2=-1)) / n
        step = max(np.max(np.abs(e_new - e)), np.max(np.abs(ebar_new - ebar)))
        e, ebar = e_new, ebar_new
        if step <= tol:
            return ebar, e, it
    raise NonConvergence("Kronecker fixed point did not converge", iterations=max_iter)


def kronecker_deteq(Z, Tq, rho, tol=1e-12, max_iter=100_000):
    """Deterministic equivalent of the mutual information of a Kronecker-type MAC.

    ``Z_k`` (``N x N_k``) are treated as deterministic left factors and
    ``Tq_k`` as effective transmit covariances.
    """
    ebar, e, _ = solve_kronecker(Z, Tq, rho, tol, max_iter)
    N = Z[0].shape[0]
    M = np.eye(N, dtype=complex)
    for c, z in zip(ebar, Z):
        M = M + rho * c * (z @ z.conj().T)
    val = float(logdet_hpd(0.5 * (M + M.conj().T))) / N
    for ek, ebk, t in zip(e, ebar, Tq):
        lam = psd_eigh(t)[0]
        val += (np.sum(np.log1p(ek * lam)) - t.shape[0] * ek * ebk) / N
    return val
