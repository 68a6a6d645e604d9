"""Deterministic equivalents for the K-hop amplify-and-forward MIMO relay chain.

Notation follows the usual relay model: the source has ``n_0`` antennas,
relay/destination ``k`` has ``n_k``; ``c_1 = n_0/n_1`` and
``c_k = n_{k-1}/n_k``. Hop ``k`` has path loss ``alpha_k`` and node ``k``
transmits with power budget ``rho_k``. Everything is evaluated in nats.

The Stieltjes-type quantities ``ebar_k``/``mbar_k`` are defined
recursively: every Picard update of ``ebar_k`` evaluates ``mbar_{k-1}`` at
a new shifted argument, which in turn solves ``ebar_{k-1}`` from scratch.
Cost therefore grows geometrically with ``k``; depth is capped by
``RelayConfig.max_hops``.
"""

import math
from dataclasses import dataclass, field

from .errors import InvalidConfig, NonConvergence

__all__ = [
    "RelayConfig",
    "RelayDeteqResult",
    "RelaySolver",
    "asymptotic_betas",
    "e0_closed_form",
    "m0_closed_form",
    "ebar_k",
    "mbar_k",
    "jbar_k",
    "ebar_residual",
    "mutual_info_deteq",
    "fig2_config",
]

DEFAULT_MAX_HOPS = 8
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
DAMPING_AFTER = 100


@dataclass(frozen=True)
class RelayConfig:
    """Relay chain parameters.

    Parameters
    ----------
    dims : sequence of int
        Antenna counts ``n_0, ..., n_K``.
    alphas : sequence of float
        Path losses ``alpha_1, ..., alpha_K``.
    rhos : sequence of float
        Power budgets ``rho_0, ..., rho_{K-1}``.
    max_hops : int
        Recursion cap on ``K``.
    """

    dims: tuple
    alphas: tuple
    rhos: tuple
    max_hops: int = DEFAULT_MAX_HOPS

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        K = len(self.dims) - 1
        if K < 1:
            raise InvalidConfig("dims must list n_0..n_K with K >= 1")
        if any(n < 1 for n in self.dims):
            raise InvalidConfig("all antenna counts must be >= 1")
        if len(self.alphas) != K:
            raise InvalidConfig("expected %d path losses, got %d" % (K, len(self.alphas)))
        if len(self.rhos) != K:
            raise InvalidConfig("expected %d power budgets, got %d" % (K, len(self.rhos)))
        # zero path loss / zero power are admitted as degenerate limits
        if any(not (a >= 0 and math.isfinite(a)) for a in self.alphas):
            raise InvalidConfig("alphas must be finite and nonnegative")
        if any(not (r >= 0 and math.isfinite(r)) for r in self.rhos):
            raise InvalidConfig("rhos must be finite and nonnegative")
        if K > self.max_hops:
            raise InvalidConfig(
                "K=%d exceeds the recursion cap max_hops=%d" % (K, self.max_hops)
            )

    @property
    def K(self):
        return len(self.dims) - 1

    def c(self, k):
        """Dimension ratio ``c_k = n_{k-1} / n_k`` for ``k = 1..K``."""
        return self.dims[k - 1] / self.dims[k]


@dataclass
class RelayDeteqResult:
    k: int
    ebar: float
    jbar: float
    ibar: float
    iterations: int = 0
    max_residual: float = 0.0
    betabar: tuple = field(default_factory=tuple)


def fig2_config(rho0=1.0, scale=1):
    """The four-hop chain used in the relay simulations (three relays)."""
    dims = tuple(scale * n for n in (4, 8, 12, 8, 4))
    return RelayConfig(
        dims=dims,
        alphas=(1.0, 0.7, 0.5, 0.7),
        rhos=(rho0, 0.7 * rho0, 0.5 * rho0, 0.7 * rho0),
    )


def asymptotic_betas(config):
    """Limits of the power-normalization factors, ``beta_0 .. beta_{K-1}``."""
    out = [config.rhos[0]]
    for k in range(1, config.K):
        out.append(config.rhos[k] / (1.0 + config.alphas[k - 1] * config.rhos[k - 1]))
    return tuple(out)


def e0_closed_form(x, beta0, alpha1, c1):
    a = x * alpha1 * beta0
    b = a * (1.0 - c1) + c1
    disc = math.sqrt(b * b + 4.0 * a * c1 * c1)
    if b > 0:
        # avoids cancellation in -b + sqrt(b^2 + ...) for small a
        return 2.0 * a * c1 * c1 / (b + disc)
    return 0.5 * (disc - b)


def m0_closed_form(x, beta0, alpha1, c1):
    e = e0_closed_form(x, beta0, alpha1, c1)
    return c1 / (alpha1 * beta0 / (c1 + e) + 1.0 / x) + (1.0 - c1) * x


class RelaySolver:
    """Evaluates the recursive quantities for one configuration.

    Keeps running diagnostics (total Picard iterations, worst final
    update) across calls; nothing else is cached.
    """

    def __init__(self, config, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        self.config = config
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0
        self.max_residual = 0.0

    def _ab(self, k, betas):
        return self.config.alphas[k - 1] * betas[k - 1]

    def _ebar_map(self, k, x, betas, e):
        cfg = self.config
        c = cfg.c(k + 1)
        a = x * self._ab(k + 1, betas)
        m = self.mbar(k - 1, a / (c + a + e), betas)
        return c * (c + e) - c * (c + e) ** 2 / a * m

    def ebar(self, k, x, betas, init=0.0):
        """``ebar_k(x)``; ``k=0`` is closed form, ``k>=1`` a fixed point."""
        cfg = self.config
        if x == 0.0:
            return 0.0
        if k == 0:
            return e0_closed_form(x, betas[0], cfg.alphas[0], cfg.c(1))
        if self._ab(k + 1, betas) == 0.0:
            return 0.0
        e = float(init)
        for it in range(1, self.max_iter + 1):
            new = self._ebar_map(k, x, betas, e)
            if it > DAMPING_AFTER:
                new = 0.5 * (e + new)
            step = abs(new - e)
            e = new
            if step <= self.tol * max(1.0, abs(e)):
                self.iterations += it
                self.max_residual = max(self.max_residual, step)
                return e
        raise NonConvergence(
            "ebar_%d did not converge at x=%g after %d iterations" % (k, x, self.max_iter),
            iterations=self.max_iter,
            residual=step,
        )

    def mbar(self, k, x, betas):
        cfg = self.config
        if x == 0.0:
            return 0.0
        if k == 0:
            return m0_closed_form(x, betas[0], cfg.alphas[0], cfg.c(1))
        c = cfg.c(k + 1)
        return x * c / (c + self.ebar(k, x, betas))

    def jbar(self, k, x, betas):
        """``Jbar_k(x)``, recursing down to the closed-form ``Jbar_1``."""
        cfg = self.config
        if x == 0.0:
            return 0.0
        c = cfg.c(k)
        a = x * self._ab(k, betas)
        e = self.ebar(k - 1, x, betas)
        tail = c * math.log1p(a / (c + e)) + math.log1p(e / c) - e / (c + e)
        if k == 1:
            return tail
        return c * self.jbar(k - 1, a / (c + a + e), betas) + tail


def _check_k(k, lo, hi, what):
    if not lo <= k <= hi:
        raise ValueError("%s needs %d <= k <= %d, got %d" % (what, lo, hi, k))


def ebar_k(k, x, betabar, config, init=0.0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Unique positive solution ``ebar_k(x, betabar)`` for ``0 <= k <= K-1``."""
    _check_k(k, 0, config.K - 1, "ebar_k")
    return RelaySolver(config, tol, max_iter).ebar(k, x, tuple(betabar), init)


def ebar_residual(k, x, betabar, e, config, tol=DEFAULT_TOL):
    """``|f_k(e) - e|`` where ``f_k`` is the map whose fixed point is ``ebar_k``."""
    solver = RelaySolver(config, tol)
    betas = tuple(betabar)
    if k == 0:
        c = config.c(1)
        a = x * config.alphas[0] * betas[0]
        return abs(c * a / (a / (c + e) + 1.0) - e) if a else abs(e)
    return abs(solver._ebar_map(k, x, betas, e) - e)


def mbar_k(k, x, betabar, config, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    _check_k(k, 0, config.K - 1, "mbar_k")
    return RelaySolver(config, tol, max_iter).mbar(k, x, tuple(betabar))


def jbar_k(k, x, betabar, config, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    _check_k(k, 1, config.K, "jbar_k")
    return RelaySolver(config, tol, max_iter).jbar(k, x, tuple(betabar))


def mutual_info_deteq(k, config, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Deterministic equivalent of the normalized mutual information after hop ``k``.

    Returns the difference of two ``Jbar_k(1, .)`` evaluations, with and
    without the source power, scaled by ``1/K``.
    """
    _check_k(k, 1, config.K, "mutual_info_deteq")
    betas = asymptotic_betas(config)[:k]
    betas = betas + (0.0,) * (config.K - len(betas))
    muted = (0.0,) + betas[1:]
    solver = RelaySolver(config, tol, max_iter)
    j_full = solver.jbar(k, 1.0, betas)
    j_muted = solver.jbar(k, 1.0, muted)
    ebar = solver.ebar(k - 1, 1.0, betas)
    ibar = (j_full - j_muted) / config.K
    if -1e-13 * max(1.0, abs(j_full)) < ibar < 0.0:
        # rounding when the source power is negligible
        ibar = 0.0
    return RelayDeteqResult(
        k=k,
        ebar=ebar,
        jbar=j_full,
        ibar=ibar,
        iterations=solver.iterations,
        max_residual=solver.max_residual,
        betabar=betas[:k],
    )
