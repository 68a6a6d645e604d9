"""Dense complex linear algebra, Gaussian sampling and a bracketed cubic solver.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` (or
real arrays where that is enough). Random numbers come from numpy's
``Generator`` backed by the PCG64 bit generator; see :func:`make_rng` and
:func:`trial_rng` for the seeding rules.
"""

import numpy as np

from .errors import NoRootInInterval, NotPositiveDefinite, NotPSD

__all__ = [
    "make_rng",
    "trial_rng",
    "sample_standard_complex_gaussian",
    "logdet_hpd",
    "herm_sqrt",
    "spectral_norm",
    "is_hermitian",
    "solve_cubic_in_interval",
]

PSD_CLAMP = 1e-10


def make_rng(seed):
    """Return a PCG64-backed generator for a 64-bit unsigned ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def trial_rng(seed, trial):
    """Generator for Monte Carlo trial number ``trial`` under master ``seed``.

    The stream is ``PCG64(SeedSequence(seed, spawn_key=(trial,)))``, i.e.
    exactly the stream of the ``trial``-th child of
    ``SeedSequence(seed).spawn(...)``. It depends only on ``(seed, trial)``,
    so trials can be evaluated in any order or on any number of workers.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_standard_complex_gaussian(rows, cols, rng):
    """i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2)."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive, got %r x %r" % (rows, cols))
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) * np.sqrt(0.5)


def is_hermitian(a, rtol=1e-12):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + spectral_norm(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def logdet_hpd(a):
    """Natural-log determinant of a Hermitian positive definite matrix.

    Uses a Cholesky factorization, ``log det A = 2 sum(log diag L)``.
    Stacks of matrices (shape ``(..., n, n)``) are accepted and give an
    array of log-determinants.

    Raises
    ------
    NotPositiveDefinite
        If the factorization fails.
    """
    a = np.asarray(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not Hermitian positive definite") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    if np.any(~(diag > 0)):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return 2.0 * np.sum(np.log(diag), axis=-1)


def _clamped_eigh(a, what):
    a = np.asarray(a)
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    scale = max(np.max(np.abs(w), initial=0.0), 0.0)
    if w.size and w[0] < -PSD_CLAMP * scale:
        raise NotPSD("%s has eigenvalue %.3e < -%g * ||A||" % (what, w[0], PSD_CLAMP))
    return np.clip(w, 0.0, None), v


def psd_eigh(a, what="matrix"):
    """Eigen-decomposition of a Hermitian PSD matrix with tiny negatives clamped."""
    return _clamped_eigh(a, what)


def herm_sqrt(a, what="matrix"):
    """Hermitian PSD square root ``B`` with ``B @ B == A``.

    Eigenvalues in ``[-1e-10 ||A||, 0)`` are treated as zero; anything more
    negative raises :class:`NotPSD`.
    """
    w, v = _clamped_eigh(a, what)
    b = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (b + b.conj().T)


def spectral_norm(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _cubic(coeffs, x):
    c3, c2, c1, c0 = coeffs
    return ((c3 * x + c2) * x + c1) * x + c0


def solve_cubic_in_interval(c3, c2, c1, c0, lo, hi, grid=4097):
    """Unique real root of ``c3 x^3 + c2 x^2 + c1 x + c0`` in ``[lo, hi)``.

    The interval is scanned on a uniform grid; exactly one sign change (or
    exact zero) must be found, which is then refined by bisection to an
    absolute accuracy of about 1e-15.

    Raises
    ------
    NoRootInInterval
        If the scan finds no root or more than one.
    """
    if not hi > lo:
        raise ValueError("need lo < hi")
    coeffs = (float(c3), float(c2), float(c1), float(c0))
    xs = np.linspace(lo, hi, grid)
    ps = _cubic(coeffs, xs)
    sg = np.sign(ps)
    # hi itself is outside the half-open interval
    exact = np.flatnonzero(sg[:-1] == 0)
    changes = np.flatnonzero(sg[:-1] * sg[1:] < 0)
    n_roots = exact.size + changes.size
    if n_roots != 1:
        raise NoRootInInterval(
            "found %d roots of the cubic on [%g, %g)" % (n_roots, lo, hi)
        )
    if exact.size:
        return float(xs[exact[0]])
    i = changes[0]
    a, b = float(xs[i]), float(xs[i + 1])
    pa = _cubic(coeffs, a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        pm = _cubic(coeffs, m)
        if pm == 0.0:
            return m
        if (pm < 0) == (pa < 0):
            a, pa = m, pm
        else:
            b = m
    # pick the endpoint with the smaller residual
    return a if abs(_cubic(coeffs, a)) <= abs(_cubic(coeffs, b)) else b
