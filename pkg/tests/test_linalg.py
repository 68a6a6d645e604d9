import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iterdeteq.errors import NoRootInInterval, NotPositiveDefinite, NotPSD
from iterdeteq.linalg import (
    herm_sqrt,
    is_hermitian,
    logdet_hpd,
    make_rng,
    sample_standard_complex_gaussian,
    solve_cubic_in_interval,
    trial_rng,
)


def _random_hpd(n, rng):
    A = sample_standard_complex_gaussian(n, n, rng)
    return A @ A.conj().T + 0.1 * np.eye(n)


def test_logdet_matches_slogdet(rng):
    for n in (1, 3, 8):
        A = _random_hpd(n, rng)
        sign, ref = np.linalg.slogdet(A)
        assert abs(logdet_hpd(A) - ref) < 1e-10


def test_logdet_stack():
    rng = make_rng(1)
    A = np.stack([_random_hpd(4, rng) for _ in range(3)])
    out = logdet_hpd(A)
    assert out.shape == (3,)
    assert np.allclose(out, [np.linalg.slogdet(a)[1] for a in A])


def test_logdet_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        logdet_hpd(np.diag([1.0, -1.0]))


def test_herm_sqrt_squares_back(rng):
    A = _random_hpd(5, rng)
    B = herm_sqrt(A)
    assert is_hermitian(B)
    assert np.allclose(B @ B, A, atol=1e-10)


def test_herm_sqrt_clamps_tiny_negative_eigenvalues():
    v = np.linalg.qr(np.arange(9.0).reshape(3, 3) + np.eye(3))[0]
    A = (v * np.array([-1e-13, 0.5, 2.0])) @ v.T
    B = herm_sqrt(A)
    assert np.all(np.linalg.eigvalsh(B) >= -1e-12)


def test_herm_sqrt_rejects_negative():
    with pytest.raises(NotPSD):
        herm_sqrt(np.diag([1.0, -0.1]))


def test_complex_gaussian_moments():
    g = sample_standard_complex_gaussian(400, 500, make_rng(3))
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.01
    assert abs(np.mean(g.real ** 2) - 0.5) < 0.01
    assert abs(np.mean(g.real * g.imag)) < 0.01


def test_complex_gaussian_rejects_empty():
    with pytest.raises(ValueError):
        sample_standard_complex_gaussian(0, 3, make_rng(0))


def test_trial_streams_match_spawned_children():
    children = np.random.SeedSequence(99).spawn(3)
    for t, child in enumerate(children):
        ref = np.random.Generator(np.random.PCG64(child)).standard_normal(4)
        assert np.array_equal(trial_rng(99, t).standard_normal(4), ref)


def test_cubic_known_root():
    # (x - 0.3)(x - 2)(x + 1)
    c = np.poly([0.3, 2.0, -1.0])
    assert abs(solve_cubic_in_interval(*c, 0.0, 1.0) - 0.3) < 1e-14


def test_cubic_no_root():
    with pytest.raises(NoRootInInterval):
        solve_cubic_in_interval(1.0, 0.0, 0.0, -8.0, 0.0, 1.0)


def test_cubic_two_roots_rejected():
    c = np.poly([0.2, 0.6, 5.0])
    with pytest.raises(NoRootInInterval):
        solve_cubic_in_interval(*c, 0.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.05, 0.95),
    st.floats(1.5, 10.0),
    st.floats(-10.0, -0.5),
)
def test_cubic_matches_numpy_roots(r, a, b):
    c = np.poly([r, a, b])
    x = solve_cubic_in_interval(*c, 0.0, 1.0)
    ref = [z.real for z in np.roots(c) if abs(z.imag) < 1e-9 and 0 <= z.real < 1]
    assert len(ref) == 1
    assert abs(x - ref[0]) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_logdet_of_product_is_additive(n, seed):
    rng = make_rng(seed)
    A, B = _random_hpd(n, rng), _random_hpd(n, rng)
    C = herm_sqrt(A) @ B @ herm_sqrt(A)
    assert abs(logdet_hpd(C) - logdet_hpd(A) - logdet_hpd(B)) < 1e-8 * max(1.0, abs(logdet_hpd(C)))
