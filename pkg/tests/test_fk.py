import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from scatlen import corpus
from scatlen.fk import (
    SIGMA2,
    THREADS_ENV,
    McConfig,
    core_survival,
    estimate_g,
    outside_bias_bound,
    sandwich_check,
    shell_factor,
)
from scatlen.potential import RadialPotential


def simulate_bridges(rng, r1, r2, T, n, m):
    """Brownian bridges (variance rate SIGMA2) from r1 to r2 on n sub-steps."""
    dt = T / n
    W = np.cumsum(rng.standard_normal((m, n)) * math.sqrt(SIGMA2 * dt), axis=1)
    W = np.concatenate([np.zeros((m, 1)), W], axis=1)
    t = np.linspace(0.0, T, n + 1)
    return r1 + (r2 - r1) * t / T + W - (t / T)[None, :] * W[:, -1:], dt


def hard_sphere_g(a, beta):
    """Exact g(beta) for a hard sphere in d=3.

    A path started at distance r > a hits the ball before time beta with
    probability (a/r) erfc((r - a) / sqrt(2 SIGMA2 beta)); integrating over r
    gives 8 pi a (1 + a sqrt(2 / (pi beta)) + a^2 / (6 beta)).
    """
    return 8 * math.pi * a * (1 + a * math.sqrt(2 / (math.pi * beta)) + a * a / (6 * beta))


# -- single-step kernels against simulation -----------------------------------------------


@pytest.mark.parametrize("r1,r2", [(1.1, 1.05), (1.3, 1.2), (1.02, 1.4)])
def test_core_survival_against_simulation(r1, r2):
    rng = np.random.default_rng(11)
    T, m = 0.02, 20000
    X, dt = simulate_bridges(rng, r1, r2, T, 2000, m)
    # continuity correction for the discretely monitored minimum
    shift = 0.5826 * math.sqrt(SIGMA2 * dt)
    p = np.mean(X.min(axis=1) > 1.0 + shift)
    assert abs(p - core_survival(r1, r2, 1.0, T)) <= 4 * math.sqrt(p * (1 - p) / m) + 2e-3


def test_shell_factor_against_simulation():
    rng = np.random.default_rng(12)
    r1, r2, s, gamma, T = 1.1, 0.95, 1.0, 3.0, 0.02
    X, dt = simulate_bridges(rng, r1, r2, T, 2000, 20000)
    a, b = X[:, :-1], X[:, 1:]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # local time of the piecewise-linear path at s
    L = (((lo <= s) & (s < hi)) * dt / np.maximum(hi - lo, 1e-300)).sum(axis=1)
    v = np.exp(-gamma * L)
    assert abs(v.mean() - shell_factor(r1, r2, s, gamma, T)) <= 4 * v.std() / math.sqrt(v.size) + 2e-3


def test_shell_factor_small_gamma_slope():
    # 1 - E[exp(-g L)] ~ g E[L], E[L] = int_0^T density of the bridge at s
    r1, r2, s, T = 1.1, 0.95, 1.0, 0.02
    mean = lambda t: r1 + (r2 - r1) * t / T
    sd = lambda t: math.sqrt(SIGMA2 * t * (T - t) / T)
    EL, _ = integrate.quad(lambda t: stats.norm.pdf(s, mean(t), sd(t)), 0.0, T, epsabs=1e-14)
    g = 1e-6
    assert (1 - shell_factor(r1, r2, s, g, T)) / g == pytest.approx(EL, rel=1e-5)


def test_shell_factor_infinite_strength_is_survival():
    # gamma -> inf: the bridge must not touch the shell
    for r1, r2 in [(1.1, 1.05), (1.3, 1.2)]:
        assert shell_factor(r1, r2, 1.0, 1e9, 0.02) == pytest.approx(core_survival(r1, r2, 1.0, 0.02), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 50.0), st.floats(1e-4, 1.0))
def test_shell_factor_is_a_probability(r1, r2, gamma, dt):
    f = shell_factor(r1, r2, 1.5, gamma, dt)
    assert 0.0 <= f <= 1.0 + 1e-15


# -- estimator --------------------------------------------------------------------------


def test_zero_potential():
    est = estimate_g(RadialPotential(), 3, 1.0, McConfig(n_paths=100, n_steps=10))
    assert est.mean == 0.0 and est.stderr == 0.0


def test_hard_sphere_against_exact_hitting_probability():
    est = estimate_g(corpus.hard_sphere(1.0), 3, 1.0, McConfig(n_paths=20000, n_steps=1000, seed=4))
    exact = hard_sphere_g(1.0, 1.0)
    assert exact == pytest.approx(49.375, abs=1e-3)
    assert abs(est.mean - exact) <= 3 * est.stderr + est.outside_bias_bound


def test_small_beta_square_well():
    est = estimate_g(corpus.square_well(1.0, 1.0), 3, 0.01, McConfig(n_paths=20000, n_steps=100, seed=5))
    target = 4 * math.pi / 3
    assert abs(est.mean - target) <= 3 * est.stderr + 0.02 * target


def test_determinism_across_threads(monkeypatch):
    V = corpus.square_well(1.0, 1.0)
    cfg = dict(n_paths=3000, n_steps=50, seed=123, chunk_size=256)
    a = estimate_g(V, 3, 0.5, McConfig(**cfg, threads=1))
    b = estimate_g(V, 3, 0.5, McConfig(**cfg, threads=4))
    monkeypatch.setenv(THREADS_ENV, "3")
    c = estimate_g(V, 3, 0.5, McConfig(**cfg, threads=1))
    assert a == b == c


def test_seed_changes_estimate():
    V = corpus.square_well(1.0, 1.0)
    a = estimate_g(V, 3, 0.5, McConfig(n_paths=2000, n_steps=50, seed=1))
    b = estimate_g(V, 3, 0.5, McConfig(n_paths=2000, n_steps=50, seed=2))
    assert a.mean != b.mean


@settings(max_examples=8, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(1.0, 4.0), st.integers(0, 2**32))
def test_monotone_in_potential(c, factor, seed):
    cfg = McConfig(n_paths=2000, n_steps=50, seed=seed)
    lo = estimate_g(corpus.square_well(c, 1.0), 3, 0.5, cfg)
    hi = estimate_g(corpus.square_well(c * factor, 1.0), 3, 0.5, cfg)
    assert lo.mean <= hi.mean + 3 * (lo.stderr + hi.stderr)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(1.2, 4.0), st.integers(0, 2**32))
def test_beta_times_g_non_decreasing(beta, factor, seed):
    V = corpus.square_well(2.0, 1.0)
    # a common start ball keeps the two estimates comparable
    rho = 1.0 + 6.0 * math.sqrt(beta * factor)
    g1 = estimate_g(V, 3, beta, McConfig(n_paths=2000, n_steps=100, seed=seed, sample_radius=rho))
    g2 = estimate_g(V, 3, beta * factor, McConfig(n_paths=2000, n_steps=100, seed=seed, sample_radius=rho))
    b1, b2 = beta, beta * factor
    assert b1 * g1.mean <= b2 * g2.mean + 3 * (b1 * g1.stderr + b2 * g2.stderr)


@pytest.mark.parametrize("d", [2, 3])
def test_outside_bias_bound_decreases(d):
    V = corpus.square_well(1.0, 1.0)
    vals = [outside_bias_bound(V, d, 1.0, rho) for rho in (3.0, 5.0, 8.0)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert outside_bias_bound(V, d, 1.0, 0.5) == math.inf


def test_infinite_range_flags_truncation():
    est = estimate_g(corpus.power_tail(), 3, 0.5, McConfig(n_paths=500, n_steps=20))
    assert est.truncated


@pytest.mark.parametrize(
    "kw", [dict(n_paths=0), dict(n_steps=0), dict(chunk_size=0), dict(seed=-1), dict(seed=2**64)]
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        McConfig(**kw)


def test_bad_beta():
    with pytest.raises(ValueError):
        estimate_g(corpus.hard_sphere(1.0), 3, 0.0)


def test_sample_radius_inside_range_rejected():
    with pytest.raises(ValueError):
        estimate_g(corpus.square_well(1.0, 2.0), 3, 1.0, McConfig(n_paths=10, n_steps=5, sample_radius=1.0))


# -- sandwich ----------------------------------------------------------------------------


def test_sandwich_zero_potential():
    rep = sandwich_check(RadialPotential(), 3, 1.0, McConfig(n_paths=10, n_steps=5))
    assert rep.passed and rep.g.mean == rep.e_lo == rep.e_hi == 0.0


def test_sandwich_shell():
    rep = sandwich_check(corpus.delta_shell(1.0, 2.0), 3, 1.0, McConfig(n_paths=20000, n_steps=500, seed=9))
    assert rep.passed, rep


def test_sandwich_hard_sphere_reduced():
    rep = sandwich_check(corpus.hard_sphere(1.0), 3, 1.0, McConfig(n_paths=20000, n_steps=1000, seed=10))
    assert rep.passed
    # hard-core closed form: 8 pi (1 + 1/sqrt(2) + 1/6) = 47.094 and 8 pi 7/3 = 58.643
    assert rep.e_lo == pytest.approx(8 * math.pi * (1 + 2**-0.5 + 1 / 6), rel=1e-4)
    assert rep.e_hi == pytest.approx(8 * math.pi * 7 / 3, rel=1e-4)
