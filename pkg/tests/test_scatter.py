import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from scatlen import corpus
from scatlen.mesh import MeshParams
from scatlen.potential import RadialPotential, Segment, finiteness_check
from scatlen.scatter import (
    check_tail_bound,
    lambda_from_a,
    scattering_length,
    scattering_length_at,
    solve_zero_energy,
    tail_upper_bound,
)


def test_hard_sphere_profile_is_exact():
    prof = solve_zero_energy(corpus.hard_sphere(1.0), 3, 10.0)
    r = prof.grid
    np.testing.assert_allclose(prof.w, (1.0 - 1.0 / r) / 0.9, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(prof.w_prime, 1.0 / r**2 / 0.9, rtol=1e-12)


def test_free_profile():
    prof = solve_zero_energy(RadialPotential(), 3, 5.0)
    assert np.all(prof.w == 1.0) and np.all(prof.w_prime == 0.0)
    res = scattering_length_at(RadialPotential(), 3, 5.0)
    assert res.a_R == 0.0 and res.lambda_R == 0.0


def test_shell_profile_piecewise_linear_u():
    # u = r on [0, 1], u = 2 r - 1 beyond; w = u / r normalized at R = 4
    prof = solve_zero_energy(corpus.delta_shell(1.0, 2.0), 3, 4.0)
    r = prof.grid
    u = np.where(r <= 1.0, r, 2.0 * r - 1.0)
    w = np.where(r > 0, u / np.where(r > 0, r, 1.0), 1.0) / (7.0 / 4.0)
    np.testing.assert_allclose(prof.w, w, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("R", [2.0, 5.0, 50.0])
def test_hard_sphere_a_R(R):
    res = scattering_length_at(corpus.hard_sphere(1.0), 3, R)
    assert res.a_R == pytest.approx(1.0, abs=1e-10)
    assert res.lambda_R == pytest.approx(8.0 * math.pi / (1.0 - 1.0 / R), rel=1e-10)


@pytest.mark.parametrize("R", [1.5, 4.0, 100.0])
def test_shell_a_R(R):
    assert scattering_length_at(corpus.delta_shell(1.0, 2.0), 3, R).a_R == pytest.approx(0.5, abs=1e-12)


def test_hard_disc_a_R():
    res = scattering_length_at(corpus.hard_disc(1.0), 2, 10.0)
    assert res.a_R == pytest.approx(1.0, abs=1e-12)
    assert res.lambda_R == pytest.approx(4.0 * math.pi / math.log(10.0), rel=1e-12)


@pytest.mark.parametrize("c", [0.1, 1.0, 25.0])
def test_square_well_3d_oracle(c):
    k = math.sqrt(c / 2.0)
    exact = 1.0 - math.tanh(k) / k
    assert scattering_length(corpus.square_well(c, 1.0), 3).a == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("c", [0.1, 1.0, 25.0])
def test_square_well_2d_oracle(c):
    k = math.sqrt(c / 2.0)
    exact = math.exp(-special.iv(0, k) / (k * special.iv(1, k)))
    assert scattering_length(corpus.square_well(c, 1.0), 2).a == pytest.approx(exact, rel=1e-10)


def test_hard_sphere_limit_exact():
    lim = scattering_length(corpus.hard_sphere(1.0), 3, tol=1e-10)
    assert lim.a == 1.0 and lim.bracket == (1.0, 1.0) and lim.converged


def test_shell_limit_zero_width():
    lim = scattering_length(corpus.delta_shell(1.0, 2.0), 3)
    assert lim.bracket[0] == lim.bracket[1]
    assert lim.a == pytest.approx(0.5, abs=1e-12)


def test_infinite_scattering_length():
    lim = scattering_length(corpus.power_tail(p=3.0), 3)
    assert lim.a == math.inf and not lim.converged


@pytest.mark.parametrize("d", [2, 3])
def test_power_tail_bracket(d):
    V = corpus.power_tail()
    lim = scattering_length(V, d, tol=1e-8)
    lo, hi = lim.bracket
    assert lim.converged and lo <= lim.a <= hi and hi - lo <= 1e-8 * lo
    if d == 3:
        assert hi <= finiteness_check(V, 3).a_upper_3d
    for R in (10.0, 100.0, 1000.0):
        a_R = scattering_length_at(V, d, R).a_R
        assert a_R <= lo * (1 + 1e-12)
        assert tail_upper_bound(V, d, R, a_R) >= hi * (1 - 1e-12)


def test_power_tail_3d_reference_value():
    # frozen from a converged bracket [0.7686644992, 0.7686645030]
    assert scattering_length(corpus.power_tail(), 3).a == pytest.approx(0.76866450, abs=2e-8)


def test_check_tail_bound_examples():
    assert check_tail_bound(corpus.hard_sphere(1.0), 3, 2.0, 1.0, 1.0)
    V = corpus.delta_shell(3.0, 1.0)
    a = scattering_length(V, 3).a
    assert check_tail_bound(V, 3, 2.0, a, scattering_length_at(V, 3, 2.0).a_R)
    with pytest.raises(ValueError):
        check_tail_bound(V, 3, 1.0, a, 0.0)


def test_tail_bound_detects_wrong_a():
    V = corpus.delta_shell(3.0, 1.0)
    assert not check_tail_bound(V, 3, 2.0, 0.5 * scattering_length(V, 3).a, 0.0)


def test_grid_must_resolve_shells():
    V = corpus.delta_shell(1.0, 2.0)
    with pytest.raises(ValueError, match="shells"):
        solve_zero_energy(V, 3, 2.0, grid=np.linspace(0.0, 2.0, 8))


def test_R_inside_core_rejected():
    with pytest.raises(ValueError):
        scattering_length_at(corpus.hard_sphere(1.0), 3, 0.5)


# -- properties ------------------------------------------------------------------

pos = st.floats(0.05, 5.0)


@st.composite
def finite_potentials(draw):
    core = draw(st.sampled_from([0.0, 0.3]))
    shells = ()
    if draw(st.booleans()):
        shells = ((core + draw(pos), draw(pos)),)
    segs = []
    if draw(st.booleans()):
        lo = core
        hi = lo + draw(pos)
        if draw(st.booleans()):
            segs.append(Segment(lo, hi, "constant", {"c": draw(st.floats(0.01, 50.0))}))
        else:
            segs.append(Segment(lo, hi, "exponential", {"C": draw(st.floats(0.01, 50.0)), "mu": draw(pos)}))
    V = RadialPotential(core, shells, tuple(segs))
    if V.is_zero:
        V = RadialPotential(0.5)
    return V


@settings(max_examples=40, deadline=None)
@given(finite_potentials(), st.sampled_from([2, 3]), st.lists(st.floats(0.1, 20.0), min_size=2, max_size=4))
def test_a_R_monotone_and_bounded(V, d, offsets):
    start = max(V.range_scale, V.hard_core_radius)
    Rs = np.cumsum(offsets) + start
    vals = [scattering_length_at(V, d, R).a_R for R in Rs]
    for R, a in zip(Rs, vals):
        assert 0.0 <= a <= R
    for x, y in zip(vals, vals[1:]):
        assert y >= x * (1 - 1e-10)


@settings(max_examples=40, deadline=None)
@given(finite_potentials(), st.sampled_from([2, 3]))
def test_finite_range_invariance(V, d):
    r0 = V.range_scale
    vals = [scattering_length_at(V, d, k * r0).a_R for k in (2, 4, 8)]
    assert vals[1] == pytest.approx(vals[0], rel=1e-12, abs=1e-300)
    assert vals[2] == pytest.approx(vals[0], rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(finite_potentials(), st.floats(0.2, 5.0))
def test_scaling_covariance_3d(V, s):
    a = scattering_length(V, 3, tol=1e-12).a
    a_s = scattering_length(V.scaled(s), 3, tol=1e-12).a
    assert a_s == pytest.approx(s * a, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(finite_potentials(), st.sampled_from([2, 3]), st.floats(1.1, 10.0))
def test_pointwise_lower_bound_on_profile(V, d, factor):
    R = factor * max(V.range_scale, V.hard_core_radius)
    res = scattering_length_at(V, d, R)
    r, w, a = res.profile.grid, res.profile.w, res.a_R
    with np.errstate(divide="ignore", invalid="ignore"):
        if d == 3:
            bound = np.maximum((1.0 - a / r) / (1.0 - a / R), 0.0)
        else:
            bound = np.maximum(np.log(r / a) / math.log(R / a), 0.0) if a > 0 else np.zeros_like(r)
    bound = np.nan_to_num(bound, nan=0.0, neginf=0.0)
    assert np.all(w >= bound - 1e-10)
    assert np.all(w <= 1.0 + 1e-12)


def _direct_lambda(V, d, prof):
    """``int (2 |grad w|^2 + V w^2)`` over the ball by quadrature of the computed profile."""
    r, w, wp = prof.grid, prof.w, prof.w_prime
    area = 4.0 * math.pi if d == 3 else 2.0 * math.pi
    total = integrate.trapezoid(2.0 * wp**2 * r ** (d - 1), r)
    for seg in V.segments:
        # integrate each segment over its own closed node range so jumps do not smear
        m = (r >= seg.r_lo) & (r <= min(seg.r_hi, prof.R))
        total += integrate.trapezoid(seg.value(r[m]) * w[m] ** 2 * r[m] ** (d - 1), r[m])
    total += sum(g * s ** (d - 1) * np.interp(s, r, w) ** 2 for s, g in V.shells if s < prof.R)
    return area * total


@pytest.mark.parametrize(
    "V,d",
    [(corpus.square_well(3.0, 1.0), 3), (corpus.square_well(3.0, 1.0), 2), (corpus.hard_sphere(1.0), 3), (corpus.hard_disc(1.0), 2)],
)
def test_variational_consistency(V, d):
    R = 3.0
    errs = []
    for n in (48, 96):
        res = scattering_length_at(V, d, R, MeshParams(n))
        errs.append(abs(_direct_lambda(V, d, res.profile) / res.lambda_R - 1.0))
    assert errs[1] < 1e-4
    # second-order trapezoid on the profile: halving h cuts the error about 4x
    assert errs[1] < errs[0] / 3.5 or errs[1] < 1e-12


def test_lambda_from_a():
    assert lambda_from_a(0.0, 3.0, 3) == 0.0
    assert lambda_from_a(1.0, 10.0, 2) == pytest.approx(4.0 * math.pi / math.log(10.0))
