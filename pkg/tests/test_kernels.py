import numpy as np
import pytest

from plab.errors import ParameterError, ResolutionError
from plab.grid import BoxDomain, GridFunction, ScaleWindow
from plab.kernels import (KernelData, band_convolve, bessel_lift, build_gaussian_system, build_local_mean_system,
                          build_lp_system, bump_pairing_bound, hardy_littlewood, peetre_sup, plateau,
                          smooth_step, windowed_maximal)


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 1024)


def test_smooth_step_and_plateau():
    u = np.linspace(-1, 2, 301)
    s = smooth_step(u)
    assert np.all(s[u <= 0] == 0) and np.all(s[u >= 1] == 1)
    assert np.all(np.diff(s) >= 0)
    assert plateau(0.5) == 1.0 and plateau(2.5) == 0.0


def test_lp_partition_of_unity(box):
    win = ScaleWindow(0, 6)
    s = build_lp_system(box, win)
    tot = sum(s.multiplier(j) for j in win.levels)
    r = box.freq_radius()
    assert np.abs(tot - 1)[r <= 2.0 ** 6].max() < 1e-14
    with pytest.raises(ParameterError):
        s.multiplier(9)


def test_lp_requires_resolution():
    with pytest.raises(ResolutionError):
        build_lp_system(BoxDomain(1, 4.0, 16), ScaleWindow(0, 1))


def test_gaussian_system_moments():
    # psi has spatial width ~2, so the box must be wide enough to hold its tails
    s = build_gaussian_system(BoxDomain(1, 32.0, 4096), ScaleWindow(0, 4), 2)
    mom = s.moments(3)
    assert max(mom.values()) < 1e-10


def test_local_mean_psi_hat_vanishes_at_origin(box):
    s = build_local_mean_system(box, 1, ScaleWindow(0, 4))
    assert abs(s.multiplier(1)[0]) == 0.0
    assert s.multiplier(0)[0] == pytest.approx(s.Psi.values.real.sum() * box.h, rel=1e-6)


def test_hardy_littlewood_indicator(box):
    x = box.axis()
    f = (np.abs(x) <= 1).astype(float)
    M = hardy_littlewood(f, box)
    sel = (x > 1.2) & (x < 3.5)
    assert np.abs(M[sel] - 2 / (x[sel] + 1)).max() < 5e-3
    assert np.all(M >= f)


def test_windowed_maximal_bounds(box):
    x = box.axis()
    f = np.exp(-x ** 2)
    m = windowed_maximal(f, box, 1.0, 0.0)
    # normalised by R^-n, so a ball average of a function <= 1 is at most |B_1| = 2
    assert np.all(m >= 0) and 1.9 <= m.max() <= 2.0 + 1e-9


def test_peetre_sup_brute_force():
    b = BoxDomain(1, 2.0, 64)
    g = np.random.default_rng(0).standard_normal(64)
    got = peetre_sup(g, b, 1, 2.0)
    idx = np.arange(64)
    want = np.empty(64)
    for i in range(64):
        off = (idx - i + 32) % 64 - 32
        want[i] = np.max(np.abs(g[(i + off) % 64]) / (1 + 2.0 * np.abs(off) * b.h) ** 2.0)
    assert np.allclose(got, want, rtol=1e-12)
    with pytest.raises(ParameterError):
        peetre_sup(g, b, 1, 0.0)


def test_bessel_lift_inverse(box):
    f = GridFunction(box, np.exp(-box.axis() ** 2))
    g = bessel_lift(bessel_lift(f, 1.5), -1.5)
    assert np.abs(g.values - f.values).max() < 1e-12


def test_band_convolve_sums_to_identity(box):
    win = ScaleWindow(0, 8)
    b = BoxDomain(1, 4.0, 4096)
    s = build_lp_system(b, win)
    f = GridFunction(b, np.exp(-2 * b.axis() ** 2))
    tot = sum(band_convolve(f, s, j).values for j in win.levels)
    assert np.abs(tot - f.values).max() < 1e-12


def test_pairing_bound_guards(box):
    x = box.axis()
    k = KernelData(GridFunction(box, np.exp(-x ** 2).astype(complex)), 1, np.array([0.0]), 2.0)
    with pytest.raises(ParameterError):
        bump_pairing_bound(k, KernelData(k.values, 0, np.array([0.0]), 6.0), 1)
    with pytest.raises(ParameterError):
        bump_pairing_bound(k, KernelData(k.values, 2, np.array([0.0]), 3.0), 1)
    # a Gaussian has no vanishing moment
    with pytest.raises(ParameterError):
        bump_pairing_bound(k, KernelData(k.values, 2, np.array([0.0]), 6.0), 1)
    lhs, rhs = bump_pairing_bound(k, KernelData(k.values, 2, np.array([0.0]), 6.0), 0)
    assert lhs <= rhs
