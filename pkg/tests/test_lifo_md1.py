import math

import numpy as np
import pytest
from scipy import integrate

from queuewait import (DomainError, fifo_moments, lifo_cdf, lifo_density, lifo_distribution,
                       lifo_moments, make_params, service_moments, siro_moments)


def _segment_oracle(lam, a, k):
    """Closed-form cell from the delay-differential solution, written out by hand."""
    def f(x):
        return lam ** (k + 1) * x ** (k - 1) * (x - k * a) * math.exp(-lam * x) / math.factorial(k)
    return f


def test_density_first_cells(md1):
    assert lifo_density(md1, 0.1) == pytest.approx(2 * math.exp(-0.2), rel=1e-14)
    assert lifo_density(md1, 0.1) == pytest.approx(1.637462, abs=1e-6)
    assert lifo_density(md1, 0.5) == pytest.approx(4 * (1 / 6) * math.exp(-1), rel=1e-14)
    assert lifo_density(md1, 0.5) == pytest.approx(0.245253, abs=1e-6)


@pytest.mark.parametrize("k, x", [(2, 0.8), (3, 1.2), (6, 2.2)])
def test_density_later_cells_match_hand_formula(md1, k, x):
    assert lifo_density(md1, x) == pytest.approx(_segment_oracle(2.0, 1 / 3, k)(x), rel=1e-12)


def test_density_third_cell_closed_form(md1):
    # on (2a, 3a): lam^3 x (x - 2a) e^{-lam x} / 2
    x = 0.8
    assert lifo_density(md1, x) == pytest.approx(0.5 * 8 * x * (x - 2 / 3) * math.exp(-2 * x), rel=1e-12)


def test_density_vanishes_after_each_jump(md1):
    for k in range(1, 8):
        assert lifo_density(md1, k / 3 + 1e-12) < 1e-9
        assert lifo_density(md1, k / 3 - 1e-12) > 1e-3


def test_jump_points_return_right_limit(md1):
    assert lifo_density(md1, 1 / 3) == pytest.approx(0.0, abs=1e-15)
    assert lifo_density(md1, 2 / 3) == pytest.approx(0.0, abs=1e-15)


def test_density_domain(md1, mm1):
    with pytest.raises(DomainError):
        lifo_density(md1, 0.0)
    with pytest.raises(DomainError):
        lifo_density(mm1, 0.5)


def test_cdf_values(md1):
    assert lifo_cdf(md1, 0.0) == pytest.approx(1 / 3, rel=1e-15)
    x = 1 / 3 - 1e-13
    assert lifo_cdf(md1, x) == pytest.approx(1 / 3 + 1 - math.exp(-2 * x), abs=1e-12)
    assert lifo_cdf(md1, x) == pytest.approx(0.819916, abs=1e-6)


def test_cdf_tail(md1):
    # the tail decays like exp(-0.216 x) here, so P(W > 30) is still ~3.5e-6
    assert 1 - lifo_cdf(md1, 30.0) == pytest.approx(3.5e-6, rel=0.05)
    assert lifo_cdf(md1, 120.0) == pytest.approx(1.0, abs=1e-8)


def test_cdf_monotone(md1):
    xs = np.linspace(0, 10, 301)
    cdf = np.array([lifo_cdf(md1, x) for x in xs])
    assert np.all(np.diff(cdf) >= -1e-15)


def test_cdf_negative(md1):
    with pytest.raises(DomainError):
        lifo_cdf(md1, -0.1)


def _oracle_mass_and_moments(p, tail_tol=1e-14):
    """Independent quadrature: integrate each hand-written segment until negligible."""
    m0 = m1 = m2 = 0.0
    k = 0
    while True:
        f = _segment_oracle(p.lam, p.a, k) if k else (lambda x: p.lam * math.exp(-p.lam * x))
        lo, hi = k * p.a, (k + 1) * p.a
        if k > 150:
            # float overflow in the plain formula; switch to logs
            f = (lambda x, k=k: math.exp((k + 1) * math.log(p.lam) + (k - 1) * math.log(x)
                                         + math.log(x - k * p.a) - p.lam * x - math.lgamma(k + 1)))
        seg = integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-13)[0]
        m0 += seg
        m1 += integrate.quad(lambda x: x * f(x), lo, hi, epsabs=0, epsrel=1e-13)[0]
        m2 += integrate.quad(lambda x: x * x * f(x), lo, hi, epsabs=0, epsrel=1e-13)[0]
        if k > 20 and seg * hi * hi < tail_tol:
            return m0, m1, m2
        k += 1


@pytest.mark.parametrize("rho", [0.1, 0.3, 0.5, 2 / 3, 0.9])
def test_normalization(rho):
    p = make_params(3 * rho, 3.0)
    d = lifo_distribution(p)
    assert d.atom_mass + d.segment_masses().sum() == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("rho", [0.3, 2 / 3])
def test_normalization_against_independent_quadrature(rho):
    p = make_params(3 * rho, 3.0)
    m0, _, _ = _oracle_mass_and_moments(p)
    assert 1 - p.rho + m0 == pytest.approx(1.0, abs=1e-8)


def test_quadrature_moments_match_closed_form(md1):
    _, m1, m2 = _oracle_mass_and_moments(md1)
    closed = lifo_moments(md1, service_moments(md1))
    assert m1 == pytest.approx(closed.mean, rel=1e-6)
    assert m2 - m1**2 == pytest.approx(closed.variance, rel=1e-6)


def test_lifo_moments_reference_values(md1, mm1):
    d = lifo_moments(md1, service_moments(md1))
    assert d.mean == pytest.approx(1 / 3, rel=1e-12)
    assert d.variance == pytest.approx(7 / 9, rel=1e-12)
    e = lifo_moments(mm1, service_moments(mm1))
    assert e.mean == pytest.approx(2 / 3, rel=1e-12)
    assert e.variance == pytest.approx(32 / 9, rel=1e-12)


def test_lifo_moments_light_traffic():
    p = make_params(1e-9, 3.0)
    m = lifo_moments(p, service_moments(p))
    assert m.mean < 1e-9 and m.variance < 1e-9


def test_fifo_moments_reference_values(md1, mm1):
    d = fifo_moments(md1, service_moments(md1))
    assert d.mean == pytest.approx(1 / 3, rel=1e-12)
    assert d.variance == pytest.approx(5 / 27, rel=1e-12)
    assert fifo_moments(mm1, service_moments(mm1)).variance == pytest.approx(8 / 9, rel=1e-12)


@pytest.mark.parametrize("rho", [0.1, 0.3, 0.5, 2 / 3, 0.9])
@pytest.mark.parametrize("law", ["det", "exp"])
def test_variance_ordering(rho, law):
    p = make_params(rho, 1.0, law)
    m = service_moments(p)
    assert fifo_moments(p, m).variance < siro_moments(p, m).variance < lifo_moments(p, m).variance


def test_segment_left_limits(md1):
    d = lifo_distribution(md1)
    assert d.segment(0)(1e-15) == pytest.approx(2.0, rel=1e-12)
    for k in range(1, 6):
        seg = d.segment(k)
        lo, hi = seg.interval
        assert seg(lo) == 0.0
        assert all(seg(x) > 0 for x in np.linspace(lo, hi, 12)[1:-1])


def test_bin_averages(md1):
    d = lifo_distribution(md1)
    avg = d.bin_averages([0, 1 / 3, 2 / 3])
    assert avg[0] == pytest.approx(3 * (1 - math.exp(-2 / 3)), rel=1e-12)
