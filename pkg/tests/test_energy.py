import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlch.energy import (PSD_TOL, PotentialSpec, SavConfigError, SavState, StabilityError,
                         chemical_potential_bar, default_C, discrete_energy, dissipation_rate, double_well,
                         dwell_deriv, initial_sav, update_R, v_poly, xi)
from nlch.grid import GridSpec, inner_product
from nlch.kernel import GaussianKernel, build_table


@pytest.fixture(scope="module")
def setup():
    g = GridSpec.square(32)
    return g, build_table(g, GaussianKernel(0.2))


def test_double_well_values():
    p0, p2 = PotentialSpec(0.0), PotentialSpec(2.0)
    assert double_well(p0, 1.0) == 0.0 and double_well(p0, -1.0) == 0.0
    assert double_well(p0, 0.0) == 0.25
    assert double_well(p2, 0.0) == 2.25


def test_dwell_deriv_values():
    p0 = PotentialSpec(0.0)
    assert dwell_deriv(p0, 0.0) == 0.0
    assert dwell_deriv(p0, 1.0) == 0.0 and dwell_deriv(p0, -1.0) == 0.0
    assert dwell_deriv(PotentialSpec(2.0), 2.0) == 8.0 - 6.0


def test_dwell_deriv_field_path(rng):
    p = PotentialSpec(1.5)
    a = rng.standard_normal((8, 8))
    assert np.allclose(dwell_deriv(p, a), a**3 - 2.5 * a, rtol=1e-13, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(-3.0, 3.0))
def test_dwell_deriv_is_gradient(beta, v):
    p = PotentialSpec(beta)
    h = 1e-6
    fd = (double_well(p, v + h) - double_well(p, v - h)) / (2 * h)
    assert abs(fd - dwell_deriv(p, v)) <= 1e-8 * max(1.0, abs(v) ** 3 + (1 + beta) * abs(v))


def test_potential_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec(-1.0)
    with pytest.raises(ValueError):
        PotentialSpec(0.0, eps2=0.0)
    with pytest.raises(ValueError):
        PotentialSpec(0.0, M=0.0)


def test_discrete_energy_examples(setup):
    g, t = setup
    p = PotentialSpec(0.0, 0.1)
    op = p.operator(t)
    assert abs(discrete_energy(g.constant(1.0), op, p)) <= 1e-12
    assert discrete_energy(g.zeros(), op, p) == pytest.approx(1.0, rel=1e-14)


def test_energy_beta_offset(setup, rng):
    g, t = setup
    for _ in range(5):
        phi = rng.uniform(-1.5, 1.5, g.shape)
        p0, p2 = PotentialSpec(0.0, 0.1), PotentialSpec(2.0, 0.1)
        diff = discrete_energy(phi, p2.operator(t), p2) - discrete_energy(phi, p0.operator(t), p0)
        assert diff == pytest.approx(g.area * (4.0 + 4.0) / 4, abs=1e-10)


def test_chemical_potential_examples(setup, rng):
    g, t = setup
    for beta in (0.0, 2.0, 5.0):
        p = PotentialSpec(beta, 0.1)
        assert np.abs(chemical_potential_bar(g.constant(1.0), p.operator(t), p)).max() <= 1e-12
        assert np.abs(chemical_potential_bar(g.zeros(), p.operator(t), p)).max() == 0.0
    phi = rng.standard_normal(g.shape)
    a = chemical_potential_bar(phi, PotentialSpec(0.0, 0.1).operator(t), PotentialSpec(0.0, 0.1))
    b = chemical_potential_bar(phi, PotentialSpec(2.0, 0.1).operator(t), PotentialSpec(2.0, 0.1))
    assert np.abs(a - b).max() <= 1e-10


def test_dissipation_examples(setup, rng):
    g, t = setup
    p = PotentialSpec(2.0, 0.1, M=3.0)
    op = p.operator(t)
    c = 0.7
    assert dissipation_rate(g.constant(c), op, p, mobility="Lbar") == pytest.approx(3.0 * 20.0 * c * c * g.area,
                                                                                     rel=1e-12)
    # the default mobility L conserves mass and ignores constants
    assert abs(dissipation_rate(g.constant(c), op, p)) <= 1e-10
    p0 = PotentialSpec(0.0, 0.1)
    mu = rng.standard_normal(g.shape)
    assert dissipation_rate(mu, p0.operator(t), p0) >= -PSD_TOL * inner_product(g, mu, mu)
    X, Y = g.mesh()
    mode = np.cos(np.pi * 3 * X) * np.cos(np.pi * 2 * Y)
    D = dissipation_rate(mode, p0.operator(t), p0)
    assert D == pytest.approx(t.symbol[3, 2] * inner_product(g, mode, mode), rel=1e-10)


def test_sav_state():
    with pytest.raises(StabilityError):
        SavState(0.0)
    with pytest.raises(StabilityError):
        SavState(-1.0)
    with pytest.raises(ValueError):
        SavState(1.0, C=0.0)
    s = SavState(math.e, C=2.0)
    assert s.modified_energy == pytest.approx(2.0)


def test_initial_sav():
    s = initial_sav(3.0)
    assert s.C == 3.0 and s.R == pytest.approx(math.e)
    assert default_C(0.2) == 1.0 and default_C(-5.0) == 5.0
    s = initial_sav(7.0, C=2.0)
    assert s.R == math.exp(3.5)
    with pytest.raises(SavConfigError):
        initial_sav(1e4, C=1.0)


def test_update_R():
    s = SavState(1.0, 1.0)
    assert update_R(s, 0.0, 0.1).R == 1.0
    assert update_R(s, 10.0, 0.1).R == pytest.approx(0.5)
    assert update_R(SavState(2.0, 4.0), 8.0, 0.5).R == pytest.approx(1.0)
    assert update_R(s, -1e-14, 0.1).R == 1.0  # roundoff clamps
    with pytest.raises(StabilityError):
        update_R(s, -1e-3, 0.1)
    with pytest.raises(ValueError):
        update_R(s, 1.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(0.0, 1e8), st.floats(1e-6, 10.0), st.floats(1.0, 1e4))
def test_update_R_monotone(R, D, dt, C):
    new = update_R(SavState(R, C), D, dt)
    assert 0.0 < new.R <= R
    assert math.log(new.R) <= math.log(R)


def test_xi_examples():
    C = 3.0
    E = 2.0
    s = SavState(math.exp(E / C), C)
    assert xi(s, E) == pytest.approx(1.0, rel=1e-15)
    assert xi(SavState(s.R / 2, C), E) == pytest.approx(0.5, rel=1e-15)
    assert xi(s, E + C * math.log(2.0)) == pytest.approx(0.5, rel=1e-14)
    assert xi(s, 1e6) == 0.0 or xi(s, 1e6) > 0.0  # large energies underflow harmlessly
    with pytest.raises(SavConfigError):
        xi(s, float("nan"))
    with pytest.raises(SavConfigError):
        xi(s, -1e5)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_v_poly_fixed_points(k):
    assert v_poly(k, 1.0) == 1.0
    assert v_poly(k, 0.0) == 0.0


def test_v_poly_identity(rng):
    xs = rng.uniform(0.0, 2.0, 500)
    for k in (1, 2, 3, 4):
        for x in xs:
            assert abs(v_poly(k, x) - (1 - (1 - x) ** k)) <= 1e-14


def test_v_poly_bad_order():
    with pytest.raises(ValueError):
        v_poly(5, 0.5)
    with pytest.raises(ValueError):
        v_poly(0, 0.5)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_v_poly_contact_order(k):
    # |V - 1| = |1 - xi|^k, so the log-log slope is k
    d = np.array([1e-1, 3e-2, 1e-2])
    err = np.array([abs(v_poly(k, 1.0 + x) - 1.0) for x in d])
    slope = np.polyfit(np.log(d), np.log(err), 1)[0]
    assert slope == pytest.approx(k, abs=1e-6)
