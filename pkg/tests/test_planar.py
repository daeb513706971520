"""Tests for the planar sharp-interface engine."""

import math

import numpy as np
import pytest

import activech as ac

SQRT2 = math.sqrt(2.0)


def make_sharp(*, beta=0.1, s_plus=-1.0, s_minus=1.0, rho_plus=1.0, rho_minus=1.0,
               m_plus=1.0, m_minus=1.0, l_coef=0.0, L=1.0, Lt=1.0, epsilon=0.01):
    """Sharp constants from physical inputs, with K derived from rho."""
    pot = ac.DoubleWellPotential.quartic()
    reaction = ac.ReactionSpec(
        s_plus=s_plus, s_minus=s_minus,
        k_plus=2.0 * beta * rho_plus, k_minus=2.0 * beta * rho_minus,
        l_coef=l_coef,
    )
    p = ac.PhaseFieldParams(beta=beta, epsilon=epsilon, potential=pot,
                            reaction=reaction, mobility=ac.MobilitySpec(m_plus, m_minus))
    return ac.derive_sharp_params(p, L, Lt)


@pytest.fixture(scope="module")
def symmetric():
    # S+ = -1, everything else 1: stationary front at L/2
    return make_sharp()


@pytest.fixture(scope="module")
def table1_sharp():
    # moving-front convergence configuration
    return make_sharp(beta=0.1, s_plus=-1.0, s_minus=4.0, rho_plus=1.0,
                      rho_minus=0.1, l_coef=-1.0)


# ---------------------------------------------------------------------------
# chemical potentials
# ---------------------------------------------------------------------------

def test_mu_vanishes_at_front(table1_sharp):
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    for q in (0.2, 0.5, 0.8):
        assert ac.mu_planar(cfg, "+", q, q) == pytest.approx(0.0, abs=1e-14)
        assert ac.mu_planar(cfg, "-", q, q) == pytest.approx(0.0, abs=1e-14)


def test_mu_symmetric_antisymmetry(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.5)
    z = np.linspace(0.0, 0.5, 11)
    mu_p = ac.mu_planar(cfg, "+", 0.5, z)
    mu_m = ac.mu_planar(cfg, "-", 0.5, 1.0 - z)
    assert np.max(np.abs(mu_p + mu_m)) < 1e-14


def test_mu_zero_slope_at_outer_walls(table1_sharp):
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    h = 1e-5
    # cosh is even about the wall, so one-sided slope is O(h)
    slope_plus = (ac.mu_planar(cfg, "+", 0.4, h) - ac.mu_planar(cfg, "+", 0.4, 0.0)) / h
    slope_minus = (ac.mu_planar(cfg, "-", 0.4, 1.0) - ac.mu_planar(cfg, "-", 0.4, 1.0 - h)) / h
    assert abs(slope_plus) < 1e-3
    assert abs(slope_minus) < 1e-3


def test_mu_domain_errors(table1_sharp):
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    with pytest.raises(ValueError):
        ac.mu_planar(cfg, "+", 0.3, 0.31)
    with pytest.raises(ValueError):
        ac.mu_planar(cfg, "-", 0.3, 0.29)
    with pytest.raises(ValueError):
        ac.mu_planar(cfg, "x", 0.3, 0.1)


def test_mu_satisfies_bulk_ode(table1_sharp):
    # -m mu'' + rho mu - S = 0, checked by centered differences
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    sharp = table1_sharp
    q, h = 0.37, 1e-4
    z_p = np.linspace(2 * h, q - 2 * h, 20)
    mu = lambda z: ac.mu_planar(cfg, "+", q, z)
    mu_zz = (mu(z_p + h) - 2 * mu(z_p) + mu(z_p - h)) / h**2
    res = -sharp.m_plus * mu_zz + sharp.rho_plus * mu(z_p) - sharp.s_plus
    assert np.max(np.abs(res)) < 1e-6 * abs(sharp.s_plus)
    z_m = np.linspace(q + 2 * h, 1.0 - 2 * h, 20)
    mu = lambda z: ac.mu_planar(cfg, "-", q, z)
    mu_zz = (mu(z_m + h) - 2 * mu(z_m) + mu(z_m - h)) / h**2
    res = -sharp.m_minus * mu_zz + sharp.rho_minus * mu(z_m) - sharp.s_minus
    assert np.max(np.abs(res)) < 1e-6 * abs(sharp.s_minus)


# ---------------------------------------------------------------------------
# front velocity and stationary position
# ---------------------------------------------------------------------------

def test_velocity_symmetric_root_at_half(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.5)
    assert ac.velocity_H(cfg, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_velocity_strictly_decreasing(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.5)
    q = np.linspace(0.01, 0.99, 99)
    vals = np.array([ac.velocity_H(cfg, float(x)) for x in q])
    assert np.all(np.diff(vals) < 0.0)


def test_velocity_table1_value(table1_sharp):
    # independent evaluation of the closed-form chain
    beta = 0.1
    rho_p, rho_m = 1.0, 0.1
    k_p, k_m = 2 * beta * rho_p, 2 * beta * rho_m
    d_p, d_m = -1.0 / rho_p, 4.0 / rho_m
    lam_p, lam_m = math.sqrt(rho_p), math.sqrt(rho_m)
    s_i = (SQRT2 / 2) * (k_p - k_m) + (2 * SQRT2 / 3) * (-1.0)
    expected = 0.5 * (d_p * lam_p * math.tanh(lam_p * 0.3)
                      + d_m * lam_m * math.tanh(lam_m * 0.7) + s_i)
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    assert ac.velocity_H(cfg, 0.3) == pytest.approx(expected, abs=1e-14)
    # frozen regression value
    assert ac.velocity_H(cfg, 0.3) == pytest.approx(0.8241515873201051, abs=1e-12)


def test_velocity_domain_error(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.5)
    for q in (-0.1, 0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            ac.velocity_H(cfg, q)


def test_find_stationary_symmetric(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.3)
    q_star = ac.find_stationary(cfg)
    assert q_star == pytest.approx(0.5, abs=1e-10)
    assert abs(ac.velocity_H(cfg, q_star)) < 1e-12


def test_find_stationary_absent():
    # d+ > 0 and d- > 0 with S_I = 0: H > 0 everywhere
    sharp = make_sharp(s_plus=1.0, s_minus=1.0)
    cfg = ac.PlanarConfig(sharp=sharp, q0=0.5)
    q = np.linspace(0.01, 0.99, 50)
    assert all(ac.velocity_H(cfg, float(x)) > 0 for x in q)
    assert ac.find_stationary(cfg) is None


def test_find_stationary_unique_sign_change(table1_sharp):
    cfg = ac.PlanarConfig(sharp=table1_sharp, q0=0.3)
    q = np.linspace(1e-6, 1.0 - 1e-6, 10_000)
    vals = np.array([ac.velocity_H(cfg, float(x)) for x in q])
    assert int(np.sum(np.diff(np.sign(vals)) != 0)) == 1


# ---------------------------------------------------------------------------
# front trajectory
# ---------------------------------------------------------------------------

def test_integrate_equilibrium_is_constant(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.5, dt=1e-3, t_end=0.5)
    traj = ac.integrate_q(cfg)
    assert np.max(np.abs(traj.q - 0.5)) < 1e-12
    assert not traj.boundary_hit


def test_integrate_fourth_order(table1_sharp):
    ref = ac.integrate_q(ac.PlanarConfig(sharp=table1_sharp, q0=0.3, dt=1e-5, t_end=0.5))
    e = []
    for dt in (1e-2, 5e-3):
        traj = ac.integrate_q(ac.PlanarConfig(sharp=table1_sharp, q0=0.3, dt=dt, t_end=0.5))
        e.append(abs(traj.q[-1] - ref.q[-1]))
    # halving dt shrinks the error by ~2^4
    assert e[1] < e[0] / 12.0


def test_integrate_monotone_to_stationary(symmetric):
    cfg = ac.PlanarConfig(sharp=symmetric, q0=0.3, dt=1e-3, t_end=10.0)
    traj = ac.integrate_q(cfg, output_stride=100)
    assert np.all(np.diff(traj.q) > -1e-15)
    # approach rate is |H'(q*)| = sech^2(1/2), so the gap at t=10 is ~8e-5
    assert traj.q[-1] == pytest.approx(0.5, abs=2e-4)


def test_integrate_boundary_hit():
    # strictly positive H drives the front into the right wall
    sharp = make_sharp(s_plus=5.0, s_minus=5.0)
    cfg = ac.PlanarConfig(sharp=sharp, q0=0.9, dt=1e-2, t_end=10.0)
    traj = ac.integrate_q(cfg)
    assert traj.boundary_hit
    assert traj.times[-1] < 10.0


# ---------------------------------------------------------------------------
# linear stability
# ---------------------------------------------------------------------------

def test_amplification_translational(symmetric):
    row = ac.amplification(symmetric, 0.1, 0.5, ac.ModeIndex.of(0))
    assert row.factor == pytest.approx(-2.0 / math.cosh(0.5) ** 2, abs=1e-14)
    assert row.beta_crit is None


@pytest.mark.parametrize("L,Lt", [(1.0, 1.0), (2.0, 1.0), (1.5, 0.75)])
def test_amplification_matches_normalized_formula(L, Lt):
    sharp = make_sharp(L=L, Lt=Lt)
    beta = 0.07
    for l2 in range(7):
        mode = ac.ModeIndex.of(l2)
        row = ac.amplification(sharp, beta, L / 2, mode)
        expected = ac.amplification_normalized(beta, L, Lt, sharp.gamma, mode)
        assert row.factor == pytest.approx(expected, abs=1e-12)


def test_amplification_mode_selection():
    sharp = make_sharp(s_plus=-8.0, s_minus=8.0)
    rows = [ac.amplification(sharp, 0.1, 0.5, ac.ModeIndex.of(l)) for l in range(11)]
    factors = [row.factor for row in rows]
    assert int(np.argmax(factors)) == 2
    assert factors[1] > 0 and factors[2] > 0 and factors[3] < 0
    assert factors[1] == pytest.approx(3.79, abs=0.05)
    assert factors[2] == pytest.approx(7.28, abs=0.05)


def test_amplification_vs_velocity_derivative_random():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 20:
        beta = rng.uniform(0.01, 0.5)
        rho_p, rho_m = rng.uniform(0.2, 3.0, size=2)
        m_p, m_m = rng.uniform(0.2, 3.0, size=2)
        k_p, k_m = 2 * beta * rho_p, 2 * beta * rho_m
        # cancel S_I so a root is guaranteed (d+ < 0 < d-)
        l_coef = -(SQRT2 / 2) * (k_p - k_m) / (2 * SQRT2 / 3)
        sharp = make_sharp(beta=beta, s_plus=-rng.uniform(0.1, 5.0),
                           s_minus=rng.uniform(0.1, 5.0), rho_plus=rho_p,
                           rho_minus=rho_m, m_plus=m_p, m_minus=m_m, l_coef=l_coef)
        cfg = ac.PlanarConfig(sharp=sharp, q0=0.5)
        q_star = ac.find_stationary(cfg)
        assert q_star is not None
        h = 1e-6
        fd = (ac.velocity_H(cfg, q_star + h) - ac.velocity_H(cfg, q_star - h)) / (2 * h)
        row = ac.amplification(sharp, beta, q_star, ac.ModeIndex.of(0))
        assert row.factor / 2 == pytest.approx(fd, rel=1e-6, abs=1e-9)
        checked += 1


def test_amplification_decays_for_large_modes(symmetric):
    rows = [ac.amplification(symmetric, 0.05, 0.5, ac.ModeIndex.of(l)).factor
            for l in range(51)]
    peak = int(np.argmax(rows))
    tail = np.array(rows[peak:])
    assert np.all(np.diff(tail) < 0.0)


def test_amplification_preconditions(symmetric):
    with pytest.raises(ac.ConfigurationError):
        ac.amplification(symmetric, 0.1, 1.5, ac.ModeIndex.of(1))
    bad = make_sharp()
    degenerate = ac.SharpParams(
        rho_plus=0.0, rho_minus=1.0, d_plus=None, d_minus=1.0,
        lambda_plus=None, lambda_minus=1.0, gamma=bad.gamma,
        s_interface=0.0, length_L=1.0, width_Lt=1.0,
    )
    with pytest.raises(ac.ConfigurationError):
        ac.amplification(degenerate, 0.1, 0.5, ac.ModeIndex.of(1))


# ---------------------------------------------------------------------------
# critical beta
# ---------------------------------------------------------------------------

def test_beta_crit_is_amplification_root(symmetric):
    for l2 in range(1, 7):
        mode = ac.ModeIndex.of(l2)
        crit = ac.beta_crit(1.0, 1.0, symmetric.gamma, mode)
        row = ac.amplification(symmetric, crit, 0.5, mode)
        assert abs(row.factor) < 1e-10
        assert row.beta_crit == pytest.approx(crit, abs=0)


def test_beta_crit_sign_change(symmetric):
    mode = ac.ModeIndex.of(2)
    crit = ac.beta_crit(1.0, 1.0, symmetric.gamma, mode)
    assert ac.amplification(symmetric, 0.9 * crit, 0.5, mode).factor > 0
    assert ac.amplification(symmetric, 1.1 * crit, 0.5, mode).factor < 0


def test_beta_crit_large_domain_limit(symmetric):
    mode = ac.ModeIndex.of(3)
    gamma = symmetric.gamma
    k = mode.l_sq * math.pi**2
    limit = (2.0 / gamma) / k * (1.0 - 1.0 / math.sqrt(1.0 + k))
    assert ac.beta_crit(500.0, 1.0, gamma, mode) == pytest.approx(limit, rel=1e-12)


def test_beta_crit_rejects_translation(symmetric):
    with pytest.raises(ValueError):
        ac.beta_crit(1.0, 1.0, symmetric.gamma, ac.ModeIndex.of(0))


# ---------------------------------------------------------------------------
# mode enumeration
# ---------------------------------------------------------------------------

def test_enumerate_modes_2d():
    modes = ac.enumerate_modes(2, 16)
    assert sorted({m.l_sq for m in modes}) == [0, 1, 4, 9, 16]


def test_enumerate_modes_3d():
    modes = ac.enumerate_modes(3, 10)
    assert sorted({m.l_sq for m in modes}) == [0, 1, 2, 4, 5, 8, 9, 10]


def test_enumerate_modes_trivial():
    modes = ac.enumerate_modes(3, 0)
    assert [m.l_sq for m in modes] == [0]


def test_mode_representatives():
    modes = ac.enumerate_modes(3, 8)
    reps = ac.mode_representatives(modes)
    assert [m.l_sq for m in reps] == [0, 1, 2, 4, 5, 8]
    assert len(reps) < len(modes)


def test_mode_index_invariant():
    with pytest.raises(ac.ConfigurationError):
        ac.ModeIndex((1, 2), 4)
    assert ac.ModeIndex.of(1, 2).l_sq == 5
