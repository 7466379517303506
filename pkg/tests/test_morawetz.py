import numpy as np
import pytest
from scipy.integrate import quad

from mcnls import (
    Field,
    build_centered_weights,
    build_weights,
    centered_action,
    defocusing_gap,
    defocusing_gap_lower_bound,
    defocusing_interaction_action,
    galilean_boost,
    interaction_action,
    interaction_action_direct,
    interaction_flux,
    make_grid,
    mass,
    step_strang,
    weight_conditions_check,
    weight_family_checks,
)
from mcnls.morawetz import defocusing_interaction_action_direct
from mcnls.observables import kinetic, momentum_density, quad_weight

from conftest import smooth_random_field


def test_build_weights_rejects():
    with pytest.raises(ValueError):
        build_weights(1, 3.0, 4.0)
    with pytest.raises(ValueError):
        build_weights(1, 8.0, 0.0)
    with pytest.raises(ValueError):
        build_weights(3, 8.0, 4.0)


def test_phi_closed_form_vs_quadrature(weights):
    w = weights(1, 8.0, 4.0)
    M = 8.0
    varphi = lambda s: np.clip(M - np.abs(s), 0.0, 1.0)
    for x0 in (0.0, 0.7, 5.0, 14.3, 15.5):
        oracle = quad(lambda s: varphi(s) * varphi(x0 - s), -M, M, limit=400)[0] / (2 * M)
        assert float(w.phi(x0)) == pytest.approx(oracle, abs=1e-10)
    # phi(0) against the hand-computed value
    assert float(w.phi(0.0)) == pytest.approx((2 * M - 4.0 / 3.0) / (2 * M), abs=1e-14)


def test_phi2_closed_form_center_and_oracle(weights):
    w = weights(2, 8.0, 4.0)
    M = 8.0
    exact0 = ((M - 1) ** 2 + 2 * (M / 3.0 - 0.25)) / M ** 2
    assert float(w.phi(0.0)) == pytest.approx(exact0, abs=1e-10)
    # cartesian quadrature oracle at a few radii
    s = np.linspace(-M, M, 2400)
    ds = s[1] - s[0]
    X, Y = np.meshgrid(s, s, indexing="ij")
    varphi = np.clip(M - np.sqrt(X ** 2 + Y ** 2), 0.0, 1.0)
    for r in (3.0, 9.0, 14.5):
        shifted = np.clip(M - np.sqrt((X - r) ** 2 + Y ** 2), 0.0, 1.0)
        oracle = float(np.sum(varphi * shifted)) * ds * ds / (np.pi * M * M)
        assert float(w.phi(r)) == pytest.approx(oracle, abs=5e-7)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("M", [4.0, 8.0, 16.0])
def test_weight_family_invariants(weights, d, M):
    w = weights(d, M, M / 2.0)
    for name, (value, bound, ok) in weight_family_checks(w).items():
        assert ok, f"d={d} M={M}: {name} value={value} bound={bound}"


def test_psi_identity_by_finite_differences(weights):
    # independent check of r psi' = phi - psi via central differences
    for d in (1, 2):
        w = weights(d, 8.0, 4.0)
        r = np.linspace(0.3, 20.0, 197)
        h = 1e-6
        fd = (w.psi(r + h) - w.psi(r - h)) / (2 * h)
        assert np.max(np.abs(r * fd - (w.phi(r) - w.psi(r)))) < 1e-6


def test_psi_half_step_values(weights):
    w = weights(1, 8.0, 4.0)
    # psi(0) = phi(0); psi decays like F_total / r in the tail
    assert float(w.psi(0.0)) == pytest.approx(w.phi0, rel=1e-14)
    assert float(w.psi(100.0)) == pytest.approx(w.F_total / 100.0, rel=1e-12)


def test_centered_action_parity(q512, weights):
    w = weights(1, 8.0, 4.0)
    assert abs(centered_action(q512.field, 1.0, 4.0, w)) < 1e-10


def test_centered_action_boosted_profile_oracle(weights):
    w = weights(1, 8.0, 4.0)
    g = make_grid(1, 1024, 20.0)
    x = g.axis_x
    k0 = 6 * g.dk
    prof = np.exp(-(x - 2.5) ** 2 / 3.0)
    f = Field(g, prof * np.exp(1j * k0 * x))
    val = centered_action(f, 1.0, 4.0, w)
    oracle = k0 * quad(lambda s: float(w.psi(abs(s) / 4.0)) * s
                       * np.exp(-2 * (s - 2.5) ** 2 / 3.0), -20, 20, limit=400)[0]
    assert val == pytest.approx(oracle, abs=1e-10 * (1 + abs(oracle)))


def test_centered_action_kernel_bound(weights):
    w = weights(1, 8.0, 4.0)
    rng = np.random.default_rng(0)
    g = make_grid(1, 256, 16.0)
    for _ in range(20):
        f = smooth_random_field(g, rng)
        p1 = quad_weight(f) * np.sum(np.abs(momentum_density(f)[0]))
        assert abs(centered_action(f, 1.0, 4.0, w)) <= 2 * w.M * 4.0 * p1 * (1 + 1e-12)


def test_centered_action_rejects_2d(weights):
    w = weights(2, 8.0, 4.0)
    g = make_grid(2, 16, 8.0)
    with pytest.raises(ValueError):
        centered_action(Field(g, np.ones(g.shape)), 1.0, 4.0, w)


def test_section3_profile():
    cw = build_centered_weights()
    r = np.linspace(0.0, 6.0, 6001)
    # plateau and tail values of psi
    assert np.allclose(cw.psi(r[r <= 1.0]), 1.0)
    tail = r[r >= 2.0]
    assert np.allclose(cw.psi(tail) * tail, 3.0)
    # (x psi)' = phi >= 0, continuous
    g = cw.psi(r) * r
    fd = np.gradient(g, r)
    assert np.min(cw.phi(r)) >= 0.0
    assert np.max(np.abs(fd[5:-5] - cw.phi(r)[5:-5])) < 1e-2  # FD resolution


def test_interaction_action_fast_vs_direct_1d(weights):
    w = weights(1, 8.0, 4.0)
    rng = np.random.default_rng(5)
    g = make_grid(1, 128, 16.0)
    for _ in range(5):
        f = smooth_random_field(g, rng)
        a = interaction_action(f, 1.0, w)
        b = interaction_action_direct(f, 1.0, w)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_interaction_action_fast_vs_direct_2d(weights):
    w = weights(2, 4.0, 2.0)
    rng = np.random.default_rng(6)
    g = make_grid(2, 32, 8.0)
    f = smooth_random_field(g, rng, width_frac=0.15, kmax_idx=2)
    a = interaction_action(f, 1.0, w)
    b = interaction_action_direct(f, 1.0, w)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_interaction_action_real_field_zero(q512, weights):
    w = weights(1, 8.0, 4.0)
    assert abs(interaction_action(q512.field, 1.0, w)) < 1e-10


def test_interaction_action_galilean_invariance(weights):
    w = weights(1, 8.0, 4.0)
    rng = np.random.default_rng(7)
    g = make_grid(1, 256, 16.0)
    for _ in range(10):
        f = smooth_random_field(g, rng)
        a0 = interaction_action(f, 1.0, w)
        a1 = interaction_action(galilean_boost(f, [4 * g.dk], 0.0), 1.0, w)
        assert abs(a1 - a0) < 1e-8


def test_interaction_action_kernel_bound(weights):
    rng = np.random.default_rng(8)
    g = make_grid(1, 256, 16.0)
    w = weights(1, 8.0, 4.0)
    for _ in range(100):
        f = smooth_random_field(g, rng)
        nt = float(rng.uniform(0.25, 4.0))
        a = interaction_action(f, nt, w)
        p1 = sum(quad_weight(f) * np.sum(np.abs(p)) for p in momentum_density(f))
        assert abs(a) <= 2 * w.M * w.R * p1 * mass(f) * (1 + 1e-9)


def _fd_flux_check(f0, mu, Nt, Ntp, w, dt=1e-4, tol=1e-3):
    us = [f0]
    for _ in range(4):
        us.append(step_strang(us[-1], dt, mu))
    acts = [interaction_action(u, Nt + Ntp * (i - 2) * dt, w)
            for i, u in enumerate(us)]
    fd = (acts[3] - acts[1]) / (2 * dt)
    rep = interaction_flux(us[2], Nt, Ntp, mu, w)
    assert rep.flux == pytest.approx(fd, rel=tol)
    total = (rep.momentum + rep.dispersive + rep.nonlinear + rep.curvature
             + rep.envelope_drift)
    assert total == pytest.approx(rep.flux, rel=1e-8)
    return rep


def test_flux_vs_finite_difference_both_mu(grid512, weights):
    g = grid512
    x = g.axis_x
    w = weights(1, 8.0, 4.0)
    f1 = Field(g, 1.2 * np.exp(-x ** 2 / 4) * np.exp(1j * 0.5 * x * np.tanh(x / 3)))
    _fd_flux_check(f1, 1, 1.0, 0.0, w)
    f2 = Field(g, 0.8 * np.exp(-x ** 2 / 4) * np.exp(1j * 8 * g.dk * x))
    _fd_flux_check(f2, -1, 1.0, 0.0, w)


def test_flux_vs_finite_difference_envelope_drift(grid512, weights):
    g = grid512
    x = g.axis_x
    w = weights(1, 8.0, 4.0)
    f1 = Field(g, 1.2 * np.exp(-x ** 2 / 4) * np.exp(1j * 0.5 * x * np.tanh(x / 3)))
    rep = _fd_flux_check(f1, 1, 0.7, 0.3, w)
    assert rep.envelope_drift != 0.0


def test_flux_vs_finite_difference_2d(weights):
    g = make_grid(2, 128, 12.0)
    X, Y = g.x_mesh()
    w = weights(2, 6.0, 3.0)
    f = Field(g, np.exp(-(X ** 2 + Y ** 2) / 4)
              * np.exp(1j * (0.3 * X - 0.2 * Y) * np.tanh(X / 2)))
    _fd_flux_check(f, 1, 1.0, 0.0, w)


def test_flux_soliton_stationary(q512, weights):
    w = weights(1, 8.0, 4.0)
    rep = interaction_flux(q512.field, 1.0, 0.0, -1, w)
    assert abs(rep.flux) < 1e-6
    assert abs(rep.action) < 1e-10


def test_flux_coercive_term_below_threshold(q_ref, q20, weights):
    # below the ground-state mass the dispersive + nonlinear part keeps a
    # (1 - theta) fraction of the dispersive term
    w = weights(1, 8.0, 4.0)
    g = q20.field.grid
    x = g.axis_x
    for c in (0.5, 0.8, 0.95):
        f = Field(g, c * q20.field.values * np.exp(1j * 2 * g.dk * x))
        rep = interaction_flux(f, 1.0, 0.0, -1, w)
        theta = (mass(f) / q_ref.mass_sq) ** 2
        assert rep.coercive >= (1 - theta) * rep.dispersive * (1 - 1e-9)


def test_defocusing_gap_values(q_ref, q20):
    assert abs(defocusing_gap(q20.field, q_ref)) <= 1e-6 * 0.5 * kinetic(q20.field)
    half = Field(q20.field.grid, 0.5 * q20.field.values)
    gap = defocusing_gap(half, q_ref)
    assert gap > 0
    assert gap >= defocusing_gap_lower_bound(half, q_ref) * (1 - 1e-9)
    big = Field(q20.field.grid, 1.5 * q20.field.values)
    assert defocusing_gap(big, q_ref) < 0


def test_defocusing_gap_random_subthreshold(q_ref):
    rng = np.random.default_rng(9)
    g = make_grid(1, 512, 16.0)
    for _ in range(200):
        target = float(rng.uniform(0.1, 0.99)) * q_ref.mass_sq
        f = smooth_random_field(g, rng, normalize_mass=target)
        gap = defocusing_gap(f, q_ref)
        lower = defocusing_gap_lower_bound(f, q_ref)
        assert gap >= lower * (1 - 1e-9) - 1e-12
        assert gap >= 0


def test_classical_kernel_fast_vs_direct():
    rng = np.random.default_rng(10)
    g = make_grid(1, 128, 16.0)
    for _ in range(5):
        f = smooth_random_field(g, rng)
        a = defocusing_interaction_action(f)
        b = defocusing_interaction_action_direct(f)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_classical_kernel_real_field(q512):
    assert abs(defocusing_interaction_action(q512.field)) < 1e-12


def test_classical_kernel_rejects_2d():
    g = make_grid(2, 16, 8.0)
    with pytest.raises(ValueError):
        defocusing_interaction_action(Field(g, np.ones(g.shape)))


def test_classical_flux_cancellation_on_soliton(q_ref):
    # along e^{it}Q the classical action is constant, so the derivative
    # terms exactly balance the focusing L^8 term:
    #   int (rho')^2 + 4 int (rho |u'|^2 - p^2) = (4/3) int |u|^8
    from mcnls.grid import spectral_derivative

    f = q_ref.field
    g = f.grid
    wq = quad_weight(f)
    rho = np.abs(f.values) ** 2
    drho = spectral_derivative(Field(g, rho), 0).values.real
    du = spectral_derivative(f, 0).values
    p = momentum_density(f)[0]
    lhs = wq * np.sum(drho ** 2) + 4 * wq * np.sum(rho * np.abs(du) ** 2 - p ** 2)
    rhs = (4.0 / 3.0) * wq * np.sum(np.abs(f.values) ** 8)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    # the would-be coercive combination vanishes: not positive definite
    assert lhs - rhs == pytest.approx(0.0, abs=1e-10 * rhs)


def test_classical_action_constant_along_soliton(q20):
    u = q20.field
    vals = [defocusing_interaction_action(u)]
    for _ in range(3):
        for _ in range(100):
            u = step_strang(u, 1e-4, -1)
        vals.append(defocusing_interaction_action(u))
    assert np.max(np.abs(np.asarray(vals))) < 5e-8


def test_weight_conditions_pass(weights):
    for d in (1, 2):
        w = weights(d, 8.0, 4.0)
        rep = weight_conditions_check(w, [(1.0, 0.0)])
        assert rep.all_ok
        assert rep.sup_a <= 2 * w.M * w.R
        assert rep.odd_residual <= 1e-10
        if d == 2:
            assert rep.dt_l1 == 0.0  # constant envelope


def test_weight_conditions_negative_control(weights):
    w = weights(1, 8.0, 4.0)
    rep = weight_conditions_check(
        w, [(1.0, 0.0)],
        odd_kernel=lambda x: w.psi(np.abs(x)) * x + 0.01 * np.exp(-x ** 2))
    assert not rep.odd_ok


def test_weight_conditions_dt_scaling(weights):
    env = [(0.7, 0.15)]
    r8 = weight_conditions_check(weights(2, 8.0, 4.0), env)
    r16 = weight_conditions_check(weights(2, 16.0, 8.0), env)
    assert r8.all_ok and r16.all_ok
    ratio = r16.dt_l1 / r8.dt_l1
    assert 32.0 <= ratio <= 128.0  # (MR)^3 scaling within a factor two


def test_weight_conditions_envelope_object(weights):
    from mcnls import PiecewiseEnvelope

    w = weights(2, 8.0, 4.0)
    env = PiecewiseEnvelope((0.0, 1.0, 3.0), (0, -1, -1), 2.0)
    rep = weight_conditions_check(w, env)
    assert rep.all_ok
    assert rep.dt_l1 > 0.0


def test_freezing_diagnostic(weights):
    from mcnls.morawetz import freezing_diagnostic

    w = weights(1, 8.0, 4.0)
    g = make_grid(1, 512, 16.0)
    x = g.axis_x
    f = Field(g, np.exp(-x ** 2 / 4) * np.exp(1j * 4 * g.dk * x))
    windows = freezing_diagnostic(f, 1.0, w)
    assert windows
    for win in windows:
        assert win.residual_momentum <= 1e-10
        assert win.dispersive >= -1e-14
    # the dominant window recovers the boost frequency
    best = max(windows, key=lambda v: v.dispersive)
    assert best.xi[0] == pytest.approx(4 * g.dk, rel=0.05)
