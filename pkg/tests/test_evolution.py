import numpy as np
import pytest

from mcnls import (
    EvolutionConfig,
    Field,
    admissible,
    concentration_estimates,
    evolve,
    free_pullback,
    lp_norm,
    make_grid,
    scattering_cauchy_difference,
    step_strang,
    strichartz_norm,
    variance_blowup_time,
    virial_check,
)
from mcnls.evolution import GRADIENT_GROWTH_FACTOR
from mcnls.observables import energy, mass
from mcnls.symmetries import galilean_boost, rescale


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(mu=0, dt=1e-3, t_end=1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(mu=1, dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(mu=1, dt=1e-3, t_end=-1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(mu=1, dt=1e-3, t_end=1.0, stride=0)


def test_plane_wave_dispersion_relation(grid512):
    # A e^{i(k0 x + w t)} with w = -k0^2 - mu |A|^4 is an exact solution
    g = grid512
    A, k0, mu = 0.7, 4 * g.dk, -1
    omega = -k0 ** 2 - mu * A ** 4
    u = Field(g, A * np.exp(1j * k0 * g.axis_x))
    dt = 1e-3
    for _ in range(1000):
        u = step_strang(u, dt, mu)
    exact = A * np.exp(1j * (k0 * g.axis_x + omega * 1.0))
    assert lp_norm(Field(g, u.values - exact), 2) < 1e-12 * A


def test_soliton_modulus_stationary(q512):
    f = q512.field
    cfg = EvolutionConfig(mu=-1, dt=1e-4, t_end=1.0, stride=2000)
    series, fin = evolve(f, cfg)
    assert series.outcome == "completed"
    drift = lp_norm(Field(f.grid, np.abs(fin.values) - np.abs(f.values)), 2)
    assert drift < 1e-6


def test_second_order_convergence(grid512):
    g = grid512
    f0 = Field(g, np.exp(-g.axis_x ** 2 / 2))

    def run(dt):
        u = f0
        for _ in range(int(round(0.5 / dt))):
            u = step_strang(u, dt, 1)
        return u

    ref = run(0.5 / 4096)
    e1 = lp_norm(Field(g, run(0.5 / 256).values - ref.values), 2)
    e2 = lp_norm(Field(g, run(0.5 / 512).values - ref.values), 2)
    assert e1 / e2 == pytest.approx(4.0, rel=0.15)


def test_mass_conserved_small_gaussian(grid512):
    g = grid512
    amp = np.sqrt(0.01 / np.sqrt(np.pi))
    f = Field(g, amp * np.exp(-g.axis_x ** 2 / 2))
    series, _ = evolve(f, EvolutionConfig(mu=1, dt=1e-2, t_end=10.0, stride=100))
    assert series.outcome == "completed"
    m = np.asarray(series.mass)
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-10


def test_scattering_accumulator_nondecreasing(grid512):
    g = grid512
    f = Field(g, 0.8 * np.exp(-g.axis_x ** 2 / 2))
    series, _ = evolve(f, EvolutionConfig(mu=1, dt=1e-3, t_end=0.3, stride=30))
    acc = np.asarray(series.scat_accum)
    assert np.all(np.diff(acc) >= 0)
    assert acc[-1] > 0


def test_evolve_rejects_boundary_data(grid512):
    g = grid512
    f = Field(g, np.exp(-(np.abs(g.axis_x) - g.L) ** 2))
    with pytest.raises(ValueError):
        evolve(f, EvolutionConfig(mu=1, dt=1e-3, t_end=0.1))


def test_blowup_detection_and_state():
    g = make_grid(1, 1024, 16.0)
    f = Field(g, 1.6 * np.exp(-g.axis_x ** 2 / (2 * 1.0)))
    assert energy(f, -1) < 0
    series, fin = evolve(f, EvolutionConfig(mu=-1, dt=1e-4, t_end=2.0, stride=20,
                                            dealias=False))
    assert series.outcome == "blowup-suspected"
    assert "blowup" in series.flags[-1]
    assert series.kinetic[-1] >= GRADIENT_GROWTH_FACTOR * series.kinetic[0]
    assert np.all(np.isfinite(fin.values.view(np.float64)))


def test_variance_blowup_time(grid512):
    g = grid512
    f = Field(g, 1.4 * np.exp(-g.axis_x ** 2 / 2))
    E = energy(f, -1)
    assert E < 0
    T0 = variance_blowup_time(f, -1)
    from mcnls.observables import variance

    assert T0 == pytest.approx(np.sqrt(variance(f) / (-8 * E)), rel=1e-12)
    assert variance_blowup_time(Field(g, 0.1 * np.exp(-g.axis_x ** 2 / 2)), -1) is None


def test_virial_forced_and_free(grid512):
    g = grid512
    f = Field(g, np.exp(-g.axis_x ** 2 / 2))
    series, _ = evolve(f, EvolutionConfig(mu=1, dt=1e-3, t_end=0.5, stride=50))
    assert virial_check(series) <= 0.01
    tiny = Field(g, 1e-6 * np.exp(-g.axis_x ** 2 / 2))
    series2, _ = evolve(tiny, EvolutionConfig(mu=1, dt=1e-3, t_end=0.5, stride=50))
    assert virial_check(series2) <= 0.01


def test_virial_soliton_absolute(q512):
    series, _ = evolve(q512.field,
                       EvolutionConfig(mu=-1, dt=1e-4, t_end=0.5, stride=250))
    assert virial_check(series, abs_floor=1.0) <= 1e-6


def test_virial_rejects_nonuniform(q512):
    series, _ = evolve(q512.field, EvolutionConfig(mu=-1, dt=1e-3, t_end=0.02, stride=4))
    series.t[2] += 1e-3
    with pytest.raises(ValueError):
        virial_check(series)


def test_free_pullback_of_free_flow(grid512):
    g = grid512
    f = Field(g, np.exp(-g.axis_x ** 2 / 2))
    # evolve freely by spectral multiplication, then pull back
    u1 = free_pullback(f, -1.3)   # e^{і 1.3 Delta} f
    u2 = free_pullback(f, -2.6)
    d = scattering_cauchy_difference(u1, 1.3, u2, 2.6)
    assert d < 1e-10


def test_small_data_scatters_soliton_does_not(grid512):
    g = grid512
    amp = np.sqrt(0.1 * np.sqrt(3) * np.pi / 2 / np.sqrt(np.pi))
    f = Field(g, amp * np.exp(-g.axis_x ** 2 / 2))
    u, u5 = f, None
    for i in range(10000):
        u = step_strang(u, 1e-3, -1, dealias=True)
        if i == 4999:
            u5 = u
    small = scattering_cauchy_difference(u5, 5.0, u, 10.0)
    assert small < 1e-3  # frozen regression threshold

    from mcnls import closed_form_1d

    q = closed_form_1d(g)
    u, u5 = q.field, None
    for i in range(10000):
        u = step_strang(u, 1e-3, -1, dealias=True)
        if i == 4999:
            u5 = u
    sol = scattering_cauchy_difference(u5, 5.0, u, 10.0)
    assert sol > 10 * small  # non-scattering witness


def test_admissible_pairs():
    assert admissible(4, np.inf, 1)
    assert admissible(8, 4, 1)
    assert admissible(6, 6, 1)
    assert not admissible(2, np.inf, 2)  # p > 2 required when d = 2
    assert admissible(4, 4, 2)
    assert admissible(3, 6, 2)
    assert not admissible(3, 6, 1)  # scaling relation fails
    assert not admissible(3.5, np.inf, 1)  # p floor fails


def test_strichartz_soliton_growth(q512):
    g = q512.field.grid
    times = np.linspace(0.0, 4.0, 81)
    fields = [Field(g, np.exp(1j * t) * q512.field.values) for t in times]
    half = strichartz_norm(times[:41], fields[:41], 6, 6)
    full = strichartz_norm(times, fields, 6, 6)
    slope = np.log(full / half) / np.log(2.0)
    assert slope == pytest.approx(1.0 / 6.0, rel=0.02)


def test_concentration_estimates_symmetry(q20):
    f = q20.field
    for frac in (0.01, 0.05, 0.1):
        N, xi, x = concentration_estimates(f, frac * mass(f))
        assert abs(x[0]) <= f.grid.h
        assert abs(xi[0]) <= f.grid.dk
        assert 0.5 <= N <= 8.0


def test_concentration_estimates_boost_shift(q20):
    f = q20.field
    g = f.grid
    eta = 0.05 * mass(f)
    _, xi0, _ = concentration_estimates(f, eta)
    shift = 8 * g.dk
    _, xi1, _ = concentration_estimates(galilean_boost(f, [shift], 0.0), eta)
    assert abs(xi1[0] - xi0[0] - shift) <= g.dk


def test_concentration_estimates_scaling(q_ref):
    f = q_ref.field
    eta = 0.05 * mass(f)
    N0, _, x0 = concentration_estimates(f, eta)
    f4 = rescale(f, 4.0)
    N4, _, x4 = concentration_estimates(f4, 0.05 * mass(f4))
    assert N4 / N0 == pytest.approx(4.0, rel=0.5)
    assert abs(x4[0]) <= f.grid.h


def test_concentration_estimates_rejects_eta(q20):
    with pytest.raises(ValueError):
        concentration_estimates(q20.field, 0.0)
    with pytest.raises(ValueError):
        concentration_estimates(q20.field, 10 * mass(q20.field))


def test_galilean_covariance_of_flow(grid512):
    g = grid512
    f0 = Field(g, np.exp(-g.axis_x ** 2 / 2))
    xi0 = 8 * g.dk
    cfg = EvolutionConfig(mu=-1, dt=1e-3, t_end=0.5, stride=10 ** 9)
    _, ua = evolve(galilean_boost(f0, [xi0], 0.0), cfg)
    _, ub = evolve(f0, cfg)
    diff = lp_norm(Field(g, ua.values - galilean_boost(ub, [xi0], 0.5).values), 2)
    assert diff < 1e-8


def test_scaling_covariance_of_flow(grid512):
    g = grid512
    f0 = Field(g, np.exp(-g.axis_x ** 2 / 2))
    lam = 2.0
    cfg_fast = EvolutionConfig(mu=-1, dt=2e-4 / lam ** 2, t_end=0.5 / lam ** 2,
                               stride=10 ** 9)
    cfg_slow = EvolutionConfig(mu=-1, dt=2e-4, t_end=0.5, stride=10 ** 9)
    _, ua = evolve(rescale(f0, lam), cfg_fast)
    _, ub = evolve(f0, cfg_slow)
    diff = lp_norm(Field(g, ua.values - rescale(ub, lam).values), 2)
    assert diff < 1e-8


def test_diagnostics_csv_header(tmp_path, grid512):
    g = grid512
    f = Field(g, 0.3 * np.exp(-g.axis_x ** 2 / 2))
    series, _ = evolve(f, EvolutionConfig(mu=1, dt=1e-3, t_end=0.01, stride=5))
    p = tmp_path / "diag.csv"
    series.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == ("t,mass,energy,variance,kinetic,potential,momentum_x,"
                        "scat_accum,N_est,xi_x,x_x,flags")
    assert len(lines) == 1 + len(series.t)


def test_pseudoconformal_gradient_growth_under_evolution(q20):
    from mcnls import pseudoconformal_sample

    g = q20.field.grid
    v = pseudoconformal_sample(-1.0, g, q20)
    series, _ = evolve(v, EvolutionConfig(mu=-1, dt=1e-4, t_end=0.9, stride=1000))
    assert series.kinetic[-1] / series.kinetic[0] > 20.0
