import math

import numpy as np
import pytest

from hamred import reduction
from hamred.core import ExcludedSetError, Params, PhaseState, SingularPointError, Space, ValidationError
from hamred.dynamics import (
    IntegratorConfig,
    Method,
    drift_report,
    flow,
    make_system,
    oscillator_exact,
    period_estimate,
)
from hamred.poisson import Observable, coulomb_observables
from hamred.transforms import kepler_image

DYON = Params(s=1.0, alpha=1.0)
DYON_CIRCULAR = PhaseState(Space.R3_MONOPOLE, (2.0, 0, 0, 0, 0.5, 0))  # r = (L^2 + s^2)/(mu alpha)


def _fs(q, p):
    return PhaseState(Space.FLAT_C, (q, p))


def test_oscillator_period_and_bounds():
    sysm = make_system("oscillator2d")
    tr = flow(sysm, _fs(1, 1j), IntegratorConfig(dt=1e-3, t_end=3 * math.pi))
    assert np.max(np.abs(tr.position)) < 1.0 + 1e-6
    assert period_estimate(tr) == pytest.approx(2 * math.pi, abs=1e-6)


def test_flow_lands_on_t_end():
    tr = flow(make_system("Oscillator2D"), _fs(1, 1j), IntegratorConfig(dt=0.3, t_end=1.0))
    assert tr.t[-1] == pytest.approx(1.0, abs=1e-15)
    assert len(tr) == 5


def test_oscillator_split_matches_exact():
    sysm = make_system("Oscillator2D", Params(omega=1.3))
    start = _fs(0.4 - 0.2j, 1.1 + 0.3j)
    tr = flow(sysm, start, IntegratorConfig(dt=1e-3, t_end=2.0))
    ex = oscillator_exact(start, tr.t, Params(omega=1.3))
    assert np.max(np.abs(tr.coords - ex.coords)) < 1e-6


def test_midpoint_and_split_agree():
    sysm = make_system("Oscillator2D")
    start = _fs(0.4 - 0.2j, 1.1 + 0.3j)
    a = flow(sysm, start, IntegratorConfig(method=Method.SPLIT, dt=1e-3, t_end=1.0))
    b = flow(sysm, start, IntegratorConfig(method=Method.MIDPOINT, dt=1e-3, t_end=1.0))
    assert np.max(np.abs(a.coords - b.coords)) < 1e-6


def test_split_rejected_for_twisted():
    with pytest.raises(ValidationError):
        flow(make_system("Dyon3D", DYON), DYON_CIRCULAR, IntegratorConfig(method="SplitSymplectic"))


def test_dyon_generators_conserved():
    sysm = make_system("Dyon3D", DYON)
    tr = flow(sysm, DYON_CIRCULAR, IntegratorConfig(dt=2e-3, t_end=100.0))
    rep = drift_report(tr, (sysm.h,) + sysm.conserved)
    for k in ("J1", "J2", "J3"):
        assert rep.entries[k]["max_abs"] < 1e-7
    assert rep.entries["H"]["relative"] < 1e-9


@pytest.mark.slow
def test_dyon_energy_thousand_periods():
    sysm = make_system("Dyon3D", DYON)
    T = period_estimate(flow(sysm, DYON_CIRCULAR, IntegratorConfig(dt=0.01, t_end=40.0)))
    tr = flow(sysm, DYON_CIRCULAR, IntegratorConfig(dt=T / 500, t_end=1000 * T))
    assert drift_report(tr, (sysm.h,)).entries["H"]["relative"] < 1e-8


def _sphere_start():
    return PhaseState(Space.SPHERE_CHART0, (1.0 + 0j, -0.3 - 0.3j))


def test_sphere_monopole_chart_switch_conserves():
    params = Params(m=1.0, s=0.5)
    sysm = make_system("SphereMonopole", params)
    tr = flow(sysm, _sphere_start(), IntegratorConfig(dt=3e-4, t_end=0.3))
    assert len(tr) == 1001
    assert set(tr.charts.tolist()) == {0, 1}
    rep = drift_report(tr, (sysm.h,) + sysm.conserved)
    assert rep.max_relative() < 1e-7


def test_chart_switch_preserves_generators():
    params = Params(m=1.3, s=0.7)
    rng = np.random.default_rng(3)
    obs = [reduction.reduced_observables(params, "euclidean", c) for c in (0, 1)]
    for _ in range(20):
        p = complex(*rng.normal(size=2)) * 1.5
        w = complex(*rng.normal(size=2))
        p2, w2, chart = reduction.switch_chart(p, w, 0, params)
        assert chart == 1
        assert p2 == pytest.approx(1 / p)
        x0 = np.array([p.real, p.imag, w.real, w.imag])
        x1 = np.array([p2.real, p2.imag, w2.real, w2.imag])
        for k in ("H", "J1", "J2", "J3", "P1", "P2", "P3"):
            assert obs[1][k](x1) == pytest.approx(obs[0][k](x0), abs=1e-9)


def test_pseudosphere_flow():
    params = Params(m=-1.0, s=0.5)
    sysm = make_system("PseudosphereMonopole", params)
    tr = flow(sysm, PhaseState(Space.PSEUDOSPHERE, (0.3 + 0j, 0.2 + 0.1j)), IntegratorConfig(dt=1e-3, t_end=1.0))
    assert drift_report(tr, (sysm.h,) + sysm.conserved).max_relative() < 1e-7
    with pytest.raises(ValidationError):
        flow(sysm, PhaseState(Space.PSEUDOSPHERE, (1.5 + 0j, 0.2j)), IntegratorConfig())


@pytest.mark.parametrize("name,params,start,dt", [
    ("Oscillator2D", Params(), _fs(0.4 - 0.2j, 1.1 + 0.3j), 1e-2),
    ("Coulomb2D", Params(), _fs(1.0, -0.4j), 1e-3),
    ("Dyon3D", DYON, DYON_CIRCULAR, 1e-2),
    ("SphereMonopole", Params(m=1.0, s=0.5), PhaseState(Space.SPHERE_CHART0, (0.3 + 0.1j, 0.2 - 0.1j)), 1e-3),
])
def test_time_reversal(name, params, start, dt):
    sysm = make_system(name, params)
    fwd = flow(sysm, start, IntegratorConfig(dt=dt, t_end=1000 * dt))
    end = fwd.state(len(fwd) - 1)
    back = flow(sysm, end, IntegratorConfig(dt=dt, t_end=1000 * dt), backward=True)
    assert back.t[-1] == pytest.approx(-1000 * dt)
    assert np.max(np.abs(back.real_vectors()[-1] - start.real_vector())) < 1e-9


def test_vortex_sigma_zero_is_coulomb_bit_for_bit():
    start = _fs(1.0 + 0.1j, 0.05 - 0.45j)
    cfg = IntegratorConfig(dt=1e-3, t_end=2.0)
    a = flow(make_system("Coulomb2D"), start, cfg)
    b = flow(make_system("Vortex2D", Params(sigma=0.0)), start, cfg)
    assert np.array_equal(a.coords, b.coords)
    c = flow(make_system("Vortex2D", Params(sigma=0.5)), start, cfg)
    assert not np.array_equal(a.coords, c.coords)


def test_vortex_conserves_energy_and_angular_momentum():
    sysm = make_system("Vortex2D", Params(sigma=0.5, hbar=0.5))
    tr = flow(sysm, _fs(1.0, -0.5j), IntegratorConfig(dt=1e-3, t_end=10.0))
    rep = drift_report(tr, (sysm.h,) + sysm.conserved)
    assert rep.entries["Jt"]["relative"] < 1e-12
    assert rep.entries["H_sigma"]["relative"] < 1e-5


def test_kepler_circular_period():
    mu, alpha, r0 = 1.0, 2.0, 1.5
    v = math.sqrt(alpha / (mu * r0))
    # dw/dt = 2 pbar/mu = i v  ->  p = -i mu v / 2
    start = _fs(r0 + 0j, -0.5j * mu * v)
    tr = flow(make_system("Coulomb2D", Params(mu=mu, alpha=alpha)), start, IntegratorConfig(dt=1e-3, t_end=12.0))
    assert np.ptp(np.abs(tr.position)) < 1e-6
    assert period_estimate(tr) == pytest.approx(2 * math.pi * math.sqrt(mu * r0**3 / alpha), rel=1e-6)


def test_coulomb_collision_halts():
    with pytest.raises(ExcludedSetError):
        flow(make_system("Coulomb2D"), _fs(1.0, 0j), IntegratorConfig(dt=1e-3, t_end=3.0))
    with pytest.raises(SingularPointError):
        flow(make_system("Coulomb2D"), _fs(0j, 1.0), IntegratorConfig())


def test_drift_report_basics():
    tr = oscillator_exact(_fs(0.7 + 0.1j, 0.2 - 0.9j), np.linspace(0, 20, 500))
    const = Observable("one", lambda x: 1.0)
    H = make_system("Oscillator2D").h
    rep = drift_report(tr, (const, H))
    assert rep.entries["one"]["max_abs"] == 0.0
    assert rep.entries["H_osc"]["relative"] < 1e-14
    assert '"H_osc"' in rep.to_json()


def test_runge_lenz_conserved_over_hundred_periods():
    # regularized route: exact oscillator flow, Bohlin image in Coulomb variables
    start = _fs(1.5 + 0j, -1j * math.sqrt(0.75))
    osc = oscillator_exact(start, np.linspace(0, 50 * 2 * math.pi, 20001))
    kep = kepler_image(osc)
    A = coulomb_observables(kep.params)
    rep = drift_report(kep, (A["Ax"], A["Ay"], A["Jt"], A["H_C"]))
    amp = abs(A["A"](kep.real_vectors()[0]))
    assert rep.entries["Ax"]["max_abs"] / amp < 1e-7
    assert rep.entries["Ay"]["max_abs"] / amp < 1e-7
    assert rep.max_relative() < 1e-7
    # 50 oscillator rounds are 100 Coulomb orbits
    assert np.sum(np.angle(kep.position[1:] / kep.position[:-1])) / (2 * math.pi) == pytest.approx(100, abs=1e-9)


def test_runge_lenz_direct_flow():
    sysm = make_system("Coulomb2D")
    start = _fs(1.0, -0.4j)
    tr = flow(sysm, start, IntegratorConfig(dt=1e-3, t_end=10.0))
    rep = drift_report(tr, sysm.conserved)
    assert rep.entries["Jt"]["relative"] < 1e-12
    assert max(rep.entries["Ax"]["max_abs"], rep.entries["Ay"]["max_abs"]) < 1e-4


def test_unknown_system():
    with pytest.raises(ValueError):
        make_system("nope")
