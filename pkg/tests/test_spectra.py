import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hamred.core import Params, RefinementNeeded, ValidationError
from hamred.spectra import (
    RadialGrid,
    aharonov_bohm_shift,
    angular_family,
    degeneracies,
    oscillator_levels,
    oscillator_to_vortex,
    radial_oracle,
    vortex_energy,
    vortex_levels,
    zn_split,
)


def test_oscillator_levels():
    lv = {(l.Nr, l.M): l.E for l in oscillator_levels(2, 3)}
    assert lv[(0, 0)] == 1
    assert lv[(1, 2)] == 5
    at3 = sorted((n, M) for (n, M), E in lv.items() if E == 3)
    assert at3 == [(0, -2), (0, 2), (1, 0)]


def test_vortex_anchor_energies():
    assert vortex_energy(0, 0.0) == pytest.approx(-2.0)
    assert vortex_energy(0, 0.5) == pytest.approx(-0.5)
    assert vortex_energy(0, 0.0, as_printed=True) == pytest.approx(-4.0)


def test_vortex_degeneracy_sigma_zero():
    lines = vortex_levels(0, 3, 3, max_principal=1)
    k1 = sorted((l.Nr, l.m_sigma) for l in lines if l.Nr + abs(l.m_sigma) == 1)
    assert k1 == [(0, -1.0), (0, 1.0), (1, 0.0)]


def test_degeneracy_tags_are_sequential():
    lines = vortex_levels(0.5, 3, 3, max_principal=3)
    tags = {}
    for l in lines:
        tags.setdefault(round(l.principal, 9), []).append(l.degeneracy_tag)
    assert all(t == list(range(len(t))) for t in tags.values())


def test_oracle_ground_states():
    assert radial_oracle(0, 0.0, 1)[0] == pytest.approx(-2.0, rel=5e-3)
    assert radial_oracle(0.5, 0.5, 1)[0] == pytest.approx(-0.5, rel=5e-3)


@pytest.mark.parametrize("sigma", [0.0, 0.5])
def test_oracle_matches_formula(sigma):
    lines = vortex_levels(sigma, 3, 3, max_principal=3)
    for m in sorted({l.m_sigma for l in lines}):
        ls = [l for l in lines if l.m_sigma == m]
        E = radial_oracle(sigma, m, 1 + max(l.Nr for l in ls))
        for l in ls:
            assert E[l.Nr] == pytest.approx(l.energy, rel=5e-3)


@pytest.mark.parametrize("sigma,m", [(0.0, 0.0), (0.0, 2.0), (0.5, 0.5), (0.5, -1.5)])
def test_oracle_ratio_is_prefactor_free(sigma, m):
    E = radial_oracle(sigma, m, 2)
    n0, n1 = abs(m) + 0.5, abs(m) + 1.5
    assert E[0] / E[1] == pytest.approx((n1 / n0) ** 2, rel=5e-3)


def test_oracle_scales_with_params():
    p = Params(mu=2.0, alpha=0.5, hbar=0.8)
    E = radial_oracle(0, 1.0, 2, params=p)
    assert E[0] == pytest.approx(vortex_energy(0, 1.0, p), rel=5e-3)
    assert E[1] == pytest.approx(vortex_energy(1, 1.0, p), rel=5e-3)


def test_oracle_uniform_grid_converges():
    grid = RadialGrid.for_levels(2, 0.0, n_points=20000, scheme="Uniform")
    E = radial_oracle(0, 0.0, 2, grid=grid)
    assert E[0] == pytest.approx(-2.0, rel=5e-3)


def test_oracle_refinement_needed():
    with pytest.raises(RefinementNeeded):
        radial_oracle(0, 0.0, 2, grid=RadialGrid.for_levels(2, 0.0, n_points=200, scheme="Uniform"))


def test_oracle_detail_and_validation():
    res = radial_oracle(0.5, 1.5, 2, detail=True)
    assert np.all(res.error_estimate < 1e-3)
    assert np.all(np.abs(res.fine - res.energies) <= np.abs(res.coarse - res.energies))
    with pytest.raises(ValidationError):
        radial_oracle(0.5, 1.0, 1)  # 1.0 is not of the form j + 1/2
    with pytest.raises(ValidationError):
        radial_oracle(0, 0.0, 1, params=Params(alpha=-1))


def test_half_spin_signature():
    lines = vortex_levels(0.5, 5, 5, max_principal=5)
    deg = degeneracies(lines)
    assert all(v >= 2 and v % 2 == 0 for v in deg.values())
    ground = [l.m_sigma for l in lines if l.degeneracy_tag >= 0 and l.principal == 1.0]
    assert sorted(ground) == [-0.5, 0.5]
    deg0 = degeneracies(vortex_levels(0, 5, 5, max_principal=5))
    assert all(deg0[k] == 2 * k + 1 for k in range(6))


def test_oscillator_to_vortex_pairs_energies():
    # E_osc fixes alpha = E/4 and mu omega^2/8 = -E_vortex at the matching level
    for lvl in oscillator_levels(3, 4):
        sigma, Nr, m = oscillator_to_vortex(lvl)
        assert m == pytest.approx(lvl.M / 2)
        params = Params(mu=1.0, omega=1.0, alpha=lvl.E / 4)
        assert vortex_energy(Nr, m, params) == pytest.approx(-params.mu * params.omega**2 / 8)


def test_zn_split():
    assert zn_split(2, 1).sigma == 0.5
    fam = zn_split(3, 2)
    assert fam.sigma == pytest.approx(2 / 3)
    vals = fam.values(1)
    assert vals[:3] == pytest.approx([-1 / 3, 2 / 3, -4 / 3])
    assert fam.contains(5 / 3) and fam.contains(-4 / 3) and not fam.contains(-2 / 3)
    assert zn_split(1, 0).sigma == 0
    with pytest.raises(ValidationError):
        zn_split(3, 3)


def test_zn_family_from_oscillator_momenta():
    # the Z_N image of oscillator momentum M is M/N; sector M = k (mod N)
    N = 3
    for k in range(N):
        fam = zn_split(N, k)
        for M in range(-9, 10):
            assert fam.contains(M / N) == (M % N == k)


def test_aharonov_bohm():
    a0, a1 = aharonov_bohm_shift(0), aharonov_bohm_shift("1/2")
    assert a0.ground_energy == pytest.approx(-2.0) and a1.ground_energy == pytest.approx(-0.5)
    assert a0.spin == 0 and a1.spin == 0.5
    assert sorted(a1.ground_multiplet) == [-0.5, 0.5]
    assert a1.flux == pytest.approx(math.pi / 4)


@given(st.integers(1, 11))
def test_sigma_reflection_maps_levels(k):
    sigma = k / 12
    a = Counter(round(abs(m), 9) for m in angular_family(sigma, 5) if abs(m) <= 4)
    b = Counter(round(abs(m), 9) for m in angular_family(1 - sigma, 5) if abs(m) <= 4)
    assert a == b
    assert aharonov_bohm_shift(sigma).ground_energy == pytest.approx(aharonov_bohm_shift(1 - sigma).ground_energy)


def test_sigma_parsing_and_range():
    assert vortex_levels("1/2", 0, 0)[0].energy == pytest.approx(-0.5)
    with pytest.raises(ValidationError):
        angular_family(1.5, 2)
