import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hamred.core import (
    DomainError,
    Params,
    PhaseState,
    Signature,
    Space,
    ValidationError,
    complex_to_real,
    metric_g,
    parse_sigma,
    real_to_complex,
    validate,
)

finite = st.floats(-3, 3, allow_nan=False)


def test_validate_origin_excluded():
    rep = validate(PhaseState(Space.R3_MONOPOLE, (0, 0, 0, 1, 0, 0)))
    assert not rep.ok
    assert rep.violations[0].code == "origin excluded"


def test_validate_pseudosphere_domain():
    p = Params(m=-1)
    assert validate(PhaseState(Space.PSEUDOSPHERE, (0.5, 0.1)), p).ok
    rep = validate(PhaseState(Space.PSEUDOSPHERE, (1.5, 0.1)), p)
    assert [v.code for v in rep.violations] == ["outside Poincare disk"]
    with pytest.raises(ValidationError):
        rep.raise_if_failed()


def test_validate_non_finite():
    rep = validate(PhaseState(Space.FLAT_C, (complex(math.nan, 0), 1)))
    assert not rep.ok


def test_metric_values():
    assert metric_g(0, Signature.SPHERE, 1) == 1
    assert metric_g(1, Signature.SPHERE, 1) == 0.25
    assert metric_g(0.5, Signature.PSEUDOSPHERE, -1) == pytest.approx(-1 / 0.75**2, rel=1e-15)


def test_metric_boundary_raises():
    with pytest.raises(DomainError):
        metric_g(1.0, Signature.PSEUDOSPHERE, -1)


@given(finite, finite, st.floats(0, 2 * math.pi))
def test_metric_rotation_invariant(x, y, phi):
    p = complex(x, y)
    for sig, m in ((Signature.SPHERE, 1.3), (Signature.PSEUDOSPHERE, -0.7)):
        if sig is Signature.PSEUDOSPHERE and abs(abs(p) - 1) < 1e-3:
            continue
        a = metric_g(p, sig, m)
        b = metric_g(p * complex(math.cos(phi), math.sin(phi)), sig, m)
        assert b == pytest.approx(a, rel=1e-12)


@given(finite, finite)
def test_sphere_metric_inversion(x, y):
    # p -> 1/p is the chart change; g transforms with |dp'/dp|^2 = 1/|p|^4
    p = complex(x, y)
    if abs(p) < 1e-2:
        return
    g1 = metric_g(p, Signature.SPHERE, 1.0)
    g2 = metric_g(1 / p, Signature.SPHERE, 1.0)
    assert g1 == pytest.approx(g2 / abs(p) ** 4, rel=1e-12)


def test_signature_aliases():
    assert Signature("sphere") is Signature.EUCLIDEAN
    assert Signature("Pseudosphere") is Signature.SPLIT
    assert Signature.SPLIT.eps == -1


def test_params_roundtrip_and_validation():
    p = Params(mu=2, omega=0.5, s=1.5, sigma=0.5)
    assert Params.from_json(p.to_json()) == p
    assert Params.from_dict({"sigma": "1/2"}).sigma == 0.5
    with pytest.raises(ValidationError):
        Params(mu=0)
    with pytest.raises(ValidationError):
        Params(sigma=1 / 3)  # needs N = 3
    assert Params(sigma=1 / 3, N=3).sigma == pytest.approx(1 / 3)
    with pytest.raises(ValidationError):
        Params.from_dict({"nope": 1})
    assert json.loads(p.to_json())["mu"] == 2


def test_parse_sigma():
    assert parse_sigma("2/3") == pytest.approx(2 / 3)
    assert parse_sigma(0.5) == 0.5


@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_complex_real_roundtrip(vals):
    c = np.array(vals)
    assert np.array_equal(real_to_complex(complex_to_real(c)), c)


def test_phase_state_real_vector():
    s = PhaseState(Space.FLAT_C, (1 + 2j, 3 - 4j))
    assert np.array_equal(s.real_vector(), [1, 2, 3, -4])
    assert PhaseState.from_real(Space.FLAT_C, [1, 2, 3, -4]) == s
