"""Reduction of T*C^2 (both signatures) by the generators P and J.

Flat data: momenta pi^a and coordinates om_a with {pi^a, om_b} = delta.
The metric is eta = diag(eps, 1) with eps = +1 (euclidean, reduces to the
sphere) or -1 (split, reduces to the pseudosphere).

    P   = eps |pi^0|^2 + |pi^1|^2
    J   = -Im(pi^a om_a)
    P^a = pi^T T^a conj(pi)
    J^a = -Im(pi^T T^a eta om)

T^a are the Pauli matrices (euclidean) or (1, sigma_1, sigma_2) (split),
and indices are lowered with g = diag(1,1,1) or diag(1,-1,-1).

Reduced chart 0 coordinates are p = pi^1/pi^0 and
w = pi^0 (om^1 - conj(p) om^0) / (1 + p p^+), om^a = eta_a om_a, which
commute with both P and J and satisfy {p, w} = 1,
{w, w_bar} = 2i eps (s/m) g(p).  Chart 1 exchanges the indices 0 and 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DomainError,
    Params,
    PhaseState,
    Signature,
    SingularPointError,
    Space,
    ValidationError,
    complex_to_real,
    metric_g,
    pp_plus,
)
from .poisson import (
    AlgebraSpec,
    BracketStructure,
    EPS3,
    Observable,
    Relation,
    StructureKind,
)

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

T_EUCLIDEAN = np.array([_S1, _S2, _S3])
T_SPLIT = np.array([_I2, _S1, _S2])
G_EUCLIDEAN = np.diag([1.0, 1.0, 1.0])
G_SPLIT = np.diag([1.0, -1.0, -1.0])


def generator_matrices(signature) -> np.ndarray:
    return T_EUCLIDEAN if Signature(signature) is Signature.EUCLIDEAN else T_SPLIT


def generator_metric(signature) -> np.ndarray:
    return G_EUCLIDEAN if Signature(signature) is Signature.EUCLIDEAN else G_SPLIT


def eta(signature) -> np.ndarray:
    return np.array([Signature(signature).eps, 1.0])


@dataclass(frozen=True)
class FlatC2State:
    pi0: complex
    pi1: complex
    om0: complex
    om1: complex
    signature: Signature = Signature.EUCLIDEAN

    def __post_init__(self):
        for name in ("pi0", "pi1", "om0", "om1"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "signature", Signature(self.signature))

    @property
    def pi(self) -> np.ndarray:
        return np.array([self.pi0, self.pi1])

    @property
    def om(self) -> np.ndarray:
        return np.array([self.om0, self.om1])

    def real_vector(self) -> np.ndarray:
        return complex_to_real([self.pi0, self.pi1, self.om0, self.om1])

    @classmethod
    def from_real(cls, x, signature=Signature.EUCLIDEAN) -> "FlatC2State":
        x = np.asarray(x, dtype=float)
        c = x[0::2] + 1j * x[1::2]
        return cls(c[0], c[1], c[2], c[3], signature)

    def to_phase_state(self) -> PhaseState:
        return PhaseState(Space.FLAT_C2, (self.pi0, self.pi1, self.om0, self.om1))


@dataclass(frozen=True)
class GeneratorValues:
    P: float
    J: float
    P_vec: np.ndarray
    J_vec: np.ndarray
    signature: Signature = Signature.EUCLIDEAN

    @property
    def metric(self) -> np.ndarray:
        return generator_metric(self.signature)

    @property
    def casimir_PP(self) -> float:
        return float(self.P_vec @ self.metric @ self.P_vec)

    @property
    def casimir_PJ(self) -> float:
        return float(self.P_vec @ self.metric @ self.J_vec)

    @property
    def JJ(self) -> float:
        return float(self.J_vec @ self.metric @ self.J_vec)


# ---------------------------------------------------------------------------
# flat generators

def moment_map(state: FlatC2State) -> tuple:
    eps = state.signature.eps
    P = eps * abs(state.pi0) ** 2 + abs(state.pi1) ** 2
    J = -(state.pi0 * state.om0 + state.pi1 * state.om1).imag
    return P, J


def flat_generators(state: FlatC2State) -> GeneratorValues:
    T = generator_matrices(state.signature)
    pi, om = state.pi, state.om
    eom = eta(state.signature) * om
    P_vec = np.array([(pi @ t @ pi.conj()).real for t in T])
    J_vec = np.array([-(pi @ t @ eom).imag for t in T])
    P, J = moment_map(state)
    return GeneratorValues(P, J, P_vec, J_vec, state.signature)


def exchange(state: FlatC2State) -> FlatC2State:
    """(pi0, pi1, om0, om1) -> (pi1, pi0, -om1, -om0); maps (m, s) to (-m, -s)
    for the split signature."""
    return FlatC2State(state.pi1, state.pi0, -state.om1, -state.om0, state.signature)


def p_flow(state: FlatC2State, t: float) -> FlatC2State:
    """Exact flow of P for time t: om_a -> om_a + t eta_a conj(pi^a)."""
    e = eta(state.signature)
    om = state.om + t * e * state.pi.conj()
    return FlatC2State(state.pi0, state.pi1, om[0], om[1], state.signature)


def j_flow(state: FlatC2State, t: float) -> FlatC2State:
    """Exact flow of J for time t: pi -> e^{-it/2} pi, om -> e^{it/2} om."""
    a = np.exp(-0.5j * t)
    return FlatC2State(state.pi0 * a, state.pi1 * a, state.om0 / a, state.om1 / a, state.signature)


# ---------------------------------------------------------------------------
# projection and lift

def _swap(state: FlatC2State) -> FlatC2State:
    return FlatC2State(state.pi1, state.pi0, state.om1, state.om0, state.signature)


def project(state: FlatC2State, chart: int | None = None) -> tuple:
    """Reduced coordinates (p, w, chart).

    ``chart=None`` picks the chart with the larger |pi^a| on the sphere and
    chart 0 on the pseudosphere.
    """
    if state.pi0 == 0 and state.pi1 == 0:
        raise SingularPointError("pi = 0 has no reduced image")
    sig = state.signature
    if chart is None:
        chart = 1 if (sig is Signature.EUCLIDEAN and abs(state.pi1) > abs(state.pi0)) else 0
    if chart == 1:
        if sig is not Signature.EUCLIDEAN:
            raise DomainError("the pseudosphere has a single chart")
        state = _swap(state)
    if state.pi0 == 0:
        raise DomainError(f"pi^{chart} = 0 lies outside chart {chart}")
    eps = sig.eps
    p = state.pi1 / state.pi0
    w = state.pi0 * (state.om1 - p.conjugate() * eps * state.om0) / (1 + eps * abs(p) ** 2)
    return p, w, chart


def lift(p: complex, w: complex, params: Params, signature=Signature.EUCLIDEAN, chart: int = 0) -> FlatC2State:
    """A flat point with P = m, J = s projecting to (p, w) in ``chart``.

    Gauge: pi^chart real positive and Re(pi^a om_a) = 0.
    """
    sig = Signature(signature)
    eps = sig.eps
    params.require_reduced()
    nu = eps + abs(p) ** 2
    ratio = params.m / nu
    if not ratio > 0:
        raise DomainError("(p, m) is not on a nonempty level set")
    a0 = math.sqrt(ratio)
    a1 = p * a0
    d = 1 + eps * abs(p) ** 2
    c = w * d / a0
    om0 = (-1j * params.s - a1 * c) / (a0 * d)
    om1 = eps * p.conjugate() * om0 + c
    state = FlatC2State(a0, a1, om0, om1, sig)
    if chart == 1:
        if sig is not Signature.EUCLIDEAN:
            raise DomainError("the pseudosphere has a single chart")
        state = _swap(state)
    return state


def switch_chart(p: complex, w: complex, chart: int, params: Params) -> tuple:
    """Move a sphere point to the other chart through the flat fiber."""
    state = lift(p, w, params, Signature.EUCLIDEAN, chart)
    return project(state, 1 - chart)


# ---------------------------------------------------------------------------
# reduced generators

def _chart_T(signature, chart: int) -> np.ndarray:
    T = generator_matrices(signature)
    if chart == 1:
        return np.array([_S1 @ t @ _S1 for t in T])
    return T


def reduced_P(p, params: Params, signature, chart: int = 0) -> np.ndarray:
    sig = Signature(signature)
    eps = sig.eps
    T = _chart_T(sig, chart)
    p = complex(p)
    num = T[:, 0, 0] + T[:, 1, 0] * p + T[:, 0, 1] * p.conjugate() + T[:, 1, 1] * abs(p) ** 2
    d = 1 + eps * abs(p) ** 2
    return (eps * params.m * num / d).real


def _dP_dpbar(p, params: Params, signature, chart: int = 0) -> np.ndarray:
    sig = Signature(signature)
    eps = sig.eps
    T = _chart_T(sig, chart)
    p = complex(p)
    num = T[:, 0, 0] + T[:, 1, 0] * p + T[:, 0, 1] * p.conjugate() + T[:, 1, 1] * abs(p) ** 2
    dnum = T[:, 0, 1] + T[:, 1, 1] * p
    d = 1 + eps * abs(p) ** 2
    return eps * params.m * (dnum * d - num * eps * p) / d**2


def reduced_generators(p, w, params: Params, signature=Signature.EUCLIDEAN, chart: int = 0) -> GeneratorValues:
    """P^a and J^a = V^a w + conj(V^a w) + (s/m) P^a on the reduced chart.

    V^a = eps (i/2) g^{-1} d P^a / d pbar.
    """
    sig = Signature(signature)
    params.require_reduced()
    P_vec = reduced_P(p, params, sig, chart)
    g = metric_g(complex(p), sig, params.m)
    V = sig.eps * 0.5j / g * _dP_dpbar(p, params, sig, chart)
    J_vec = 2 * (V * complex(w)).real + params.s / params.m * P_vec
    return GeneratorValues(params.m, params.s, P_vec, J_vec, sig)


def top_hamiltonian_value(p, w, params: Params, signature=Signature.EUCLIDEAN) -> float:
    """H = eps (1 + p p^+)^2 |w|^2 = eps m |w|^2 / g, equal to J^a J_a - s^2."""
    sig = Signature(signature)
    d = 1 + pp_plus(complex(p), sig)
    return sig.eps * d * d * abs(w) ** 2


# ---------------------------------------------------------------------------
# observables

def reduced_structure(params: Params, signature=Signature.EUCLIDEAN) -> BracketStructure:
    return BracketStructure(StructureKind.REDUCED_CHART, params, signature)


def reduced_observables(params: Params, signature=Signature.EUCLIDEAN, chart: int = 0) -> dict:
    """P1..P3, J1..J3 and the top Hamiltonian H on (p, w)."""
    sig = Signature(signature)
    eps = sig.eps
    out = {}
    for a in range(3):
        out[f"P{a + 1}"] = Observable(
            f"P{a + 1}", lambda x, a=a: reduced_P(complex(x[0], x[1]), params, sig, chart)[a])
        out[f"J{a + 1}"] = Observable(
            f"J{a + 1}",
            lambda x, a=a: reduced_generators(complex(x[0], x[1]), complex(x[2], x[3]), params, sig, chart).J_vec[a])

    def H(x):
        d = 1 + eps * (x[0] ** 2 + x[1] ** 2)
        return eps * d * d * (x[2] ** 2 + x[3] ** 2)

    def H_grad(x):
        d = 1 + eps * (x[0] ** 2 + x[1] ** 2)
        w2 = x[2] ** 2 + x[3] ** 2
        return np.array([4 * d * w2 * x[0], 4 * d * w2 * x[1], 2 * eps * d * d * x[2], 2 * eps * d * d * x[3]])

    out["H"] = Observable("H", H, H_grad)
    return out


def flat_observables(signature=Signature.EUCLIDEAN) -> dict:
    """P, J, P1..P3, J1..J3 on the real 8-vector of T*C^2."""
    sig = Signature(signature)

    def st(x):
        return FlatC2State.from_real(x, sig)

    out = {
        "P": Observable("P", lambda x: moment_map(st(x))[0]),
        "J": Observable("J", lambda x: moment_map(st(x))[1]),
    }
    for a in range(3):
        out[f"P{a + 1}"] = Observable(f"P{a + 1}", lambda x, a=a: flat_generators(st(x)).P_vec[a])
        out[f"J{a + 1}"] = Observable(f"J{a + 1}", lambda x, a=a: flat_generators(st(x)).J_vec[a])
    return out


def poincare_relations(signature) -> tuple:
    """{P^a,P^b}=0, {P^a,J^b}=eps^abc P_c, {J^a,J^b}=eps^abc J_c with g-lowered indices."""
    G = np.diag(generator_metric(signature))
    rels = []
    for a in range(3):
        for b in range(a + 1, 3):
            c = 3 - a - b
            k = EPS3[a, b, c] * G[c]
            rels.append(Relation((f"P{a + 1}", f"P{b + 1}"), {}))
            rels.append(Relation((f"J{a + 1}", f"J{b + 1}"), {f"J{c + 1}": k}))
    for a in range(3):
        for b in range(3):
            rhs = {}
            if a != b:
                c = 3 - a - b
                rhs = {f"P{c + 1}": EPS3[a, b, c] * G[c]}
            rels.append(Relation((f"P{a + 1}", f"J{b + 1}"), rhs))
    return tuple(rels)


def poincare_spec(params: Params, signature=Signature.EUCLIDEAN) -> AlgebraSpec:
    """e(3) (sphere) or iso(1,2) (pseudosphere) on reduced generators."""
    sig = Signature(signature)
    name = "e3" if sig is Signature.EUCLIDEAN else "iso12"
    gens = reduced_observables(params, sig)
    rels = poincare_relations(sig) + tuple(Relation(("H", f"J{a + 1}"), {}) for a in range(3))
    return AlgebraSpec(name, gens, rels)


def flat_poincare_spec(signature=Signature.EUCLIDEAN) -> AlgebraSpec:
    sig = Signature(signature)
    name = ("e3" if sig is Signature.EUCLIDEAN else "iso12") + "_flat"
    rels = poincare_relations(sig) + (Relation(("P", "J"), {}),)
    rels += tuple(Relation((c, f"{k}{a + 1}"), {}) for c in ("P", "J") for k in "PJ" for a in range(3))
    return AlgebraSpec(name, flat_observables(sig), rels)


def pushforward_observables(signature=Signature.EUCLIDEAN, chart: int = 0) -> dict:
    """p, w and their conjugates composed with ``project``, as flat observables."""
    sig = Signature(signature)

    def pw(x):
        p, w, _ = project(FlatC2State.from_real(x, sig), chart)
        return p, w

    return {
        "p": Observable("p", lambda x: pw(x)[0]),
        "pbar": Observable("pbar", lambda x: pw(x)[0].conjugate()),
        "w": Observable("w", lambda x: pw(x)[1]),
        "wbar": Observable("wbar", lambda x: pw(x)[1].conjugate()),
    }


# ---------------------------------------------------------------------------
# charge-monopole coordinates

def charge_monopole_coords(state: FlatC2State) -> tuple:
    """(Q, P_vec) after reducing by J only.

    P^a = pi^T T^a conj(pi) and Q^a = Re(pi^T T^a eta om) / P.  The pair
    q^a = P^a, p_a = -g_ab Q^b carries the twisted bracket with s = J and
    m = P (see ``poisson.BracketStructure``).
    """
    P, _ = moment_map(state)
    if abs(P) < 1e-300:
        raise DomainError("null pi: the level set P = 0 is degenerate")
    T = generator_matrices(state.signature)
    pi = state.pi
    eom = eta(state.signature) * state.om
    P_vec = np.array([(pi @ t @ pi.conj()).real for t in T])
    Q = np.array([(pi @ t @ eom).real for t in T]) / P
    return Q, P_vec


def monopole_point(state: FlatC2State) -> np.ndarray:
    """Real 6-vector (q, p) = (P_vec, -g Q) on R3Twisted."""
    Q, P_vec = charge_monopole_coords(state)
    return np.concatenate([P_vec, -generator_metric(state.signature) @ Q])


def monopole_generators(x, s: float, m: float, signature=Signature.EUCLIDEAN) -> np.ndarray:
    """J^a = eps^abc p_b q_c + s q^a / rho with q_c = g_cd q^d and rho the signed norm."""
    G = generator_metric(signature)
    q, p = np.asarray(x[:3]), np.asarray(x[3:])
    qq = q @ G @ q
    rho = math.sqrt(qq) if Signature(signature) is Signature.EUCLIDEAN else math.copysign(math.sqrt(abs(qq)), m)
    return np.einsum("abc,b,c->a", EPS3, p, G @ q) + s * q / rho


# ---------------------------------------------------------------------------
# gauge potentials

class GaugeChoice(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    MEAN = "mean"

    @classmethod
    def _missing_(cls, value):
        aliases = {"gammaplus": "plus", "gammaminus": "minus", "gammamean": "mean", "+": "plus", "-": "minus"}
        if isinstance(value, str) and value.strip().lower() in aliases:
            return cls(aliases[value.strip().lower()])
        return None


def gauge_potential(gauge, p, params: Params, signature=Signature.EUCLIDEAN):
    """Holomorphic component A of the potential, A = i dK/dp for K = m log(1 + p p^+).

    PLUS is regular at p = 0, MINUS = PLUS - i m/p is the other-chart
    potential, MEAN averages the two and is singular at p = 0.
    Works elementwise on arrays.
    """
    gauge = GaugeChoice(gauge)
    sig = Signature(signature)
    p = np.asarray(p, dtype=complex)
    m, eps = params.m, sig.eps
    A = 1j * m * eps * np.conj(p) / (1 + eps * np.abs(p) ** 2)
    if gauge is GaugeChoice.PLUS:
        return A[()] if A.ndim == 0 else A
    if np.any(p == 0):
        raise SingularPointError(f"gauge {gauge.value} is singular at p = 0")
    shift = 1.0 if gauge is GaugeChoice.MINUS else 0.5
    out = A - 1j * m * shift / p
    return out[()] if out.ndim == 0 else out


def connection_form(gauge, p, params: Params, signature=Signature.EUCLIDEAN) -> tuple:
    """Real one-form (s/m) 2 Re(A dp) as components (A_x, A_y)."""
    A = np.asarray(gauge_potential(gauge, p, params, signature))
    k = 2 * params.s / params.m
    return k * A.real, -k * A.imag


def loop_integral(gauge, params: Params, center=0j, radius=1.0, n=512, signature=Signature.EUCLIDEAN,
                  minus=None) -> float:
    """Line integral of the connection (or of the difference ``gauge - minus``)
    around a counter-clockwise circle.  Trapezoid rule, spectrally accurate."""
    th = 2 * np.pi * np.arange(n) / n
    p = center + radius * np.exp(1j * th)
    dp = 1j * radius * np.exp(1j * th)
    A = np.asarray(gauge_potential(gauge, p, params, signature))
    if minus is not None:
        A = A - np.asarray(gauge_potential(minus, p, params, signature))
    k = 2 * params.s / params.m
    return float(k * np.sum((A * dp).real) * (2 * np.pi / n))


def curvature(p, params: Params, signature=Signature.EUCLIDEAN, gauge=GaugeChoice.PLUS, h=1e-5):
    """F_xy = d_x A_y - d_y A_x by central differences of the connection."""
    p = np.asarray(p, dtype=complex)
    ax_yp, _ = connection_form(gauge, p + 1j * h, params, signature)
    ax_ym, _ = connection_form(gauge, p - 1j * h, params, signature)
    _, ay_xp = connection_form(gauge, p + h, params, signature)
    _, ay_xm = connection_form(gauge, p - h, params, signature)
    return (ay_xp - ay_xm) / (2 * h) - (ax_yp - ax_ym) / (2 * h)


def curvature_exact(p, params: Params, signature=Signature.EUCLIDEAN):
    """-4 eps s / (1 + p p^+)^2."""
    sig = Signature(signature)
    p = np.asarray(p, dtype=complex)
    return -4 * sig.eps * params.s / (1 + sig.eps * np.abs(p) ** 2) ** 2


def monopole_flux(s: float) -> float:
    """Total sphere flux in the chart-0 orientation; 2s flux units of 2 pi."""
    return -4 * math.pi * s


def total_sphere_flux(params: Params, n_theta=200, n_phi=64) -> float:
    """Quadrature of the finite-difference curvature over the whole sphere.

    The chart-0 plane is covered through r = tan(theta/2), theta in (0, pi),
    with Gauss-Legendre nodes in theta and the trapezoid rule in phi.
    """
    x, wts = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * np.pi * (x + 1)
    wt = 0.5 * np.pi * wts
    r = np.tan(theta / 2)
    jac = r * 0.5 / np.cos(theta / 2) ** 2  # r dr/dtheta
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    R, PH = np.meshgrid(r, phi, indexing="ij")
    F = curvature(R * np.exp(1j * PH), params, Signature.EUCLIDEAN)
    return float(np.sum(F * (wt * jac)[:, None]) * (2 * np.pi / n_phi))


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    s: float
    space: str
    gauge: str
    exchange_phase: float
    reason: str


def spin_quantization_check(s: float, space, gauge=GaugeChoice.PLUS, tol: float = 1e-12) -> Admissibility:
    """Single-valuedness of the wavefunction across the two sphere charts.

    The transition phase between the charts winds 2s times, so the sphere
    needs 2s integer.  The pseudosphere is one chart and takes any s.
    """
    sig = Signature(space)
    gauge = GaugeChoice(gauge)
    phase = 2 * math.pi * s
    if sig is Signature.EUCLIDEAN:
        k = 2 * s
        ok = abs(k - round(k)) <= tol
        reason = "2s is an integer" if ok else f"2s = {k} is not an integer"
        return Admissibility(ok, s, "sphere", gauge.value, phase, reason)
    return Admissibility(True, s, "pseudosphere", gauge.value, phase, "single chart, no quantization")


def validate_reduced(p, params: Params, signature) -> None:
    sig = Signature(signature)
    if sig is Signature.SPLIT:
        r = abs(p)
        if (params.m < 0 and not r < 1) or (params.m > 0 and not r > 1):
            raise ValidationError("point outside the pseudosphere chart for this m")


def identity_audit(params: Params, signature=Signature.EUCLIDEAN, n_points: int = 200, seed: int = 0) -> dict:
    """Worst relative residuals of P.P = m^2, P.J = m s and H = J.J - s^2
    over random reduced points (relative to max(1, |rhs|))."""
    from .poisson import sample_points

    sig = Signature(signature)
    params.require_reduced()
    m, s = params.m, params.s
    worst = {"PP": 0.0, "PJ": 0.0, "top": 0.0}
    for x in sample_points(reduced_structure(params, sig), n_points, seed):
        p, w = complex(x[0], x[1]), complex(x[2], x[3])
        g = reduced_generators(p, w, params, sig)
        H = top_hamiltonian_value(p, w, params, sig)
        for key, lhs, rhs in (("PP", g.casimir_PP, m * m), ("PJ", g.casimir_PJ, m * s),
                              ("top", H, g.JJ - s * s)):
            worst[key] = max(worst[key], abs(lhs - rhs) / max(1.0, abs(rhs)))
    return {"signature": sig.value, "n_points": n_points, "seed": seed, "max_rel": worst}
