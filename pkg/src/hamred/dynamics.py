"""Hamiltonian flows and conservation diagnostics.

Hamilton's equations are dx/dt = {H, x} = -Pi(x) grad H(x) in the real
coordinates of the system's structure.  Separable flat systems use the
Strang splitting (half kick, drift, half kick); twisted and reduced systems
use the implicit midpoint rule with a fixed step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import reduction
from .core import (
    ConvergenceError,
    ExcludedSetError,
    NumericalError,
    Params,
    PhaseState,
    Signature,
    SingularPointError,
    Space,
    ValidationError,
    real_to_complex,
    validate,
)
from .poisson import (
    BracketStructure,
    Observable,
    StructureKind,
    check_conserved,
    coulomb_observables,
    dyon_observables,
    oscillator_observables,
)
from .trajectory import Trajectory


class SystemName(str, Enum):
    OSCILLATOR2D = "Oscillator2D"
    COULOMB2D = "Coulomb2D"
    VORTEX2D = "Vortex2D"
    DYON3D = "Dyon3D"
    SPHERE_MONOPOLE = "SphereMonopole"
    PSEUDOSPHERE_MONOPOLE = "PseudosphereMonopole"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for member in cls:
                if member.value.lower() == value.strip().lower():
                    return member
        return None


class Method(str, Enum):
    SPLIT = "SplitSymplectic"
    MIDPOINT = "ImplicitMidpoint"


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method | None = None
    dt: float = 1e-3
    t_end: float = 1.0
    newton_tol: float = 1e-13
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.method is not None:
            object.__setattr__(self, "method", Method(self.method))
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if not self.t_end > 0:
            raise ValidationError("t_end must be positive")
        if self.newton_tol < 1e-14:
            raise ValidationError("newton_tol must be >= 1e-14")
        if self.newton_max_iter < 1:
            raise ValidationError("newton_max_iter must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_end / self.dt - 1e-9)))

    def step_sizes(self) -> np.ndarray:
        """n_steps - 1 steps of dt and a final step ending exactly at t_end."""
        h = np.full(self.n_steps, self.dt)
        h[-1] = self.t_end - self.dt * (self.n_steps - 1)
        return h


@dataclass(frozen=True)
class ChartedObservable:
    """An observable given separately in each sphere chart."""

    name: str
    variants: tuple

    def for_chart(self, chart: int) -> Observable:
        return self.variants[chart]

    def __call__(self, state: PhaseState):
        return self.variants[state.chart](state.real_vector())


@dataclass(frozen=True)
class HamiltonianSystem:
    name: str
    structure: BracketStructure
    h: Observable
    conserved: tuple = ()
    kinetic: Observable | None = None
    potential: Observable | None = None
    min_radius: float = 0.0
    field_fn: object = None

    @property
    def separable(self) -> bool:
        return self.kinetic is not None and self.potential is not None

    @property
    def space(self) -> Space:
        return self.structure.space

    def vector_field(self, x) -> np.ndarray:
        if self.field_fn is not None:
            return self.field_fn(x)
        return self.structure.vector_field(self.h, x)

    def audit(self, n_points: int = 50, seed: int = 0, tol: float = 1e-8) -> dict:
        """check_conserved for every conserved observable; raises on failure."""
        out = {}
        for obs in self.conserved:
            o = obs.for_chart(0) if isinstance(obs, ChartedObservable) else obs
            rep = check_conserved(self.structure, self.h, o, n_points, seed, fd=o.grad is None)
            out[o.name] = rep.max_rel
            if rep.max_rel > tol:
                raise ValidationError(f"{o.name} is not conserved by {self.name}: residual {rep.max_rel:.3g}")
        return out


def _quadratic(name, idx, coef):
    def f(x):
        return coef * (x[idx[0]] ** 2 + x[idx[1]] ** 2)

    def g(x):
        out = np.zeros_like(x)
        out[idx[0]], out[idx[1]] = 2 * coef * x[idx[0]], 2 * coef * x[idx[1]]
        return out

    return Observable(name, f, g)


def _coulomb_potential(params: Params, sigma: float):
    alpha = params.alpha
    c2 = params.hbar**2 * sigma**2 / (2 * params.mu)

    def V(x):
        r2 = x[0] ** 2 + x[1] ** 2
        val = -alpha / math.sqrt(r2)
        if c2:
            val = val + c2 / r2
        return val

    def V_grad(x):
        r2 = x[0] ** 2 + x[1] ** 2
        r3 = r2 * math.sqrt(r2)
        g = np.array([alpha * x[0] / r3, alpha * x[1] / r3, 0.0, 0.0])
        if c2:
            g[0] -= 2 * c2 * x[0] / r2**2
            g[1] -= 2 * c2 * x[1] / r2**2
        return g

    return Observable("V", V, V_grad)


def make_system(name, params: Params | None = None, audit: bool = False) -> HamiltonianSystem:
    """Build one of the named systems.

    Oscillator2D   H = omega(|pi|^2 + |z|^2) on FlatC (z, pi)
    Coulomb2D      H = 2|p|^2/mu - alpha/|w| on FlatC (w, p)
    Vortex2D       Coulomb2D + hbar^2 sigma^2/(2 mu |w|^2)
    Dyon3D         p^2/2mu + s^2/(2 mu |q|^2) - alpha/|q| on R3Twisted
    Sphere/PseudosphereMonopole
                   H = eps (1 + p p^+)^2 |w|^2 on the reduced chart
    """
    params = params or Params()
    name = SystemName(name)
    if name is SystemName.OSCILLATOR2D:
        st = BracketStructure(StructureKind.CANONICAL_COMPLEX, params)
        ob = oscillator_observables(params)
        sysm = HamiltonianSystem(name.value, st, ob["H_osc"], (ob["J"], ob["I1"], ob["I2"]),
                                 kinetic=_quadratic("T", (2, 3), params.omega),
                                 potential=_quadratic("V", (0, 1), params.omega))
    elif name in (SystemName.COULOMB2D, SystemName.VORTEX2D):
        sigma = params.sigma if name is SystemName.VORTEX2D else 0.0
        st = BracketStructure(StructureKind.CANONICAL_COMPLEX, params)
        ob = coulomb_observables(params, sigma)
        h = ob["H_sigma"] if "H_sigma" in ob else ob["H_C"]
        conserved = (ob["Jt"],) if sigma else (ob["Jt"], ob["Ax"], ob["Ay"])
        sysm = HamiltonianSystem(name.value, st, h, conserved,
                                 kinetic=_quadratic("T", (2, 3), 2.0 / params.mu),
                                 potential=_coulomb_potential(params, sigma), min_radius=1e-8)
    elif name is SystemName.DYON3D:
        st = BracketStructure(StructureKind.R3_TWISTED, params)
        ob = dyon_observables(params)
        sysm = HamiltonianSystem(name.value, st, ob["H"], (ob["J1"], ob["J2"], ob["J3"]), min_radius=1e-8,
                                 field_fn=_dyon_field(params))
    else:
        sig = Signature.EUCLIDEAN if name is SystemName.SPHERE_MONOPOLE else Signature.SPLIT
        params.require_reduced()
        st = reduction.reduced_structure(params, sig)
        charts = (0, 1) if sig is Signature.EUCLIDEAN else (0,)
        obs = [reduction.reduced_observables(params, sig, c) for c in charts]
        conserved = tuple(ChartedObservable(f"J{a}", tuple(o[f"J{a}"] for o in obs)) for a in (1, 2, 3))
        sysm = HamiltonianSystem(name.value, st, obs[0]["H"], conserved, field_fn=_top_field(params, sig))
    if audit:
        sysm.audit()
    return sysm


def _dyon_field(params: Params):
    """Closed form of -Pi grad H for Dyon3D (same result as the generic path):
    dq/dt = p/mu, dp_a/dt = -dH/dq_a + s eps_abc p_b q_c / (mu |q|^3)."""
    mu, alpha, s = params.mu, params.alpha, params.s

    def f(x):
        q1, q2, q3, p1, p2, p3 = x
        r2 = q1 * q1 + q2 * q2 + q3 * q3
        r = math.sqrt(r2)
        r3 = r2 * r
        c = s * s / (mu * r2 * r2) - alpha / r3
        k = s / (mu * r3)
        return np.array([
            p1 / mu, p2 / mu, p3 / mu,
            c * q1 + k * (p2 * q3 - p3 * q2),
            c * q2 + k * (p3 * q1 - p1 * q3),
            c * q3 + k * (p1 * q2 - p2 * q1),
        ])

    return f


def _top_field(params: Params, signature: Signature):
    """Closed form of -Pi grad H for H = eps D^2 |w|^2, D = 1 + eps |p|^2:
    dp/dt = -dH/dw and dw/dt = dH/dp - i kappa dH/dwbar with
    kappa = 2 eps (s/m) g(p)."""
    eps = signature.eps
    s_over_m = params.s / params.m
    m = params.m

    def f(x):
        pr, pi_, wr, wi = x
        D = 1 + eps * (pr * pr + pi_ * pi_)
        w2 = wr * wr + wi * wi
        kappa = 2 * eps * s_over_m * m / (D * D)
        # real gradient of H
        g0, g1 = 4 * D * w2 * pr, 4 * D * w2 * pi_
        g2, g3 = 2 * eps * D * D * wr, 2 * eps * D * D * wi
        return np.array([
            -0.5 * g2, 0.5 * g3,
            0.5 * g0 + 0.5 * kappa * g3,
            -0.5 * g1 - 0.5 * kappa * g2,
        ])

    return f


# ---------------------------------------------------------------------------
# integrators

def _strang_step(system: HamiltonianSystem, x, dt):
    P = system.structure.tensor(x)
    x = x - 0.5 * dt * (P @ system.potential.gradient(x))
    x = x - dt * (P @ system.kinetic.gradient(x))
    return x - 0.5 * dt * (P @ system.potential.gradient(x))


def _midpoint_step(system: HamiltonianSystem, x, dt, tol, max_iter):
    f = system.vector_field
    X = x + dt * f(x)
    scale = max(1.0, float(np.max(np.abs(x))))
    tol = max(tol, 8 * np.finfo(float).eps) * scale
    prev = math.inf
    for _ in range(max_iter):
        X_new = x + dt * f(0.5 * (x + X))
        delta = float(np.max(np.abs(X_new - X)))
        X = X_new
        if delta <= tol:
            return X
        if delta >= prev:
            break
        prev = delta
    # Newton with a finite-difference Jacobian of the residual
    n = x.size
    for _ in range(max_iter):
        mid = 0.5 * (x + X)
        G = X - x - dt * f(mid)
        Jm = np.empty((n, n))
        for j in range(n):
            h = 1e-7 * max(1.0, abs(mid[j]))
            e = np.zeros(n)
            e[j] = h
            Jm[:, j] = (f(mid + e) - f(mid - e)) / (2 * h)
        step = np.linalg.solve(np.eye(n) - 0.5 * dt * Jm, -G)
        X = X + step
        if float(np.max(np.abs(step))) <= tol:
            return X
    raise ConvergenceError("implicit midpoint solve did not converge")


COLLISION_RATIO = 0.5


def _check(system: HamiltonianSystem, x, t, x_prev=None):
    """Halt on non-finite states and on collisions with the center.

    A collision is a position closer than min_radius, or a step whose
    displacement exceeds COLLISION_RATIO times the distance to the center
    (the step no longer resolves the approach).
    """
    if not np.all(np.isfinite(x)):
        raise ExcludedSetError(f"{system.name}: non-finite state at t = {t:.6g}")
    if system.min_radius:
        k = 3 if system.structure.kind is StructureKind.R3_TWISTED else 2
        r = float(np.linalg.norm(x[:k]))
        if r < system.min_radius:
            raise ExcludedSetError(f"{system.name}: collision with the center at t = {t:.6g}")
        if x_prev is not None:
            r = min(r, float(np.linalg.norm(x_prev[:k])))
            if float(np.linalg.norm(x[:k] - x_prev[:k])) > COLLISION_RATIO * r:
                raise ExcludedSetError(f"{system.name}: near-collision at t = {t:.6g}; the step does not "
                                       "resolve the approach to the center (regularize via the Bohlin map)")


SWITCH_OUT = 1.1


def flow(system: HamiltonianSystem, start: PhaseState, cfg: IntegratorConfig, backward: bool = False) -> Trajectory:
    """Integrate from ``start`` over [0, t_end] with fixed steps of cfg.dt.

    The last step is shortened so the final time is exactly t_end.  With
    ``backward`` the flow runs over [0, -t_end] (times decrease).
    """
    params = system.structure.params
    space = system.space
    sphere = space is Space.SPHERE_CHART0
    if sphere:
        if start.space not in (Space.SPHERE_CHART0, Space.SPHERE_CHART1):
            raise ValidationError(f"{system.name} needs a sphere chart state")
    elif start.space is not space:
        raise ValidationError(f"{system.name} needs a {space.value} state, got {start.space.value}")
    validate(start, params).raise_if_failed()
    if system.min_radius:
        k = 3 if system.structure.kind is StructureKind.R3_TWISTED else 2
        if float(np.linalg.norm(start.real_vector()[:k])) < system.min_radius:
            raise SingularPointError(f"{system.name}: start point at the center")
    method = cfg.method or (Method.SPLIT if system.separable else Method.MIDPOINT)
    if method is Method.SPLIT and not system.separable:
        raise ValidationError(f"{system.name} is not separable; use ImplicitMidpoint")
    x = start.real_vector()
    chart = start.chart
    steps = cfg.step_sizes() * (-1.0 if backward else 1.0)
    t = np.concatenate([[0.0], np.cumsum(steps)])
    n = len(steps)
    xs = np.empty((n + 1, x.size))
    charts = np.zeros(n + 1, dtype=int)
    xs[0], charts[0] = x, chart
    for i in range(1, n + 1):
        x_prev = x
        if method is Method.SPLIT:
            x = _strang_step(system, x, steps[i - 1])
        else:
            x = _midpoint_step(system, x, steps[i - 1], cfg.newton_tol, cfg.newton_max_iter)
        _check(system, x, t[i], x_prev)
        if system.structure.kind is StructureKind.REDUCED_CHART:
            r = math.hypot(x[0], x[1])
            if sphere and r > SWITCH_OUT:
                p, w, chart = reduction.switch_chart(complex(x[0], x[1]), complex(x[2], x[3]), chart, params)
                x = np.array([p.real, p.imag, w.real, w.imag])
            if not sphere and ((params.m < 0) != (r < 1)):
                raise ExcludedSetError(f"{system.name}: left the pseudosphere chart at t = {t[i]:.6g}")
        xs[i], charts[i] = x, chart
    coords = real_to_complex(xs) if start.is_complex else xs
    return Trajectory(t, coords, space, system.name, params, charts)


def oscillator_exact(start: PhaseState, times, params: Params | None = None) -> Trajectory:
    """Closed-form oscillator flow z(t) = z0 cos wt + conj(pi0) sin wt."""
    params = params or Params()
    w = params.omega
    z0, p0 = start.coords
    t = np.asarray(times, dtype=float)
    z = z0 * np.cos(w * t) + np.conj(p0) * np.sin(w * t)
    pb = -z0 * np.sin(w * t) + np.conj(p0) * np.cos(w * t)
    return Trajectory(t, np.column_stack([z, np.conj(pb)]), Space.FLAT_C, "Oscillator2D", params)


# ---------------------------------------------------------------------------
# diagnostics

@dataclass
class DriftReport:
    entries: dict = field(default_factory=dict)

    def max_relative(self) -> float:
        return max((e["relative"] for e in self.entries.values()), default=0.0)

    def to_json(self) -> str:
        return json.dumps(self.entries, sort_keys=True, indent=2)


def _evaluate(obs, traj: Trajectory) -> np.ndarray:
    x = traj.real_vectors()
    if isinstance(obs, ChartedObservable):
        return np.array([obs.for_chart(int(c))(xi) for xi, c in zip(x, traj.charts)])
    return np.array([obs(xi) for xi in x])


def drift_report(traj: Trajectory, observables) -> DriftReport:
    """max |f(x_t) - f(x_0)| per observable; relative = abs / |f(x_0)|, or abs when f(x_0) = 0."""
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    rep = DriftReport()
    for obs in observables:
        v = _evaluate(obs, traj)
        a = float(np.max(np.abs(v - v[0])))
        ref = abs(v[0])
        rep.entries[obs.name] = {"initial": complex(v[0]).real if np.isrealobj(v) else str(v[0]),
                                 "max_abs": a, "relative": a / ref if ref > 0 else a}
    return rep


def _section_points(traj: Trajectory) -> np.ndarray:
    x = traj.real_vectors()
    if traj.space is Space.R3_MONOPOLE:
        return x[:, :3]
    if traj.space is Space.FLAT_C2:
        return x
    return x[:, :2]


def period_estimate(traj: Trajectory) -> float:
    """First return to the hyperplane through the start position orthogonal to
    the initial velocity, refined by a cubic spline root."""
    y = _section_points(traj)
    t = traj.t
    if len(t) < 8:
        raise ValidationError("trajectory too short for a period estimate")
    v0 = (-3 * y[0] + 4 * y[1] - y[2]) / (t[2] - t[0])
    s = (y - y[0]) @ v0
    dist = np.linalg.norm(y - y[0], axis=1)
    diam = float(np.max(dist))
    left = False
    for i in range(1, len(t) - 1):
        if s[i] < 0:
            left = True
        if left and s[i] < 0 <= s[i + 1] and dist[i] < 0.5 * diam:
            lo, hi = max(0, i - 3), min(len(t), i + 5)
            spl = CubicSpline(t[lo:hi], s[lo:hi])
            return float(brentq(spl, t[i], t[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    raise NumericalError("no return to the section within the trajectory horizon")
