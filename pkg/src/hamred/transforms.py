"""The z -> z^N canonical maps, Zhukovski ellipses and winding numbers.

Forward map (oscillator side -> Coulomb side) on FlatC (q, p):

    w = z^N,  p = pi / (N z^(N-1)),

canonical for {pi, z} = 1.  N = 2 is the Bohlin (Levi-Civita) map.

Time law.  For the source Hamiltonian H_a = omega (|pi|^2 + |z|^(2N-2)) at
energy E, the image solves Hamilton's equations of

    K_N = |p|^2 - E/(omega N^2) |w|^b,   b = 2/N - 2,   at K_N = -1/N^2

in the fictitious time tau with dtau/dt = omega N^2 |z|^(2N-2).  For N = 2,
rescaling w' = w/(2 mu omega), p' = 2 mu omega p turns K_2 into
H_C = 2|p'|^2/mu - E/|w'| = 8 mu omega^2 K_2, so the Coulomb image has
alpha = E, energy -2 mu omega^2 and dtau_C/dt = |z|^2 / (2 mu omega).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_simpson

from .core import Params, PhaseState, SingularPointError, Space, ValidationError
from .poisson import Observable
from .trajectory import Trajectory


class MapKind(str, Enum):
    BOHLIN = "Bohlin"
    ZN = "ZN"


@dataclass(frozen=True)
class CanonicalMap:
    kind: MapKind = MapKind.BOHLIN
    N: int = 2
    direction: str = "forward"
    branch: int = 0

    def __post_init__(self):
        kind = MapKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is MapKind.BOHLIN:
            object.__setattr__(self, "N", 2)
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        if self.direction not in ("forward", "inverse"):
            raise ValidationError("direction must be 'forward' or 'inverse'")
        if not 0 <= self.branch < self.N:
            raise ValidationError(f"branch must lie in 0..{self.N - 1}")

    @classmethod
    def zn(cls, N: int, direction: str = "forward", branch: int = 0) -> "CanonicalMap":
        return cls(MapKind.ZN, N, direction, branch)

    def inverse(self) -> "CanonicalMap":
        d = "inverse" if self.direction == "forward" else "forward"
        return CanonicalMap(self.kind, self.N, d, self.branch)


def _forward(z, pi, N):
    return z**N, pi / (N * z ** (N - 1))


def _inverse(w, p, N, branch):
    z = np.abs(w) ** (1.0 / N) * np.exp(1j * (np.angle(w) + 2 * np.pi * branch) / N)
    return z, N * z ** (N - 1) * p


def apply_map(cmap: CanonicalMap, state: PhaseState) -> PhaseState:
    if state.space is not Space.FLAT_C:
        raise ValidationError("canonical maps act on FlatC states")
    q, p = state.coords
    if q == 0:
        raise SingularPointError("the map is singular at the origin")
    if cmap.direction == "forward":
        a, b = _forward(q, p, cmap.N)
    else:
        a, b = _inverse(q, p, cmap.N, cmap.branch)
    return PhaseState(Space.FLAT_C, (complex(a), complex(b)))


def time_factor(cmap: CanonicalMap, z, params: Params):
    """dtau/dt = omega N^2 |z|^(2N-2) evaluated at the source positions z."""
    return params.omega * cmap.N**2 * np.abs(z) ** (2 * cmap.N - 2)


def _cumulative(t, f):
    if len(t) < 3:
        return np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))])
    return cumulative_simpson(f, x=t, initial=0.0)


def _check_avoids_origin(q, rel: float = 1e-9) -> None:
    """Reject samples, or straight segments between samples, that come
    within rel * max|q| of the origin."""
    scale = float(np.max(np.abs(q))) if q.size else 0.0
    tol = rel * scale
    if scale == 0 or np.min(np.abs(q)) <= tol:
        raise SingularPointError("trajectory passes through the origin")
    a, b = q[:-1], q[1:]
    d = b - a
    nd = np.abs(d)
    ok = nd > 0
    s = np.zeros_like(nd)
    s[ok] = -(np.conj(a[ok]) * d[ok]).real / nd[ok] ** 2
    inside = ok & (s > 0) & (s < 1)
    dist = np.abs(a + s * d)
    if np.any(dist[inside] <= tol):
        raise SingularPointError("trajectory passes through the origin between samples")


def map_trajectory(cmap: CanonicalMap, traj: Trajectory, reparametrize: bool = False) -> Trajectory:
    """Pointwise image of a FlatC trajectory.

    The inverse direction follows the continuous root along the trajectory;
    ``branch`` fixes only the first sample.  With ``reparametrize`` the time
    axis becomes the fictitious time tau of the module docstring.
    """
    if traj.space is not Space.FLAT_C:
        raise ValidationError("canonical maps act on FlatC trajectories")
    q, p = traj.coords[:, 0], traj.coords[:, 1]
    _check_avoids_origin(q)
    N = cmap.N
    if cmap.direction == "forward":
        a, b = _forward(q, p, N)
        src = q
    else:
        arg = np.unwrap(np.angle(q)) + 2 * np.pi * cmap.branch
        a = np.abs(q) ** (1.0 / N) * np.exp(1j * arg / N)
        b = N * a ** (N - 1) * p
        src = a
    t = traj.t
    if reparametrize:
        f = time_factor(cmap, src, traj.params)
        if cmap.direction == "inverse":
            f = 1.0 / f
        t = t[0] + _cumulative(traj.t, f)
    label = f"{traj.system}->{cmap.kind.value}{N}.{cmap.direction}"
    return Trajectory(t, np.column_stack([a, b]), Space.FLAT_C, label, traj.params)


def kepler_scale(params: Params) -> float:
    return 2 * params.mu * params.omega


def rescale_kepler(obj, params: Params | None = None, time: bool = True):
    """w -> w / (2 mu omega), p -> 2 mu omega p.

    Accepts a PhaseState or a Trajectory; on a trajectory the time axis is
    divided by 8 mu omega^2 as well (unless ``time`` is False), taking the
    fictitious time of K_2 to the Coulomb time of H_C.
    """
    if isinstance(obj, Trajectory):
        params = params or obj.params
        a = kepler_scale(params)
        coords = np.column_stack([obj.coords[:, 0] / a, obj.coords[:, 1] * a])
        t = obj.t / (8 * params.mu * params.omega**2) if time else obj.t
        return obj.with_(t=t, coords=coords, system=obj.system + "->kepler", params=params)
    params = params or Params()
    a = kepler_scale(params)
    w, p = obj.coords
    return PhaseState(Space.FLAT_C, (w / a, p * a))


def oscillator_energy(traj_or_state, params: Params | None = None) -> float:
    if isinstance(traj_or_state, Trajectory):
        params = params or traj_or_state.params
        c = traj_or_state.coords[0]
    else:
        params = params or Params()
        c = traj_or_state.coords
    return params.omega * (abs(c[0]) ** 2 + abs(c[1]) ** 2)


def kepler_image(traj: Trajectory) -> Trajectory:
    """Oscillator trajectory -> Coulomb trajectory in Coulomb time.

    The returned params carry alpha = E_osc, so ``coulomb_observables`` of
    them gives the matching H_C (value -2 mu omega^2 along the image).
    """
    E = oscillator_energy(traj)
    img = map_trajectory(CanonicalMap(), traj, reparametrize=True)
    out = rescale_kepler(img, traj.params)
    return out.with_(params=traj.params.replace(alpha=E))


def image_hamiltonian(N: int, energy: float, omega: float = 1.0) -> Observable:
    """K_N = |p|^2 - E/(omega N^2) |w|^(2/N - 2) on FlatC (w, p)."""
    c = energy / (omega * N**2)
    b = 2.0 / N - 2.0

    def K(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return x[2] ** 2 + x[3] ** 2 - c * r2 ** (b / 2)

    def K_grad(x):
        r2 = x[0] ** 2 + x[1] ** 2
        f = -c * b * r2 ** (b / 2 - 1)
        return np.array([f * x[0], f * x[1], 2 * x[2], 2 * x[3]])

    return Observable(f"K{N}", K, K_grad)


def source_hamiltonian(N: int, omega: float = 1.0) -> Observable:
    """H_a = omega (|pi|^2 + |z|^(2N-2)); the oscillator for N = 2."""
    a = 2 * N - 2

    def H(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return omega * (x[2] ** 2 + x[3] ** 2 + r2 ** (a / 2))

    def H_grad(x):
        r2 = x[0] ** 2 + x[1] ** 2
        f = omega * a * r2 ** (a / 2 - 1) if a else 0.0
        return np.array([f * x[0], f * x[1], 2 * omega * x[2], 2 * omega * x[3]])

    return Observable(f"H_a{a}", H, H_grad)


def zhukovski_ellipse(u_modulus: float, n_samples: int = 400, omega: float = 1.0, endpoint: bool = True) -> Trajectory:
    """Oscillator orbit z = u + 1/u with u = rho e^{i phi}, t = phi/omega.

    Both terms are harmonic in t, so this is an exact oscillator orbit with
    pi = conj(dz/dt)/omega.  With ``endpoint`` the last sample repeats the
    first (phi = 2 pi), giving a closed curve.
    """
    rho = float(u_modulus)
    if not rho > 0:
        raise ValidationError("u_modulus must be positive")
    if rho == 1:
        raise ValidationError("u_modulus = 1 gives a degenerate segment through the origin")
    if n_samples < 3:
        raise ValidationError("need at least 3 samples")
    phi = np.linspace(0.0, 2 * np.pi, n_samples, endpoint=endpoint)
    u = rho * np.exp(1j * phi)
    z = u + 1 / u
    pi = np.conj(1j * (u - 1 / u))
    return Trajectory(phi / omega, np.column_stack([z, pi]), Space.FLAT_C, "zhukovski", Params(omega=omega))


def winding_number(curve, center: complex = 0j, closed_tol: float = 1e-3) -> int:
    """Total change of arg(curve - center) over 2 pi, rounded.

    ``curve`` is a Trajectory (its position coordinate is used) or a
    complex array.  A gap between the last and first sample up to
    ``closed_tol`` times the curve diameter is bridged by a straight closing
    segment; larger gaps are an error.  The result is reliable when the
    curve stays more than ten steps away from the center; a warning is
    issued otherwise.
    """
    z = curve.position if isinstance(curve, Trajectory) else np.asarray(curve, dtype=complex)
    if z.size < 3:
        raise ValidationError("need at least 3 samples")
    diam = float(np.ptp(z.real) + np.ptp(z.imag))
    gap = abs(z[-1] - z[0])
    if gap > closed_tol * max(diam, 1e-300):
        raise ValidationError(f"curve is not closed (|last - first| = {gap:.3g}, diameter {diam:.3g})")
    if gap > 0:
        z = np.append(z, z[0])
    d = z - center
    if np.any(d == 0):
        raise SingularPointError("a sample coincides with the center")
    step = np.max(np.abs(np.diff(z)))
    if np.min(np.abs(d)) <= 10 * step:
        warnings.warn("curve passes close to the center relative to its sampling; winding may be unreliable")
    total = np.sum(np.angle(d[1:] / d[:-1]))
    return int(round(total / (2 * np.pi)))


def power_duality(a: float) -> tuple:
    """Dual power b with (a + 2)(b + 2) = 4 and the map degree N = 1 + a/2."""
    if not a > -2:
        raise ValidationError("power_duality needs a > -2")
    return 4.0 / (a + 2) - 2.0, 1.0 + a / 2.0


@dataclass(frozen=True)
class EllipseGeometry:
    center: complex
    semi_major: float
    semi_minor: float
    foci: tuple

    @property
    def focal_distance(self) -> float:
        return math.sqrt(max(self.semi_major**2 - self.semi_minor**2, 0.0))


def ellipse_geometry(points) -> EllipseGeometry:
    """Least-squares conic fit a x^2 + b xy + c y^2 + d x + e y = 1."""
    z = np.asarray(points, dtype=complex)
    x, y = z.real, z.imag
    A = np.column_stack([x * x, x * y, y * y, x, y])
    a, b, c, d, e = np.linalg.lstsq(A, np.ones_like(x), rcond=None)[0]
    M = np.array([[a, b / 2], [b / 2, c]])
    ctr = np.linalg.solve(2 * M, [-d, -e])
    k = 1 + ctr @ M @ ctr
    vals, vecs = np.linalg.eigh(M / k)
    if np.any(vals <= 0):
        raise ValidationError("points do not lie on an ellipse")
    axes = 1 / np.sqrt(vals)
    i_major = int(np.argmax(axes))
    major, minor = axes[i_major], axes[1 - i_major]
    direction = complex(*vecs[:, i_major])
    c0 = complex(*ctr)
    f = math.sqrt(max(major**2 - minor**2, 0.0))
    return EllipseGeometry(c0, float(major), float(minor), (c0 + f * direction, c0 - f * direction))
