"""Oscillator and vortex-Coulomb spectra with an independent radial oracle.

The vortex spectrum is

    E(N_r, m_sigma) = -C mu alpha^2 / (hbar^2 (N_r + |m_sigma| + 1/2)^2),

with angular numbers m_sigma = j + sigma, j integer.  The constant C = 1/2
follows from the oscillator spectrum E_osc = hbar omega (2 N_r + |M| + 1)
through |M| = 2|m_sigma|, alpha = E_osc/4 and level energy -mu omega^2/8;
``as_printed=True`` switches to C = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import Params, RefinementNeeded, ValidationError, parse_sigma

C_DERIVED = 0.5
C_PRINTED = 1.0


@dataclass(frozen=True)
class SpectralLine:
    Nr: int
    m_sigma: float
    energy: float
    degeneracy_tag: int = 0

    @property
    def principal(self) -> float:
        return self.Nr + abs(self.m_sigma) + 0.5


@dataclass(frozen=True)
class OscillatorLevel:
    Nr: int
    M: int
    E: float


def oscillator_levels(Nr_max: int, M_max: int, params: Params | None = None) -> list:
    """All (N_r, M, E) with N_r <= Nr_max, |M| <= M_max, E = hbar omega (2 N_r + |M| + 1)."""
    params = params or Params()
    if Nr_max < 0 or M_max < 0:
        raise ValidationError("bounds must be >= 0")
    hw = params.hbar * params.omega
    out = [OscillatorLevel(n, M, hw * (2 * n + abs(M) + 1))
           for n in range(Nr_max + 1) for M in range(-M_max, M_max + 1)]
    return sorted(out, key=lambda l: (l.E, l.Nr, l.M))


def angular_family(sigma: float, k_max: int) -> list:
    """m_sigma = j + sigma for the integers j with |j + sigma| <= k_max + sigma,
    ordered by |m_sigma| then sign."""
    sigma = parse_sigma(sigma)
    if not 0 <= sigma < 1:
        raise ValidationError("sigma must lie in [0, 1)")
    vals = {j + sigma for j in range(-k_max - 1, k_max + 1) if abs(j + sigma) <= k_max + sigma + 1e-12}
    return sorted(vals, key=lambda m: (abs(m), -m))


def vortex_energy(Nr: int, m_sigma: float, params: Params | None = None, as_printed: bool = False) -> float:
    params = params or Params()
    C = C_PRINTED if as_printed else C_DERIVED
    n = Nr + abs(m_sigma) + 0.5
    return -C * params.mu * params.alpha**2 / (params.hbar**2 * n * n)


def vortex_levels(sigma, Nr_max: int, m_max: int, params: Params | None = None, as_printed: bool = False,
                  max_principal: float | None = None) -> list:
    """Bound states for N_r <= Nr_max and |m_sigma| <= m_max + sigma.

    ``max_principal`` further restricts to N_r + |m_sigma| <= max_principal.
    degeneracy_tag numbers the states sharing one energy (0, 1, ...).
    """
    sigma = parse_sigma(sigma)
    params = params or Params()
    lines = []
    for m in angular_family(sigma, m_max):
        for n in range(Nr_max + 1):
            if max_principal is not None and n + abs(m) > max_principal + 1e-12:
                continue
            lines.append((n, m, vortex_energy(n, m, params, as_printed)))
    lines.sort(key=lambda l: (round(l[0] + abs(l[1]), 9), l[0], -l[1]))
    out, tag, prev = [], 0, None
    for n, m, e in lines:
        key = round(n + abs(m), 9)
        tag = tag + 1 if key == prev else 0
        prev = key
        out.append(SpectralLine(n, m, e, tag))
    return out


def degeneracies(lines) -> dict:
    """Map N_r + |m_sigma| -> number of states."""
    out = {}
    for l in lines:
        key = round(l.Nr + abs(l.m_sigma), 9)
        out[key] = out.get(key, 0) + 1
    return out


def oscillator_to_vortex(level: OscillatorLevel) -> tuple:
    """(sigma, N_r, m_sigma) of the vortex state paired with an oscillator level.

    |M| = 2|m_sigma| with the sign of M kept; even |M| lands in sigma = 0,
    odd |M| in sigma = 1/2.
    """
    sigma = 0.0 if level.M % 2 == 0 else 0.5
    return sigma, level.Nr, level.M / 2


# ---------------------------------------------------------------------------
# radial oracle

class GridScheme(str, Enum):
    UNIFORM = "Uniform"
    STRETCHED = "Stretched"


@dataclass(frozen=True)
class RadialGrid:
    """Radial grid on (0, r_max].

    STRETCHED uses r = x^2 with x cell-centred and uniform, which keeps the
    scheme second order even for |m_sigma| = 1/2 where u ~ r^{1/2} is not
    smooth in r.  UNIFORM is cell-centred in r.
    """

    r_max: float
    n_points: int = 1000
    scheme: GridScheme = GridScheme.STRETCHED

    def __post_init__(self):
        object.__setattr__(self, "scheme", GridScheme(self.scheme))
        if not self.r_max > 0:
            raise ValidationError("r_max must be positive")
        if self.n_points < 100:
            raise ValidationError("n_points must be >= 100")

    @classmethod
    def for_levels(cls, n_levels: int, m_sigma: float, params: Params | None = None, n_points: int = 1000,
                   scheme=GridScheme.STRETCHED) -> "RadialGrid":
        """r_max = 20 hbar^2 (n_levels + |m_sigma| + 1)^2 / (mu alpha)."""
        params = params or Params()
        a0 = params.hbar**2 / (params.mu * params.alpha)
        return cls(20 * a0 * (n_levels + abs(m_sigma) + 1) ** 2, n_points, scheme)


def _eigs_stretched(m, n, r_max, N, params):
    k = params.hbar**2 / (2 * params.mu)
    h = math.sqrt(r_max) / N
    x = (np.arange(1, N + 1) - 0.5) * h
    xp, xm = x + h / 2, x - h / 2
    # -k (x R')' + (4 k m^2 / x - 4 alpha x) R = 4 E x^3 R, zero flux at x = 0
    diag = k * (xp + xm) / h**2 + 4 * k * m * m / x - 4 * params.alpha * x
    diag[0] -= k * xm[0] / h**2
    off = -k * xp[:-1] / h**2
    wgt = 4 * x**3
    d = diag / wgt
    e = off / np.sqrt(wgt[:-1] * wgt[1:])
    return eigh_tridiagonal(d, e, select="i", select_range=(0, n - 1), eigvals_only=True)


def _eigs_uniform(m, n, r_max, N, params):
    k = params.hbar**2 / (2 * params.mu)
    h = r_max / N
    r = (np.arange(1, N + 1) - 0.5) * h
    rp, rm = r + h / 2, r - h / 2
    # -k (r R')' / r + (k m^2 / r^2 - alpha / r) R = E R, zero flux at r = 0
    diag = k * (rp + rm) / (h**2 * r) + k * m * m / r**2 - params.alpha / r
    diag[0] -= k * rm[0] / (h**2 * r[0])
    off = -k * rp[:-1] / h**2
    e = off / np.sqrt(r[:-1] * r[1:])
    return eigh_tridiagonal(diag, e, select="i", select_range=(0, n - 1), eigvals_only=True)


@dataclass(frozen=True)
class OracleResult:
    energies: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    error_estimate: np.ndarray


def radial_oracle(sigma, m_sigma: float, n_levels: int, grid: RadialGrid | None = None,
                  params: Params | None = None, tol: float = 1e-3, detail: bool = False):
    """Lowest ``n_levels`` radial energies for angular number m_sigma.

    Solves -hbar^2/(2 mu) (R'' + R'/r - m_sigma^2 R / r^2) - alpha R / r = E R
    by finite differences on two grids (N and 2N cells) and Richardson
    extrapolation (4 E_fine - E_coarse)/3.  Raises RefinementNeeded when the
    estimated relative error |E_fine - E_coarse| / |E| exceeds ``tol``.
    """
    sigma = parse_sigma(sigma)
    params = params or Params()
    if n_levels < 1:
        raise ValidationError("n_levels must be >= 1")
    if abs((m_sigma - sigma) - round(m_sigma - sigma)) > 1e-9:
        raise ValidationError(f"m_sigma = {m_sigma} is not of the form j + {sigma}")
    if not params.alpha > 0:
        raise ValidationError("bound states need alpha > 0")
    grid = grid or RadialGrid.for_levels(n_levels, m_sigma, params)
    a0 = params.hbar**2 / (params.mu * params.alpha)
    if grid.r_max < 20 * a0 * (n_levels + 1) ** 2:
        raise ValidationError("r_max does not resolve the Coulomb length scale")
    solver = _eigs_stretched if grid.scheme is GridScheme.STRETCHED else _eigs_uniform
    coarse = solver(m_sigma, n_levels, grid.r_max, grid.n_points, params)
    fine = solver(m_sigma, n_levels, grid.r_max, 2 * grid.n_points, params)
    extra = (4 * fine - coarse) / 3
    err = np.abs(fine - coarse) / np.abs(extra)
    if np.any(extra >= 0):
        raise RefinementNeeded("grid does not hold the requested number of bound states")
    if np.any(err > tol):
        raise RefinementNeeded(f"discretization error estimate {err.max():.3g} exceeds tol {tol:g}")
    if detail:
        return OracleResult(extra, coarse, fine, err)
    return extra


# ---------------------------------------------------------------------------
# Z_N splitting and the Aharonov-Bohm reading

@dataclass(frozen=True)
class AngularFamily:
    N: int
    index: int
    sigma: float

    def values(self, k_max: int = 3) -> list:
        return angular_family(self.sigma, k_max)

    def contains(self, m: float) -> bool:
        return abs((m - self.sigma) - round(m - self.sigma)) < 1e-12


def zn_split(N: int, sigma_index: int) -> AngularFamily:
    """Sector ``sigma_index`` of the Z_N reduction: sigma = index/N and
    m_sigma = M/N for oscillator angular momenta M = index (mod N)."""
    if int(N) != N or N < 1:
        raise ValidationError("N must be a positive integer")
    if not 0 <= sigma_index < N:
        raise ValidationError(f"sigma_index must lie in 0..{N - 1}")
    return AngularFamily(int(N), int(sigma_index), float(Fraction(sigma_index, N)))


@dataclass(frozen=True)
class AharonovBohmShift:
    sigma: float
    flux: float
    ground_energy: float
    ground_multiplet: tuple
    spin: float

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "flux": self.flux, "ground_energy": self.ground_energy,
                "ground_multiplet": list(self.ground_multiplet), "spin": self.spin}


def aharonov_bohm_shift(sigma, params: Params | None = None) -> AharonovBohmShift:
    """The spectrum depends on sigma through |m_sigma| = |j + sigma| only.

    flux is sigma pi hbar / 2 (e = c = 1).  The ground energy uses the
    smallest |m_sigma|, min(sigma, 1 - sigma), so it is continuous, even
    under sigma -> 1 - sigma and periodic under sigma -> sigma + 1.
    ``spin`` is the smallest |m_sigma|, 1/2 for the half-integer family.
    """
    sigma = parse_sigma(sigma)
    params = params or Params()
    frac = sigma - math.floor(sigma)
    mmin = min(frac, 1 - frac)
    cands = sorted({frac, frac - 1}, key=lambda m: (abs(m), -m))
    ground = tuple(m for m in cands if abs(abs(m) - mmin) < 1e-12)
    return AharonovBohmShift(
        sigma=sigma,
        flux=sigma * math.pi * params.hbar / 2,
        ground_energy=vortex_energy(0, mmin, params),
        ground_multiplet=ground,
        spin=mmin,
    )
