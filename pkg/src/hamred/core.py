"""Shared value types, parameter records and validation.

Conventions used across the package:

* Units default to hbar = mu = 1.  Electric charge and the speed of light
  are set to 1 as well, so the vortex flux coefficient is sigma*pi*hbar/2.
* A complex coordinate c is stored as the real pair (Re c, Im c).  Real
  coordinate vectors interleave these pairs in the order of ``coords``.
* Poisson brackets put the momentum first: {pi, z} = 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from fractions import Fraction

import numpy as np


class HamredError(Exception):
    """Base class for all package errors."""


class ValidationError(HamredError, ValueError):
    """Input violates a documented invariant (CLI exit code 2)."""


class SingularPointError(ValidationError):
    """Evaluation requested at an excluded point such as the origin."""


class DomainError(ValidationError):
    """Evaluation outside the chart domain."""


class NumericalError(HamredError, RuntimeError):
    """A numerical procedure failed (CLI exit code 3)."""


class ConvergenceError(NumericalError):
    pass


class ExcludedSetError(NumericalError):
    """A trajectory ran into an excluded set (origin, chart boundary)."""


class RefinementNeeded(NumericalError):
    """Estimated discretization error exceeds the requested tolerance."""


class Space(str, Enum):
    FLAT_C = "FlatC"
    FLAT_C2 = "FlatC2"
    R3_MONOPOLE = "R3Monopole"
    SPHERE_CHART0 = "SphereChart0"
    SPHERE_CHART1 = "SphereChart1"
    PSEUDOSPHERE = "Pseudosphere"


class Signature(str, Enum):
    """Signature of the flat metric eta; SPHERE/PSEUDOSPHERE are aliases."""

    EUCLIDEAN = "euclidean"
    SPLIT = "split"
    SPHERE = "euclidean"
    PSEUDOSPHERE = "split"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            key = value.strip().lower()
            for name, member in cls.__members__.items():
                if key == name.lower():
                    return member
        return None

    @property
    def eps(self) -> int:
        """+1 for the sphere, -1 for the pseudosphere (eta_0 = eps, eta_1 = 1)."""
        return 1 if self is Signature.EUCLIDEAN else -1


# number of scalar entries and whether they are complex
_LAYOUT = {
    Space.FLAT_C: (2, True),
    Space.FLAT_C2: (4, True),
    Space.R3_MONOPOLE: (6, False),
    Space.SPHERE_CHART0: (2, True),
    Space.SPHERE_CHART1: (2, True),
    Space.PSEUDOSPHERE: (2, True),
}


def complex_to_real(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    out = np.empty(c.shape[:-1] + (2 * c.shape[-1],))
    out[..., 0::2] = c.real
    out[..., 1::2] = c.imag
    return out


def real_to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def parse_sigma(value) -> float:
    """Accept 0.5, "1/2" or "0.5"."""
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


@dataclass(frozen=True)
class Params:
    mu: float = 1.0
    omega: float = 1.0
    alpha: float = 1.0
    hbar: float = 1.0
    s: float = 0.0
    m: float = 1.0
    sigma: float = 0.0
    N: int = 2

    def __post_init__(self):
        for name in ("mu", "omega", "hbar"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive and finite, got {v}")
        for name in ("alpha", "s", "m", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        if not 0.0 <= self.sigma < 1.0:
            raise ValidationError(f"sigma must lie in [0, 1), got {self.sigma}")
        k = self.sigma * self.N
        if abs(k - round(k)) > 1e-9:
            raise ValidationError(f"sigma*N must be an integer (sigma={self.sigma}, N={self.N})")

    def replace(self, **changes) -> "Params":
        d = asdict(self)
        d.update(changes)
        return Params(**d)

    def require_reduced(self):
        if self.m == 0:
            raise ValidationError("m must be nonzero for a reduced sphere/pseudosphere system")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown parameter fields: {sorted(unknown)}")
        d = dict(d)
        if "sigma" in d:
            d["sigma"] = parse_sigma(d["sigma"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Params":
        return cls.from_dict(json.loads(text))


PARAMS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Params",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mu": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "omega": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "alpha": {"type": "number", "default": 1.0},
        "hbar": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "s": {"type": "number", "default": 0.0},
        "m": {"type": "number", "default": 1.0},
        "sigma": {"type": ["number", "string"], "default": 0.0},
        "N": {"type": "integer", "minimum": 1, "default": 2},
    },
}


@dataclass(frozen=True)
class PhaseState:
    """A point of one of the phase spaces.

    coords layout:
      FlatC          (q, p)                complex; q is z or w, p is pi or p
      FlatC2         (pi0, pi1, om0, om1)  complex
      R3Monopole     (q1, q2, q3, p1, p2, p3) real
      Sphere/Pseudo  (p, w)                complex chart coordinates
    """

    space: Space
    coords: tuple
    chart: int = 0

    def __post_init__(self):
        space = Space(self.space)
        object.__setattr__(self, "space", space)
        n, is_complex = _LAYOUT[space]
        c = tuple(complex(v) if is_complex else float(v) for v in self.coords)
        if len(c) != n:
            raise ValidationError(f"{space.value} expects {n} coordinates, got {len(c)}")
        object.__setattr__(self, "coords", c)
        if self.chart not in (0, 1):
            raise ValidationError("chart must be 0 or 1")
        if space is Space.SPHERE_CHART1 and self.chart != 1:
            object.__setattr__(self, "chart", 1)

    @property
    def is_complex(self) -> bool:
        return _LAYOUT[self.space][1]

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex if self.is_complex else float)

    def real_vector(self) -> np.ndarray:
        if self.is_complex:
            return complex_to_real(self.array())
        return self.array()

    @classmethod
    def from_real(cls, space, x, chart: int = 0) -> "PhaseState":
        space = Space(space)
        x = np.asarray(x, dtype=float)
        coords = real_to_complex(x) if _LAYOUT[space][1] else x
        return cls(space, tuple(coords.tolist()), chart)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    margin: float
    coords: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_failed(self):
        if self.violations:
            v = self.violations[0]
            cls = SingularPointError if v.code.endswith("origin excluded") else DomainError
            raise cls(f"{v.code}: {v.message}")


def _is_finite(state: PhaseState) -> bool:
    return bool(np.all(np.isfinite(state.real_vector())))


def validate(state: PhaseState, params: Params | None = None, for_transform: bool = False) -> ValidationReport:
    """Check the invariants of ``state``; never raises."""
    params = params or Params()
    out = []
    c = state.coords
    if not _is_finite(state):
        out.append(Violation("non-finite", "coordinates must be finite", math.nan, c))
    space = state.space
    if space is Space.R3_MONOPOLE:
        r = math.sqrt(sum(v * v for v in c[:3]))
        if r == 0.0:
            out.append(Violation("origin excluded", "the twist term is singular at q = 0", r, c))
    elif space is Space.FLAT_C and for_transform:
        if c[0] == 0:
            out.append(Violation("origin excluded", "the canonical map is singular at z = 0", 0.0, c))
    elif space is Space.FLAT_C2:
        if c[0] == 0 and c[1] == 0:
            out.append(Violation("origin excluded", "pi = 0 has no reduced image", 0.0, c))
    elif space is Space.PSEUDOSPHERE:
        r = abs(c[0])
        if params.m < 0 and not r < 1:
            out.append(Violation("outside Poincare disk", "m < 0 requires |p| < 1", 1 - r, c))
        elif params.m > 0 and not r > 1:
            out.append(Violation("inside Poincare disk", "m > 0 requires |p| > 1", r - 1, c))
        elif params.m == 0:
            out.append(Violation("m zero", "reduced systems require m != 0", 0.0, c))
    elif space in (Space.SPHERE_CHART0, Space.SPHERE_CHART1):
        if params.m == 0:
            out.append(Violation("m zero", "reduced systems require m != 0", 0.0, c))
    return ValidationReport(tuple(out))


def pp_plus(p, signature: Signature):
    """p p^+ with p^+ = conj(p) on the sphere and -conj(p) on the pseudosphere."""
    return Signature(signature).eps * (p * np.conj(p)).real


def metric_g(p, signature: Signature, m: float):
    """Conformal factor m / (1 + p p^+)**2 of the reduced Kahler metric."""
    d = 1.0 + pp_plus(p, signature)
    if np.any(d == 0):
        raise DomainError("metric evaluated on the pseudosphere boundary 1 + p p^+ = 0")
    return m / d**2
