"""Poisson brackets on the canonical, twisted and reduced phase spaces.

Every structure is represented by a real antisymmetric Poisson tensor
Pi(x) acting on the real coordinate vector x (see ``core.PhaseState``), so

    {f, g}(x) = grad f(x) . Pi(x) . grad g(x).

Complex observables have complex gradients and the bracket is extended by
bilinearity.  Hamilton's equations read  dx/dt = {H, x} = -Pi(x) grad H(x).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .core import (
    DomainError,
    NumericalError,
    Params,
    PhaseState,
    Signature,
    Space,
    ValidationError,
    metric_g,
)

EPS3 = np.zeros((3, 3, 3))
EPS3[0, 1, 2] = EPS3[1, 2, 0] = EPS3[2, 0, 1] = 1.0
EPS3[0, 2, 1] = EPS3[2, 1, 0] = EPS3[1, 0, 2] = -1.0


class StructureKind(str, Enum):
    CANONICAL_COMPLEX = "CanonicalComplex"
    CANONICAL_C2 = "CanonicalC2"
    R3_TWISTED = "R3Twisted"
    REDUCED_CHART = "ReducedChart"


def _canonical_block(n_complex: int, pairs) -> np.ndarray:
    """Poisson tensor for complex pairs (momentum slot, coordinate slot).

    {xi, eta} = 1 for xi = a + ib, eta = c + id means {a, c} = 1/2 and
    {b, d} = -1/2; the conjugate sector then follows automatically.
    """
    P = np.zeros((2 * n_complex, 2 * n_complex))
    for k_mom, k_pos in pairs:
        a, b = 2 * k_mom, 2 * k_mom + 1
        c, d = 2 * k_pos, 2 * k_pos + 1
        P[a, c], P[c, a] = 0.5, -0.5
        P[b, d], P[d, b] = -0.5, 0.5
    return P


_FLAT_C = _canonical_block(2, [(1, 0)])         # (q, p): {p, q} = 1
_FLAT_C2 = _canonical_block(4, [(0, 2), (1, 3)])  # {pi^a, om_a} = 1
_REDUCED = _canonical_block(2, [(0, 1)])         # (p, w): {p, w} = 1
_R3 = np.zeros((6, 6))
_R3[3:, :3] = np.eye(3)                          # {p_a, q_b} = delta
_R3[:3, 3:] = -np.eye(3)


@dataclass(frozen=True)
class BracketStructure:
    """One of the fixed Poisson structures.

    R3Twisted: {p_a, q_b} = delta_ab, {p_a, p_b} = -s eps_abc q^c / rho^3 with
    rho = |q| (euclidean) or the signed Lorentzian norm sign(m) sqrt(q.q)
    (split, q.q taken with diag(1,-1,-1)).

    ReducedChart: {p, w} = 1, {p, p_bar} = 0 and {w, w_bar} = i kappa with
    kappa = 2 eps (s/m) g(p).
    """

    kind: StructureKind
    params: Params = field(default_factory=Params)
    signature: Signature = Signature.EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "kind", StructureKind(self.kind))
        object.__setattr__(self, "signature", Signature(self.signature))
        if self.kind is StructureKind.REDUCED_CHART:
            self.params.require_reduced()

    @property
    def space(self) -> Space:
        if self.kind is StructureKind.CANONICAL_COMPLEX:
            return Space.FLAT_C
        if self.kind is StructureKind.CANONICAL_C2:
            return Space.FLAT_C2
        if self.kind is StructureKind.R3_TWISTED:
            return Space.R3_MONOPOLE
        return Space.SPHERE_CHART0 if self.signature is Signature.EUCLIDEAN else Space.PSEUDOSPHERE

    @property
    def dim(self) -> int:
        return {StructureKind.CANONICAL_C2: 8, StructureKind.R3_TWISTED: 6}.get(self.kind, 4)

    def twist_kappa(self, p: complex) -> float:
        """Coefficient kappa of {w, w_bar} = i kappa in the reduced chart."""
        prm = self.params
        return 2.0 * self.signature.eps * prm.s / prm.m * metric_g(p, self.signature, prm.m)

    def r3_norm(self, q) -> float:
        if self.signature is Signature.EUCLIDEAN:
            return math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2)
        qq = q[0] ** 2 - q[1] ** 2 - q[2] ** 2
        return math.copysign(math.sqrt(abs(qq)), self.params.m)

    def tensor(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is StructureKind.CANONICAL_COMPLEX:
            return _FLAT_C
        if kind is StructureKind.CANONICAL_C2:
            return _FLAT_C2
        if kind is StructureKind.R3_TWISTED:
            rho = self.r3_norm(x[:3])
            if rho == 0:
                raise DomainError("twisted bracket evaluated at q = 0")
            P = _R3.copy()
            if self.params.s != 0:
                P[3:, 3:] = -self.params.s * np.einsum("abc,c->ab", EPS3, x[:3]) / rho**3
            return P
        P = _REDUCED.copy()
        kappa = self.twist_kappa(complex(x[0], x[1]))
        P[2, 3], P[3, 2] = -0.5 * kappa, 0.5 * kappa
        return P

    def vector_field(self, h: "Observable", x) -> np.ndarray:
        """dx/dt = {h, x}."""
        return -self.tensor(x) @ h.gradient(x).real


@dataclass(frozen=True)
class Observable:
    """A scalar function of the real coordinate vector.

    ``grad`` (optional) returns the gradient with respect to the real
    coordinates; it is complex for complex-valued observables.
    """

    name: str
    fn: Callable
    grad: Callable | None = None

    def __call__(self, x):
        if isinstance(x, PhaseState):
            x = x.real_vector()
        return self.fn(np.asarray(x, dtype=float))

    def gradient(self, x, fd: bool = False, richardson: bool = False) -> np.ndarray:
        if isinstance(x, PhaseState):
            x = x.real_vector()
        x = np.asarray(x, dtype=float)
        if self.grad is not None and not fd:
            return np.asarray(self.grad(x))
        return fd_gradient(self.fn, x, richardson=richardson)

    def without_grad(self) -> "Observable":
        return Observable(self.name, self.fn)

    def __mul__(self, other: "Observable") -> "Observable":
        f, g = self, other
        grad = None
        if f.grad is not None and g.grad is not None:
            grad = lambda x: f.fn(x) * np.asarray(g.grad(x)) + g.fn(x) * np.asarray(f.grad(x))  # noqa: E731
        return Observable(f"({f.name})*({g.name})", lambda x: f.fn(x) * g.fn(x), grad)

    def __add__(self, other: "Observable") -> "Observable":
        f, g = self, other
        grad = None
        if f.grad is not None and g.grad is not None:
            grad = lambda x: np.asarray(f.grad(x)) + np.asarray(g.grad(x))  # noqa: E731
        return Observable(f"({f.name})+({g.name})", lambda x: f.fn(x) + g.fn(x), grad)

    def scaled(self, c) -> "Observable":
        f = self
        grad = None if f.grad is None else (lambda x: c * np.asarray(f.grad(x)))
        return Observable(f"{c}*({f.name})", lambda x: c * f.fn(x), grad)


def fd_gradient(fn, x, richardson: bool = False) -> np.ndarray:
    """Central differences with h_i = 1e-5 max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    f0 = fn(x)
    out = np.zeros(x.size, dtype=complex if np.iscomplexobj(f0) else float)

    def central(i, h):
        e = np.zeros_like(x)
        e[i] = h
        return (fn(x + e) - fn(x - e)) / (2 * h)

    for i in range(x.size):
        h = 1e-5 * max(1.0, abs(x[i]))
        d = central(i, h)
        if richardson:
            d = (4 * central(i, h / 2) - d) / 3
        out[i] = d
    if not np.all(np.isfinite(out)):
        raise NumericalError("finite-difference gradient is not finite")
    return out


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def coordinate(structure_or_space, index: int, part: str = "complex") -> Observable:
    """Coordinate function: the complex slot ``index`` (or its real/imag part,
    or conjugate), or a real coordinate for R3."""
    space = structure_or_space.space if isinstance(structure_or_space, BracketStructure) else Space(structure_or_space)
    if space is Space.R3_MONOPOLE:
        n = 6
        e = np.zeros(n)
        e[index] = 1.0
        return Observable(f"x{index}", lambda x: x[index], lambda x: e)
    n = {Space.FLAT_C2: 8}.get(space, 4)
    re, im = np.zeros(n), np.zeros(n)
    re[2 * index], im[2 * index + 1] = 1.0, 1.0
    if part == "complex":
        return Observable(f"c{index}", lambda x: complex(x[2 * index], x[2 * index + 1]), lambda x: re + 1j * im)
    if part == "conj":
        return Observable(f"c{index}*", lambda x: complex(x[2 * index], -x[2 * index + 1]), lambda x: re - 1j * im)
    if part == "re":
        return Observable(f"Re c{index}", lambda x: x[2 * index], lambda x: re)
    if part == "im":
        return Observable(f"Im c{index}", lambda x: x[2 * index + 1], lambda x: im)
    raise ValueError(part)


def bracket(structure: BracketStructure, f: Observable, g: Observable, at, fd: bool = False, richardson: bool = False):
    """{f, g} at ``at`` (PhaseState or real vector).

    Evaluated as (df Pi dg - dg Pi df)/2 so antisymmetry holds exactly in
    floating point, in particular {f, f} = 0.
    """
    x = at.real_vector() if isinstance(at, PhaseState) else np.asarray(at, dtype=float)
    gf = f.gradient(x, fd=fd, richardson=richardson)
    gg = g.gradient(x, fd=fd, richardson=richardson)
    P = structure.tensor(x)
    val = 0.5 * (gf @ P @ gg - gg @ P @ gf)
    if not np.isfinite(val):
        raise NumericalError(f"bracket {{{f.name}, {g.name}}} is not finite")
    return _scalar(val)


def jacobiator(structure: BracketStructure, x, h: float = 1e-5) -> np.ndarray:
    """Cyclic sum Pi^il d_l Pi^jk + Pi^jl d_l Pi^ki + Pi^kl d_l Pi^ij."""
    x = np.asarray(x, dtype=float)
    n = x.size
    P = structure.tensor(x)
    dP = np.empty((n, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = h * max(1.0, abs(x[l]))
        dP[l] = (structure.tensor(x + e) - structure.tensor(x - e)) / (2 * e[l])
    t = np.einsum("il,ljk->ijk", P, dP)
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


# ---------------------------------------------------------------------------
# algebra specs and audits

@dataclass(frozen=True)
class Relation:
    lhs: tuple
    rhs: dict
    label: str = ""

    def describe(self) -> str:
        if self.label:
            return self.label
        terms = " + ".join(f"({c})*{n}" for n, c in self.rhs.items()) or "0"
        return f"{{{self.lhs[0]},{self.lhs[1]}}} = {terms}"


@dataclass(frozen=True)
class AlgebraSpec:
    name: str
    generators: dict
    relations: tuple

    def __post_init__(self):
        for r in self.relations:
            names = set(r.lhs) | set(r.rhs)
            missing = names - set(self.generators)
            if missing:
                raise ValidationError(f"relation {r.describe()} references undeclared generators {sorted(missing)}")


@dataclass
class RelationResult:
    relation: str
    max_abs: float
    max_rel: float
    worst_point: list
    n_points: int


@dataclass
class AuditReport:
    """Residuals per relation.  rel = |lhs - rhs| / max(1, |rhs|)."""

    name: str
    structure: str
    signature: str
    n_points: int
    seed: int
    gradients: str
    results: list = field(default_factory=list)

    @property
    def max_abs(self) -> float:
        return max((r.max_abs for r in self.results), default=0.0)

    @property
    def max_rel(self) -> float:
        return max((r.max_rel for r in self.results), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max_rel < tol

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "structure": self.structure,
            "signature": self.signature,
            "n_points": self.n_points,
            "seed": self.seed,
            "gradients": self.gradients,
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "relations": [r.__dict__ for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _default_accept(structure: BracketStructure, x: np.ndarray) -> bool:
    kind = structure.kind
    if kind is StructureKind.CANONICAL_COMPLEX:
        return math.hypot(x[0], x[1]) > 0.1
    if kind is StructureKind.CANONICAL_C2:
        a, b = math.hypot(x[0], x[1]), math.hypot(x[2], x[3])
        if structure.signature is Signature.SPLIT:
            return abs(a - b) > 0.1
        return math.hypot(a, b) > 0.1
    if kind is StructureKind.R3_TWISTED:
        return np.linalg.norm(x[:3]) > 0.1
    r = math.hypot(x[0], x[1])
    if structure.signature is Signature.SPLIT:
        return r < 0.9 if structure.params.m < 0 else r > 1.1
    return True


def sample_points(structure: BracketStructure, n_points: int, seed: int, radius: float = 2.0,
                  accept=None, max_tries: int = 1000) -> list:
    """Uniform samples from the radius-2 ball, rejecting invalid points.

    Point i uses its own generator seeded by (seed, i), so each sample is
    independent of how many draws the others needed.
    """
    if n_points < 1:
        raise ValidationError("n_points must be >= 1")
    accept = accept or (lambda x: _default_accept(structure, x))
    d = structure.dim
    pts = []
    for i in range(n_points):
        rng = np.random.default_rng([seed, i])
        for _ in range(max_tries):
            v = rng.standard_normal(d)
            x = radius * rng.random() ** (1.0 / d) * v / np.linalg.norm(v)
            if accept(x):
                pts.append(x)
                break
        else:
            raise DomainError(f"no valid sample for point {i} after {max_tries} tries")
    return pts


def _residuals(lhs_fn, rhs_fn, points):
    worst_abs, worst_rel, worst = 0.0, 0.0, None
    for x in points:
        lhs, rhs = lhs_fn(x), rhs_fn(x)
        a = abs(lhs - rhs)
        r = a / max(1.0, abs(rhs))
        if not math.isfinite(a):
            raise NumericalError("non-finite residual")
        if r >= worst_rel:
            worst_rel, worst = r, x
        worst_abs = max(worst_abs, a)
    return worst_abs, worst_rel, [float(v) for v in worst]


def audit_algebra(structure: BracketStructure, spec: AlgebraSpec, n_points: int = 200, seed: int = 0,
                  fd: bool = False, richardson: bool = True, points=None) -> AuditReport:
    """Evaluate every relation {a, b} = sum_c k_c c at sampled points."""
    points = points if points is not None else sample_points(structure, n_points, seed)
    gens = spec.generators
    report = AuditReport(spec.name, structure.kind.value, structure.signature.value, len(points), seed,
                         "finite-difference" if fd else "analytic")
    for rel in spec.relations:
        f, g = gens[rel.lhs[0]], gens[rel.lhs[1]]

        def lhs(x, f=f, g=g):
            return bracket(structure, f, g, x, fd=fd, richardson=richardson)

        def rhs(x, rel=rel):
            return sum(complex(c) * gens[n](x) for n, c in rel.rhs.items()) if rel.rhs else 0.0

        a, r, w = _residuals(lhs, rhs, points)
        report.results.append(RelationResult(rel.describe(), a, r, w, len(points)))
    return report


def check_conserved(structure: BracketStructure, h: Observable, f: Observable, n_points: int = 200,
                    seed: int = 0, fd: bool = False, points=None) -> AuditReport:
    """max |{h, f}| over sampled points."""
    spec = AlgebraSpec(f"conserved:{f.name}", {h.name: h, f.name: f}, (Relation((h.name, f.name), {}),))
    if h.name == f.name:
        spec = AlgebraSpec(f"conserved:{f.name}", {h.name: h}, (Relation((h.name, h.name), {}),))
    return audit_algebra(structure, spec, n_points, seed, fd=fd, points=points)


# ---------------------------------------------------------------------------
# observables of the flat systems

def _wirtinger(*pairs) -> np.ndarray:
    """Real gradient from Wirtinger derivatives (d_c f, d_cbar f) per slot."""
    out = []
    for d, db in pairs:
        out += [d + db, 1j * (d - db)]
    return np.array(out)


def oscillator_observables(params: Params) -> dict:
    """H_osc, J, I+ and I- (plus real parts I1, I2) on FlatC (z, pi).

    With {pi, z} = 1 the integral conserved by H_osc = w (pi pibar + z zbar) is
    I+ = w (pi^2 + zbar^2); it obeys {I+, J} = 2i I+, {I-, J} = -2i I-,
    {I+, I-} = -4i w^2 J.
    """
    w = params.omega

    def H(x):
        return w * (x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2)

    def H_grad(x):
        return 2 * w * x

    def J(x):
        z, p = complex(x[0], x[1]), complex(x[2], x[3])
        return -2.0 * (p * z).imag

    def J_grad(x):
        z, p = complex(x[0], x[1]), complex(x[2], x[3])
        return _wirtinger((1j * p, -1j * p.conjugate()), (1j * z, -1j * z.conjugate())).real

    def Ip(x):
        z, p = complex(x[0], x[1]), complex(x[2], x[3])
        return w * (p * p + z.conjugate() ** 2)

    def Ip_grad(x):
        z, p = complex(x[0], x[1]), complex(x[2], x[3])
        return _wirtinger((0.0, 2 * w * z.conjugate()), (2 * w * p, 0.0))

    def Im_(x):
        return Ip(x).conjugate()

    def Im_grad(x):
        return Ip_grad(x).conjugate()

    return {
        "H_osc": Observable("H_osc", H, H_grad),
        "J": Observable("J", J, J_grad),
        "I+": Observable("I+", Ip, Ip_grad),
        "I-": Observable("I-", Im_, Im_grad),
        "I1": Observable("I1", lambda x: Ip(x).real, lambda x: Ip_grad(x).real),
        "I2": Observable("I2", lambda x: Ip(x).imag, lambda x: Ip_grad(x).imag),
    }


def su2_spec(params: Params) -> AlgebraSpec:
    w2 = params.omega ** 2
    g = oscillator_observables(params)
    rel = (
        Relation(("I+", "J"), {"I+": 2j}),
        Relation(("I-", "J"), {"I-": -2j}),
        Relation(("I+", "I-"), {"J": -4j * w2}),
        Relation(("I1", "I2"), {"J": 2 * w2}),
        Relation(("I1", "J"), {"I2": -2}),
        Relation(("I2", "J"), {"I1": 2}),
        Relation(("H_osc", "J"), {}),
        Relation(("H_osc", "I+"), {}),
        Relation(("H_osc", "I-"), {}),
    )
    return AlgebraSpec("su2", g, rel)


def coulomb_observables(params: Params, sigma: float | None = None) -> dict:
    """H_C = 2 p pbar / mu - alpha/|w| (+ hbar^2 sigma^2 / (2 mu |w|^2)) on FlatC (w, p).

    With p = (P1 - i P2)/2 the kinetic term is |P|^2 / (2 mu).  Also returns
    the angular momentum Jt = i(w p - wbar pbar) and the Runge-Lenz vector
    A = -i Jt P_c - mu alpha w/|w| with P_c = 2 pbar.
    """
    mu, alpha = params.mu, params.alpha
    sigma = params.sigma if sigma is None else sigma
    c2 = params.hbar ** 2 * sigma ** 2 / (2 * mu)

    def H(x):
        r2 = x[0] ** 2 + x[1] ** 2
        val = 2 * (x[2] ** 2 + x[3] ** 2) / mu - alpha / math.sqrt(r2)
        if c2:
            val = val + c2 / r2
        return val

    def H_grad(x):
        r2 = x[0] ** 2 + x[1] ** 2
        r3 = r2 * math.sqrt(r2)
        g = np.array([alpha * x[0] / r3, alpha * x[1] / r3, 4 * x[2] / mu, 4 * x[3] / mu])
        if c2:
            g[0] -= 2 * c2 * x[0] / r2 ** 2
            g[1] -= 2 * c2 * x[1] / r2 ** 2
        return g

    def L(x):
        w, p = complex(x[0], x[1]), complex(x[2], x[3])
        return -2.0 * (w * p).imag

    def L_grad(x):
        w, p = complex(x[0], x[1]), complex(x[2], x[3])
        return _wirtinger((1j * p, -1j * p.conjugate()), (1j * w, -1j * w.conjugate())).real

    def A(x):
        w, p = complex(x[0], x[1]), complex(x[2], x[3])
        return -1j * L(x) * 2 * p.conjugate() - mu * alpha * w / abs(w)

    name = "H_sigma" if c2 else "H_C"
    return {
        name: Observable(name, H, H_grad),
        "Jt": Observable("Jt", L, L_grad),
        "A": Observable("A", A),
        "Ax": Observable("Ax", lambda x: A(x).real),
        "Ay": Observable("Ay", lambda x: A(x).imag),
    }


def dyon_observables(params: Params) -> dict:
    """Charge-dyon system on R3Twisted with monopole charge s.

    H = p^2/(2 mu) + s^2/(2 mu |q|^2) - alpha/|q|,
    J^a = eps^abc p_b q_c + s q^a/|q|.
    """
    mu, alpha, s = params.mu, params.alpha, params.s

    def H(x):
        q, p = x[:3], x[3:]
        r2 = q @ q
        return p @ p / (2 * mu) + s * s / (2 * mu * r2) - alpha / math.sqrt(r2)

    def H_grad(x):
        q, p = x[:3], x[3:]
        r2 = q @ q
        r = math.sqrt(r2)
        gq = -s * s * q / (mu * r2 * r2) + alpha * q / (r2 * r)
        return np.concatenate([gq, p / mu])

    out = {"H": Observable("H", H, H_grad)}
    for a in range(3):
        def Ja(x, a=a):
            q, p = x[:3], x[3:]
            return EPS3[a] @ q @ p + s * q[a] / math.sqrt(q @ q)

        def Ja_grad(x, a=a):
            q, p = x[:3], x[3:]
            r = math.sqrt(q @ q)
            gq = EPS3[a].T @ p + s * (np.eye(3)[a] / r - q[a] * q / r**3)
            gp = EPS3[a] @ q
            return np.concatenate([gq, gp])

        out[f"J{a + 1}"] = Observable(f"J{a + 1}", Ja, Ja_grad)
    return out


def load_algebra_spec(source, params: Params | None = None, signature=Signature.EUCLIDEAN):
    """Build (structure, AlgebraSpec) from a declarative JSON document.

    Example::

        {"algebra": "su2",
         "relations": [{"lhs": ["I+", "I-"], "rhs": {"J": [0, -4]}, "times": ["omega", "omega"]}]}

    ``algebra`` selects the structure and generator catalog; each rhs
    coefficient is a number or [re, im], optionally multiplied by the named
    Params fields listed in ``times``.  Without ``relations`` the built-in
    relation set is used.
    """
    from .catalog import builtin_algebra

    doc = json.loads(source) if isinstance(source, str) else dict(source)
    params = params or Params()
    if "params" in doc:
        params = params.replace(**doc["params"])
    signature = Signature(doc.get("signature", signature))
    structure, spec = builtin_algebra(doc["algebra"], params, signature)
    if "relations" not in doc:
        return structure, spec
    rels = []
    for item in doc["relations"]:
        scale = 1.0
        for name in item.get("times", []):
            scale *= getattr(params, name)
        rhs = {}
        for gen, c in item.get("rhs", {}).items():
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            rhs[gen] = c * scale
        rels.append(Relation(tuple(item["lhs"]), rhs, item.get("label", "")))
    return structure, AlgebraSpec(doc.get("name", spec.name), spec.generators, tuple(rels))
