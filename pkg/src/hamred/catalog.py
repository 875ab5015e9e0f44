"""Named algebras: structure plus generators plus relations."""
from __future__ import annotations

from .core import Params, Signature, ValidationError
from .poisson import (
    AlgebraSpec,
    BracketStructure,
    Relation,
    StructureKind,
    coulomb_observables,
    dyon_observables,
    su2_spec,
)
from . import reduction

ALGEBRAS = ("su2", "coulomb", "dyon", "e3", "iso12", "e3_flat", "iso12_flat")


def builtin_algebra(name: str, params: Params | None = None, signature=None):
    """Return (BracketStructure, AlgebraSpec) for a named algebra."""
    params = params or Params()
    name = name.lower()
    if name == "su2":
        return BracketStructure(StructureKind.CANONICAL_COMPLEX, params), su2_spec(params)
    if name == "coulomb":
        g = coulomb_observables(params)
        h = "H_sigma" if "H_sigma" in g else "H_C"
        rels = tuple(Relation((h, k), {}) for k in ("Jt", "Ax", "Ay"))
        return BracketStructure(StructureKind.CANONICAL_COMPLEX, params), AlgebraSpec("coulomb", g, rels)
    if name == "dyon":
        g = dyon_observables(params)
        rels = tuple(Relation(("H", f"J{a}"), {}) for a in (1, 2, 3))
        rels += (
            Relation(("J1", "J2"), {"J3": 1.0}),
            Relation(("J2", "J3"), {"J1": 1.0}),
            Relation(("J3", "J1"), {"J2": 1.0}),
        )
        return BracketStructure(StructureKind.R3_TWISTED, params), AlgebraSpec("dyon", g, rels)
    if name in ("e3", "iso12"):
        sig = Signature.EUCLIDEAN if name == "e3" else Signature.SPLIT
        if signature is not None and Signature(signature) is not sig:
            raise ValidationError(f"{name} fixes the signature to {sig.value}")
        if sig is Signature.SPLIT and params.m > 0:
            params = params.replace(m=-abs(params.m))
        return reduction.reduced_structure(params, sig), reduction.poincare_spec(params, sig)
    if name in ("e3_flat", "iso12_flat"):
        sig = Signature.EUCLIDEAN if name == "e3_flat" else Signature.SPLIT
        return BracketStructure(StructureKind.CANONICAL_C2, params, sig), reduction.flat_poincare_spec(sig)
    raise ValidationError(f"unknown algebra {name!r}; choose from {', '.join(ALGEBRAS)}")
