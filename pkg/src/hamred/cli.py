"""Command-line entry point.

    hamred orbit | transform | winding | bracket-check | reduce | spectrum

Exit status: 0 success, 2 invalid input, 3 numerical failure.  Errors are
reported as one JSON object on stderr.  Settings resolve in the order
built-in defaults < ``--config`` file < command-line flags.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, dynamics, reduction, spectra, transforms
from .catalog import ALGEBRAS, builtin_algebra
from .core import HamredError, NumericalError, Params, PhaseState, Signature, Space, ValidationError, parse_sigma
from .poisson import audit_algebra
from .svg import Panel, emit_svg, render
from .trajectory import Trajectory

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

PARAM_KEYS = ("mu", "omega", "alpha", "hbar", "s", "m", "sigma", "N")

CONSTRUCTIONS = {
    "canonical brackets, twisted brackets, algebra audits": "hamred.poisson, hamred.catalog",
    "oscillator, Coulomb, vortex, dyon and monopole-top flows": "hamred.dynamics",
    "z -> z^N maps, Zhukovski ellipses, winding numbers": "hamred.transforms",
    "reduction of C^2 by P and J, gauge potentials, spin admissibility": "hamred.reduction",
    "oscillator and vortex spectra, radial oracle": "hamred.spectra",
}

DEFAULTS = {
    "orbit": {"system": "Oscillator2D", "z0": None, "pi0": None, "q0": None, "p0": None, "w0": None,
              "dt": 1e-3, "t_end": 2 * math.pi, "method": None, "output": None, "format": "csv"},
    "transform": {"map": "bohlin", "N": None, "input": None, "direction": "forward", "branch": 0,
                  "reparametrize": False, "kepler": False, "zhukovski": None, "samples": 400,
                  "output": None, "format": "csv"},
    "winding": {"input": None, "center": "0,0", "zhukovski": None, "map": None, "N": None,
                "samples": 400, "closed_tol": 1e-3, "output": None, "format": "json"},
    "bracket-check": {"algebra": "su2", "points": 200, "seed": 0, "fd": False, "tol": 1e-8,
                      "signature": None, "output": None, "format": "json"},
    "reduce": {"space": "euclidean", "samples": 200, "seed": 0, "gauge": "plus", "tol": 1e-7,
               "output": None, "format": "json"},
    "spectrum": {"sigma": "0", "nr_max": 3, "m_max": 3, "oracle": False, "as_printed": False,
                 "tol": 5e-3, "output": None, "format": "json"},
}


class CliError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# ---------------------------------------------------------------------------
# value parsing

def parse_complex(text) -> complex:
    """'re,im' (or a bare real) -> complex."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise ValidationError(f"cannot parse complex value {text!r}; use re,im") from None
    if len(vals) == 1:
        return complex(vals[0], 0.0)
    if len(vals) != 2:
        raise ValidationError(f"complex values take the form re,im; got {text!r}")
    return complex(*vals)


def parse_vector(text, n: int = 3) -> np.ndarray:
    vals = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        out = np.array([float(v) for v in vals])
    except ValueError:
        raise ValidationError(f"cannot parse vector {text!r}") from None
    if out.size != n:
        raise ValidationError(f"expected {n} comma-separated numbers, got {text!r}")
    return out


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    ap = _Parser(prog="hamred", description=__doc__.splitlines()[0], argument_default=S)
    ap.add_argument("--about", action="store_true", help="print version and module map")
    ap.add_argument("--config", help="JSON file with settings; flags override it")
    sub = ap.add_subparsers(dest="verb", parser_class=_Parser)

    def common(p, formats):
        p.add_argument("--config", help="JSON file with settings; flags override it")
        for k in ("mu", "omega", "alpha", "hbar", "s", "m"):
            p.add_argument(f"--{k}", type=float)
        p.add_argument("--sigma", type=str)
        p.add_argument("--N", type=int)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=formats)

    p = sub.add_parser("orbit", help="integrate a named system", argument_default=S)
    common(p, ("csv", "json", "svg"))
    p.add_argument("--system")
    p.add_argument("--z0", help="FlatC position re,im (oscillator, Coulomb, vortex)")
    p.add_argument("--pi0", help="FlatC momentum re,im")
    p.add_argument("--w0", help="Coulomb position re,im, or sphere fibre coordinate re,im")
    p.add_argument("--p0", help="momentum: re,im (Coulomb, sphere chart) or x,y,z (dyon)")
    p.add_argument("--q0", help="dyon position x,y,z")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--method", choices=[m.value for m in dynamics.Method])

    p = sub.add_parser("transform", help="apply a z -> z^N map to a trajectory", argument_default=S)
    common(p, ("csv", "json", "svg"))
    p.add_argument("--map", choices=("bohlin", "zn"))
    p.add_argument("--input", "-i")
    p.add_argument("--zhukovski", type=float, help="use the Zhukovski ellipse with this |u| as input")
    p.add_argument("--samples", type=int)
    p.add_argument("--direction", choices=("forward", "inverse"))
    p.add_argument("--branch", type=int)
    p.add_argument("--reparametrize", action="store_true")
    p.add_argument("--kepler", action="store_true", help="rescale the Bohlin image to Coulomb units")

    p = sub.add_parser("winding", help="winding number of a closed curve", argument_default=S)
    common(p, ("json",))
    p.add_argument("--input", "-i")
    p.add_argument("--center")
    p.add_argument("--zhukovski", type=float)
    p.add_argument("--map", choices=("bohlin", "zn"))
    p.add_argument("--samples", type=int)
    p.add_argument("--closed-tol", dest="closed_tol", type=float)

    p = sub.add_parser("bracket-check", help="audit the relations of a named algebra", argument_default=S)
    common(p, ("json",))
    p.add_argument("--algebra", choices=ALGEBRAS)
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--fd", action="store_true", help="finite-difference gradients")
    p.add_argument("--tol", type=float)
    p.add_argument("--signature", choices=("euclidean", "split"))

    p = sub.add_parser("reduce", help="audit the reduced sphere/pseudosphere system", argument_default=S)
    common(p, ("json",))
    p.add_argument("--space", choices=("euclidean", "split", "sphere", "pseudosphere"))
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gauge", choices=("plus", "minus", "mean"))
    p.add_argument("--tol", type=float)

    p = sub.add_parser("spectrum", help="vortex-Coulomb spectrum", argument_default=S)
    common(p, ("json", "csv"))
    p.add_argument("--nr-max", dest="nr_max", type=int)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--as-printed", dest="as_printed", action="store_true")
    p.add_argument("--tol", type=float)
    p.add_argument("--json", dest="format", action="store_const", const="json")
    p.add_argument("--csv", dest="format", action="store_const", const="csv")
    return ap


def resolve_config(verb: str, ns: argparse.Namespace) -> dict:
    """defaults < config file < flags.  Returns {"verb", "params", "options"}."""
    flags = {k: v for k, v in vars(ns).items() if k not in ("verb", "config", "about")}
    file_cfg = {}
    if getattr(ns, "config", None):
        try:
            file_cfg = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ValidationError("config must be a JSON object")
        if file_cfg.get("verb", verb) != verb:
            raise ValidationError(f"config is for verb {file_cfg['verb']!r}, not {verb!r}")
    params = dict(Params().to_dict())
    options = dict(DEFAULTS[verb])
    file_params = dict(file_cfg.get("params", {}))
    for k, v in file_cfg.get("options", {}).items():
        if k in PARAM_KEYS and k not in options:
            file_params[k] = v
        else:
            options[k] = v
    for k, v in file_cfg.items():
        if k in ("verb", "params", "options"):
            continue
        if k in PARAM_KEYS and k not in options:
            file_params[k] = v
        elif k in options:
            options[k] = v
        else:
            raise ValidationError(f"unknown config key {k!r} for verb {verb!r}")
    params.update(file_params)
    for k, v in flags.items():
        if k in options:
            options[k] = v
        elif k in PARAM_KEYS:
            params[k] = v
    if verb == "spectrum" and "sigma" in flags:
        options["sigma"] = flags["sigma"]
        params["sigma"] = 0.0
    elif verb == "spectrum" and "sigma" in file_params:
        options["sigma"] = file_params["sigma"]
        params["sigma"] = 0.0
    if options.get("N") is not None:
        params["N"] = options["N"]
    unknown = set(params) - set(PARAM_KEYS)
    if unknown:
        raise ValidationError(f"unknown parameter fields: {sorted(unknown)}")
    resolved = Params.from_dict(params)
    return {"verb": verb, "version": __version__, "params": resolved.to_dict(), "options": options}


# ---------------------------------------------------------------------------
# output

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _emit(text: str, output) -> None:
    if output:
        path = Path(output)
        if path.parent and not path.parent.exists():
            raise ValidationError(f"output directory {path.parent} does not exist")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_traj(path, params: Params) -> Trajectory:
    if not path:
        raise ValidationError("--input is required")
    try:
        return Trajectory.read_csv(path, params)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# verbs

def _start_state(system: dynamics.SystemName, o: dict, params: Params) -> PhaseState:
    def need(*keys):
        for k in keys:
            if o.get(k) is None:
                raise ValidationError(f"{system.value} needs --{k.replace('_', '-')}")

    S = dynamics.SystemName
    if system is S.OSCILLATOR2D:
        need("z0", "pi0")
        return PhaseState(Space.FLAT_C, (parse_complex(o["z0"]), parse_complex(o["pi0"])))
    if system in (S.COULOMB2D, S.VORTEX2D):
        q = o.get("w0") if o.get("w0") is not None else o.get("z0")
        mom = o.get("p0") if o.get("p0") is not None else o.get("pi0")
        if q is None or mom is None:
            raise ValidationError(f"{system.value} needs --w0 and --p0 (re,im)")
        return PhaseState(Space.FLAT_C, (parse_complex(q), parse_complex(mom)))
    if system is S.DYON3D:
        need("q0", "p0")
        return PhaseState(Space.R3_MONOPOLE, tuple(parse_vector(o["q0"])) + tuple(parse_vector(o["p0"])))
    need("p0", "w0")
    space = Space.SPHERE_CHART0 if system is S.SPHERE_MONOPOLE else Space.PSEUDOSPHERE
    return PhaseState(space, (parse_complex(o["p0"]), parse_complex(o["w0"])))


def run_orbit(cfg: dict) -> str:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    system = dynamics.make_system(o["system"], params)
    start = _start_state(dynamics.SystemName(o["system"]), o, params)
    icfg = dynamics.IntegratorConfig(method=o["method"], dt=o["dt"], t_end=o["t_end"])
    traj = dynamics.flow(system, start, icfg)
    if o["format"] == "csv":
        return traj.to_csv()
    if o["format"] == "svg":
        return emit_svg(traj, markers=[(0j, "0")])
    obs = (system.h,) + tuple(system.conserved)
    drift = dynamics.drift_report(traj, obs)
    end = traj.real_vectors()[-1]
    return dumps({"config": cfg, "samples": len(traj), "t_final": float(traj.t[-1]),
                  "final_state": end, "closure": float(np.linalg.norm(end - traj.real_vectors()[0])),
                  "charts_visited": sorted(set(int(c) for c in traj.charts)), "drift": drift.entries})


def _cmap(o: dict, params: Params) -> transforms.CanonicalMap:
    kind = (o.get("map") or "bohlin").lower()
    if kind == "bohlin":
        return transforms.CanonicalMap(transforms.MapKind.BOHLIN, 2, o.get("direction", "forward"),
                                       o.get("branch", 0))
    N = o.get("N") or params.N
    return transforms.CanonicalMap.zn(int(N), o.get("direction", "forward"), o.get("branch", 0))


def _source(o: dict, params: Params) -> Trajectory:
    if o.get("zhukovski") is not None:
        if o.get("input"):
            raise ValidationError("give either --input or --zhukovski, not both")
        return transforms.zhukovski_ellipse(o["zhukovski"], o["samples"], params.omega)
    return _read_traj(o.get("input"), params)


def run_transform(cfg: dict) -> str:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    src = _source(o, params)
    cmap = _cmap(o, params)
    if o["kepler"]:
        if cmap.N != 2 or cmap.direction != "forward":
            raise ValidationError("--kepler applies to the forward Bohlin map")
        out = transforms.kepler_image(src) if o["reparametrize"] else \
            transforms.rescale_kepler(transforms.map_trajectory(cmap, src), params, time=False)
    else:
        out = transforms.map_trajectory(cmap, src, reparametrize=o["reparametrize"])
    if o["format"] == "csv":
        return out.to_csv()
    if o["format"] == "svg":
        panels = [Panel("source", (src.position,), ((0j, "0"),)),
                  Panel(f"image ({cmap.kind.value}, N={cmap.N})", (out.position,), ((0j, "0"),))]
        return render(panels)
    return dumps({"config": cfg, "samples": len(out), "t_final": float(out.t[-1]),
                  "image_energy": transforms.oscillator_energy(src) if o["kepler"] else None})


def run_winding(cfg: dict) -> str:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    curve = _source(o, params)
    if o.get("map"):
        curve = transforms.map_trajectory(_cmap(o, params), curve)
    center = parse_complex(o["center"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        k = transforms.winding_number(curve, center, o["closed_tol"])
    orientation = "counterclockwise" if k > 0 else "clockwise" if k < 0 else "none"
    return dumps({"config": cfg, "winding": k, "turns": abs(k), "orientation": orientation,
                  "center": center, "samples": len(curve),
                  "warnings": [str(w.message) for w in caught]})


def run_bracket_check(cfg: dict) -> tuple:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    if o["algebra"] in ("e3", "iso12") and params.m == 0:
        raise ValidationError("reduced algebras need m != 0")
    structure, spec = builtin_algebra(o["algebra"], params, o.get("signature"))
    rep = audit_algebra(structure, spec, o["points"], o["seed"], fd=o["fd"])
    ok = rep.passed(o["tol"])
    body = {"config": cfg, "passed": ok, "tol": o["tol"], "report": rep.to_dict()}
    return dumps(body), ok


def run_reduce(cfg: dict) -> tuple:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    sig = Signature(o["space"])
    params.require_reduced()
    if sig is Signature.SPLIT and params.m > 0:
        raise ValidationError("the split reduction needs m < 0 for the disk chart (|p| < 1)")
    name = "e3" if sig is Signature.EUCLIDEAN else "iso12"
    structure, spec = builtin_algebra(name, params, sig)
    audit = audit_algebra(structure, spec, o["samples"], o["seed"], fd=True)
    ids = reduction.identity_audit(params, sig, o["samples"], o["seed"])
    gauge = reduction.GaugeChoice(o["gauge"])
    loops = []
    for center, radius in ((0j, 0.5), (0j, 2.0), (1 + 1j, 0.3)):
        if sig is Signature.SPLIT and abs(center) + radius >= 1:
            continue
        val = reduction.loop_integral(reduction.GaugeChoice.MINUS, params, center, radius, signature=sig,
                                      minus=reduction.GaugeChoice.PLUS)
        loops.append({"center": center, "radius": radius, "integral": val,
                      "in_flux_units": val / (2 * math.pi)})
    gauge_info = {"gauge": gauge.value, "difference_loops": loops,
                  "admissibility": vars(reduction.spin_quantization_check(params.s, sig, gauge))}
    if sig is Signature.EUCLIDEAN:
        flux = reduction.total_sphere_flux(params)
        gauge_info["total_flux"] = flux
        gauge_info["monopole_flux"] = reduction.monopole_flux(params.s)
    tol = o["tol"]
    ok = audit.passed(tol) and max(ids["max_rel"].values()) < 1e-9
    body = {"config": cfg, "passed": ok, "algebra": audit.to_dict(), "identities": ids, "gauge": gauge_info}
    return dumps(body), ok


def run_spectrum(cfg: dict) -> str:
    o, params = cfg["options"], Params.from_dict(cfg["params"])
    sigma = parse_sigma(o["sigma"])
    lines = spectra.vortex_levels(sigma, o["nr_max"], o["m_max"], params, as_printed=o["as_printed"])
    oracle = {}
    if o["oracle"]:
        for m in sorted({l.m_sigma for l in lines}, key=lambda v: (abs(v), -v)):
            n = 1 + max(l.Nr for l in lines if l.m_sigma == m)
            oracle[m] = spectra.radial_oracle(sigma, m, n, params=params, tol=o["tol"])
    rows = []
    for l in lines:
        eo = float(oracle[l.m_sigma][l.Nr]) if oracle else None
        rel = abs(l.energy - eo) / abs(eo) if oracle else None
        rows.append({"Nr": l.Nr, "m_sigma": l.m_sigma, "E_formula": l.energy, "E_oracle": eo, "rel_err": rel,
                     "degeneracy_tag": l.degeneracy_tag})
    if o["format"] == "csv":
        out = ["Nr,m_sigma,E_formula,E_oracle,rel_err"]
        for r in rows:
            cells = [str(r["Nr"]), format(r["m_sigma"], ".17g"), format(r["E_formula"], ".17g"),
                     "" if r["E_oracle"] is None else format(r["E_oracle"], ".17g"),
                     "" if r["rel_err"] is None else format(r["rel_err"], ".17g")]
            out.append(",".join(cells))
        return "\n".join(out) + "\n"
    degs = spectra.degeneracies(lines)
    return dumps({"config": cfg, "sigma": sigma, "prefactor": 1.0 if o["as_printed"] else 0.5,
                  "levels": rows, "degeneracies": {format(k, "g"): v for k, v in degs.items()},
                  "aharonov_bohm": spectra.aharonov_bohm_shift(sigma, params).to_dict()})


RUNNERS = {"orbit": run_orbit, "transform": run_transform, "winding": run_winding,
           "bracket-check": run_bracket_check, "reduce": run_reduce, "spectrum": run_spectrum}


def about() -> str:
    return dumps({"name": "hamred", "version": __version__, "verbs": sorted(RUNNERS),
                  "exit_codes": {"0": "success", "2": "invalid input", "3": "numerical failure"},
                  "constructions": CONSTRUCTIONS})


def _error(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if getattr(ns, "about", False):
            sys.stdout.write(about())
            return EXIT_OK
        if not getattr(ns, "verb", None):
            raise CliError(f"a verb is required: {', '.join(RUNNERS)}")
        cfg = resolve_config(ns.verb, ns)
        result = RUNNERS[ns.verb](cfg)
        text, ok = result if isinstance(result, tuple) else (result, True)
        _emit(text, cfg["options"].get("output"))
        if not ok:
            return _error(EXIT_NUMERICAL, NumericalError(f"{ns.verb}: audit residuals exceed tolerance"))
        return EXIT_OK
    except NumericalError as exc:
        return _error(EXIT_NUMERICAL, exc)
    except (HamredError, ValueError, KeyError, TypeError) as exc:
        return _error(EXIT_INVALID, exc)


if __name__ == "__main__":
    sys.exit(main())
