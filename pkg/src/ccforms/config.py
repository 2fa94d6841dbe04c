"""JSON run configuration with field-level diagnostics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CCFormsError, ConfigError
from .geodesics import GeodesicSpec
from .model_space import SpaceForm
from .stability import Window, default_window
from .surfaces import (AngleFunction, build_helicoid, build_pole_surface, build_sphere,
                       build_strip)

SURFACE_TYPES = ("helicoid", "vertical", "plane", "sphere", "strip")


@dataclass(frozen=True)
class Tolerances:
    ode: float = 1e-11
    quadrature: float = 1e-6
    identity: float = 1e-6


@dataclass(frozen=True)
class Outputs:
    mesh: str = "surface.obj"
    csv: str = "vertices.csv"
    report: str = "report.json"
    polyline: str = "geodesic.csv"


@dataclass(frozen=True)
class GeodesicConfig:
    base: tuple
    phi0: float
    lam: float
    s_range: tuple = (-5.0, 5.0)
    n: int = 101


@dataclass(frozen=True)
class RunConfig:
    kappa: int
    surface: dict = None
    geodesic: GeodesicConfig = None
    grid: dict = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    outputs: Outputs = field(default_factory=Outputs)
    projection: str = "stereographic"
    seed: int = 0
    n_test_functions: int = 5
    n_jacobi_points: int = 20

    @property
    def sf(self):
        return SpaceForm(self.kappa)

    def build_surface(self):
        if self.surface is None:
            raise ConfigError("surface: section missing")
        try:
            return _build_surface(self.sf, self.surface)
        except ConfigError:
            raise
        except CCFormsError as exc:
            raise ConfigError(f"surface: {exc}") from None

    def window(self, surf):
        if self.grid is None:
            return default_window(surf)
        g = self.grid
        return Window(tuple(g["eps_range"]), tuple(g["s_range"]), g["n_eps"], g["n_s"])

    def geodesic_spec(self):
        g = self.geodesic
        try:
            return GeodesicSpec(self.sf, np.array(g.base, dtype=float), g.phi0, g.lam)
        except CCFormsError as exc:
            raise ConfigError(f"geodesic.base: {exc}") from None


def _angle(sf, d, path):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = d.get("kind")
    params = d.get("params", {})
    of = d.get("of", "sigma")
    if kind not in ("linear", "arctan", "spline"):
        raise ConfigError(f"{path}.kind: expected linear|arctan|spline, got {kind!r}")
    if of not in ("sigma", "theta"):
        raise ConfigError(f"{path}.of: expected sigma|theta, got {of!r}")
    if not isinstance(params, dict):
        raise ConfigError(f"{path}.params: expected an object")
    allowed = {"linear": {"slope", "offset"}, "arctan": {"scale", "offset", "amplitude"},
               "spline": {"knots", "values"}}[kind]
    extra = set(params) - allowed
    if extra:
        raise ConfigError(f"{path}.params: unknown keys {sorted(extra)} for kind {kind}")
    try:
        if kind == "linear":
            return AngleFunction.linear(_num(params.get("slope", 0.0), f"{path}.params.slope"),
                                        _num(params.get("offset", 0.0), f"{path}.params.offset"), of)
        if kind == "arctan":
            return AngleFunction.arctan(_num(params.get("scale", 1.0), f"{path}.params.scale"),
                                        _num(params.get("offset", 0.0), f"{path}.params.offset"),
                                        _num(params.get("amplitude", 1.0), f"{path}.params.amplitude"), of)
        return AngleFunction.spline(params.get("knots", []), params.get("values", []), of)
    except ConfigError:
        raise
    except (CCFormsError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.params: {exc}") from None


def _build_surface(sf, d):
    t = d["type"]
    lam = d["lambda"]
    if t == "helicoid":
        ang = _angle(sf, d.get("sigma"), "surface.sigma")
        return build_helicoid(sf, lam, sigma=ang) if ang.of == "sigma" else build_helicoid(sf, lam, theta=ang)
    if t == "vertical":
        slope = 1.0 if sf.kappa == 1 else 0.0
        return build_helicoid(sf, lam, theta=AngleFunction.linear(slope, d.get("theta0", 0.0)))
    pole = d.get("pole")
    pole = None if pole is None else np.array(pole, dtype=float)
    if t == "plane":
        return build_pole_surface(sf, lam, pole)
    if t == "sphere":
        return build_sphere(sf, lam, pole)
    g = d["generator"]
    spec = GeodesicSpec(sf, np.array(g["base"], dtype=float), g.get("phi0", 0.0), g["mu"])
    return build_strip(sf, lam, spec)


def _num(x, path, positive=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{path}: expected a finite number, got {x!r}")
    if positive and not x > 0:
        raise ConfigError(f"{path}: must be > 0")
    return float(x)


def _int(x, path, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{path}: expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    return x


def _range(x, path):
    if not isinstance(x, list) or len(x) != 2:
        raise ConfigError(f"{path}: expected [lo, hi]")
    lo, hi = _num(x[0], f"{path}[0]"), _num(x[1], f"{path}[1]")
    if lo > hi:
        raise ConfigError(f"{path}: lo > hi")
    return (lo, hi)


def _point(x, path, dim):
    if not isinstance(x, list) or len(x) != dim:
        raise ConfigError(f"{path}: expected {dim} coordinates")
    return tuple(_num(c, f"{path}[{i}]") for i, c in enumerate(x))


def parse_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    known = {"kappa", "surface", "geodesic", "grid", "tolerances", "outputs", "projection", "seed",
             "n_test_functions", "n_jacobi_points"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"top level: unknown keys {sorted(extra)}")
    if "kappa" not in doc:
        raise ConfigError("kappa: missing")
    kappa = doc["kappa"]
    if isinstance(kappa, bool) or kappa not in (-1, 0, 1):
        raise ConfigError(f"kappa: expected -1, 0 or 1, got {kappa!r}")
    dim = 4 if kappa == 1 else 3

    surface = doc.get("surface")
    if surface is not None:
        if not isinstance(surface, dict):
            raise ConfigError("surface: expected an object")
        t = surface.get("type")
        if t not in SURFACE_TYPES:
            raise ConfigError(f"surface.type: expected one of {SURFACE_TYPES}, got {t!r}")
        surface = dict(surface)
        surface["lambda"] = _num(surface.get("lambda", 0.0), "surface.lambda")
        if t == "helicoid" and "sigma" not in surface:
            raise ConfigError("surface.sigma: required for helicoids")
        if "pole" in surface:
            surface["pole"] = list(_point(surface["pole"], "surface.pole", dim))
        if t == "vertical":
            surface["theta0"] = _num(surface.get("theta0", 0.0), "surface.theta0")
        if t == "strip":
            g = surface.get("generator")
            if not isinstance(g, dict):
                raise ConfigError("surface.generator: required object for strips")
            surface["generator"] = {"base": list(_point(g.get("base"), "surface.generator.base", dim)),
                                    "phi0": _num(g.get("phi0", 0.0), "surface.generator.phi0"),
                                    "mu": _num(g.get("mu", 0.0), "surface.generator.mu")}

    geo = doc.get("geodesic")
    if geo is not None:
        if not isinstance(geo, dict):
            raise ConfigError("geodesic: expected an object")
        geo = GeodesicConfig(_point(geo.get("base"), "geodesic.base", dim),
                             _num(geo.get("phi0", 0.0), "geodesic.phi0"),
                             _num(geo.get("lambda", 0.0), "geodesic.lambda"),
                             _range(geo.get("s_range", [-5.0, 5.0]), "geodesic.s_range"),
                             _int(geo.get("n", 101), "geodesic.n", 2))

    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            raise ConfigError("grid: expected an object")
        grid = {"eps_range": _range(grid.get("eps_range"), "grid.eps_range"),
                "s_range": _range(grid.get("s_range"), "grid.s_range"),
                "n_eps": _int(grid.get("n_eps"), "grid.n_eps", 2),
                "n_s": _int(grid.get("n_s"), "grid.n_s", 2)}

    tol = doc.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances: expected an object")
    tol = Tolerances(**{k: _num(tol[k], f"tolerances.{k}", positive=True) for k in ("ode", "quadrature", "identity")
                        if k in tol}) if set(tol) <= {"ode", "quadrature", "identity"} else _bad_keys(tol, "tolerances")

    out = doc.get("outputs", {})
    if not isinstance(out, dict) or not set(out) <= {"mesh", "csv", "report", "polyline"}:
        raise ConfigError("outputs: expected an object with keys mesh, csv, report, polyline")
    for k, v in out.items():
        if not isinstance(v, str) or not v:
            raise ConfigError(f"outputs.{k}: expected a file name")
    proj = doc.get("projection", "stereographic")
    if proj not in ("stereographic", "raw"):
        raise ConfigError(f"projection: expected stereographic|raw, got {proj!r}")
    cfg = RunConfig(kappa, surface, geo, grid, tol, Outputs(**out), proj,
                    _int(doc.get("seed", 0), "seed", 0),
                    _int(doc.get("n_test_functions", 5), "n_test_functions", 0),
                    _int(doc.get("n_jacobi_points", 20), "n_jacobi_points", 0))
    if surface is not None:
        cfg.build_surface()  # surface-level validation errors surface here
    return cfg


def _bad_keys(d, path):
    raise ConfigError(f"{path}: unknown keys {sorted(set(d) - {'ode', 'quadrature', 'identity'})}")


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)
