"""Scenario configuration files (INI syntax, read with :mod:`configparser`).

Example::

    [model]
    kind = plate              ; plate | beam
    variant = force           ; force | kinematic

    [geometry]
    a = 1.0
    b = 1.0

    [mesh]
    nx = 8
    ny = 8

    [material]
    rigidity = 1.0
    surface_density = 1.0

    [boundary]
    bottom = simply_supported
    right = simply_supported
    top = simply_supported
    left = simply_supported

    [analysis]
    kind = eigen              ; eigen | simulate | verify
    n_modes = 5
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .material import MaterialParams

PLATE_SIDES = ("bottom", "right", "top", "left")
BEAM_ENDS = ("left", "right")
CONDITIONS = ("clamped", "simply_supported", "free", "input")
INPUT_ALIASES = {"input_signal": "input"}
KNOWN = {
    "model": {"kind", "variant", "curvature"},
    "geometry": {"a", "b", "length"},
    "mesh": {"nx", "ny", "n_elements"},
    "material": {"rigidity", "young_modulus", "thickness", "poisson", "surface_density",
                 "flexural_rigidity", "line_density", "damping"},
    "boundary": set(PLATE_SIDES) | set(BEAM_ENDS),
    "input": {"side", "port", "waveform", "amplitude", "angular_frequency"},
    "load": {"gravity", "density"},
    "analysis": {"kind", "n_modes", "method", "integrator", "dt", "n_steps", "initial",
                 "mode", "amplitude", "seed", "record"},
    "output": {"directory", "prefix", "snapshot_nx", "snapshot_ny", "ports"},
}


class ConfigError(ValueError):
    """Invalid scenario file; carries the offending section, key and line."""

    def __init__(self, message: str, section: Optional[str] = None, key: Optional[str] = None,
                 line: Optional[int] = None, path: Optional[str] = None):
        where = []
        if path:
            where.append(str(path))
        if line:
            where.append(f"line {line}")
        if section:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)
        self.section, self.key, self.line = section, key, line


@dataclass(frozen=True)
class InputSpec:
    side: str
    port: str
    waveform: str = "sin"
    amplitude: float = 1.0
    angular_frequency: float = 1.0

    def value(self, t: float) -> float:
        if self.waveform == "constant":
            return self.amplitude
        if self.waveform == "sin":
            return self.amplitude * math.sin(self.angular_frequency * t)
        if self.waveform == "cos":
            return self.amplitude * math.cos(self.angular_frequency * t)
        raise ValueError(f"unknown waveform {self.waveform!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    variant: str
    geometry: tuple[float, ...]
    mesh: tuple[int, ...]
    params: MaterialParams
    boundary: dict = field(default_factory=dict)
    curvature: str = "dq3"
    input: Optional[InputSpec] = None
    gravity: float = 0.0
    load_density: float = 0.0
    analysis: str = "eigen"
    n_modes: int = 5
    eigen_method: str = "auto"
    integrator: str = "implicit_midpoint"
    dt: float = 1e-3
    n_steps: int = 100
    initial: str = "mode"
    initial_mode: int = 1
    initial_amplitude: float = 1.0
    seed: int = 0
    record: tuple[int, ...] = ()
    out_dir: str = "out"
    prefix: str = "scenario"
    snapshot_shape: tuple[int, int] = (21, 21)
    write_ports: bool = True
    source: str = ""

    @property
    def has_load(self) -> bool:
        return self.gravity != 0.0 or self.load_density != 0.0


def _line_of(text: str, section: str, key: Optional[str]) -> Optional[int]:
    cur = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            cur = m.group(1).strip()
            if key is None and cur == section:
                return i
            continue
        if cur == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return i
    return None


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, text: str, path):
        self.p, self.text, self.path = parser, text, path

    def err(self, msg, section, key=None):
        return ConfigError(msg, section, key, _line_of(self.text, section, key), self.path)

    def has(self, section, key):
        return self.p.has_option(section, key)

    def get(self, section, key, default=None, required=False):
        if not self.p.has_option(section, key):
            if required:
                raise self.err(f"missing required key {key!r}", section)
            return default
        return self.p.get(section, key).strip()

    def num(self, section, key, default=None, required=False, kind=float, positive=False, nonneg=False):
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            v = kind(raw)
        except ValueError:
            raise self.err(f"expected {'an integer' if kind is int else 'a number'}, got {raw!r}",
                           section, key) from None
        if positive and not v > 0:
            raise self.err(f"must be > 0, got {raw}", section, key)
        if nonneg and not v >= 0:
            raise self.err(f"must be >= 0, got {raw}", section, key)
        return v

    def choice(self, section, key, options, default=None):
        raw = self.get(section, key, default, required=default is None)
        raw = raw.lower()
        if raw not in options:
            raise self.err(f"{raw!r} is not one of {', '.join(options)}", section, key)
        return raw


def parse_config(text: str, path: Optional[str] = None) -> ScenarioConfig:
    """Validate scenario text and build a :class:`ScenarioConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line=line, path=path) from None
    r = _Reader(parser, text, path)
    for section in parser.sections():
        if section not in KNOWN:
            raise r.err(f"unknown section (expected one of {', '.join(KNOWN)})", section)
        for key in parser.options(section):
            if key not in KNOWN[section] and section != "boundary":
                raise r.err(f"unknown key {key!r}", section, key)

    model = r.choice("model", "kind", ("plate", "beam"))
    variant = r.choice("model", "variant", ("force", "kinematic"), "force")
    curvature = r.choice("model", "curvature", ("dq3", "q2"), "dq3")

    if model == "plate":
        geometry = (r.num("geometry", "a", 1.0, positive=True), r.num("geometry", "b", 1.0, positive=True))
        mesh = (r.num("mesh", "nx", 8, kind=int, positive=True), r.num("mesh", "ny", 8, kind=int, positive=True))
        sides = PLATE_SIDES
    else:
        geometry = (r.num("geometry", "length", 1.0, positive=True),)
        mesh = (r.num("mesh", "n_elements", 16, kind=int, positive=True),)
        sides = BEAM_ENDS

    damping = r.num("material", "damping", 0.0, nonneg=True)
    try:
        if model == "plate":
            mu = r.num("material", "surface_density", 1.0, positive=True)
            nu = r.num("material", "poisson", 0.0)
            if r.has("material", "young_modulus"):
                params = MaterialParams(young_modulus=r.num("material", "young_modulus", positive=True),
                                        poisson=nu, thickness=r.num("material", "thickness", 1.0, positive=True),
                                        surface_density=mu, damping=damping)
            else:
                params = MaterialParams.from_rigidity(r.num("material", "rigidity", 1.0, positive=True),
                                                      mu, nu, damping)
        else:
            params = MaterialParams.beam(r.num("material", "flexural_rigidity", 1.0, positive=True),
                                         r.num("material", "line_density", 1.0, positive=True), damping)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise r.err(str(exc), "material") from None

    boundary = {}
    for key in parser.options("boundary") if parser.has_section("boundary") else []:
        if key not in sides:
            raise r.err(f"side {key!r} does not exist for a {model} (expected {', '.join(sides)})", "boundary", key)
        raw = r.get("boundary", key).lower()
        cond = INPUT_ALIASES.get(raw, raw)
        if cond not in CONDITIONS:
            raise r.err(f"{raw!r} is not one of {', '.join(CONDITIONS + tuple(INPUT_ALIASES))}", "boundary", key)
        boundary[key] = cond
    if model == "plate" and variant == "kinematic":
        for side in PLATE_SIDES:
            boundary.setdefault(side, "clamped")
            if boundary[side] not in ("clamped", "input"):
                raise r.err("kinematic plate supports only clamped or input sides", "boundary", side)

    inp = None
    if parser.has_section("input"):
        side = r.get("input", "side", required=True)
        if side not in sides:
            raise r.err(f"side {side!r} does not exist for a {model}", "input", "side")
        if boundary.get(side) != "input":
            raise r.err(f"side {side!r} must be declared 'input' in [boundary]", "input", "side")
        inp = InputSpec(side=side, port=r.get("input", "port", required=True),
                        waveform=r.choice("input", "waveform", ("sin", "cos", "constant"), "sin"),
                        amplitude=r.num("input", "amplitude", 1.0),
                        angular_frequency=r.num("input", "angular_frequency", 1.0))

    gravity = r.num("load", "gravity", 0.0)
    density = r.num("load", "density", 0.0)
    if (gravity or density) and model != "plate":
        raise r.err("distributed loads are supported for the plate only", "load")

    analysis = r.choice("analysis", "kind", ("eigen", "simulate", "verify"), "eigen")
    dt = r.num("analysis", "dt", 1e-3)
    if analysis == "simulate" and not dt > 0:
        raise r.err(f"must be > 0, got {dt}", "analysis", "dt")
    record_raw = r.get("analysis", "record", "")
    try:
        record = tuple(int(v) for v in record_raw.replace(",", " ").split())
    except ValueError:
        raise r.err(f"expected integers, got {record_raw!r}", "analysis", "record") from None
    snap = (r.num("output", "snapshot_nx", 21, kind=int, positive=True),
            r.num("output", "snapshot_ny", 21 if model == "plate" else 1, kind=int, positive=True))
    return ScenarioConfig(
        model=model, variant=variant, geometry=geometry, mesh=mesh, params=params, boundary=boundary,
        curvature=curvature, input=inp, gravity=gravity, load_density=density, analysis=analysis,
        n_modes=r.num("analysis", "n_modes", 5, kind=int, positive=True),
        eigen_method=r.choice("analysis", "method", ("auto", "reduced", "dense"), "auto"),
        integrator=r.choice("analysis", "integrator", ("implicit_midpoint", "leapfrog"), "implicit_midpoint"),
        dt=dt, n_steps=r.num("analysis", "n_steps", 100, kind=int, nonneg=True),
        initial=r.choice("analysis", "initial", ("zero", "mode", "random"), "mode"),
        initial_mode=r.num("analysis", "mode", 1, kind=int, positive=True),
        initial_amplitude=r.num("analysis", "amplitude", 1.0),
        seed=r.num("analysis", "seed", 0, kind=int), record=record,
        out_dir=r.get("output", "directory", "out"), prefix=r.get("output", "prefix", "scenario"),
        snapshot_shape=snap,
        write_ports=r.choice("output", "ports", ("yes", "no"), "yes") == "yes",
        source=text,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from None
    return parse_config(text, str(path))
