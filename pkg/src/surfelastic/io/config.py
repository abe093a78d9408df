"""Parameter files.

Grammar (one statement per line, ``#`` starts a comment)::

    file       := { statement }
    statement  := "subsection" NAME | "end" | "set" KEY "=" VALUE
    NAME, KEY  := words separated by single spaces (case-insensitive)

Sections may appear in any order and at most once; keys may appear at most
once per section.  Unknown sections or keys are errors reported with their
line number.  Recognised sections and keys, with defaults:

``Mesh``
    ``file`` (path, relative to the parameter file) *or* ``generator``
    (``box``, ``cook``, ``nanowire``, ``shell cylinder``, ``rough plate``) with
    ``parameters`` (``name=value, name=value``).
``Volume material``
    ``lambda`` (1.5), ``mu`` (1.0).
``Surface material``
    ``lambda`` (0), ``mu`` (0), ``gamma`` (0), ``ratio mode`` (false),
    ``ratio`` (0), ``ramp surface tension`` (false), ``allow nonphysical``
    (false).  In ratio mode ``lambda`` and ``mu`` must not be set and the
    surface moduli are ``ratio`` times the volume moduli, so that
    lambda/mu equals its surface counterpart.
``Boundary conditions``
    ``energetic`` (ids), ``dirichlet`` (``id comps value; ...``, comps from
    ``xyz``), ``traction`` (``id tx ty tz; ...``, per unit reference area),
    ``body force`` (``bx by bz``).
``Time``
    ``steps`` (1), ``end time`` (1.0).
``Solver``
    ``nonlinear tolerance`` (1e-9), ``linear tolerance`` (1e-6), ``linear
    solver`` (``cg`` or ``direct``), ``max newton iterations`` (15), ``linear
    iteration factor`` (10), ``divergence count`` (3), ``threads`` (1),
    ``chunk size`` (1024).
``Output``
    ``directory`` (``output``), ``write vtu`` (true), ``quadrature data``
    (false), ``monitor`` (``x y z; ...`` material points), ``log`` (``run.jsonl``).

Prescribed displacements and tractions are totals reached at the final
step; intermediate steps scale them linearly.
"""

import os
from dataclasses import dataclass, field

from ..errors import ConfigError

__all__ = [
    "RunConfig",
    "MeshConfig",
    "VolumeConfig",
    "SurfaceConfig",
    "BoundaryConfig",
    "TimeConfig",
    "SolverConfig",
    "OutputConfig",
    "DirichletSpec",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "GENERATOR_NAMES",
]

GENERATOR_NAMES = ("box", "cook", "nanowire", "shell cylinder", "rough plate")


@dataclass(frozen=True)
class DirichletSpec:
    boundary_id: int
    components: str
    value: float = 0.0


@dataclass
class MeshConfig:
    file: str = None
    generator: str = None
    parameters: dict = field(default_factory=dict)


@dataclass
class VolumeConfig:
    lam: float = 1.5
    mu: float = 1.0


@dataclass
class SurfaceConfig:
    lam: float = 0.0
    mu: float = 0.0
    gamma: float = 0.0
    ratio_mode: bool = False
    ratio: float = 0.0
    ramp_surface_tension: bool = False
    allow_nonphysical: bool = False


@dataclass
class BoundaryConfig:
    energetic: tuple = ()
    dirichlet: tuple = ()
    traction: tuple = ()          # ((id, (tx, ty, tz)), ...)
    body_force: tuple = None


@dataclass
class TimeConfig:
    steps: int = 1
    end_time: float = 1.0


@dataclass
class SolverConfig:
    tol_nl: float = 1e-9
    tol_lin: float = 1e-6
    linear_solver: str = "cg"
    max_newton: int = 15
    max_lin_factor: int = 10
    divergence_count: int = 3
    threads: int = 1
    chunk_size: int = 1024


@dataclass
class OutputConfig:
    directory: str = "output"
    write_vtu: bool = True
    quadrature_data: bool = False
    monitor: tuple = ()           # ((x, y, z), ...)
    log: str = "run.jsonl"


@dataclass
class RunConfig:
    mesh: MeshConfig = field(default_factory=MeshConfig)
    volume: VolumeConfig = field(default_factory=VolumeConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = field(default=".", compare=False)

    def surface_moduli(self):
        """``(lambda^, mu^)`` after applying ratio mode."""
        s = self.surface
        if s.ratio_mode:
            return s.ratio * self.volume.lam, s.ratio * self.volume.mu
        return s.lam, s.mu

    def mesh_path(self):
        if self.mesh.file is None:
            return None
        return os.path.join(self.base_dir, self.mesh.file)

    def referenced_ids(self):
        b = self.boundary
        ids = set(b.energetic) | {d.boundary_id for d in b.dirichlet} | {t[0] for t in b.traction}
        return sorted(ids)


# ------------------------------------------------------------- value codecs
def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _bool(s):
    t = s.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true/false, got {s!r}")


def _str(s):
    if not s:
        raise ValueError("empty value")
    return s


def _fmt_float(v):
    return repr(float(v))


def _fmt_bool(v):
    return "true" if v else "false"


def _items(s):
    return [p.strip() for p in s.split(";") if p.strip()]


def _ints(s):
    return tuple(_int(t) for t in s.replace(",", " ").split())


def _fmt_ints(v):
    return " ".join(str(i) for i in v)


def _vec3(s):
    t = s.replace(",", " ").split()
    if len(t) != 3:
        raise ValueError(f"expected three numbers, got {s!r}")
    return tuple(float(x) for x in t)


def _fmt_vec3(v):
    return " ".join(_fmt_float(x) for x in v)


def _dirichlet(s):
    out = []
    for item in _items(s):
        t = item.split()
        if len(t) not in (2, 3):
            raise ValueError(f"dirichlet entry {item!r} must be 'id comps [value]'")
        comps = t[1].lower()
        if not comps or any(c not in "xyz" for c in comps) or len(set(comps)) != len(comps):
            raise ValueError(f"invalid components {t[1]!r} (use letters from xyz)")
        out.append(DirichletSpec(_int(t[0]), "".join(sorted(comps)), float(t[2]) if len(t) == 3 else 0.0))
    return tuple(out)


def _fmt_dirichlet(v):
    return "; ".join(f"{d.boundary_id} {d.components} {_fmt_float(d.value)}" for d in v)


def _traction(s):
    out = []
    for item in _items(s):
        t = item.split()
        if len(t) != 4:
            raise ValueError(f"traction entry {item!r} must be 'id tx ty tz'")
        out.append((_int(t[0]), tuple(float(x) for x in t[1:])))
    return tuple(out)


def _fmt_traction(v):
    return "; ".join(f"{b} {_fmt_vec3(t)}" for b, t in v)


def _points(s):
    return tuple(_vec3(item) for item in _items(s))


def _fmt_points(v):
    return "; ".join(_fmt_vec3(p) for p in v)


def _number(s):
    try:
        return _int(s) if s.strip().lstrip("+-").isdigit() else float(s)
    except ValueError:
        raise ValueError(f"parameter value {s!r} is not a number") from None


def _params(s):
    out = {}
    for item in s.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"generator parameter {item!r} must be 'name=value'")
        k, v = (x.strip() for x in item.split("=", 1))
        if k in out:
            raise ValueError(f"generator parameter {k!r} given twice")
        out[k] = _number(v)
    return out


def _fmt_params(v):
    return ", ".join(f"{k}={val!r}" for k, val in v.items())


def _generator(s):
    name = " ".join(s.lower().replace("-", " ").replace("_", " ").split())
    if name not in GENERATOR_NAMES:
        raise ValueError(f"unknown generator {s!r} (choose from {', '.join(GENERATOR_NAMES)})")
    return name


def _solver_name(s):
    if s.lower() not in ("cg", "direct"):
        raise ValueError(f"linear solver must be 'cg' or 'direct', got {s!r}")
    return s.lower()


# section -> (RunConfig attribute, {key: (field, parse, format)})
_SCHEMA = {
    "mesh": ("mesh", {
        "file": ("file", _str, str),
        "generator": ("generator", _generator, str),
        "parameters": ("parameters", _params, _fmt_params),
    }),
    "volume material": ("volume", {
        "lambda": ("lam", _float, _fmt_float),
        "mu": ("mu", _float, _fmt_float),
    }),
    "surface material": ("surface", {
        "lambda": ("lam", _float, _fmt_float),
        "mu": ("mu", _float, _fmt_float),
        "gamma": ("gamma", _float, _fmt_float),
        "ratio mode": ("ratio_mode", _bool, _fmt_bool),
        "ratio": ("ratio", _float, _fmt_float),
        "ramp surface tension": ("ramp_surface_tension", _bool, _fmt_bool),
        "allow nonphysical": ("allow_nonphysical", _bool, _fmt_bool),
    }),
    "boundary conditions": ("boundary", {
        "energetic": ("energetic", _ints, _fmt_ints),
        "dirichlet": ("dirichlet", _dirichlet, _fmt_dirichlet),
        "traction": ("traction", _traction, _fmt_traction),
        "body force": ("body_force", _vec3, _fmt_vec3),
    }),
    "time": ("time", {
        "steps": ("steps", _int, str),
        "end time": ("end_time", _float, _fmt_float),
    }),
    "solver": ("solver", {
        "nonlinear tolerance": ("tol_nl", _float, _fmt_float),
        "linear tolerance": ("tol_lin", _float, _fmt_float),
        "linear solver": ("linear_solver", _solver_name, str),
        "max newton iterations": ("max_newton", _int, str),
        "linear iteration factor": ("max_lin_factor", _int, str),
        "divergence count": ("divergence_count", _int, str),
        "threads": ("threads", _int, str),
        "chunk size": ("chunk_size", _int, str),
    }),
    "output": ("output", {
        "directory": ("directory", _str, str),
        "write vtu": ("write_vtu", _bool, _fmt_bool),
        "quadrature data": ("quadrature_data", _bool, _fmt_bool),
        "monitor": ("monitor", _points, _fmt_points),
        "log": ("log", _str, str),
    }),
}

_TITLES = {
    "mesh": "Mesh",
    "volume material": "Volume material",
    "surface material": "Surface material",
    "boundary conditions": "Boundary conditions",
    "time": "Time",
    "solver": "Solver",
    "output": "Output",
}


def _norm(words):
    return " ".join(words.lower().split())


def parse_config_text(text, path="<string>", base_dir="."):
    """Parse parameter-file text into a validated :class:`RunConfig`."""
    cfg = RunConfig(base_dir=base_dir)
    section = None
    seen_sections = set()
    where = {}                                   # (section, key) -> line number
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        head = head.lower()
        if head == "subsection":
            if section is not None:
                raise ConfigError("nested subsections are not allowed", lineno, path)
            name = _norm(rest)
            if name not in _SCHEMA:
                raise ConfigError(f"unknown subsection {rest.strip()!r}", lineno, path)
            if name in seen_sections:
                raise ConfigError(f"subsection {rest.strip()!r} given twice", lineno, path)
            seen_sections.add(name)
            section = name
        elif head == "end" and not rest:
            if section is None:
                raise ConfigError("'end' without an open subsection", lineno, path)
            section = None
        elif head == "set":
            if section is None:
                raise ConfigError("'set' outside a subsection", lineno, path)
            if "=" not in rest:
                raise ConfigError("expected 'set <key> = <value>'", lineno, path)
            key, _, value = rest.partition("=")
            key = _norm(key)
            value = value.strip()
            attr, keys = _SCHEMA[section]
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in subsection {_TITLES[section]!r}", lineno, path)
            if (section, key) in where:
                raise ConfigError(f"key {key!r} set twice", lineno, path)
            fname, parse, _ = keys[key]
            try:
                setattr(getattr(cfg, attr), fname, parse(value))
            except ValueError as exc:
                raise ConfigError(f"invalid value for {key!r}: {exc}", lineno, path) from None
            where[(section, key)] = lineno
        else:
            raise ConfigError(f"cannot parse line {raw.strip()!r}", lineno, path)
    if section is not None:
        raise ConfigError(f"subsection {_TITLES[section]!r} is not closed", None, path)
    _validate(cfg, where, path)
    return cfg


def _validate(cfg, where, path):
    def err(msg, section, key):
        raise ConfigError(msg, where.get((section, key)), path)

    m = cfg.mesh
    if (m.file is None) == (m.generator is None):
        err("exactly one of 'file' and 'generator' must be set in subsection 'Mesh'", "mesh", "file")
    if m.file is not None and m.parameters:
        err("'parameters' only applies to a generator", "mesh", "parameters")
    if cfg.time.steps < 1:
        err(f"number of steps must be >= 1 (got {cfg.time.steps})", "time", "steps")
    if not cfg.time.end_time > 0:
        err("end time must be positive", "time", "end time")
    s = cfg.surface
    if s.ratio_mode:
        for k in ("lambda", "mu"):
            if ("surface material", k) in where:
                err(f"surface {k} cannot be set in ratio mode", "surface material", k)
    elif ("surface material", "ratio") in where:
        err("'ratio' requires 'ratio mode = true'", "surface material", "ratio")
    sv = cfg.solver
    for key, v in (("nonlinear tolerance", sv.tol_nl), ("linear tolerance", sv.tol_lin)):
        if not v > 0:
            err(f"{key} must be positive", "solver", key)
    for key, v in (
        ("max newton iterations", sv.max_newton),
        ("linear iteration factor", sv.max_lin_factor),
        ("divergence count", sv.divergence_count),
        ("threads", sv.threads),
        ("chunk size", sv.chunk_size),
    ):
        if v < 1:
            err(f"{key} must be >= 1", "solver", key)


def parse_config(path):
    """Read and validate a parameter file."""
    if not os.path.isfile(path):
        raise ConfigError(f"parameter file {path!r} does not exist", None, path)
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text, path, os.path.dirname(os.path.abspath(path)))


def serialize_config(cfg):
    """Parameter-file text that parses back to an equal configuration."""
    defaults = RunConfig()
    out = []
    for section, (attr, keys) in _SCHEMA.items():
        obj, ref = getattr(cfg, attr), getattr(defaults, attr)
        lines = []
        for key, (fname, _, fmt) in keys.items():
            v = getattr(obj, fname)
            if v is None or (v == getattr(ref, fname) and section != "mesh"):
                continue
            if section == "surface material" and cfg.surface.ratio_mode and key in ("lambda", "mu"):
                continue
            if section == "mesh" and fname == "parameters" and not v:
                continue
            lines.append(f"  set {key} = {fmt(v)}")
        if lines:
            out += [f"subsection {_TITLES[section]}"] + lines + ["end", ""]
    return "\n".join(out)


def config_fields():
    """``{section title: [keys]}`` of the grammar (for documentation)."""
    return {_TITLES[s]: list(keys) for s, (_, keys) in _SCHEMA.items()}
