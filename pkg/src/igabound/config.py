"""Flat ``key = value`` run configuration with dotted keys.

Lines starting with ``#`` and blank lines are ignored, so a run manifest
(which stores extra information as comments) parses back into the same
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable

from .errors import InvalidArgument, InvalidSpec
from .model import Kind, PotentialShape, ProblemSpec


class ConfigError(InvalidArgument):
    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    kind: str = "two-body"
    shape: str = "gaussian"
    beta: float = 1.0
    mass_ratio: float | None = None
    half_width: float = 20.0
    kappa_x: float | None = None
    kappa_y: float | None = None
    shift: float | None = None
    degree: int = 7
    elements: int = 1000
    stretch: float = 0.0
    quad_points: int | None = None
    solver_path: str = "auto"
    tol: float = 1e-10
    k: int = 8
    bound_threshold: float = 0.02
    out_dir: str = "out"
    dump_matrices: bool = False
    sample_resolution: int = 201
    sample_window: tuple[float, float] | None = None
    deterministic: bool = True
    threads: int = 1
    converge_degrees: tuple[int, ...] = (1, 2, 3)
    converge_elements: tuple[int, ...] = (200, 283, 400, 566, 800, 1131, 1600)
    converge_reference: str = "self"
    domain_half_widths: tuple[float, ...] = tuple(float(x) for x in range(2, 21))
    domain_h: float = 0.01
    domain_states: int = 1
    domain_reference: str = "self"
    domain_reference_half_width: float = 40.0
    domain_target_error: float = 1e-15

    def problem_spec(self) -> ProblemSpec:
        kappa = None
        dim = 1 if self.kind == Kind.TWO_BODY.value else 2
        if self.kappa_x is not None or self.kappa_y is not None:
            if dim == 1:
                if self.kappa_y is not None:
                    raise ConfigError("two-body problems take only kappa_x", key="kappa_y")
                kappa = (self.kappa_x,)
            else:
                if self.kappa_x is None or self.kappa_y is None:
                    raise ConfigError("three-body kappa override needs kappa_x and kappa_y", key="kappa_x")
                kappa = (self.kappa_x, self.kappa_y)
        if self.kind == Kind.THREE_BODY.value and self.mass_ratio is None and kappa is None:
            raise ConfigError("three-body problems need mass_ratio", key="mass_ratio")
        try:
            return ProblemSpec(self.kind, self.shape, self.beta, half_width=self.half_width,
                               mass_ratio=self.mass_ratio, kappa_override=kappa,
                               shift_override=self.shift)
        except InvalidSpec as exc:
            raise ConfigError(str(exc)) from None


# --- value parsers ---------------------------------------------------------

def _none(text):
    return text.strip().lower() in ("", "none", "auto")


def _float(text):
    try:
        v = float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _positive(conv, name, allow_zero=False):
    def parse(text):
        v = conv(text)
        if v < 0 or (v == 0 and not allow_zero):
            raise ValueError(f"{name} must be {'>= 0' if allow_zero else '> 0'}")
        return v
    return parse


def _optional(conv):
    def parse(text):
        return None if _none(text) else conv(text)
    return parse


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return t
    return parse


def _list(conv, name, length=None):
    def parse(text):
        items = [s for s in text.replace(" ", "").split(",") if s]
        if not items:
            raise ValueError(f"{name} needs at least one value")
        vals = tuple(conv(s) for s in items)
        if length is not None and len(vals) != length:
            raise ValueError(f"{name} needs exactly {length} values")
        return vals
    return parse


def _reference(text):
    from .studies import REFERENCE_LEDGER
    t = text.strip()
    if t != "self" and t not in REFERENCE_LEDGER:
        raise ValueError(f"must be 'self' or a ledger key ({', '.join(REFERENCE_LEDGER)})")
    return t


def _degree(text):
    v = _int(text)
    if not 0 <= v <= 15:
        raise ValueError("degree must be in [0, 15]")
    return v


def _quad(text):
    if _none(text):
        return None
    v = _int(text)
    if not 1 <= v <= 64:
        raise ValueError("points must be in [1, 64]")
    return v


def _window(text):
    if _none(text):
        return None
    lo, hi = _list(_float, "sample_window", 2)(text)
    if not lo < hi:
        raise ValueError("sample_window needs lo < hi")
    return (lo, hi)


@dataclass(frozen=True)
class Key:
    name: str
    field: str
    parse: Callable[[str], Any]
    help: str


KEYS = [
    Key("kind", "kind", _choice("two-body", "three-body"), "problem type"),
    Key("shape", "shape", _choice(*(s.value for s in PotentialShape)), "interaction shape"),
    Key("beta", "beta", _positive(_float, "beta"), "interaction magnitude"),
    Key("mass_ratio", "mass_ratio", _optional(_positive(_float, "mass_ratio")), "heavy/light mass ratio (three-body)"),
    Key("half_width", "half_width", _positive(_float, "half_width"), "domain is [-half_width, half_width]^d"),
    Key("kappa_x", "kappa_x", _optional(_positive(_float, "kappa_x")), "override of the x diffusion coefficient"),
    Key("kappa_y", "kappa_y", _optional(_positive(_float, "kappa_y")), "override of the y diffusion coefficient"),
    Key("shift", "shift", _optional(_positive(_float, "shift")), "override of the spectral shift"),
    Key("mesh.degree", "degree", _degree, "spline degree"),
    Key("mesh.elements", "elements", _positive(_int, "mesh.elements"), "elements per axis"),
    Key("mesh.stretch", "stretch", _positive(_float, "mesh.stretch", allow_zero=True), "sinh grading strength, 0 = uniform"),
    Key("quad.points", "quad_points", _quad, "Gauss points per element and direction (auto = degree + 1)"),
    Key("solver.path", "solver_path", _choice("auto", "dense", "iterative"), "eigensolver path"),
    Key("solver.tol", "tol", _positive(_float, "solver.tol"), "relative residual tolerance"),
    Key("solver.k", "k", _positive(_int, "solver.k"), "number of eigenpairs"),
    Key("solver.bound_threshold", "bound_threshold", _positive(_float, "solver.bound_threshold"),
        "max boundary/peak amplitude ratio of a bound state"),
    Key("output.dir", "out_dir", str.strip, "output directory"),
    Key("output.dump_matrices", "dump_matrices", _bool, "write K and M in coordinate format"),
    Key("output.sample_resolution", "sample_resolution", _positive(_int, "output.sample_resolution"),
        "state sample points per axis"),
    Key("output.sample_window", "sample_window", _window, "lo,hi window for state samples (auto = domain)"),
    Key("run.deterministic", "deterministic", _bool, "fixed summation order in parallel assembly"),
    Key("run.threads", "threads", _positive(_int, "run.threads"), "assembly worker threads"),
    Key("converge.degrees", "converge_degrees", _list(_degree, "converge.degrees"), "degrees to study"),
    Key("converge.elements", "converge_elements", _list(_positive(_int, "converge.elements"), "converge.elements"),
        "element counts of the mesh family"),
    Key("converge.reference", "converge_reference", _reference, "reference energy: self or a ledger key"),
    Key("domain.half_widths", "domain_half_widths", _list(_positive(_float, "domain.half_widths"), "domain.half_widths"),
        "truncation half-widths to study"),
    Key("domain.h", "domain_h", _positive(_float, "domain.h"), "fixed element size"),
    Key("domain.states", "domain_states", _positive(_int, "domain.states"), "number of states to track"),
    Key("domain.reference", "domain_reference", _reference, "reference energies: self or a ledger key"),
    Key("domain.reference_half_width", "domain_reference_half_width",
        _positive(_float, "domain.reference_half_width"), "half-width of the self-computed reference"),
    Key("domain.target_error", "domain_target_error", _positive(_float, "domain.target_error"),
        "error for which the required half-width is reported"),
]
KEY_BY_NAME = {k.name: k for k in KEYS}

PRESETS = {
    "solve": {},
    "converge": {},
    "domain-study": {},
    "reference": {},
    "three-body": {
        "kind": "three-body",
        "beta": "0.344595351",
        "mass_ratio": "20",
        "mesh.elements": "80",
        "solver.k": "6",
    },
}


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(format_value(x) for x in v)
    return str(v)


def _apply(values: dict, key: str, text: str, line=None):
    spec = KEY_BY_NAME.get(key)
    if spec is None:
        raise ConfigError("unknown key", key=key, line=line)
    try:
        values[spec.field] = spec.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc), key=key, line=line) from None


def parse_lines(lines, values=None, source="<config>") -> dict:
    values = {} if values is None else values
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' in {source}", line=no)
        key, _, text = line.partition("=")
        _apply(values, key.strip(), text.strip(), line=no)
    return values


def parse_config(path=None, overrides=(), command: str = "solve") -> RunConfig:
    """Resolve a configuration: built-in defaults, command preset, file, then overrides.

    ``overrides`` are ``key=value`` strings as given to ``--set``.
    """
    values: dict = {}
    for key, text in PRESETS.get(command, {}).items():
        _apply(values, key, text)
    if path is not None:
        p = Path(path)
        try:
            content = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        parse_lines(content.splitlines(), values, source=str(p))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, text = item.partition("=")
        _apply(values, key.strip(), text.strip())
    cfg = replace(RunConfig(), **values)
    cfg.problem_spec()   # cross-field validation
    return cfg


def defaults_for(command: str) -> RunConfig:
    values: dict = {}
    for key, text in PRESETS.get(command, {}).items():
        _apply(values, key, text)
    return replace(RunConfig(), **values)


def render(cfg: RunConfig) -> list[str]:
    """``key = value`` lines for every key, in declaration order."""
    return [f"{k.name} = {format_value(getattr(cfg, k.field))}" for k in KEYS]


assert {k.field for k in KEYS} == {f.name for f in fields(RunConfig)}
