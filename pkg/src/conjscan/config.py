"""Problem and run configuration files.

Line-oriented ``key = value`` pairs grouped under section headers::

    [problem]       kind = interval | radial, dimension, name
    [coefficients]  a, f (expressions in x, or "table: v0, v1, ..."),
                    a_smoothness, f_smoothness (C0 | C1 | Cinf)
    [nonlinearity]  g (expression in x and u), growth_exponent
    [modes]         nu = 0, 1, 2
    [run]           n, samples, refine_tol, kernel_tol, r_min, seed, paths,
                    dims, s_schedule, output

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .errors import ConjscanError
from .fields import SMOOTHNESS_CLASSES, CoefficientField, Nonlinearity
from .problem import Problem, interval_problem, radial_problem

ALLOWED = {
    "problem": {"kind", "dimension", "name"},
    "coefficients": {"a", "f", "a_smoothness", "f_smoothness"},
    "nonlinearity": {"g", "growth_exponent"},
    "modes": {"nu"},
    "run": {"n", "samples", "refine_tol", "kernel_tol", "r_min", "seed", "paths", "dims",
            "s_schedule", "output"},
}


@dataclass(frozen=True)
class RunConfig:
    n: int = 2001
    samples: int = 64
    refine_tol: float = 1e-10
    kernel_tol: float = 1e-8
    r_min: float = 1e-3
    seed: int = 0
    paths: int = 100
    dims: tuple[int, ...] = (4, 8, 16)
    s_schedule: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    output: str = "."

    def __post_init__(self):
        checks = [
            (16 <= self.n <= 200001, "n", "grid size must lie in [16, 200001]"),
            (self.samples >= 64, "samples", "need at least 64 radius samples"),
            (0.0 < self.refine_tol <= 1e-2, "refine_tol", "must lie in (0, 1e-2]"),
            (0.0 < self.kernel_tol <= 1e-3, "kernel_tol", "must lie in (0, 1e-3]"),
            (0.0 < self.r_min < 0.5, "r_min", "must lie in (0, 0.5)"),
            (self.seed >= 0, "seed", "must be nonnegative"),
            (self.paths >= 1, "paths", "must be positive"),
            (bool(self.dims) and all(2 <= d <= 64 for d in self.dims), "dims", "each in [2, 64]"),
            (bool(self.s_schedule) and all(s != 0.0 for s in self.s_schedule), "s_schedule",
             "slopes must be nonzero"),
        ]
        for ok, key, message in checks:
            if not ok:
                raise ConjscanError("INVALID_PARAMETER", f"{key}: {message}", key=key,
                                    value=getattr(self, key))

    def updated(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass
class LoadedConfig:
    problem: Problem | None
    run: RunConfig
    source: str | None = None
    run_keys: dict = field(default_factory=dict)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


_RUN_PARSERS = {"n": int, "samples": int, "refine_tol": float, "kernel_tol": float, "r_min": float,
                "seed": int, "paths": int, "dims": _ints, "s_schedule": _floats, "output": str}


def _field(value: str, smoothness: str | None) -> CoefficientField:
    value = value.strip()
    if smoothness is not None and smoothness not in SMOOTHNESS_CLASSES:
        raise ConjscanError("INVALID_SMOOTHNESS", f"expected one of {SMOOTHNESS_CLASSES}",
                            smoothness=smoothness)
    if value.lower().startswith("table:"):
        return CoefficientField.from_table(_floats(value[6:]), smoothness or "C1")
    return CoefficientField.from_expression(value, smoothness or "Cinf")


def demo_names() -> list[str]:
    return sorted(p.name for p in resources.files("conjscan.data").iterdir() if p.name.endswith(".cfg"))


def resolve_problem_path(name: str | Path) -> Path:
    """A file path as given, else a shipped demo of that name."""
    path = Path(name)
    if path.is_file():
        return path
    for candidate in (path.name, path.name + ".cfg"):
        shipped = resources.files("conjscan.data").joinpath(candidate)
        if shipped.is_file():
            return Path(str(shipped))
    raise ConjscanError("CONFIG_NOT_FOUND", f"no such problem file: {name}", path=str(name))


def parse_config(text: str, source: str | None = None) -> LoadedConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConjscanError("CONFIG_SYNTAX", str(exc).splitlines()[0], source=source) from None

    for section in parser.sections():
        if section not in ALLOWED:
            raise ConjscanError("UNKNOWN_KEY", f"unknown section [{section}]", section=section)
        extra = set(parser[section]) - ALLOWED[section]
        if extra:
            raise ConjscanError("UNKNOWN_KEY", f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}",
                                section=section, keys=sorted(extra))

    run_keys = {}
    if parser.has_section("run"):
        for key, raw in parser["run"].items():
            try:
                run_keys[key] = _RUN_PARSERS[key](raw)
            except ValueError:
                raise ConjscanError("INVALID_PARAMETER", f"run.{key}: cannot parse {raw!r}",
                                    key=key) from None
    run = RunConfig(**run_keys)

    problem = None
    if parser.has_section("problem") or parser.has_section("coefficients"):
        problem = _build_problem(parser)
    return LoadedConfig(problem, run, source, run_keys)


def _build_problem(parser: configparser.ConfigParser) -> Problem:
    sec = parser["problem"] if parser.has_section("problem") else {}
    coeffs = parser["coefficients"] if parser.has_section("coefficients") else {}
    kind = sec.get("kind", "interval").strip()
    name = sec.get("name", kind).strip()
    a = _field(coeffs.get("a", "1"), coeffs.get("a_smoothness"))
    f = _field(coeffs.get("f", "0"), coeffs.get("f_smoothness"))
    g = None
    if parser.has_section("nonlinearity") and "g" in parser["nonlinearity"]:
        nl = parser["nonlinearity"]
        g = Nonlinearity.from_expression(nl["g"], float(nl.get("growth_exponent", "1")))
    if kind == "interval":
        if parser.has_section("modes") or "dimension" in sec:
            raise ConjscanError("INVALID_CONFIG", "interval problems take no dimension or modes")
        return interval_problem(a, f, g, name)
    if kind == "radial":
        try:
            dimension = int(sec.get("dimension", "2"))
            modes = _ints(parser["modes"].get("nu", "0")) if parser.has_section("modes") else (0,)
        except ValueError as exc:
            raise ConjscanError("INVALID_CONFIG", str(exc)) from None
        return radial_problem(dimension, a, f, modes, g, name)
    raise ConjscanError("INVALID_CONFIG", f"unknown problem kind {kind!r}", kind=kind)


def load_config(path: str | Path) -> LoadedConfig:
    resolved = resolve_problem_path(path)
    return parse_config(resolved.read_text(), str(resolved))


RUN_FIELDS = tuple(f.name for f in fields(RunConfig))
