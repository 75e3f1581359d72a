"""INI run configuration: system, analysis parameters, probes and outputs."""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .degree import ProbeLoop, expression_probe
from .expr import ExprSyntaxError
from .sigma import AnalysisParams, InvalidSystem, VectorFieldSystem

OUTPUT_DIR_ENV = "STABCHECK_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid configuration; ``line`` and ``field`` point at the culprit when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        where = []
        if field:
            where.append(field)
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


@dataclass(frozen=True)
class ProbeSpec:
    name: str
    coordinates: tuple[str, ...]
    projection: tuple[int, int]
    samples: int = 256

    def loop(self, n: int, m: int) -> ProbeLoop:
        return expression_probe(self.name, self.coordinates, n, m, self.samples, self.projection)


@dataclass(frozen=True)
class OutputConfig:
    report: Path
    betti_csv: Path
    verbosity: int = 1


@dataclass(frozen=True)
class RunConfig:
    system: VectorFieldSystem
    params: AnalysisParams
    probes: tuple[ProbeSpec, ...] = ()
    output: OutputConfig | None = None
    source: Path | None = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return self.system.name

    def probe_loops(self) -> list[ProbeLoop]:
        return [p.loop(self.system.n, self.system.m) for p in self.probes]

    def with_overrides(self, *, resolutions=None, seed=None, max_cells=None) -> RunConfig:
        changes = {}
        if resolutions is not None:
            changes["resolutions"] = tuple(resolutions)
        if seed is not None:
            changes["seed"] = seed
        if max_cells is not None:
            changes["max_cells"] = max_cells
        if not changes:
            return self
        try:
            params = replace(self.params, **changes)
        except ValueError as exc:
            raise ConfigError(str(exc), field=next(iter(changes))) from exc
        return replace(self, params=params)


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every key, by (section, key)."""
    out, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), lineno)
    return out


class _Reader:
    def __init__(self, parser, lines):
        self.parser, self.lines = parser, lines

    def fail(self, section, key, message):
        raise ConfigError(message, line=self.lines.get((section, key)), field=f"{section}.{key}")

    def get(self, section, key, convert=str, default=None, required=False):
        if not self.parser.has_option(section, key):
            if required:
                line = self.lines.get((section, None))
                raise ConfigError("missing required key", line=line, field=f"{section}.{key}")
            return default
        raw = _unquote(self.parser.get(section, key))
        try:
            return convert(raw)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, f"invalid value {raw!r} ({exc})")


def _int_list(text: str) -> tuple[int, ...]:
    body = text.strip().strip("[]")
    return tuple(int(v) for v in re.split(r"[,\s]+", body.strip()) if v)


def _coordinate_index(name: str, n: int, m: int) -> int:
    m_ = re.fullmatch(r"([xu])([1-9][0-9]*)", name.strip())
    if not m_:
        raise ValueError(f"unknown coordinate {name!r}")
    kind, idx = m_.group(1), int(m_.group(2))
    limit = n if kind == "x" else m
    if idx > limit:
        raise ValueError(f"coordinate {name} is not declared")
    return idx - 1 if kind == "x" else n + idx - 1


def _default_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".")


def parse_config(text: str, source: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(source or "<config>"))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("file must start with a [section] header", line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("could not parse line", line=line) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", line=exc.lineno,
                          field=f"{exc.section}.{exc.option}") from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}", line=exc.lineno) from exc
    lines = _key_lines(text)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[(.+)\]\s*$", raw)
        if m:
            lines.setdefault((m.group(1).strip(), None), lineno)
    rd = _Reader(parser, lines)

    if not parser.has_section("system"):
        raise ConfigError("missing [system] section", field="system")
    name = rd.get("system", "name", default="system")
    n = rd.get("system", "n", int, required=True)
    m = rd.get("system", "m", int, default=0)
    if n < 1:
        rd.fail("system", "n", "n must be at least 1")
    if m < 0:
        rd.fail("system", "m", "m must be non-negative")
    comps = []
    for i in range(1, n + 1):
        comps.append(rd.get("system", f"f{i}", required=True))
    extra = [k for k in parser.options("system") if re.fullmatch(r"f[0-9]+", k) and int(k[1:]) > n]
    if extra:
        rd.fail("system", extra[0], f"component {extra[0]} exceeds n = {n}")
    try:
        system = VectorFieldSystem.from_strings(comps, m=m, name=name)
    except ExprSyntaxError as exc:
        bad = next((i for i, c in enumerate(comps, start=1) if _fails(c, n, m)), 1)
        rd.fail("system", f"f{bad}", str(exc))
    except InvalidSystem as exc:
        raise ConfigError(str(exc), field="system") from exc

    kw = {}
    if parser.has_section("analysis"):
        sec = "analysis"
        for key, conv in [("epsilon", float), ("probe_radius", float), ("seed", int),
                          ("max_cells", int), ("samples_per_cube", int), ("image_cells", int),
                          ("delta", float), ("tau", float), ("max_retries", int)]:
            v = rd.get(sec, key, conv)
            if v is not None:
                kw[key] = v
        res = rd.get(sec, "resolutions", _int_list)
        if res is not None:
            if len(res) < 2:
                rd.fail(sec, "resolutions", "at least two resolutions are needed for stabilization")
            if list(res) != sorted(set(res)):
                rd.fail(sec, "resolutions", "resolutions must ascend")
            kw["resolutions"] = res
    try:
        params = AnalysisParams(**kw)
    except ValueError as exc:
        msg = str(exc)
        word = msg.split()[0]
        rd.fail("analysis", "resolutions" if word.startswith("resolution") else word, msg)

    probes = []
    for sec in parser.sections():
        if not sec.startswith("probe."):
            continue
        pname = sec[len("probe."):]
        names = [f"x{i}" for i in range(1, n + 1)] + [f"u{j}" for j in range(1, m + 1)]
        coords = tuple(rd.get(sec, c, required=True) for c in names)
        proj_text = rd.get(sec, "projection", required=True)
        try:
            parts = [p for p in re.split(r"[,\s]+", proj_text.strip().strip("()[]")) if p]
            if len(parts) != 2:
                raise ValueError("projection needs two coordinates")
            projection = tuple(_coordinate_index(p, n, m) for p in parts)
            if projection[0] == projection[1]:
                raise ValueError("projection coordinates must differ")
        except ValueError as exc:
            rd.fail(sec, "projection", str(exc))
        samples = rd.get(sec, "samples", int, default=256)
        if samples < 64:
            rd.fail(sec, "samples", "a probe loop needs at least 64 samples")
        spec = ProbeSpec(pname, coords, projection, samples)
        try:
            spec.loop(n, m)
        except ExprSyntaxError as exc:
            bad = next((c for c, t in zip(names, coords) if _fails(t, n, m, allow_t=True)), names[0])
            rd.fail(sec, bad, str(exc))
        probes.append(spec)

    base = _default_dir()
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", name)
    report = rd.get("output", "report", default=None) if parser.has_section("output") else None
    table = rd.get("output", "betti_csv", default=None) if parser.has_section("output") else None
    verbosity = rd.get("output", "verbosity", int, default=1) if parser.has_section("output") else 1
    output = OutputConfig(
        report=_resolve(base, report, f"{slug}.report.json"),
        betti_csv=_resolve(base, table, f"{slug}.betti.csv"),
        verbosity=verbosity,
    )
    return RunConfig(system, params, tuple(probes), output, source)


def _resolve(base: Path, value, default: str) -> Path:
    if not value:
        return base / default
    p = Path(value)
    return p if p.is_absolute() else base / p


def _fails(text, n, m, allow_t=False) -> bool:
    from .expr import parse

    try:
        parse(text, n, m, allow_t=allow_t)
    except ExprSyntaxError:
        return True
    return False


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, path)
