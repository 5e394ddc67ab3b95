"""YAML scenario configuration.

Layout::

    terminals:      {id: {preset: leo_table1, <TerminalSpec field overrides>}}
    constellations: [{prefix, terminal, planes, sats_per_plane, altitude_km,
                      inclination_deg, phasing, raan_spacing_deg, raan0_deg}]
    nodes:          [{id, class, terminal, <orbit | site | direction fields>}]
    scenario:       horizon_s, time_step_s, seed, elevation_mask_deg, slot_s,
                    max_contact_s, max_contact_by_link, links, crosslinks, ...
    model:          sequential_axes, geometric_d_mode, expected_fraction,
                    allow_negative_counter, alpha_override
    output:         bin_width_s, kde_bandwidth, min_prominence

Errors carry ``file:line`` of the offending entry.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, ParseError, ValidationError
from .scenario import (
    DeepSpaceDirection,
    GroundSite,
    LeoOrbit,
    ModelOptions,
    Node,
    NodeClass,
    Scenario,
)
from .stats import DEFAULT_MIN_PROMINENCE
from .terminal import PRESETS, TerminalSpec

REFERENCE_CONFIG = "reference_ssi.yaml"
_Loader = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

_SPEC_FIELDS = {f.name for f in dataclasses.fields(TerminalSpec)}
_SCENARIO_KEYS = {
    "horizon_s", "time_step_s", "seed", "elevation_mask_deg", "slot_s",
    "max_contact_s", "max_contact_by_link", "links", "crosslinks",
    "ground_first", "alternate_classes",
}
_MODEL_KEYS = {f.name for f in dataclasses.fields(ModelOptions)} | {"alpha_override"}
_OUTPUT_KEYS = {"bin_width_s", "kde_bandwidth", "min_prominence"}
_TOP_KEYS = {"terminals", "constellations", "nodes", "scenario", "model", "output"}
_NODE_FIELDS = {
    NodeClass.LEO: {"altitude_km", "inclination_deg", "raan_deg", "true_anomaly_deg"},
    NodeClass.GROUND: {"latitude_deg", "longitude_deg"},
    NodeClass.DEEP_SPACE: {"direction", "ra_deg", "dec_deg", "range_m"},
}


@dataclass(frozen=True)
class OutputOptions:
    bin_width_s: float = 1.0
    kde_bandwidth: float | str = "auto"
    min_prominence: float = DEFAULT_MIN_PROMINENCE


@dataclass
class ConfigDocument:
    terminals: dict[str, TerminalSpec]
    nodes: list[Node]
    scenario: Scenario
    model: ModelOptions
    output: OutputOptions = field(default_factory=OutputOptions)
    source: str = "<string>"

    def with_seed(self, seed: int | None) -> "ConfigDocument":
        if seed is None:
            return self
        return dataclasses.replace(self, scenario=dataclasses.replace(self.scenario, seed=seed))


class _Locator:
    """Maps key paths in the YAML document to source line numbers."""

    def __init__(self, root, source: str):
        self.source = source
        self.lines: dict[tuple, int] = {}
        if root is not None:
            self._walk(root, ())

    def _walk(self, node, path: tuple) -> None:
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                self.lines[path + (k.value,)] = k.start_mark.line + 1
                self._walk(v, path + (k.value,))
                self.lines[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self._walk(v, path + (i,))

    def error(self, path: tuple, message: str) -> ValidationError:
        p = tuple(path)
        while p and p not in self.lines:
            p = p[:-1]
        line = self.lines.get(p)
        where = f"{self.source}:{line}" if line else self.source
        dotted = ".".join(str(x) for x in path) or "<root>"
        return ValidationError(f"{where}: {dotted}: {message}")


def _mapping(value, path, loc, allowed=None) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise loc.error(path, "expected a mapping")
    if allowed is not None:
        extra = sorted(set(map(str, value)) - set(allowed))
        if extra:
            raise loc.error(path + (extra[0],), f"unknown key {extra[0]!r}")
    return value


def _number(value, path, loc, *, positive=False, nonneg=False, integer=False) -> float:
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a sign ("2e11") as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise loc.error(path, f"expected a number, got {value!r}")
    if integer and (not float(value).is_integer()):
        raise loc.error(path, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise loc.error(path, "must be finite")
    if positive and not value > 0:
        raise loc.error(path, f"must be > 0 (got {value})")
    if nonneg and not value >= 0:
        raise loc.error(path, f"must be >= 0 (got {value})")
    return int(value) if integer else float(value)


def _bool(value, path, loc) -> bool:
    if not isinstance(value, bool):
        raise loc.error(path, f"expected true/false, got {value!r}")
    return value


def _node_class(value, path, loc) -> NodeClass:
    try:
        return NodeClass(str(value).upper())
    except ValueError:
        raise loc.error(path, f"unknown node class {value!r}") from None


def _link(value, path, loc) -> tuple[NodeClass, NodeClass]:
    parts = str(value).split("-") if isinstance(value, str) else value
    if not isinstance(parts, (list, tuple)) or len(parts) != 2:
        raise loc.error(path, f"link must look like 'LEO-GROUND', got {value!r}")
    return _node_class(parts[0], path, loc), _node_class(parts[1], path, loc)


def _terminals(raw, loc) -> dict[str, TerminalSpec]:
    out = {}
    for tid, body in _mapping(raw, ("terminals",), loc).items():
        path = ("terminals", tid)
        body = _mapping(body, path, loc, _SPEC_FIELDS | {"preset"})
        name = body.get("preset")
        if name is not None:
            if not isinstance(name, str) or name not in PRESETS:
                raise loc.error(path + ("preset",), f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
            base = dataclasses.asdict(PRESETS[name])
        else:
            base = {}
        for key, val in body.items():
            if key == "preset":
                continue
            if key == "beaconless":
                base[key] = _bool(val, path + (key,), loc)
            else:
                base[key] = _number(val, path + (key,), loc)
        missing = sorted(_SPEC_FIELDS - set(base) - {"alpha", "beaconless"})
        if missing:
            raise loc.error(path, f"missing terminal fields {missing} (or give a preset)")
        spec = TerminalSpec(**base)
        try:
            spec.validate()
        except ValidationError as exc:
            raise loc.error(path, str(exc)) from None
        out[str(tid)] = spec
    return out


def _direction(body, path, loc) -> tuple[float, float, float]:
    if "direction" in body:
        vec = body["direction"]
        if not isinstance(vec, list) or len(vec) != 3:
            raise loc.error(path + ("direction",), "direction must be a 3-element list")
        v = [_number(x, path + ("direction", i), loc) for i, x in enumerate(vec)]
        norm = math.sqrt(sum(x * x for x in v))
        if norm == 0:
            raise loc.error(path + ("direction",), "direction must be non-zero")
        return tuple(x / norm for x in v)
    if "ra_deg" not in body or "dec_deg" not in body:
        raise loc.error(path, "deep-space node needs direction or ra_deg/dec_deg")
    ra = math.radians(_number(body["ra_deg"], path + ("ra_deg",), loc))
    dec = math.radians(_number(body["dec_deg"], path + ("dec_deg",), loc))
    return (math.cos(dec) * math.cos(ra), math.cos(dec) * math.sin(ra), math.sin(dec))


def _node(body, path, loc, terminals) -> Node:
    body = _mapping(body, path, loc)
    for key in ("id", "class", "terminal"):
        if key not in body:
            raise loc.error(path, f"node is missing {key!r}")
    cls = _node_class(body["class"], path + ("class",), loc)
    extra = sorted(set(body) - {"id", "class", "terminal"} - _NODE_FIELDS[cls])
    if extra:
        raise loc.error(path + (extra[0],), f"key {extra[0]!r} is not valid for a {cls.value} node")
    tid = str(body["terminal"])
    if tid not in terminals:
        raise loc.error(path + ("terminal",), f"unknown terminal {tid!r}")
    kw: dict[str, Any] = {}
    if cls is NodeClass.LEO:
        nums = {k: _number(body.get(k, 0.0), path + (k,), loc) for k in _NODE_FIELDS[cls]}
        if "altitude_km" not in body or "inclination_deg" not in body:
            raise loc.error(path, "LEO node needs altitude_km and inclination_deg")
        kw["orbit"] = LeoOrbit(**nums)
    elif cls is NodeClass.GROUND:
        if "latitude_deg" not in body or "longitude_deg" not in body:
            raise loc.error(path, "ground node needs latitude_deg and longitude_deg")
        kw["site"] = GroundSite(
            _number(body["latitude_deg"], path + ("latitude_deg",), loc),
            _number(body["longitude_deg"], path + ("longitude_deg",), loc),
        )
    else:
        if "range_m" not in body:
            raise loc.error(path, "deep-space node needs range_m")
        kw["direction"] = DeepSpaceDirection(
            _direction(body, path, loc), _number(body["range_m"], path + ("range_m",), loc)
        )
    node = Node(str(body["id"]), cls, terminals[tid], terminal_id=tid, **kw)
    try:
        node.validate()
    except ValidationError as exc:
        raise loc.error(path, str(exc)) from None
    return node


_CONSTELLATION_KEYS = {
    "prefix", "terminal", "planes", "sats_per_plane", "altitude_km", "inclination_deg",
    "phasing", "raan_spacing_deg", "raan0_deg",
}


def walker_delta(
    prefix: str,
    spec: TerminalSpec,
    planes: int,
    sats_per_plane: int,
    altitude_km: float,
    inclination_deg: float,
    phasing: int = 0,
    raan_spacing_deg: float | None = None,
    raan0_deg: float = 0.0,
    terminal_id: str = "",
) -> list[Node]:
    """Walker-delta style constellation; ids are ``<prefix><plane><slot>``."""
    total = planes * sats_per_plane
    spacing = 360.0 / planes if raan_spacing_deg is None else raan_spacing_deg
    nodes = []
    for p in range(planes):
        for k in range(sats_per_plane):
            anomaly = (360.0 * k / sats_per_plane + 360.0 * phasing * p / total) % 360.0
            orbit = LeoOrbit(altitude_km, inclination_deg, raan0_deg + spacing * p, anomaly)
            nodes.append(Node(f"{prefix}{p}{k:02d}", NodeClass.LEO, spec, terminal_id, orbit=orbit))
    return nodes


def _constellations(raw, loc, terminals) -> list[Node]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise loc.error(("constellations",), "expected a list")
    out = []
    for i, body in enumerate(raw):
        path = ("constellations", i)
        body = _mapping(body, path, loc, _CONSTELLATION_KEYS)
        for key in ("prefix", "terminal", "planes", "sats_per_plane", "altitude_km", "inclination_deg"):
            if key not in body:
                raise loc.error(path, f"constellation is missing {key!r}")
        tid = str(body["terminal"])
        if tid not in terminals:
            raise loc.error(path + ("terminal",), f"unknown terminal {tid!r}")
        spacing = body.get("raan_spacing_deg")
        out.extend(walker_delta(
            str(body["prefix"]),
            terminals[tid],
            _number(body["planes"], path + ("planes",), loc, positive=True, integer=True),
            _number(body["sats_per_plane"], path + ("sats_per_plane",), loc, positive=True, integer=True),
            _number(body["altitude_km"], path + ("altitude_km",), loc, positive=True),
            _number(body["inclination_deg"], path + ("inclination_deg",), loc),
            _number(body.get("phasing", 0), path + ("phasing",), loc, nonneg=True, integer=True),
            None if spacing is None else _number(spacing, path + ("raan_spacing_deg",), loc),
            _number(body.get("raan0_deg", 0.0), path + ("raan0_deg",), loc),
            terminal_id=tid,
        ))
    for n in out:
        n.validate()
    return out


def _model(raw, loc, terminals) -> ModelOptions:
    body = _mapping(raw, ("model",), loc, _MODEL_KEYS)
    kw: dict[str, Any] = {}
    for key in ("sequential_axes", "geometric_d_mode", "allow_negative_counter"):
        if key in body:
            kw[key] = _bool(body[key], ("model", key), loc)
    if "expected_fraction" in body:
        frac = _number(body["expected_fraction"], ("model", "expected_fraction"), loc)
        if not 0 < frac <= 1:
            raise loc.error(("model", "expected_fraction"), "must lie in (0, 1]")
        kw["expected_fraction"] = frac
    overrides = _mapping(body.get("alpha_override"), ("model", "alpha_override"), loc)
    for tid, alpha in overrides.items():
        path = ("model", "alpha_override", tid)
        if str(tid) not in terminals:
            raise loc.error(path, f"unknown terminal {tid!r}")
        terminals[str(tid)] = terminals[str(tid)].replace(
            alpha=_number(alpha, path, loc, positive=True)
        )
    return ModelOptions(**kw)


def _output(raw, loc) -> OutputOptions:
    body = _mapping(raw, ("output",), loc, _OUTPUT_KEYS)
    kw: dict[str, Any] = {}
    if "bin_width_s" in body:
        kw["bin_width_s"] = _number(body["bin_width_s"], ("output", "bin_width_s"), loc, positive=True)
    if "kde_bandwidth" in body:
        bw = body["kde_bandwidth"]
        kw["kde_bandwidth"] = "auto" if bw == "auto" else _number(
            bw, ("output", "kde_bandwidth"), loc, positive=True
        )
    if "min_prominence" in body:
        mp = _number(body["min_prominence"], ("output", "min_prominence"), loc)
        if not 0 <= mp <= 1:
            raise loc.error(("output", "min_prominence"), "must lie in [0, 1]")
        kw["min_prominence"] = mp
    return OutputOptions(**kw)


def _scenario(raw, loc, nodes, model) -> Scenario:
    body = _mapping(raw, ("scenario",), loc, _SCENARIO_KEYS)
    kw: dict[str, Any] = {}
    for key in ("horizon_s", "time_step_s", "slot_s", "max_contact_s"):
        if key in body:
            kw[key] = _number(body[key], ("scenario", key), loc, positive=True)
    if "seed" in body:
        kw["seed"] = _number(body["seed"], ("scenario", "seed"), loc, nonneg=True, integer=True)
    if "elevation_mask_deg" in body:
        mask = _number(body["elevation_mask_deg"], ("scenario", "elevation_mask_deg"), loc)
        if not -90 < mask < 90:
            raise loc.error(("scenario", "elevation_mask_deg"), "must lie in (-90, 90)")
        kw["elevation_mask_deg"] = mask
    for key in ("ground_first", "alternate_classes"):
        if key in body:
            kw[key] = _bool(body[key], ("scenario", key), loc)
    if "crosslinks" in body:
        if body["crosslinks"] not in ("all", "in_plane"):
            raise loc.error(("scenario", "crosslinks"), "must be 'all' or 'in_plane'")
        kw["crosslinks"] = body["crosslinks"]
    if "links" in body:
        links = body["links"]
        if not isinstance(links, list):
            raise loc.error(("scenario", "links"), "expected a list")
        kw["links"] = tuple(_link(v, ("scenario", "links", i), loc) for i, v in enumerate(links))
    caps = _mapping(body.get("max_contact_by_link"), ("scenario", "max_contact_by_link"), loc)
    kw["max_contact_by_link"] = {
        frozenset(_link(k, ("scenario", "max_contact_by_link", k), loc)):
            _number(v, ("scenario", "max_contact_by_link", k), loc, positive=True)
        for k, v in caps.items()
    }
    return Scenario(nodes=nodes, options=model, **kw)


def loads(text: str, source: str = "<string>") -> ConfigDocument:
    try:
        # compose once: the node tree gives both the data and the line numbers
        loader = _Loader(text)
        try:
            root = loader.get_single_node()
            raw = loader.construct_document(root) if root is not None else None
        finally:
            loader.dispose()
        loc = _Locator(root, source)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"{where}: {problem}") from None
    raw = _mapping(raw, (), loc, _TOP_KEYS)
    terminals = _terminals(raw.get("terminals"), loc)
    model = _model(raw.get("model"), loc, terminals)
    nodes = _constellations(raw.get("constellations"), loc, terminals)
    node_list = raw.get("nodes")
    if node_list is not None and not isinstance(node_list, list):
        raise loc.error(("nodes",), "expected a list")
    for i, body in enumerate(node_list or []):
        nodes.append(_node(body, ("nodes", i), loc, terminals))
    seen = set()
    for n in nodes:
        if n.id in seen:
            raise loc.error(("nodes",), f"duplicate node id {n.id!r}")
        seen.add(n.id)
    scenario = _scenario(raw.get("scenario"), loc, nodes, model)
    return ConfigDocument(terminals, nodes, scenario, model, _output(raw.get("output"), loc), source)


def load_config(path: str | Path) -> ConfigDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return loads(text, str(path))


def reference_config_text() -> str:
    return resources.files("patsim.data").joinpath(REFERENCE_CONFIG).read_text(encoding="utf-8")


def load_reference() -> ConfigDocument:
    """The bundled reference scenario."""
    return loads(reference_config_text(), REFERENCE_CONFIG)
