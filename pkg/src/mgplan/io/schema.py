"""Instance files: one JSON document with sections for every model type.

Parsing is strict: unknown fields, wrong types, and missing sections raise
ParseError carrying the JSON path (or line/column for syntax errors), so a
broken file points at itself.  Serialization is deterministic, which makes
save -> load -> save byte-identical.
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from ..model import (GeneratorAsset, GeneratorKind, GridInterface, LineAsset,
                     LoadSpec, Node, PlanningInstance, RepresentativeDay,
                     SecurityLimits, validate_instance)


class ParseError(ValueError):
    """Malformed instance document; the message names the offending spot."""


class ValidationError(ValueError):
    """Structurally parseable but semantically invalid instance."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


_GEN_OPTIONAL = ("ramp_up", "ramp_down", "daily_capacity_factor", "inertia",
                 "damping", "gain", "droop", "turbine_fraction",
                 "turbine_time", "response_time")


def _fail(path: str, message: str) -> ParseError:
    return ParseError(f"{path}: {message}")


def _section(doc: dict, key: str, kind: type, path: str = "$"):
    if key not in doc:
        raise _fail(path, f"missing section {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise _fail(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def _check_keys(obj: dict, allowed: tuple, path: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise _fail(path, f"unknown field(s) {unknown}")


def _num(obj: dict, key: str, path: str, required: bool = True,
         default=None):
    if key not in obj:
        if required:
            raise _fail(path, f"missing field {key!r}")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"{path}.{key}", "expected a number")
    return float(value)


def _boolean(obj: dict, key: str, path: str, default: bool) -> bool:
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, bool):
        raise _fail(f"{path}.{key}", "expected true/false")
    return value


def _series(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in obj):
        raise _fail(path, "expected a list of numbers")
    return np.asarray(obj, dtype=float)


def _parse_node(obj, path: str) -> Node:
    _check_keys(obj, ("id", "is_pcc"), path)
    return Node(int(_num(obj, "id", path)),
                _boolean(obj, "is_pcc", path, False))


def _parse_line(obj, path: str) -> LineAsset:
    _check_keys(obj, ("from_node", "to_node", "r", "x", "s_max",
                      "built_initially", "candidate", "invest_cost"), path)
    return LineAsset(
        from_node=int(_num(obj, "from_node", path)),
        to_node=int(_num(obj, "to_node", path)),
        r=_num(obj, "r", path), x=_num(obj, "x", path),
        s_max=_num(obj, "s_max", path),
        built_initially=_boolean(obj, "built_initially", path, True),
        candidate=_boolean(obj, "candidate", path, False),
        invest_cost=_num(obj, "invest_cost", path, required=False,
                         default=0.0))


def _parse_generator(obj, path: str) -> GeneratorAsset:
    _check_keys(obj, ("id", "node", "kind", "capacity", "marginal_cost",
                      "invest_cost", "existing", "power_factor", "is_solar")
                + _GEN_OPTIONAL, path)
    if "id" not in obj or not isinstance(obj["id"], str):
        raise _fail(path, "missing or non-string field 'id'")
    kind_raw = obj.get("kind")
    try:
        kind = GeneratorKind(kind_raw)
    except ValueError:
        raise _fail(f"{path}.kind",
                    f"unknown generator kind {kind_raw!r}") from None
    extras = {name: _num(obj, name, path, required=False)
              for name in _GEN_OPTIONAL}
    return GeneratorAsset(
        id=obj["id"], node=int(_num(obj, "node", path)), kind=kind,
        capacity=_num(obj, "capacity", path),
        marginal_cost=_num(obj, "marginal_cost", path),
        invest_cost=_num(obj, "invest_cost", path, required=False,
                         default=0.0),
        existing=_boolean(obj, "existing", path, False),
        power_factor=_num(obj, "power_factor", path, required=False,
                          default=0.95),
        is_solar=_boolean(obj, "is_solar", path, False),
        **extras)


def _parse_load(obj, path: str) -> LoadSpec:
    _check_keys(obj, ("node", "power_factor", "nominal_kva",
                      "flexible_share", "shift_penalty",
                      "disconnect_penalty", "critical"), path)
    return LoadSpec(
        node=int(_num(obj, "node", path)),
        power_factor=_num(obj, "power_factor", path),
        nominal_kva=_num(obj, "nominal_kva", path, required=False,
                         default=0.0),
        flexible_share=_num(obj, "flexible_share", path, required=False,
                            default=0.0),
        shift_penalty=_num(obj, "shift_penalty", path, required=False,
                           default=0.0),
        disconnect_penalty=_num(obj, "disconnect_penalty", path,
                                required=False, default=150.0),
        critical=_boolean(obj, "critical", path, False))


def _parse_grid(obj, path: str) -> GridInterface:
    _check_keys(obj, ("import_price", "export_price", "import_limit",
                      "export_limit", "import_limit_q", "export_limit_q",
                      "frequency", "s_base"), path)
    return GridInterface(
        import_price=_series(obj.get("import_price"), f"{path}.import_price"),
        export_price=_series(obj.get("export_price"), f"{path}.export_price"),
        import_limit=_num(obj, "import_limit", path),
        export_limit=_num(obj, "export_limit", path),
        import_limit_q=_num(obj, "import_limit_q", path),
        export_limit_q=_num(obj, "export_limit_q", path),
        frequency=_num(obj, "frequency", path, required=False, default=50.0),
        s_base=_num(obj, "s_base", path, required=False, default=1000.0))


def _parse_day(obj, path: str) -> RepresentativeDay:
    _check_keys(obj, ("weight", "member_count", "load_kw", "solar_kw"), path)
    load_kw = {}
    for key, series in obj.get("load_kw", {}).items():
        try:
            node = int(key)
        except ValueError:
            raise _fail(f"{path}.load_kw",
                        f"non-integer node key {key!r}") from None
        load_kw[node] = _series(series, f"{path}.load_kw.{key}")
    solar_kw = {gid: _series(series, f"{path}.solar_kw.{gid}")
                for gid, series in obj.get("solar_kw", {}).items()}
    return RepresentativeDay(
        weight=_num(obj, "weight", path),
        load_kw=load_kw, solar_kw=solar_kw,
        member_count=int(_num(obj, "member_count", path, required=False,
                              default=0)))


def parse_instance(text: str) -> PlanningInstance:
    """Decode one JSON instance document.  Raises ParseError, never returns
    a half-built instance."""
    if not text.strip():
        raise ParseError("empty document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("$: top level must be an object")
    _check_keys(doc, ("name", "per_unit", "v_min", "v_max", "nodes", "lines",
                      "generators", "loads", "grid", "limits", "days"), "$")
    limits_obj = _section(doc, "limits", dict)
    _check_keys(limits_obj, ("rocof", "nadir", "steady_state"), "$.limits")
    return PlanningInstance(
        nodes=tuple(_parse_node(o, f"$.nodes[{i}]")
                    for i, o in enumerate(_section(doc, "nodes", list))),
        lines=tuple(_parse_line(o, f"$.lines[{i}]")
                    for i, o in enumerate(_section(doc, "lines", list))),
        generators=tuple(
            _parse_generator(o, f"$.generators[{i}]")
            for i, o in enumerate(_section(doc, "generators", list))),
        loads=tuple(_parse_load(o, f"$.loads[{i}]")
                    for i, o in enumerate(_section(doc, "loads", list))),
        grid=_parse_grid(_section(doc, "grid", dict), "$.grid"),
        limits=SecurityLimits(
            rocof=_num(limits_obj, "rocof", "$.limits"),
            nadir=_num(limits_obj, "nadir", "$.limits"),
            steady_state=_num(limits_obj, "steady_state", "$.limits")),
        days=tuple(_parse_day(o, f"$.days[{i}]")
                   for i, o in enumerate(doc.get("days", []))),
        v_min=float(doc.get("v_min", 0.95)),
        v_max=float(doc.get("v_max", 1.05)),
        per_unit=bool(doc.get("per_unit", False)),
        name=str(doc.get("name", "instance")))


def _encode_generator(gen: GeneratorAsset) -> dict:
    out = {
        "id": gen.id, "node": gen.node, "kind": gen.kind.value,
        "capacity": float(gen.capacity),
        "marginal_cost": float(gen.marginal_cost),
        "invest_cost": float(gen.invest_cost),
        "existing": gen.existing, "power_factor": float(gen.power_factor),
        "is_solar": gen.is_solar,
    }
    for name in _GEN_OPTIONAL:
        value = getattr(gen, name)
        if value is not None:
            out[name] = float(value)
    return out


def serialize_instance(instance: PlanningInstance) -> str:
    doc = {
        "name": instance.name,
        "per_unit": instance.per_unit,
        "v_min": float(instance.v_min),
        "v_max": float(instance.v_max),
        "nodes": [{"id": n.id, "is_pcc": n.is_pcc} for n in instance.nodes],
        "lines": [{
            "from_node": ln.from_node, "to_node": ln.to_node,
            "r": float(ln.r), "x": float(ln.x), "s_max": float(ln.s_max),
            "built_initially": ln.built_initially, "candidate": ln.candidate,
            "invest_cost": float(ln.invest_cost),
        } for ln in instance.lines],
        "generators": [_encode_generator(g) for g in instance.generators],
        "loads": [{
            "node": l.node, "power_factor": float(l.power_factor),
            "nominal_kva": float(l.nominal_kva),
            "flexible_share": float(l.flexible_share),
            "shift_penalty": float(l.shift_penalty),
            "disconnect_penalty": float(l.disconnect_penalty),
            "critical": l.critical,
        } for l in instance.loads],
        "grid": {
            "import_price": [float(v) for v in instance.grid.import_price],
            "export_price": [float(v) for v in instance.grid.export_price],
            "import_limit": float(instance.grid.import_limit),
            "export_limit": float(instance.grid.export_limit),
            "import_limit_q": float(instance.grid.import_limit_q),
            "export_limit_q": float(instance.grid.export_limit_q),
            "frequency": float(instance.grid.frequency),
            "s_base": float(instance.grid.s_base),
        },
        "limits": {
            "rocof": float(instance.limits.rocof),
            "nadir": float(instance.limits.nadir),
            "steady_state": float(instance.limits.steady_state),
        },
        "days": [{
            "weight": float(d.weight),
            "member_count": d.member_count,
            "load_kw": {str(n): [float(v) for v in s]
                        for n, s in sorted(d.load_kw.items())},
            "solar_kw": {g: [float(v) for v in s]
                         for g, s in sorted(d.solar_kw.items())},
        } for d in instance.days],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_instance(path) -> PlanningInstance:
    """Parse and validate an instance file."""
    with open(path, "r", encoding="utf-8") as handle:
        instance = parse_instance(handle.read())
    report = validate_instance(instance)
    if not report.ok:
        raise ValidationError(report)
    return instance


def save_instance(instance: PlanningInstance, path) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(serialize_instance(instance))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
