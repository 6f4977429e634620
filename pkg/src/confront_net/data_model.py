"""Database schema: spatial objects, raw relations, loading and validation.

The input is two flat files (objects and relations, CSV or JSON) plus an
optional segments file carrying splittable objects' decompositions. A
loaded Database is immutable and fully validated: every endpoint
resolves, every raw type is in the vocabulary, ids are unique.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

from .errors import (DanglingEndpoint, DuplicateId, MalformedRecord,
                     UnknownRawType)
from .relation_types import EGAL, is_known_raw_type


class ObjectKind(Enum):
    PROPERTY = "Property"
    PARISH_OR_SECTOR = "ParishOrSector"
    BOROUGH = "Borough"
    DEFENSIVE_SYSTEM = "DefensiveSystem"
    GATE = "Gate"
    LIVERY = "Livery"
    GEOLOGICAL_LANDMARK = "GeologicalLandmark"
    STREET = "Street"
    EDIFICE = "Edifice"


class Dimensionality(Enum):
    PUNCTUAL = "Punctual"
    LINEAR = "Linear"
    SURFACE = "Surface"


class RelationOrigin(Enum):
    PRIMARY = "Primary"
    ADDITIONAL = "Additional"


# Kinds with a fixed dimensionality. Streets, geological landmarks and
# edifices take whatever their record says.
_FIXED_DIMS: dict[ObjectKind, frozenset[Dimensionality]] = {
    ObjectKind.PROPERTY: frozenset({Dimensionality.PUNCTUAL}),
    ObjectKind.GATE: frozenset({Dimensionality.PUNCTUAL}),
    ObjectKind.PARISH_OR_SECTOR: frozenset({Dimensionality.SURFACE}),
    ObjectKind.BOROUGH: frozenset({Dimensionality.SURFACE}),
    ObjectKind.LIVERY: frozenset({Dimensionality.SURFACE}),
    ObjectKind.DEFENSIVE_SYSTEM: frozenset({Dimensionality.LINEAR}),
}


@dataclass(frozen=True)
class Segment:
    """One ordered piece of a splittable object."""

    id: str
    coord: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise MalformedRecord("segment id must be non-empty")
        _check_coord(self.coord, f"segment {self.id!r}")
        if self.coord is not None and not isinstance(self.coord, tuple):
            object.__setattr__(self, "coord", tuple(self.coord))


def _check_coord(coord: Any, owner: str) -> None:
    if coord is None:
        return
    if len(coord) != 2 or not all(math.isfinite(c) for c in coord):
        raise MalformedRecord(f"{owner}: coordinates must be two finite numbers")


@dataclass(frozen=True)
class SpatialObject:
    id: str
    name: str
    kind: ObjectKind
    dim: Dimensionality
    coord: tuple[float, float] | None = None
    length_m: float | None = None
    parish: str | None = None
    inside_old_walls: bool | None = None
    declared: bool | None = None
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise MalformedRecord("object id must be non-empty")
        allowed = _FIXED_DIMS.get(self.kind)
        if allowed is not None and self.dim not in allowed:
            raise MalformedRecord(
                f"object {self.id!r}: kind {self.kind.value} cannot be "
                f"{self.dim.value}")
        _check_coord(self.coord, f"object {self.id!r}")
        if self.coord is not None and not isinstance(self.coord, tuple):
            object.__setattr__(self, "coord", tuple(self.coord))
        if self.length_m is not None:
            if not math.isfinite(self.length_m) or self.length_m <= 0:
                raise MalformedRecord(
                    f"object {self.id!r}: length_m must be a finite positive "
                    f"number, got {self.length_m!r}")
        if self.kind is ObjectKind.PROPERTY:
            if self.declared is None:
                object.__setattr__(self, "declared", True)
        elif self.declared is not None:
            raise MalformedRecord(
                f"object {self.id!r}: declared flag only applies to "
                f"Property objects")
        if not isinstance(self.segments, tuple):
            object.__setattr__(self, "segments", tuple(self.segments))
        if self.segments:
            if len(self.segments) < 2:
                raise MalformedRecord(
                    f"object {self.id!r}: a segment decomposition needs at "
                    f"least 2 segments")
            seen = set()
            for seg in self.segments:
                if seg.id in seen:
                    raise DuplicateId(
                        f"object {self.id!r}: duplicate segment id {seg.id!r}")
                seen.add(seg.id)
            if self.dim is Dimensionality.PUNCTUAL:
                raise MalformedRecord(
                    f"object {self.id!r}: punctual objects cannot carry "
                    f"segments")

    @property
    def is_street(self) -> bool:
        return self.kind is ObjectKind.STREET

    def segment_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.segments)


@dataclass(frozen=True)
class RelationRecord:
    id: str
    source_id: str
    target_id: str
    raw_type: str
    origin: RelationOrigin = RelationOrigin.PRIMARY
    target_segment: str | None = None

    def __post_init__(self) -> None:
        for name in ("id", "source_id", "target_id"):
            if not getattr(self, name):
                raise MalformedRecord(f"relation field {name} must be non-empty")
        if self.source_id == self.target_id:
            raise MalformedRecord(
                f"relation {self.id!r}: self-loop on {self.source_id!r} "
                f"(rejected for all types, Egal included)")
        if not is_known_raw_type(self.raw_type):
            raise UnknownRawType(
                f"relation {self.id!r}: unknown raw type {self.raw_type!r}")


@dataclass(frozen=True)
class Database:
    """Validated, immutable collection of objects and relations.

    Construct via from_parts() or load_database(); direct construction
    skips cross-record validation.
    """

    objects: dict[str, SpatialObject]
    relations: tuple[RelationRecord, ...]
    property_baseline: int

    @classmethod
    def from_parts(cls, objects: Iterable[SpatialObject],
                   relations: Iterable[RelationRecord]) -> "Database":
        index: dict[str, SpatialObject] = {}
        for obj in objects:
            if obj.id in index:
                raise DuplicateId(f"duplicate object id {obj.id!r}")
            index[obj.id] = obj
        rels: list[RelationRecord] = []
        seen_rel_ids: set[str] = set()
        for rel in relations:
            if rel.id in seen_rel_ids:
                raise DuplicateId(f"duplicate relation id {rel.id!r}")
            seen_rel_ids.add(rel.id)
            for endpoint in (rel.source_id, rel.target_id):
                if endpoint not in index:
                    raise DanglingEndpoint(
                        f"relation {rel.id!r} references missing object "
                        f"{endpoint!r}")
            if rel.target_segment is not None:
                target = index[rel.target_id]
                if rel.target_segment not in target.segment_ids():
                    raise DanglingEndpoint(
                        f"relation {rel.id!r}: segment "
                        f"{rel.target_segment!r} is not declared on object "
                        f"{rel.target_id!r}")
            if rel.origin is RelationOrigin.ADDITIONAL:
                kinds = {index[rel.source_id].kind, index[rel.target_id].kind}
                if kinds not in ({ObjectKind.STREET},
                                 {ObjectKind.STREET, ObjectKind.EDIFICE}):
                    raise MalformedRecord(
                        f"relation {rel.id!r}: Additional relations connect "
                        f"only street-street or edifice-street pairs")
            rels.append(rel)
        baseline = _property_baseline(index, rels)
        return cls(objects=index, relations=tuple(rels),
                   property_baseline=baseline)


class _UnionFind:
    """Union-find whose canonical representative is the smallest id."""

    def __init__(self, ids: Iterable[str]) -> None:
        self._parent = {i: i for i in ids}

    def find(self, x: str) -> str:
        parent = self._parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        keep, drop = (ra, rb) if ra < rb else (rb, ra)
        self._parent[drop] = keep

    def groups(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for i in self._parent:
            out.setdefault(self.find(i), []).append(i)
        for members in out.values():
            members.sort()
        return out


def _property_baseline(objects: Mapping[str, SpatialObject],
                       relations: Iterable[RelationRecord]) -> int:
    """Property count of the unfiltered full graph.

    Equality-linked records collapse into one vertex, so incidence is
    judged on canonical endpoints; relations collapsing to self-loops do
    not make their object a vertex.
    """
    uf = _UnionFind(objects)
    rels = list(relations)
    for rel in rels:
        if rel.raw_type == EGAL:
            uf.union(rel.source_id, rel.target_id)
    present: set[str] = set()
    for rel in rels:
        if rel.raw_type == EGAL or rel.origin is not RelationOrigin.PRIMARY:
            continue
        a, b = uf.find(rel.source_id), uf.find(rel.target_id)
        if a != b:
            present.add(a)
            present.add(b)
    return sum(1 for root in present
               if objects[root].kind is ObjectKind.PROPERTY)


# --- file I/O -------------------------------------------------------------

_OBJECT_HEADER = ("id", "name", "kind", "dim", "x", "y", "length_m",
                  "parish", "inside_old_walls", "declared")
_SEGMENT_HEADER = ("object_id", "segment_id", "order", "x", "y")
_RELATION_HEADER = ("id", "source_id", "target_id", "raw_type", "origin",
                    "target_segment")

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def _parse_bool(raw: str, *, path: str, line: int) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise MalformedRecord(f"expected a boolean, got {raw!r}",
                          path=path, line=line)


def _parse_float(raw: str, *, path: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise MalformedRecord(f"expected a number, got {raw!r}",
                              path=path, line=line) from None


def _parse_enum(enum_cls: type[Enum], raw: str, *, path: str,
                line: int) -> Any:
    for member in enum_cls:
        if member.value == raw:
            return member
    choices = ", ".join(m.value for m in enum_cls)
    raise MalformedRecord(
        f"expected one of {choices}, got {raw!r}", path=path, line=line)


def _parse_coord(xs: str, ys: str, *, path: str,
                 line: int) -> tuple[float, float] | None:
    if not xs and not ys:
        return None
    if not xs or not ys:
        raise MalformedRecord("x and y must be given together",
                              path=path, line=line)
    return (_parse_float(xs, path=path, line=line),
            _parse_float(ys, path=path, line=line))


def _read_csv(path: Path, header: tuple[str, ...]) -> list[tuple[int, dict[str, str]]]:
    rows: list[tuple[int, dict[str, str]]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise MalformedRecord("file is empty (header expected)",
                                  path=str(path)) from None
        if tuple(first) != header:
            raise MalformedRecord(
                f"bad header: expected {','.join(header)}", path=str(path),
                line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRecord(
                    f"expected {len(header)} fields, got {len(row)}",
                    path=str(path), line=lineno)
            rows.append((lineno, dict(zip(header, row))))
    return rows


def _wrap_record_error(exc: MalformedRecord, *, path: str,
                       line: int) -> MalformedRecord:
    if exc.path is None:
        return type(exc)(exc.args[0].split(" [")[0], path=path, line=line)
    return exc


def load_database(objects_path: str | Path, relations_path: str | Path,
                  segments_path: str | Path | None = None) -> Database:
    """Load and validate a database from CSV (or JSON) files.

    JSON inputs are detected by the .json suffix on objects_path;
    segments then live inline on the object records and segments_path
    must be omitted.
    """
    objects_path = Path(objects_path)
    relations_path = Path(relations_path)
    if objects_path.suffix == ".json":
        if segments_path is not None:
            raise MalformedRecord(
                "JSON input carries segments inline; segments_path must be "
                "omitted")
        return _load_json(objects_path, relations_path)
    segs: dict[str, list[Segment]] = {}
    seg_owner_order: list[str] = []
    if segments_path is not None:
        segments_path = Path(segments_path)
        seen_pairs: set[tuple[str, str]] = set()
        entries: list[tuple[int, int, str, Segment]] = []
        for lineno, row in _read_csv(segments_path, _SEGMENT_HEADER):
            spath = str(segments_path)
            key = (row["object_id"], row["segment_id"])
            if key in seen_pairs:
                raise DuplicateId(
                    f"duplicate segment {row['segment_id']!r} on object "
                    f"{row['object_id']!r} [{spath}:{lineno}]")
            seen_pairs.add(key)
            try:
                order = int(row["order"])
            except ValueError:
                raise MalformedRecord(
                    f"expected an integer order, got {row['order']!r}",
                    path=spath, line=lineno) from None
            coord = _parse_coord(row["x"], row["y"], path=spath, line=lineno)
            try:
                seg = Segment(id=row["segment_id"], coord=coord)
            except MalformedRecord as exc:
                raise _wrap_record_error(exc, path=spath, line=lineno) from None
            entries.append((order, lineno, row["object_id"], seg))
        entries.sort(key=lambda e: (e[2], e[0], e[1]))
        for _, _, owner, seg in entries:
            if owner not in segs:
                seg_owner_order.append(owner)
            segs.setdefault(owner, []).append(seg)

    objects: list[SpatialObject] = []
    object_ids: set[str] = set()
    opath = str(objects_path)
    for lineno, row in _read_csv(objects_path, _OBJECT_HEADER):
        oid = row["id"]
        if oid in object_ids:
            raise DuplicateId(f"duplicate object id {oid!r} [{opath}:{lineno}]")
        object_ids.add(oid)
        kind = _parse_enum(ObjectKind, row["kind"], path=opath, line=lineno)
        dim = _parse_enum(Dimensionality, row["dim"], path=opath, line=lineno)
        coord = _parse_coord(row["x"], row["y"], path=opath, line=lineno)
        length = (_parse_float(row["length_m"], path=opath, line=lineno)
                  if row["length_m"] else None)
        walls = (_parse_bool(row["inside_old_walls"], path=opath, line=lineno)
                 if row["inside_old_walls"] else None)
        declared = (_parse_bool(row["declared"], path=opath, line=lineno)
                    if row["declared"] else None)
        try:
            obj = SpatialObject(
                id=oid, name=row["name"], kind=kind, dim=dim, coord=coord,
                length_m=length, parish=row["parish"] or None,
                inside_old_walls=walls, declared=declared,
                segments=tuple(segs.get(oid, ())))
        except MalformedRecord as exc:
            raise _wrap_record_error(exc, path=opath, line=lineno) from None
        objects.append(obj)
    for owner in seg_owner_order:
        if owner not in object_ids:
            raise DanglingEndpoint(
                f"segments reference missing object {owner!r}")

    relations: list[RelationRecord] = []
    rpath = str(relations_path)
    for lineno, row in _read_csv(relations_path, _RELATION_HEADER):
        origin = _parse_enum(RelationOrigin, row["origin"] or "Primary",
                             path=rpath, line=lineno)
        try:
            rel = RelationRecord(
                id=row["id"], source_id=row["source_id"],
                target_id=row["target_id"], raw_type=row["raw_type"],
                origin=origin, target_segment=row["target_segment"] or None)
        except MalformedRecord as exc:
            raise _wrap_record_error(exc, path=rpath, line=lineno) from None
        except UnknownRawType as exc:
            raise UnknownRawType(f"{exc} [{rpath}:{lineno}]") from None
        relations.append(rel)
    return Database.from_parts(objects, relations)


def _load_json(objects_path: Path, relations_path: Path) -> Database:
    def read(path: Path) -> Any:
        try:
            with path.open(encoding="utf-8") as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc}",
                                  path=str(path)) from None

    raw_objects = read(objects_path)
    raw_relations = read(relations_path)
    if not isinstance(raw_objects, list) or not isinstance(raw_relations, list):
        raise MalformedRecord("JSON inputs must be arrays of records")
    objects = []
    for rec in raw_objects:
        try:
            segments = tuple(
                Segment(id=s["id"],
                        coord=tuple(s["coord"]) if s.get("coord") else None)
                for s in rec.get("segments") or ())
            objects.append(SpatialObject(
                id=rec["id"], name=rec.get("name", ""),
                kind=ObjectKind(rec["kind"]), dim=Dimensionality(rec["dim"]),
                coord=tuple(rec["coord"]) if rec.get("coord") else None,
                length_m=rec.get("length_m"), parish=rec.get("parish"),
                inside_old_walls=rec.get("inside_old_walls"),
                declared=rec.get("declared"), segments=segments))
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedRecord(
                f"bad object record {rec.get('id', '?')!r}: {exc}",
                path=str(objects_path)) from None
    relations = []
    for rec in raw_relations:
        try:
            relations.append(RelationRecord(
                id=rec["id"], source_id=rec["source_id"],
                target_id=rec["target_id"], raw_type=rec["raw_type"],
                origin=RelationOrigin(rec.get("origin", "Primary")),
                target_segment=rec.get("target_segment")))
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedRecord(
                f"bad relation record {rec.get('id', '?')!r}: {exc}",
                path=str(relations_path)) from None
    return Database.from_parts(objects, relations)


def _fmt_opt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_database(db: Database, objects_path: str | Path,
                  relations_path: str | Path,
                  segments_path: str | Path | None = None) -> None:
    """Write a database back out; inverse of load_database.

    CSV output needs segments_path whenever any object carries segments.
    """
    objects_path = Path(objects_path)
    relations_path = Path(relations_path)
    if objects_path.suffix == ".json":
        _save_json(db, objects_path, relations_path)
        return
    has_segments = any(o.segments for o in db.objects.values())
    if has_segments and segments_path is None:
        raise MalformedRecord(
            "segments present but no segments_path given")
    with objects_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_OBJECT_HEADER)
        for obj in db.objects.values():
            x = repr(obj.coord[0]) if obj.coord else ""
            y = repr(obj.coord[1]) if obj.coord else ""
            writer.writerow([
                obj.id, obj.name, obj.kind.value, obj.dim.value, x, y,
                _fmt_opt(obj.length_m), obj.parish or "",
                _fmt_opt(obj.inside_old_walls), _fmt_opt(obj.declared)])
    if segments_path is not None:
        with Path(segments_path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(_SEGMENT_HEADER)
            for obj in db.objects.values():
                for order, seg in enumerate(obj.segments):
                    x = repr(seg.coord[0]) if seg.coord else ""
                    y = repr(seg.coord[1]) if seg.coord else ""
                    writer.writerow([obj.id, seg.id, order, x, y])
    with relations_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RELATION_HEADER)
        for rel in db.relations:
            writer.writerow([
                rel.id, rel.source_id, rel.target_id, rel.raw_type,
                rel.origin.value, rel.target_segment or ""])


def _save_json(db: Database, objects_path: Path,
               relations_path: Path) -> None:
    objects = [{
        "id": o.id, "name": o.name, "kind": o.kind.value,
        "dim": o.dim.value, "coord": list(o.coord) if o.coord else None,
        "length_m": o.length_m, "parish": o.parish,
        "inside_old_walls": o.inside_old_walls, "declared": o.declared,
        "segments": [{"id": s.id,
                      "coord": list(s.coord) if s.coord else None}
                     for s in o.segments] or None,
    } for o in db.objects.values()]
    relations = [{
        "id": r.id, "source_id": r.source_id, "target_id": r.target_id,
        "raw_type": r.raw_type, "origin": r.origin.value,
        "target_segment": r.target_segment,
    } for r in db.relations]
    objects_path.write_text(json.dumps(objects, indent=2) + "\n",
                            encoding="utf-8")
    relations_path.write_text(json.dumps(relations, indent=2) + "\n",
                              encoding="utf-8")


def validate_database(db: Database) -> list[str]:
    """Non-fatal data-quality warnings, in deterministic order."""
    warnings: list[str] = []
    incident: set[str] = set()
    for rel in db.relations:
        incident.add(rel.source_id)
        incident.add(rel.target_id)
    for obj in db.objects.values():
        if obj.id not in incident:
            warnings.append(f"isolate: object {obj.id!r} has no relations")
    for obj in db.objects.values():
        if (obj.is_street and obj.dim is Dimensionality.LINEAR
                and obj.length_m is None):
            warnings.append(
                f"missing-length: Linear street {obj.id!r} has no length_m")
    for rel in db.relations:
        target = db.objects[rel.target_id]
        if target.segments and rel.target_segment is None:
            warnings.append(
                f"unassigned-segment: relation {rel.id!r} targets segmented "
                f"object {rel.target_id!r} without a target_segment")
    return warnings
