"""Labeled-trace data model, dataset store and JSON I/O.

A trace file holds one scene: per-object kinematic arrays (`xs`, `ys`, `ts`,
`poses`, `angles`) plus per-timestep `actions`, mirroring the field layout of
2 Hz driving-dataset dumps.  All arrays have length T; `null` marks absent
timesteps.  `(init)`/`(end)` padding tokens in action arrays are stripped to
absent actions at load time.

Presence comes in two granularities.  A timestep has a *position* when both
`xs` and `ys` are set; contiguous-run lengths (and hence trajectory-length
filtering) are computed over positions.  A timestep has a *complete sample*
when `xs`, `ys`, `poses` and `angles` are all set; predicate evaluation
treats anything less as absent.  Rows where the orientation fields are
ragged relative to the position load with a warning; rows where `xs`/`ys`
disagree with each other are rejected.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .config import BehaviorMap, MARKER_TOKENS
from .errors import AlphabetError, InvariantError, SchemaError

TS_TOLERANCE = 1e-6
QUAT_NORM_TOLERANCE = 1e-6

REGION_KINDS = ("road", "lane", "intersection", "sidewalk", "other")


@dataclass(frozen=True)
class KinematicSample:
    x: float
    y: float
    pose: tuple  # unit quaternion (w, x, y, z)
    yaw: float  # radians in (-pi, pi]


@dataclass(frozen=True)
class MapRegion:
    name: str
    kind: str
    polygon: tuple  # ((x, y), ...), >= 3 vertices
    heading: float | None = None

    def validate(self):
        if self.kind not in REGION_KINDS:
            raise InvariantError(f"region {self.name}: unknown kind {self.kind!r}")
        if len(self.polygon) < 3:
            raise InvariantError(f"region {self.name}: polygon needs >= 3 vertices")
        if abs(_polygon_area(self.polygon)) < 1e-12:
            raise InvariantError(f"region {self.name}: polygon has zero area")
        if not _polygon_is_simple(self.polygon):
            raise InvariantError(f"region {self.name}: polygon self-intersects")


def _polygon_area(poly):
    area = 0.0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        area += x1 * y2 - x2 * y1
    return area / 2.0


def _segments_cross(p1, p2, p3, p4):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(v) < 1e-12:
            return 0
        return 1 if v > 0 else -1

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _polygon_is_simple(poly):
    n = len(poly)
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(a1, a2, poly[j], poly[(j + 1) % n]):
                return False
    return True


@dataclass
class ObjectTrack:
    id: str
    cls: str  # label class, e.g. "vehicle.car", "human.pedestrian.adult"
    desc: str
    xs: list
    ys: list
    poses: list
    yaws: list
    actions: list

    @property
    def T(self) -> int:
        return len(self.xs)

    def has_position(self, t: int) -> bool:
        return self.xs[t] is not None and self.ys[t] is not None

    def has_sample(self, t: int) -> bool:
        return (
            self.xs[t] is not None
            and self.ys[t] is not None
            and self.poses[t] is not None
            and self.yaws[t] is not None
        )

    def sample_at(self, t: int) -> KinematicSample | None:
        if not self.has_sample(t):
            return None
        return KinematicSample(self.xs[t], self.ys[t], tuple(self.poses[t]), self.yaws[t])

    def position_at(self, t: int):
        if not self.has_position(t):
            return None
        return (self.xs[t], self.ys[t])

    def runs(self):
        """Contiguous position-present runs as (start, length) pairs."""
        out = []
        start = None
        for t in range(self.T):
            if self.has_position(t):
                if start is None:
                    start = t
            elif start is not None:
                out.append((start, t - start))
                start = None
        if start is not None:
            out.append((start, self.T - start))
        return out

    def __eq__(self, other):
        if not isinstance(other, ObjectTrack):
            return NotImplemented
        return (
            self.id == other.id
            and self.cls == other.cls
            and self.desc == other.desc
            and self.xs == other.xs
            and self.ys == other.ys
            and [None if p is None else list(p) for p in self.poses]
            == [None if p is None else list(p) for p in other.poses]
            and self.yaws == other.yaws
            and self.actions == other.actions
        )


def longest_run(track: ObjectTrack) -> int:
    """Maximum number of consecutive timesteps with present samples."""
    best = 0
    for _, length in track.runs():
        best = max(best, length)
    return best


@dataclass
class LabeledTrace:
    id: str
    dt: float
    T: int
    ego_id: str
    tracks: list
    regions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def track(self, track_id: str) -> ObjectTrack:
        for tr in self.tracks:
            if tr.id == track_id:
                return tr
        raise KeyError(track_id)

    @property
    def ego(self) -> ObjectTrack:
        return self.track(self.ego_id)

    def __eq__(self, other):
        if not isinstance(other, LabeledTrace):
            return NotImplemented
        return (
            self.id == other.id
            and abs(self.dt - other.dt) < TS_TOLERANCE
            and self.T == other.T
            and self.ego_id == other.ego_id
            and self.tracks == other.tracks
            and self.regions == other.regions
        )


@dataclass
class Dataset:
    traces: list
    class_index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.class_index:
            self.class_index = build_class_index(self.traces)


def build_class_index(traces) -> dict:
    index: dict = {}
    for trace in traces:
        for track in trace.tracks:
            index.setdefault(track.cls, []).append((trace.id, track.id, longest_run(track)))
    return index


def index_dataset(ds: Dataset, m: int) -> dict:
    """class_index restricted to tracks whose longest run is at least m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out: dict = {}
    for cls, entries in ds.class_index.items():
        kept = [e for e in entries if e[2] >= m]
        if kept:
            out[cls] = kept
    return out


def _expect(obj, key, types, pointer):
    if key not in obj:
        raise SchemaError(f"{pointer}/{key}", "missing field")
    value = obj[key]
    if not isinstance(value, types):
        raise SchemaError(f"{pointer}/{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _float_array(values, T, pointer, allow_null=True):
    if not isinstance(values, list):
        raise SchemaError(pointer, "expected array")
    if len(values) != T:
        raise SchemaError(pointer, f"expected length {T}, got {len(values)}")
    out = []
    for i, v in enumerate(values):
        if v is None:
            if not allow_null:
                raise SchemaError(f"{pointer}/{i}", "null not allowed")
            out.append(None)
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(float(v))
        else:
            raise SchemaError(f"{pointer}/{i}", f"expected number, got {type(v).__name__}")
    return out


def _load_track(obj, T, dt, behavior_map, pointer, warnings):
    tid = _expect(obj, "id", str, pointer)
    cls = _expect(obj, "type", str, pointer)
    desc = obj.get("desc", "")
    if not isinstance(desc, str):
        raise SchemaError(f"{pointer}/desc", "expected string")
    xs = _float_array(_expect(obj, "xs", list, pointer), T, f"{pointer}/xs")
    ys = _float_array(_expect(obj, "ys", list, pointer), T, f"{pointer}/ys")
    yaws = _float_array(_expect(obj, "angles", list, pointer), T, f"{pointer}/angles")

    if "ts" in obj:
        ts = _float_array(obj["ts"], T, f"{pointer}/ts", allow_null=False)
        for t, value in enumerate(ts):
            if abs(value - t * dt) > TS_TOLERANCE:
                warnings.append(
                    f"{pointer}/ts/{t}: timestamp {value} deviates from t*dt={t * dt}"
                )
                break

    raw_poses = _expect(obj, "poses", list, pointer)
    if len(raw_poses) != T:
        raise SchemaError(f"{pointer}/poses", f"expected length {T}, got {len(raw_poses)}")
    poses = []
    for i, q in enumerate(raw_poses):
        if q is None:
            poses.append(None)
            continue
        if not (isinstance(q, list) and len(q) == 4):
            raise SchemaError(f"{pointer}/poses/{i}", "expected quaternion [w,x,y,z]")
        q = tuple(float(c) for c in q)
        norm = math.sqrt(sum(c * c for c in q))
        if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
            raise InvariantError(f"{pointer}/poses/{i}: quaternion norm {norm} is not 1")
        poses.append(q)

    raw_actions = _expect(obj, "actions", list, pointer)
    if len(raw_actions) != T:
        raise SchemaError(f"{pointer}/actions", f"expected length {T}, got {len(raw_actions)}")
    actions = []
    for i, a in enumerate(raw_actions):
        if a is None:
            actions.append(None)
        elif isinstance(a, str):
            if a in MARKER_TOKENS:
                actions.append(None)
            elif behavior_map.is_action(a):
                actions.append(a)
            else:
                raise AlphabetError(f"{pointer}/actions/{i}: unknown action label {a!r}")
        else:
            raise SchemaError(f"{pointer}/actions/{i}", "expected string or null")

    for t in range(T):
        has_x, has_y = xs[t] is not None, ys[t] is not None
        if has_x != has_y:
            raise InvariantError(f"{pointer}: partial sample row at t={t} (xs/ys disagree)")
        has_pos = has_x
        has_pose, has_yaw = poses[t] is not None, yaws[t] is not None
        if has_pos != has_pose or has_pos != has_yaw:
            warnings.append(
                f"{pointer}: ragged orientation at t={t} "
                f"(position={has_pos}, pose={has_pose}, yaw={has_yaw}); "
                "timestep treated as incomplete"
            )

    return ObjectTrack(id=tid, cls=cls, desc=desc, xs=xs, ys=ys, poses=poses, yaws=yaws, actions=actions)


def trace_from_dict(data, behavior_map: BehaviorMap | None = None) -> LabeledTrace:
    behavior_map = behavior_map or BehaviorMap()
    if not isinstance(data, dict):
        raise SchemaError("", "trace file must hold a JSON object")
    trace_id = _expect(data, "id", str, "")
    dt = float(_expect(data, "dt", (int, float), ""))
    if dt <= 0:
        raise SchemaError("/dt", "dt must be positive")
    T = _expect(data, "T", int, "")
    if T < 0:
        raise SchemaError("/T", "T must be non-negative")
    ego_id = _expect(data, "ego_id", str, "")
    raw_tracks = _expect(data, "tracks", list, "")

    warnings: list = []
    tracks = [
        _load_track(obj, T, dt, behavior_map, f"/tracks/{i}", warnings)
        for i, obj in enumerate(raw_tracks)
    ]
    ids = [tr.id for tr in tracks]
    if len(set(ids)) != len(ids):
        raise SchemaError("/tracks", "duplicate track ids")
    if sum(1 for tr in tracks if tr.id == ego_id) != 1:
        raise SchemaError("/ego_id", f"exactly one track must have id {ego_id!r}")

    regions = []
    for i, obj in enumerate(data.get("regions") or []):
        pointer = f"/regions/{i}"
        name = _expect(obj, "name", str, pointer)
        kind = _expect(obj, "kind", str, pointer)
        poly = _expect(obj, "polygon", list, pointer)
        vertices = []
        for j, pt in enumerate(poly):
            if not (isinstance(pt, list) and len(pt) == 2):
                raise SchemaError(f"{pointer}/polygon/{j}", "expected [x, y]")
            vertices.append((float(pt[0]), float(pt[1])))
        heading = obj.get("heading")
        region = MapRegion(name=name, kind=kind, polygon=tuple(vertices),
                           heading=None if heading is None else float(heading))
        region.validate()
        regions.append(region)

    return LabeledTrace(id=trace_id, dt=dt, T=T, ego_id=ego_id, tracks=tracks,
                        regions=regions, warnings=warnings)


def load_trace(path, behavior_map: BehaviorMap | None = None) -> LabeledTrace:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from exc
    return trace_from_dict(data, behavior_map)


def trace_to_dict(trace: LabeledTrace) -> dict:
    data = {
        "id": trace.id,
        "dt": trace.dt,
        "T": trace.T,
        "ego_id": trace.ego_id,
        "tracks": [
            {
                "id": tr.id,
                "type": tr.cls,
                "desc": tr.desc,
                "xs": tr.xs,
                "ys": tr.ys,
                "ts": [t * trace.dt for t in range(trace.T)],
                "poses": [None if p is None else list(p) for p in tr.poses],
                "angles": tr.yaws,
                "actions": tr.actions,
            }
            for tr in trace.tracks
        ],
    }
    if trace.regions:
        data["regions"] = [
            {
                "name": r.name,
                "kind": r.kind,
                "polygon": [list(p) for p in r.polygon],
                **({"heading": r.heading} if r.heading is not None else {}),
            }
            for r in trace.regions
        ]
    return data


def save_trace(trace: LabeledTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_dict(trace), fh)
        fh.write("\n")


TRACE_SUFFIX = ".trace.json"


def load_dataset(directory, behavior_map: BehaviorMap | None = None) -> Dataset:
    """Load every *.trace.json under `directory` (shared map.json optional)."""
    names = sorted(n for n in os.listdir(directory) if n.endswith(TRACE_SUFFIX))
    shared_regions = []
    map_path = os.path.join(directory, "map.json")
    if os.path.exists(map_path):
        with open(map_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        for i, obj in enumerate(data.get("regions") or []):
            region = MapRegion(
                name=obj["name"],
                kind=obj["kind"],
                polygon=tuple((float(p[0]), float(p[1])) for p in obj["polygon"]),
                heading=obj.get("heading"),
            )
            region.validate()
            shared_regions.append(region)
    traces = []
    for name in names:
        trace = load_trace(os.path.join(directory, name), behavior_map)
        if shared_regions and not trace.regions:
            trace.regions = list(shared_regions)
        traces.append(trace)
    traces.sort(key=lambda tr: tr.id)
    return Dataset(traces=traces)
