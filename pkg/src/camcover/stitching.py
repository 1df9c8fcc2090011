"""Turning per-vehicle observation streams into per-point area streams.

A participating vehicle logs four aligned streams: video frame ids, capture
times, locations, and compass headings.  The pipeline associates every sample
with the observation points currently in camera view, extracts maximal
relevance runs per point, cuts the video into virtual fragments (frame ranges
are referenced, never copied), and finally merges all fragments bound to one
point into a single playable track plus the full overlapping fragment list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import ObservationPoint, StreetGraph
from .sensing import CameraSpec, visibility_mask


@dataclass
class VehicleStreamBundle:
    """The four index-aligned streams captured by one vehicle."""

    vehicle_id: int
    time: np.ndarray       # (N,) seconds, strictly increasing
    location: np.ndarray   # (N, 2) meters
    compass: np.ndarray    # (N,) radians, travel heading
    video: np.ndarray      # (N,) opaque frame identifiers

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=np.float64)
        self.location = np.asarray(self.location, dtype=np.float64)
        self.compass = np.asarray(self.compass, dtype=np.float64)
        self.video = np.asarray(self.video)
        self.validate()

    def validate(self) -> None:
        n = len(self.time)
        if not (len(self.location) == len(self.compass) == len(self.video) == n):
            raise ValueError(
                f"misaligned bundle for vehicle {self.vehicle_id}: stream lengths "
                f"{len(self.time)}/{len(self.location)}/{len(self.compass)}/{len(self.video)}"
            )
        if n > 1 and not np.all(np.diff(self.time) > 0):
            raise ValueError(f"timestamps not strictly increasing for vehicle {self.vehicle_id}")

    def __len__(self) -> int:
        return len(self.time)


@dataclass(frozen=True)
class Fragment:
    """Maximal run of one vehicle observing one point, as a virtual video cut.

    A run of a single sample yields t_start == t_end.
    """

    vehicle_id: int
    point_id: int
    t_start: float
    t_end: float
    frame_first: int
    frame_last: int


@dataclass(frozen=True)
class TrackPiece:
    """Sub-interval of one fragment selected into the canonical track."""

    vehicle_id: int
    t_start: float
    t_end: float
    fragment: Fragment


@dataclass
class AreaStream:
    """Everything one observation point received: all fragments plus one track.

    canonical_track covers exactly the union of fragment intervals with no
    overlap; consecutive pieces abut where coverage hands over.
    """

    point_id: int
    fragments: list[Fragment]
    canonical_track: list[TrackPiece] = field(default_factory=list)

    def fragment_union(self) -> list[tuple[float, float]]:
        """Merged union of fragment time intervals."""
        return _merge_intervals([(f.t_start, f.t_end) for f in self.fragments])

    def track_union(self) -> list[tuple[float, float]]:
        return _merge_intervals([(p.t_start, p.t_end) for p in self.canonical_track])


def associate(bundle: VehicleStreamBundle, points: list[ObservationPoint],
              spec: CameraSpec, graph: StreetGraph, occlusion: bool = True
              ) -> list[set[int]]:
    """Stage 1: per-sample sets of observation points inside the camera view."""
    bundle.validate()
    if len(bundle) == 0 or not points:
        return [set() for _ in range(len(bundle))]
    coords = np.array([p.position for p in points], dtype=np.float64)
    ids = np.array([p.id for p in points])
    mask = visibility_mask(bundle.location, bundle.compass, spec, coords, graph, occlusion)
    return [set(ids[row].tolist()) for row in mask]


def relevance_intervals(associations: list[set[int]], time: np.ndarray
                        ) -> dict[int, list[tuple[float, float]]]:
    """Stage 2: maximal runs of consecutive samples per point, as closed intervals.

    Runs separated by at least one missing sample yield separate intervals.
    """
    time = np.asarray(time, dtype=np.float64)
    if len(associations) != len(time):
        raise ValueError(
            f"associations ({len(associations)}) not aligned with time ({len(time)})"
        )
    intervals: dict[int, list[tuple[float, float]]] = {}
    open_runs: dict[int, int] = {}
    previous: set[int] = set()
    for i, current in enumerate(associations):
        for pid in current - previous:
            open_runs[pid] = i
        for pid in previous - current:
            start = open_runs.pop(pid)
            intervals.setdefault(pid, []).append((float(time[start]), float(time[i - 1])))
        previous = current
    last = len(time) - 1
    for pid, start in sorted(open_runs.items()):
        intervals.setdefault(pid, []).append((float(time[start]), float(time[last])))
    return intervals


def truncate(bundle: VehicleStreamBundle,
             intervals: dict[int, list[tuple[float, float]]]) -> list[Fragment]:
    """Stage 3: cut the bundle's video into one virtual fragment per interval."""
    bundle.validate()
    fragments: list[Fragment] = []
    for pid, spans in intervals.items():
        for t_start, t_end in spans:
            k0 = int(np.searchsorted(bundle.time, t_start, side="left"))
            k1 = int(np.searchsorted(bundle.time, t_end, side="right")) - 1
            if k0 > k1:
                raise ValueError(
                    f"interval [{t_start}, {t_end}] for point {pid} contains no frames"
                )
            fragments.append(
                Fragment(bundle.vehicle_id, pid, t_start, t_end,
                         int(bundle.video[k0]), int(bundle.video[k1]))
            )
    return fragments


def combine(fragments: list[Fragment], point_id: int) -> AreaStream:
    """Stage 4: one area-associated stream out of many overlapping fragments.

    Fragments are kept in full, sorted by (t_start, vehicle_id).  The canonical
    track is built greedily: at each uncovered instant take the available
    fragment reaching furthest, ties broken toward the lower vehicle id.
    """
    for f in fragments:
        if f.point_id != point_id:
            raise ValueError(
                f"fragment of vehicle {f.vehicle_id} references point {f.point_id}, "
                f"not {point_id}"
            )
    ordered = sorted(fragments, key=lambda f: (f.t_start, f.vehicle_id))
    track: list[TrackPiece] = []
    i = 0
    n = len(ordered)
    while i < n:
        cursor = ordered[i].t_start
        while True:
            best = None
            scan = i
            while scan < n and ordered[scan].t_start <= cursor:
                f = ordered[scan]
                if f.t_end >= cursor and (
                    best is None
                    or f.t_end > best.t_end
                    or (f.t_end == best.t_end and f.vehicle_id < best.vehicle_id)
                ):
                    best = f
                scan += 1
            track.append(TrackPiece(best.vehicle_id, cursor, best.t_end, best))
            cursor = best.t_end
            while i < n and ordered[i].t_end <= cursor:
                i += 1
            if i >= n or ordered[i].t_start > cursor:
                break
    return AreaStream(point_id, ordered, track)


def stitch_bundles(bundles: list[VehicleStreamBundle], points: list[ObservationPoint],
                   spec: CameraSpec, graph: StreetGraph, occlusion: bool = True
                   ) -> dict[int, AreaStream]:
    """Full Stage 1-4 pipeline over many vehicles; one AreaStream per touched point."""
    per_point: dict[int, list[Fragment]] = {}
    for bundle in bundles:
        assoc = associate(bundle, points, spec, graph, occlusion)
        intervals = relevance_intervals(assoc, bundle.time)
        for fragment in truncate(bundle, intervals):
            per_point.setdefault(fragment.point_id, []).append(fragment)
    return {pid: combine(frs, pid) for pid, frs in sorted(per_point.items())}


def _merge_intervals(spans: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not spans:
        return []
    spans = sorted(spans)
    merged = [spans[0]]
    for start, end in spans[1:]:
        last_start, last_end = merged[-1]
        if start <= last_end:
            merged[-1] = (last_start, max(last_end, end))
        else:
            merged.append((start, end))
    return merged


# -- serialization -----------------------------------------------------------

def area_stream_to_jsonable(stream: AreaStream) -> dict:
    """Documented JSON shape; times in seconds from round start, 3 decimals."""
    return {
        "point_id": stream.point_id,
        "fragments": [
            {
                "vehicle_id": f.vehicle_id,
                "t_start": round(f.t_start, 3),
                "t_end": round(f.t_end, 3),
                "frame_first": f.frame_first,
                "frame_last": f.frame_last,
            }
            for f in stream.fragments
        ],
        "canonical_track": [
            {
                "vehicle_id": p.vehicle_id,
                "t_start": round(p.t_start, 3),
                "t_end": round(p.t_end, 3),
            }
            for p in stream.canonical_track
        ],
    }


def dump_area_streams(streams: dict[int, AreaStream], path) -> None:
    """Write all area streams of a round as a JSON array ordered by point id."""
    payload = [area_stream_to_jsonable(streams[pid]) for pid in sorted(streams)]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
