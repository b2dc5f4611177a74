"""Measurement series, vertices and layer documents.

Documents are immutable values; edits go through dataclasses.replace and
bump the series version (the collaboration layer owns that discipline).
"""
from __future__ import annotations

import math
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Optional, Sequence

from ..errors import ValidationFailed


class SeriesKind(str, Enum):
    DISTANCE = "distance"
    HEIGHT = "height"
    ANGLE = "angle"
    AREA = "area"
    VOLUME = "volume"
    PROFILE = "profile"
    POLYGON = "polygon"
    ANNOTATION = "annotation"


# vertex-count rules: (minimum, exact?)
_VERTEX_RULES = {
    SeriesKind.DISTANCE: (2, False),
    SeriesKind.HEIGHT: (2, True),
    SeriesKind.ANGLE: (3, True),
    SeriesKind.AREA: (3, False),
    SeriesKind.VOLUME: (1, True),
    SeriesKind.PROFILE: (2, False),
    SeriesKind.POLYGON: (3, False),
    SeriesKind.ANNOTATION: (1, True),
}


def _kind_name(kind: SeriesKind) -> str:
    return kind.value.capitalize()


@dataclass(frozen=True)
class Vertex3:
    position: tuple[float, float, float]
    snapped: bool = False
    snap_node: Optional[str] = None
    extras: Mapping[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if len(self.position) != 3:
            raise ValidationFailed("vertex position must have 3 coordinates")
        if not all(math.isfinite(c) for c in self.position):
            raise ValidationFailed("vertex position must be finite")
        if self.snapped and not self.snap_node:
            raise ValidationFailed("snapped vertex needs a snap node code")


@dataclass(frozen=True)
class MeasurementSeries:
    id: str
    kind: SeriesKind
    vertices: tuple[Vertex3, ...]
    label: str = ""
    color: tuple[int, int, int] = (255, 255, 0)
    version: int = 1
    author: str = ""
    profile_width: Optional[float] = None
    box_extent: Optional[tuple[float, float, float]] = None
    yaw: float = 0.0
    extras: Mapping[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        try:
            uuid.UUID(self.id)
        except (ValueError, AttributeError, TypeError):
            raise ValidationFailed(f"series id {self.id!r} is not a UUID")
        minimum, exact = _VERTEX_RULES[self.kind]
        n = len(self.vertices)
        if exact and n != minimum:
            raise ValidationFailed(
                f"{_kind_name(self.kind)} requires {minimum} "
                f"vert{'ex' if minimum == 1 else 'ices'}, got {n}")
        if n < minimum:
            raise ValidationFailed(
                f"{_kind_name(self.kind)} requires at least {minimum} "
                f"vertices, got {n}")
        for v in self.vertices:
            v.validate()
        if len(self.color) != 3 or any(
                not isinstance(c, int) or not 0 <= c <= 255
                for c in self.color):
            raise ValidationFailed("color must be three ints in 0..255")
        if self.version < 0:
            raise ValidationFailed("version must be non-negative")
        if self.kind is SeriesKind.PROFILE:
            if self.profile_width is None or not self.profile_width > 0:
                raise ValidationFailed("Profile requires a positive width")
        if self.kind is SeriesKind.VOLUME:
            if self.box_extent is None or len(self.box_extent) != 3:
                raise ValidationFailed("Volume requires a 3-component box extent")
            if not all(math.isfinite(e) for e in self.box_extent):
                raise ValidationFailed("Volume extent must be finite")
            if not math.isfinite(self.yaw):
                raise ValidationFailed("Volume yaw must be finite")

    def bumped(self) -> "MeasurementSeries":
        return replace(self, version=self.version + 1)


@dataclass(frozen=True)
class LayerDocument:
    id: str
    name: str = ""
    base_version: int = 0
    series: tuple[MeasurementSeries, ...] = ()
    plane_refs: tuple[str, ...] = ()
    extras: Mapping[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        try:
            uuid.UUID(self.id)
        except (ValueError, AttributeError, TypeError):
            raise ValidationFailed(f"layer id {self.id!r} is not a UUID")
        seen = set()
        for s in self.series:
            if s.id in seen:
                raise ValidationFailed(f"duplicate series id {s.id}")
            seen.add(s.id)
            s.validate()

    def get(self, series_id: str) -> Optional[MeasurementSeries]:
        for s in self.series:
            if s.id == series_id:
                return s
        return None


def new_series(kind: SeriesKind | str,
               positions: Sequence[Sequence[float]],
               **kwargs: Any) -> MeasurementSeries:
    """Convenience constructor with a fresh id and raw (unsnapped) vertices."""
    kind = SeriesKind(kind)
    vertices = tuple(Vertex3(tuple(float(c) for c in p)) for p in positions)
    series = MeasurementSeries(id=str(uuid.uuid4()), kind=kind,
                               vertices=vertices, **kwargs)
    series.validate()
    return series
