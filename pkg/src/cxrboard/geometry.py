"""Integer rectangle primitives shared by every module.

Conventions, fixed once here so downstream code never re-decides them:

* Pixel rectangles are half-open: ``(x0, y0, x1, y1)`` covers columns
  ``x0..x1-1`` and rows ``y0..y1-1``.  A rect is empty iff ``x1 <= x0`` or
  ``y1 <= y0``.
* Every float-to-pixel conversion goes through :func:`round_half_up`,
  which rounds ties toward positive infinity (``0.5 -> 1``, ``-0.5 -> 0``).
  Python's builtin ``round`` banker's-rounds and must not be used for
  coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties toward +infinity."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Rect:
    """Half-open integer pixel rectangle."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self) -> None:
        for v in (self.x0, self.y0, self.x1, self.y1):
            if not isinstance(v, int):
                raise TypeError(f"Rect coordinates must be int, got {type(v).__name__}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def is_empty(self) -> bool:
        return self.x1 <= self.x0 or self.y1 <= self.y0

    def area(self) -> int:
        if self.is_empty:
            return 0
        return self.width * self.height

    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains_point(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def contains_rect(self, other: Rect) -> bool:
        """True when ``other`` (non-empty) lies fully inside this rect."""
        if other.is_empty:
            return True
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )

    def intersect(self, other: Rect) -> Rect:
        """Intersection; may come back empty (check ``is_empty``)."""
        return Rect(
            max(self.x0, other.x0),
            max(self.y0, other.y0),
            min(self.x1, other.x1),
            min(self.y1, other.y1),
        )

    def union_bbox(self, other: Rect) -> Rect:
        """Smallest rect covering both; empty operands are ignored."""
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Rect(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )

    def overlaps(self, other: Rect) -> bool:
        return not self.intersect(other).is_empty

    def translate(self, dx: int, dy: int) -> Rect:
        return Rect(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def expand(self, factor: float) -> Rect:
        """Scale about the center by ``factor``.

        The same absolute margin is added (or removed, for factor < 1) on
        both sides of each axis: ``margin = round_half_up((factor-1)/2 * dim)``.
        Rounding the margin rather than the edges keeps the result centered,
        e.g. a 20px box expanded 1.25x grows by exactly 3px per side.
        """
        mx = round_half_up((factor - 1.0) / 2.0 * self.width)
        my = round_half_up((factor - 1.0) / 2.0 * self.height)
        return Rect(self.x0 - mx, self.y0 - my, self.x1 + mx, self.y1 + my)

    def clamp(self, bounds: Rect) -> Rect:
        """Clip to ``bounds``; identical to ``intersect`` but reads as intent."""
        return self.intersect(bounds)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    @staticmethod
    def from_tuple(t: tuple[int, int, int, int]) -> Rect:
        return Rect(int(t[0]), int(t[1]), int(t[2]), int(t[3]))


def image_rect(width: int, height: int) -> Rect:
    return Rect(0, 0, width, height)


def rects_union_area(rects: list[Rect]) -> int:
    """Exact area of a union of rects via coordinate-compressed sweep."""
    live = [r for r in rects if not r.is_empty]
    if not live:
        return 0
    xs = sorted({v for r in live for v in (r.x0, r.x1)})
    total = 0
    for xa, xb in zip(xs, xs[1:]):
        spans = sorted(
            (r.y0, r.y1) for r in live if r.x0 <= xa and xb <= r.x1
        )
        covered = 0
        cur_lo: int | None = None
        cur_hi = 0
        for lo, hi in spans:
            if cur_lo is None:
                cur_lo, cur_hi = lo, hi
            elif lo > cur_hi:
                covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_lo is not None:
            covered += cur_hi - cur_lo
        total += covered * (xb - xa)
    return total


def intersect_area_with_rects(rect: Rect, rects: list[Rect]) -> int:
    """Exact area of ``rect`` ∩ (union of ``rects``)."""
    clipped = [rect.intersect(r) for r in rects]
    return rects_union_area([c for c in clipped if not c.is_empty])
