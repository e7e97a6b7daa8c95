"""Connected components, boundary tracing, and contour geometry.

All functions are pure with respect to their inputs. Points are (x, y)
integer pixel coordinates, y down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import (
    DegenerateContourError,
    DegenerateHullError,
    TooShortPathError,
    TooSmallToTraceError,
)
from .mask import ForegroundMask

_EIGHT = np.ones((3, 3), dtype=bool)

# Moore neighborhood in clockwise order starting north, entries (dx, dy).
_RING = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))

REFERENCE_MIN_AREA = 100
REFERENCE_PIXELS = 160 * 120


def default_min_area(width: int, height: int) -> int:
    """100 px at 160x120, scaled proportionally with resolution."""
    return max(1, round(REFERENCE_MIN_AREA * (width * height) / REFERENCE_PIXELS))


@dataclass(frozen=True)
class Component:
    """One 8-connected foreground region."""

    label: int
    area: int
    xmin: int
    xmax: int
    ymin: int
    ymax: int
    pixels: np.ndarray = field(repr=False)  # bbox-cropped bool array of own pixels

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True)
class ContourPath:
    """Closed 8-connected boundary of one component, clockwise.

    ``points`` lists each boundary pixel once per traversal pass; the first
    point is an 8-neighbor of the last. The centroid is the filled-region
    centroid, not the boundary-point mean; it is stored as an offset from
    the bbox corner so descriptor geometry is exactly translation-invariant.
    """

    points: np.ndarray  # (n, 2) int64, columns (x, y)
    centroid_offset: tuple[float, float]  # region centroid minus (xmin, ymin)

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.xmin + self.centroid_offset[0], self.ymin + self.centroid_offset[1])

    @property
    def xmin(self) -> int:
        return int(self.points[:, 0].min())

    @property
    def xmax(self) -> int:
        return int(self.points[:, 0].max())

    @property
    def ymin(self) -> int:
        return int(self.points[:, 1].min())

    @property
    def ymax(self) -> int:
        return int(self.points[:, 1].max())

    @property
    def h(self) -> int:
        return self.ymax - self.ymin

    @property
    def w(self) -> int:
        return self.xmax - self.xmin

    def translated(self, dx: int, dy: int) -> "ContourPath":
        return ContourPath(
            points=self.points + np.array([dx, dy], dtype=self.points.dtype),
            centroid_offset=self.centroid_offset,
        )


def _bits(mask) -> np.ndarray:
    return mask.bits if isinstance(mask, ForegroundMask) else np.asarray(mask, bool)


def clean_mask(mask: ForegroundMask) -> ForegroundMask:
    """One pass of 3x3 morphological opening (erode then dilate)."""
    opened = ndimage.binary_opening(_bits(mask), structure=_EIGHT)
    return ForegroundMask.from_array(opened)


def label_components(mask, min_area: int | None = None, opening: bool = False) -> list[Component]:
    """8-connected components of area >= min_area, in raster order of first pixel."""
    bits = _bits(mask)
    if opening:
        bits = ndimage.binary_opening(bits, structure=_EIGHT)
    height, width = bits.shape
    if min_area is None:
        min_area = default_min_area(width, height)

    labeled, count = ndimage.label(bits, structure=_EIGHT)
    if count == 0:
        return []
    flat = labeled.ravel()
    areas = np.bincount(flat, minlength=count + 1)
    labels_present, first_index = np.unique(flat, return_index=True)
    first_of = dict(zip(labels_present.tolist(), first_index.tolist()))
    slices = ndimage.find_objects(labeled)

    components: list[Component] = []
    for lab in sorted(range(1, count + 1), key=lambda l: first_of[l]):
        if areas[lab] < min_area:
            continue
        sy, sx = slices[lab - 1]
        components.append(
            Component(
                label=len(components) + 1,
                area=int(areas[lab]),
                xmin=sx.start,
                xmax=sx.stop - 1,
                ymin=sy.start,
                ymax=sy.stop - 1,
                pixels=(labeled[sy, sx] == lab),
            )
        )
    return components


_RING_INDEX = {d: i for i, d in enumerate(_RING)}


def _moore_step(grid: np.ndarray, cur: tuple[int, int], back: tuple[int, int]):
    """One tracing step: scan clockwise from the backtrack cell."""
    di = _RING_INDEX[(back[0] - cur[0], back[1] - cur[1])]
    for step in range(1, 9):
        dx, dy = _RING[(di + step) % 8]
        cand = (cur[0] + dx, cur[1] + dy)
        if grid[cand[1], cand[0]]:
            pdx, pdy = _RING[(di + step - 1) % 8]
            return cand, (cur[0] + pdx, cur[1] + pdy)
    return None


def trace_boundary(mask, component: Component) -> ContourPath:
    """Moore-neighbor tracing, clockwise from the topmost-then-leftmost pixel.

    Terminates on Jacob's stopping criterion: the walk stops on re-entering
    the start pixel such that the continuation would repeat the opening move
    (plain revisit checks spin forever on diagonal-tip starts; genuine
    multi-visit pinches at the start keep walking).
    """
    if component.area <= 3:
        raise TooSmallToTraceError(
            f"component {component.label} has area {component.area}; need > 3"
        )
    crop = component.pixels
    h, w = crop.shape
    grid = np.zeros((h + 2, w + 2), dtype=bool)
    grid[1:-1, 1:-1] = crop

    start_flat = int(np.flatnonzero(grid.ravel())[0])
    sy, sx = divmod(start_flat, w + 2)
    start = (sx, sy)
    start_back = (sx - 1, sy)  # west cell is outside: start is leftmost on its row

    first = _moore_step(grid, start, start_back)
    if first is None:
        raise TooSmallToTraceError("isolated pixel has no boundary")

    points = [start]
    cur, back = first
    closed = False
    for _ in range(8 * component.area + 64):
        if cur == start and _moore_step(grid, start, back) == first:
            closed = True
            break
        points.append(cur)
        cur, back = _moore_step(grid, cur, back)
    if not closed:
        raise TooSmallToTraceError("boundary trace did not close")

    pts = np.asarray(points, dtype=np.int64)
    pts[:, 0] += component.xmin - 1
    pts[:, 1] += component.ymin - 1
    ys, xs = np.nonzero(component.pixels)
    return ContourPath(points=pts, centroid_offset=(float(xs.mean()), float(ys.mean())))


def centroid(mask, component: Component) -> tuple[float, float]:
    """Arithmetic mean of the filled region's pixel coordinates."""
    ys, xs = np.nonzero(component.pixels)
    return (float(xs.mean()) + component.xmin, float(ys.mean()) + component.ymin)


def upper_segment(path: ContourPath, fraction: float = 1.0 / 3.0) -> np.ndarray:
    """Boundary points with y <= ymin + fraction*h, in traversal order.

    The subset is rotated to start at the first entry into the upper region,
    so a single spanning arc comes out contiguous.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    pts = path.points
    # compare in bbox-relative y so the selection is translation-invariant
    keep = (pts[:, 1] - path.ymin) <= fraction * path.h
    if keep.all():
        return pts.copy()
    if not keep.any():
        raise DegenerateContourError("upper segment is empty")
    entries = np.flatnonzero(keep & ~np.roll(keep, 1))
    order = np.roll(np.arange(len(pts)), -int(entries[0]))
    return pts[order[keep[order]]]


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise in y-down coordinates.

    Collinear boundary points are dropped; strictly convex vertices only.
    """
    pts = np.unique(np.asarray(points).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        raise DegenerateHullError(f"need at least 3 distinct points, have {len(pts)}")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHullError("all points collinear")
    # the chains give mathematical CCW (y up); reverse for y-down CCW
    return np.asarray(hull[::-1])


def polygon_area(polygon: np.ndarray) -> float:
    """Absolute shoelace area of a simple polygon."""
    poly = np.asarray(polygon, dtype=np.float64)
    if len(poly) < 3:
        raise DegenerateHullError("polygon needs at least 3 vertices")
    x, y = poly[:, 0], poly[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0)


def curvature_series(
    points: np.ndarray,
    smooth_window: int = 7,
    delta: int = 5,
    closed: bool = False,
) -> np.ndarray:
    """Signed curvature per point of a digitized path.

    Coordinates are smoothed by a centered moving average, derivatives taken
    by central differences with spacing ``delta``, and curvature computed as
    (x'y'' - x''y') / (x'^2 + y'^2)^(3/2). Closed paths wrap around; open
    sub-paths clamp indices at the ends.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if smooth_window < 1 or smooth_window % 2 == 0:
        raise ValueError("smooth_window must be a positive odd integer")
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if n <= 2 * delta + smooth_window:
        raise TooShortPathError(
            f"path of {n} points too short for delta={delta}, window={smooth_window}"
        )

    half = smooth_window // 2
    mode = "wrap" if closed else "edge"
    kernel = np.full(smooth_window, 1.0 / smooth_window)
    if half:
        xs = np.convolve(np.pad(pts[:, 0], half, mode=mode), kernel, mode="valid")
        ys = np.convolve(np.pad(pts[:, 1], half, mode=mode), kernel, mode="valid")
    else:
        xs, ys = pts[:, 0], pts[:, 1]

    idx = np.arange(n)
    if closed:
        fwd = (idx + delta) % n
        bwd = (idx - delta) % n
    else:
        fwd = np.minimum(idx + delta, n - 1)
        bwd = np.maximum(idx - delta, 0)

    x1 = (xs[fwd] - xs[bwd]) / (2.0 * delta)
    y1 = (ys[fwd] - ys[bwd]) / (2.0 * delta)
    x2 = (xs[fwd] - 2.0 * xs + xs[bwd]) / (delta * delta)
    y2 = (ys[fwd] - 2.0 * ys + ys[bwd]) / (delta * delta)

    denom = np.power(x1 * x1 + y1 * y1, 1.5)
    safe = np.where(denom > 0.0, denom, 1.0)
    return np.where(denom > 0.0, (x1 * y2 - x2 * y1) / safe, 0.0)


def count_local_minima(series: np.ndarray, neighborhood: int = 5) -> int:
    """Strict local minima of |series| within +-neighborhood; plateaus count zero."""
    if neighborhood < 1:
        raise ValueError("neighborhood must be >= 1")
    v = np.abs(np.asarray(series, dtype=np.float64))
    n = len(v)
    count = 0
    for i in range(n):
        lo = max(0, i - neighborhood)
        hi = min(n, i + neighborhood + 1)
        others = np.concatenate([v[lo:i], v[i + 1 : hi]])
        if others.size and v[i] < others.min():
            count += 1
    return count


def primary_contour(mask, min_area: int | None = None) -> ContourPath:
    """Trace the largest labeled component; convenience for corpus masks."""
    comps = label_components(mask, min_area=min_area)
    if not comps:
        raise DegenerateContourError("no component of sufficient area")
    biggest = max(comps, key=lambda c: c.area)
    return trace_boundary(mask, biggest)
