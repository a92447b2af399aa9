"""Shape containers and planar geometry primitives.

A :class:`Shape` is an ordered polyline of 2D or 3D points with a closed/open
flag.  All operations here are pure: they return new shapes and never mutate
inputs (point arrays are frozen on construction), so values are freely
shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Raised for invalid shape data or geometric preconditions."""


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce to a float (n, 2) or (n, 3) array, validating finiteness."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ShapeError(f"points must be an (n, 2) or (n, 3) array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ShapeError(f"expected {dim}-dimensional points, got {arr.shape[1]}")
    if not np.isfinite(arr).all():
        raise ShapeError("points contain non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class Shape:
    """Ordered point sequence with a closed/open flag and optional label.

    Invariants enforced on construction: at least 3 points, uniform dimension
    (2 or 3), finite coordinates, and no two consecutive points identical
    (including the closing edge of a closed shape).
    """

    points: np.ndarray
    closed: bool = True
    label: str | None = None

    def __post_init__(self):
        arr = as_points(self.points)
        if len(arr) < 3:
            raise ShapeError(f"a shape needs at least 3 points, got {len(arr)}")
        deltas = np.diff(arr, axis=0)
        if self.closed:
            deltas = np.vstack([deltas, arr[0] - arr[-1]])
        if np.any(np.linalg.norm(deltas, axis=1) == 0.0):
            raise ShapeError("consecutive points must be distinct")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return len(self.points)

    def as_complex(self) -> np.ndarray:
        """2D points as complex numbers x + iy."""
        if self.dim != 2:
            raise ShapeError("complex representation requires a 2D shape")
        return self.points[:, 0] + 1j * self.points[:, 1]

    @classmethod
    def from_complex(cls, z, closed: bool = True, label: str | None = None) -> "Shape":
        z = np.asarray(z, dtype=complex)
        return cls(np.column_stack([z.real, z.imag]), closed=closed, label=label)

    def segment_lengths(self) -> np.ndarray:
        """Edge lengths in order, including the closing edge if closed."""
        deltas = np.diff(self.points, axis=0)
        if self.closed:
            deltas = np.vstack([deltas, self.points[0] - self.points[-1]])
        return np.linalg.norm(deltas, axis=1)

    def perimeter(self) -> float:
        return float(self.segment_lengths().sum())

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def rms_radius(self) -> float:
        """Root-mean-square distance of the points from their centroid."""
        d = self.points - self.centroid()
        return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))

    def diameter(self) -> float:
        """Largest pairwise point distance."""
        pts = self.points
        if len(pts) > 64:
            # pairwise distance only among hull vertices; same maximum
            try:
                from scipy.spatial import ConvexHull

                pts = pts[ConvexHull(pts).vertices]
            except Exception:
                pass
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff * diff).sum(axis=2).max()))

    def signed_area(self) -> float:
        """Shoelace area of a closed 2D shape; positive for counter-clockwise."""
        if self.dim != 2:
            raise ShapeError("signed area requires a 2D shape")
        x, y = self.points[:, 0], self.points[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def reverse(self) -> "Shape":
        """Same points in opposite traversal order (start point preserved)."""
        pts = np.vstack([self.points[:1], self.points[1:][::-1]])
        return Shape(pts, closed=self.closed, label=self.label)

    def with_label(self, label: str | None) -> "Shape":
        return Shape(self.points, closed=self.closed, label=label)


def as_shape(obj, closed: bool = True) -> Shape:
    """Validation helper: pass a Shape through, wrap an (n, d) array."""
    if isinstance(obj, Shape):
        return obj
    return Shape(as_points(obj), closed=closed)


@dataclass(frozen=True)
class SimilarityTransform2:
    """Planar similarity: rotate by ``rotation`` radians, multiply by
    ``scale`` (> 0), then add ``translation``."""

    rotation: float = 0.0
    scale: float = 1.0
    translation: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ShapeError(f"scale must be a positive finite number, got {self.scale}")
        if not (math.isfinite(self.rotation) and all(math.isfinite(t) for t in self.translation)):
            raise ShapeError("transform parameters must be finite")
        object.__setattr__(self, "translation", (float(self.translation[0]), float(self.translation[1])))

    @classmethod
    def identity(cls) -> "SimilarityTransform2":
        return cls()

    def as_complex(self) -> tuple[complex, complex]:
        """(w, t) with the action p -> w*p + t on complex points."""
        w = self.scale * complex(math.cos(self.rotation), math.sin(self.rotation))
        return w, complex(*self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, dim=2)
        z = pts[:, 0] + 1j * pts[:, 1]
        w, t = self.as_complex()
        z = w * z + t
        return np.column_stack([z.real, z.imag])

    def compose(self, inner: "SimilarityTransform2") -> "SimilarityTransform2":
        """Transform equal to applying ``inner`` first, then this one."""
        w_o, t_o = self.as_complex()
        w_i, t_i = inner.as_complex()
        w = w_o * w_i
        t = w_o * t_i + t_o
        return SimilarityTransform2(
            rotation=math.atan2(w.imag, w.real),
            scale=abs(w),
            translation=(t.real, t.imag),
        )


def apply_transform(shape: Shape, g: SimilarityTransform2) -> Shape:
    """Apply a similarity transform to every point of a 2D shape."""
    if shape.dim != 2:
        raise ShapeError("similarity transforms are defined for 2D shapes")
    return Shape(g.apply(shape.points), closed=shape.closed, label=shape.label)


def resample_arclength(shape: Shape, n: int) -> Shape:
    """Resample to ``n`` points equally spaced by arc length.

    The first output point is the original first vertex.  For closed shapes
    the spacing is perimeter/n around the full loop; for open shapes the n
    points span the polyline inclusively.  Start-point ambiguity on closed
    contours is deliberately left to the downstream correspondence search.
    """
    if n < 3:
        raise ShapeError(f"resampling needs n >= 3, got {n}")
    lengths = shape.segment_lengths()
    total = float(lengths.sum())
    if total <= 0.0:
        raise ShapeError("cannot resample a zero-length shape")
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    cum[-1] = total  # guard accumulated rounding
    verts = shape.points
    if shape.closed:
        verts = np.vstack([verts, verts[:1]])
        targets = np.arange(n) * (total / n)
    else:
        targets = np.linspace(0.0, total, n)
    out = np.empty((n, shape.dim))
    for k in range(shape.dim):
        out[:, k] = np.interp(targets, cum, verts[:, k])
    return Shape(out, closed=shape.closed, label=shape.label)


def center(shape: Shape) -> Shape:
    """Translate so the centroid sits at the origin."""
    return Shape(shape.points - shape.centroid(), closed=shape.closed, label=shape.label)


def normalize_rms(shape: Shape) -> Shape:
    """Center and scale to unit RMS radius (the classifier's canonical form)."""
    pts = shape.points - shape.centroid()
    r = np.sqrt(np.mean(np.sum(pts * pts, axis=1)))
    if r <= 0.0:
        raise ShapeError("cannot normalize a degenerate (single-point) shape")
    return Shape(pts / r, closed=shape.closed, label=shape.label)
