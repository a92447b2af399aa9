"""Binary images and outer-boundary extraction.

The tracer walks the outer boundary of the largest 8-connected foreground
component through 4-adjacent pixel steps (Moore-style neighbor scan restricted
to the 4-neighborhood, Jacob-style stopping rule, deterministic start at the
top-left foreground pixel).  Restricting steps to 4-adjacency makes the walk
pass through pixels that are only diagonally exposed to the background, so the
traced polyline covers every boundary pixel of the component; regions joined
only through diagonal pinches are traced up to the 4-connected sub-component
containing the start pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .shapes import Shape, ShapeError


class NoForegroundError(ValueError):
    """Image has no foreground pixels."""


class DegenerateRegionError(ValueError):
    """Foreground region too small to carry a boundary polyline."""


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Boolean pixel grid; True marks foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"pixels must be a non-empty 2D grid, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def read_pgm(path, threshold: int = 128, invert: bool = False) -> BinaryImage:
    """Read a PGM file (P2 ascii or P5 binary) and threshold it.

    Foreground is ``value < threshold`` (dark shapes on a light background);
    pass ``invert=True`` for light shapes on dark.
    """
    data = Path(path).read_bytes()
    # header: magic, width, height, maxval, with '#' comments allowed
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval <= 0:
        raise ValueError(f"{path}: invalid maxval {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = ">u2" if maxval > 255 else np.uint8
        raw = np.frombuffer(data, dtype=dtype, offset=pos, count=width * height)
        values = raw.reshape(height, width).astype(int)
    else:
        values = np.array(data[pos:].split(), dtype=int).reshape(height, width)
    fg = values >= threshold if invert else values < threshold
    return BinaryImage(fg)


# 4-neighborhood steps in counter-clockwise order: E, N, W, S (rows grow down)
_STEPS = ((0, 1), (-1, 0), (0, -1), (1, 0))


def _trace(mask: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Walk the outer boundary from ``start``; returns (row, col) visits."""
    padded = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    p = (start[0] + 1, start[1] + 1)
    first = p
    direction = 3
    contour = [p]
    second: tuple[int, int] | None = None
    limit = 4 * int(mask.sum()) + 8
    for _ in range(limit):
        for turn in range(4):
            d = (direction + 3 + turn) % 4
            q = (p[0] + _STEPS[d][0], p[1] + _STEPS[d][1])
            if padded[q]:
                # stop once the walk re-enters the second pixel from the first;
                # the last collected element is then the start pixel again
                if second is None:
                    second = q
                elif q == second and p == first:
                    return [(r - 1, c - 1) for r, c in contour[:-1]]
                contour.append(q)
                p = q
                direction = d
                break
        else:
            # isolated pixel: no 4-neighbors
            return [(p[0] - 1, p[1] - 1)]
    raise RuntimeError("boundary trace failed to terminate")  # pragma: no cover


def extract_boundary(img: BinaryImage) -> Shape:
    """Extract the closed outer boundary of the foreground as a 2D shape.

    Uses the largest 8-connected component when several are present.  Points
    are (x, y) = (column, row) pixel centers, oriented counter-clockwise
    (positive shoelace area in the stored coordinates).
    """
    mask = img.pixels
    if not mask.any():
        raise NoForegroundError("no foreground")
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if count > 1:
        sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
        mask = labels == (1 + int(np.argmax(sizes)))
    if int(mask.sum()) == 1:
        raise DegenerateRegionError("degenerate region")
    rows, cols = np.nonzero(mask)
    top = rows.min()
    start = (int(top), int(cols[rows == top].min()))
    visits = _trace(mask, start)
    if len(visits) < 3:
        raise DegenerateRegionError("degenerate region")
    pts = np.array([(c, r) for r, c in visits], dtype=float)
    try:
        shape = Shape(pts, closed=True)
    except ShapeError as exc:  # pragma: no cover - trace never repeats adjacently
        raise DegenerateRegionError(f"degenerate region: {exc}") from exc
    if shape.signed_area() < 0:
        shape = shape.reverse()
    return shape
