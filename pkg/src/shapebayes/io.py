"""Shape file formats.

JSON: ``{"dim": 2|3, "closed": bool, "label": str?, "points": [[x, y(, z)], ...]}``.
Plain CSV (one point per row) is accepted for 2D shapes and read as a closed
contour.  PGM images are routed through boundary extraction.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .images import extract_boundary, read_pgm
from .shapes import Shape


def shape_to_dict(shape: Shape) -> dict:
    d = {"dim": shape.dim, "closed": shape.closed, "points": shape.points.tolist()}
    if shape.label is not None:
        d["label"] = shape.label
    return d


def shape_from_dict(d: dict) -> Shape:
    pts = np.asarray(d["points"], dtype=float)
    dim = int(d.get("dim", pts.shape[1]))
    if pts.shape[1] != dim:
        raise ValueError(f"shape file claims dim={dim} but points are {pts.shape[1]}-dimensional")
    return Shape(pts, closed=bool(d.get("closed", True)), label=d.get("label"))


def save_shape(shape: Shape, path) -> None:
    Path(path).write_text(json.dumps(shape_to_dict(shape)))


def load_shape(path, threshold: int = 128, invert: bool = False) -> Shape:
    """Load a shape from .json, .csv, or .pgm (boundary of the silhouette)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".json":
        return shape_from_dict(json.loads(path.read_text()))
    if suffix == ".csv":
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
        pts = np.array([[float(a), float(b)] for a, b in rows])
        return Shape(pts, closed=True)
    if suffix == ".pgm":
        return extract_boundary(read_pgm(path, threshold=threshold, invert=invert))
    raise ValueError(f"unsupported shape file type: {path.name}")
