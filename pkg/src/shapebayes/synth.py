"""Synthetic shape families and the noisy-observation generator.

Each family produces a closed template contour at roughly unit scale; the
generator resamples it, applies a similarity transform, and adds i.i.d.
isotropic Gaussian noise per point.  Everything is deterministic given the
seed.
"""

from __future__ import annotations

import numpy as np

from .shapes import Shape, SimilarityTransform2, apply_transform, resample_arclength

_PARAM_CURVE_SAMPLES = 256


def _ellipse(a: float = 1.0, b: float = 0.6) -> np.ndarray:
    t = np.linspace(0.0, 2.0 * np.pi, _PARAM_CURVE_SAMPLES, endpoint=False)
    return np.column_stack([a * np.cos(t), b * np.sin(t)])


def _rectangle(width: float = 1.6, height: float = 1.0) -> np.ndarray:
    w, h = width / 2.0, height / 2.0
    return np.array([[-w, -h], [w, -h], [w, h], [-w, h]])


def _star(points: int = 5, outer: float = 1.0, inner: float = 0.45) -> np.ndarray:
    k = np.arange(2 * points)
    r = np.where(k % 2 == 0, outer, inner)
    t = np.pi / 2 + k * np.pi / points
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


# block-letter outlines, drawn counter-clockwise in unit boxes
_LETTER_L = [(0.0, 0.0), (0.7, 0.0), (0.7, 0.28), (0.28, 0.28), (0.28, 1.0), (0.0, 1.0)]
_LETTER_T = [(0.36, 0.0), (0.64, 0.0), (0.64, 0.72), (1.0, 0.72), (1.0, 1.0), (0.0, 1.0), (0.0, 0.72), (0.36, 0.72)]
_LETTER_E = [
    (0.0, 0.0), (0.8, 0.0), (0.8, 0.22), (0.26, 0.22), (0.26, 0.39), (0.65, 0.39),
    (0.65, 0.61), (0.26, 0.61), (0.26, 0.78), (0.8, 0.78), (0.8, 1.0), (0.0, 1.0),
]

_FAMILIES = {
    "circle": lambda **kw: _ellipse(kw.get("radius", 1.0), kw.get("radius", 1.0)),
    "ellipse": lambda **kw: _ellipse(**kw),
    "square": lambda **kw: _rectangle(kw.get("side", 1.3), kw.get("side", 1.3)),
    "rectangle": lambda **kw: _rectangle(**kw),
    "star": lambda **kw: _star(**kw),
    "letter_l": lambda **kw: np.asarray(_LETTER_L, dtype=float),
    "letter_t": lambda **kw: np.asarray(_LETTER_T, dtype=float),
    "letter_e": lambda **kw: np.asarray(_LETTER_E, dtype=float),
}

FAMILY_NAMES = tuple(sorted(_FAMILIES))


def make_template(family: str, **params) -> Shape:
    """Canonical closed template contour for a family."""
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown shape family {family!r}; known: {', '.join(FAMILY_NAMES)}") from None
    return Shape(builder(**params), closed=True, label=family)


def synth_shape(
    family: str,
    noise_sigma: float = 0.0,
    n: int = 64,
    transform: SimilarityTransform2 | None = None,
    seed: int = 0,
    **params,
) -> Shape:
    """Noisy observation of a template: resample, transform, add noise."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    shape = resample_arclength(make_template(family, **params), n)
    if transform is not None:
        shape = apply_transform(shape, transform)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        pts = shape.points + rng.normal(scale=noise_sigma, size=shape.points.shape)
        shape = Shape(pts, closed=shape.closed, label=family)
    return shape
