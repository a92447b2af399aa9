"""Exemplar class models and MAP classification.

The shape prior of a class is the empirical measure over its training
exemplars (equal weights): the class log-likelihood is the log-mean-exp over
exemplars of the correspondence-marginal kernel value.  Classification
maximizes the posterior over classes with a uniform class prior, so ranking
by class log-likelihood is ranking by posterior.

Exemplars are stored centered with unit RMS radius: the kernel is not exactly
invariant to template scale at finite b (the 1/b^2 term), so normalization
makes likelihoods comparable across classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as shape_io
from .likelihood import Regulators, best_correspondence, default_regulators
from .shapes import Shape, as_shape, normalize_rms, resample_arclength

AGGREGATE_MODES = ("mean", "max")

_CENTER_TOL = 1e-9


@dataclass(frozen=True)
class ClassModel:
    """One labeled class: preprocessed exemplars plus shared conventions."""

    label: str
    exemplars: tuple[Shape, ...]
    n: int
    regs: Regulators
    weight: float = 1.0  # reserved for non-uniform class priors; unused

    def __post_init__(self):
        if not self.exemplars:
            raise ValueError(f"class {self.label!r} has no exemplars")
        object.__setattr__(self, "exemplars", tuple(self.exemplars))
        for ex in self.exemplars:
            if ex.n != self.n:
                raise ValueError(f"class {self.label!r}: exemplar has {ex.n} points, expected {self.n}")
            if np.abs(ex.centroid()).max() > _CENTER_TOL:
                raise ValueError(f"class {self.label!r}: exemplar not centered")
            if abs(ex.rms_radius() - 1.0) > _CENTER_TOL:
                raise ValueError(f"class {self.label!r}: exemplar not unit-RMS normalized")


def preprocess_exemplar(shape: Shape, n: int) -> Shape:
    """Canonical template form: resampled to n points, centered, unit RMS."""
    return normalize_rms(resample_arclength(as_shape(shape), n))


def _group_labeled(labeled_shapes) -> dict[str, list[Shape]]:
    if hasattr(labeled_shapes, "items"):
        groups = {str(k): list(v) for k, v in labeled_shapes.items()}
    else:
        groups = {}
        for label, shape in labeled_shapes:
            groups.setdefault(str(label), []).append(shape)
    for label, shapes in groups.items():
        if not shapes:
            raise ValueError(f"label {label!r} has no shapes")
    return groups


def train(labeled_shapes, n: int, regs: Regulators | None = None, **reg_overrides) -> list[ClassModel]:
    """Build class models from (label, shape) pairs or a label->shapes mapping.

    When regs is omitted, defaults are derived from the preprocessed
    exemplars (zeta scales with their squared diameter); keyword overrides
    pin individual regulator fields.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if regs is not None and reg_overrides:
        raise TypeError("pass either regs or field overrides, not both")
    groups = _group_labeled(labeled_shapes)
    prepared = {
        label: [preprocess_exemplar(as_shape(s).with_label(label), n) for s in shapes]
        for label, shapes in sorted(groups.items())
    }
    if regs is None:
        exemplars = [ex for shapes in prepared.values() for ex in shapes]
        regs = default_regulators(*exemplars, **{k: v for k, v in reg_overrides.items() if v is not None})
    return [ClassModel(label=label, exemplars=tuple(shapes), n=n, regs=regs) for label, shapes in prepared.items()]


def class_log_likelihood(y, model: ClassModel, aggregate: str = "mean") -> float:
    """Log-likelihood of a shape under one class model.

    "mean" aggregates exemplars in probability space (log-sum-exp), matching
    the integral over the empirical shape prior; "max" gives
    nearest-exemplar behavior.
    """
    if aggregate not in AGGREGATE_MODES:
        raise ValueError(f"aggregate must be one of {AGGREGATE_MODES}, got {aggregate!r}")
    shape = as_shape(y)
    if shape.n != model.n:
        raise ValueError(f"incomparable n: shape has {shape.n} points, model uses {model.n}")
    values = np.array([best_correspondence(shape, ex, model.regs)[1] for ex in model.exemplars])
    if aggregate == "max":
        return float(values.max())
    m = values.max()
    return float(m + np.log(np.mean(np.exp(values - m))))


@dataclass(frozen=True)
class ClassificationResult:
    """Labels ranked by log-posterior, best first."""

    ranked: tuple[tuple[str, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "ranked", tuple((str(l), float(v)) for l, v in self.ranked))

    @property
    def winner(self) -> str:
        return self.ranked[0][0]

    def top(self, k: int) -> tuple[tuple[str, float], ...]:
        return self.ranked[:k]


def classify(y, models, aggregate: str = "mean") -> ClassificationResult:
    """Rank class models by posterior for one shape (uniform class prior).

    The input is resampled to the models' point count if needed.  Ties break
    lexicographically by label, so results are deterministic and invariant to
    the order of the model list.
    """
    models = list(models)
    if not models:
        raise ValueError("classify needs at least one class model")
    n = models[0].n
    regs = models[0].regs
    for m in models[1:]:
        if m.n != n:
            raise ValueError(f"inconsistent n across models: {m.n} vs {n} are incomparable")
        if m.regs != regs:
            raise ValueError("inconsistent regulators across models")
    shape = as_shape(y)
    if shape.n != n:
        shape = resample_arclength(shape, n)
    scores = [(m.label, class_log_likelihood(shape, m, aggregate=aggregate)) for m in models]
    scores.sort(key=lambda item: (-item[1], item[0]))
    return ClassificationResult(ranked=tuple(scores))


def save_models(models, path) -> None:
    models = list(models)
    payload = {
        "n": models[0].n,
        "regs": models[0].regs.to_dict(),
        "classes": [
            {
                "label": m.label,
                "weight": m.weight,
                "exemplars": [shape_io.shape_to_dict(ex) for ex in m.exemplars],
            }
            for m in models
        ],
    }
    Path(path).write_text(json.dumps(payload))


def load_models(path, regs_overrides: dict | None = None) -> list[ClassModel]:
    payload = json.loads(Path(path).read_text())
    regs = Regulators.from_dict(payload["regs"])
    if regs_overrides:
        regs = regs.with_overrides(**regs_overrides)
    return [
        ClassModel(
            label=entry["label"],
            exemplars=tuple(shape_io.shape_from_dict(d) for d in entry["exemplars"]),
            n=int(payload["n"]),
            regs=regs,
            weight=float(entry.get("weight", 1.0)),
        )
        for entry in payload["classes"]
    ]
