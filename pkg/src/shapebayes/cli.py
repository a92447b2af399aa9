"""Command-line interface.

Subcommands: train, classify, benchmark, sweep, verify, synth, quat3d.
Results print as JSON so they can be piped; relative dataset paths resolve
under $SHAPEMAP_DATA when it is set.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from .benchmark import BenchmarkSpec, run_benchmark, sweep_sample_count
from .classify import classify as classify_shape
from .classify import load_models, save_models, train as train_models
from .io import load_shape, save_shape, shape_to_dict
from .likelihood import Regulators, default_regulators, log_marginal_kernel, sufficient_stats
from .oracles import brute_marginal_2d, default_quadrature_spec_2d, expected_constant_offset_2d
from .quat3d import (
    SeriesDivergenceError,
    build_rotation_kernel,
    rotation_marginal_mc,
    rotation_marginal_series,
)
from .shapes import Shape, SimilarityTransform2, normalize_rms
from .synth import FAMILY_NAMES, synth_shape

_REG_OPTIONS = [
    click.option("--reg-b", type=float, default=None, help="Scale-prior regulator B."),
    click.option("--reg-alpha", type=float, default=None, help="Noise-prior exponent alpha."),
    click.option("--reg-zeta", type=float, default=None, help="Additive regulator zeta."),
    click.option("--corr-mode", type=click.Choice(["map", "marginal"]), default=None,
                 help="Correspondence handling: best offset or uniform sum."),
    click.option("--allow-reversal/--no-allow-reversal", default=None,
                 help="Also search the orientation-reversed template."),
]


def _with_reg_options(fn):
    for opt in reversed(_REG_OPTIONS):
        fn = opt(fn)
    return fn


def _reg_overrides(reg_b, reg_alpha, reg_zeta, corr_mode, allow_reversal) -> dict:
    return {
        "b": reg_b,
        "alpha": reg_alpha,
        "zeta": reg_zeta,
        "corr_mode": corr_mode,
        "allow_reversal": allow_reversal,
    }


@click.group()
def main():
    """Bayesian shape classification toolkit."""


@main.command()
@click.option("--in", "input_dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory with one subdirectory of shape files per label.")
@click.option("--n", "n_points", default=50, show_default=True, help="Resampling point count.")
@click.option("--out", "output", required=True, type=click.Path(dir_okay=False), help="Model file to write.")
@click.option("--invert", is_flag=True, help="PGM foreground is above the threshold (light on dark).")
@_with_reg_options
def train(input_dir, n_points, output, invert, reg_b, reg_alpha, reg_zeta, corr_mode, allow_reversal):
    """Train class models from a directory of labeled shapes."""
    pairs = []
    for class_dir in sorted(p for p in Path(input_dir).iterdir() if p.is_dir()):
        for f in sorted(class_dir.iterdir()):
            if f.suffix.lower() in (".json", ".csv", ".pgm"):
                pairs.append((class_dir.name, load_shape(f, invert=invert)))
    if not pairs:
        raise click.ClickException(f"no shape files found under {input_dir}")
    overrides = _reg_overrides(reg_b, reg_alpha, reg_zeta, corr_mode, allow_reversal)
    models = train_models(pairs, n=n_points, **overrides)
    save_models(models, output)
    click.echo(json.dumps({
        "model": str(output),
        "classes": [m.label for m in models],
        "exemplars": {m.label: len(m.exemplars) for m in models},
        "n": n_points,
        "regs": models[0].regs.to_dict(),
    }))


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--in", "shape_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--top", "top_k", type=int, default=None, help="Print only the top K labels.")
@click.option("--aggregate", type=click.Choice(["mean", "max"]), default="mean", show_default=True)
@click.option("--invert", is_flag=True, help="PGM foreground is above the threshold.")
@_with_reg_options
def classify(model_path, shape_path, top_k, aggregate, invert, reg_b, reg_alpha, reg_zeta, corr_mode, allow_reversal):
    """Classify one shape; prints ranked labels with log-posteriors as JSON lines."""
    overrides = {k: v for k, v in _reg_overrides(reg_b, reg_alpha, reg_zeta, corr_mode, allow_reversal).items()
                 if v is not None}
    models = load_models(model_path, regs_overrides=overrides or None)
    shape = load_shape(shape_path, invert=invert)
    result = classify_shape(shape, models, aggregate=aggregate)
    values = np.array([v for _, v in result.ranked])
    log_norm = values[0] + math.log(np.exp(values - values[0]).sum())
    ranked = result.ranked[:top_k] if top_k else result.ranked
    for label, value in ranked:
        click.echo(json.dumps({"label": label, "log_posterior": value - log_norm}))


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Benchmark spec JSON.")
@click.option("--out", "output", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Also write per-run CSV rows.")
def benchmark(spec_path, output, csv_path):
    """Run the train/test benchmark described by a spec file."""
    spec = BenchmarkSpec.from_json(spec_path)
    report = run_benchmark(spec)
    _emit_report(report, output, csv_path)


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Benchmark spec JSON with an n_points list.")
@click.option("--out", "output", type=click.Path(dir_okay=False), default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
def sweep(spec_path, output, csv_path):
    """Sweep the sample count and report the accuracy trend."""
    spec = BenchmarkSpec.from_json(spec_path)
    report = sweep_sample_count(spec)
    _emit_report(report, output, csv_path)


def _emit_report(report, output, csv_path):
    payload = report.to_dict()
    if output:
        Path(output).write_text(json.dumps(payload, indent=2))
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["run", "top1", "top2"])
            for i, (a, b) in enumerate(zip(report.per_run_top1, report.per_run_top2)):
                writer.writerow([i, a, b])
    click.echo(json.dumps(payload))


@main.group()
def verify():
    """Cross-check closed forms against the brute-force oracles."""


@verify.command()
@click.option("--trials", default=10, show_default=True, help="Random shape pairs to compare.")
@click.option("--tol", default=1e-3, show_default=True, help="Allowed spread of the per-pair offsets.")
@click.option("--n", "n_points", default=3, show_default=True, help="Points per shape (keep small).")
@click.option("--seed", default=0, show_default=True)
def eq2(trials, tol, n_points, seed):
    """Closed-form planar marginal vs quadrature: offsets must be constant."""
    rng = np.random.default_rng(seed)
    regs = Regulators(b=5.0, alpha=1.0, zeta=0.3)
    offsets = []
    for _ in range(trials):
        y = Shape(rng.normal(size=(n_points, 2)))
        v = normalize_rms(Shape(rng.normal(size=(n_points, 2))))
        closed = log_marginal_kernel(sufficient_stats(y, v), n_points, regs)
        brute = brute_marginal_2d(y, v, regs, spec=default_quadrature_spec_2d(y, v, regs), tol=tol / 4)
        offsets.append(closed - brute)
    spread = max(offsets) - min(offsets)
    predicted = expected_constant_offset_2d(n_points, 1.0, regs)
    ok = spread <= tol
    click.echo(json.dumps({
        "trials": trials,
        "n": n_points,
        "offsets": offsets,
        "spread": spread,
        "predicted_offset": predicted,
        "tol": tol,
        "pass": ok,
    }))
    if not ok:
        sys.exit(1)


@main.command()
@click.option("--family", type=click.Choice(list(FAMILY_NAMES)), required=True)
@click.option("--n", "n_points", default=64, show_default=True)
@click.option("--noise", default=0.0, show_default=True, help="Isotropic Gaussian noise per point.")
@click.option("--seed", default=0, show_default=True)
@click.option("--scale", default=1.0, show_default=True)
@click.option("--rotation", default=0.0, show_default=True, help="Rotation in radians.")
@click.option("--tx", default=0.0, show_default=True)
@click.option("--ty", default=0.0, show_default=True)
@click.option("--count", default=1, show_default=True, help="How many shapes to generate.")
@click.option("--out", "output", required=True, type=click.Path(), help="Output file, or directory when count > 1.")
def synth(family, n_points, noise, seed, scale, rotation, tx, ty, count, output):
    """Generate synthetic noisy observations of a template family."""
    g = SimilarityTransform2(rotation=rotation, scale=scale, translation=(tx, ty))
    out = Path(output)
    if count == 1 and not out.is_dir():
        shape = synth_shape(family, noise_sigma=noise, n=n_points, transform=g, seed=seed)
        save_shape(shape, out)
        click.echo(json.dumps({"written": [str(out)]}))
        return
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(count):
        shape = synth_shape(family, noise_sigma=noise, n=n_points, transform=g, seed=seed + i)
        path = out / f"{family}_{i:03d}.json"
        save_shape(shape, path)
        written.append(str(path))
    click.echo(json.dumps({"written": written}))


@main.group()
def quat3d():
    """3D rotation-marginalization kernel."""


@quat3d.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--template", "template_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma", required=True, type=float, help="Fixed noise scale.")
@click.option("--method", type=click.Choice(["mc", "series"]), default="mc", show_default=True)
@click.option("--samples", default=1_000_000, show_default=True, help="Monte-Carlo sample count.")
@click.option("--order", default=4, show_default=True, help="Series truncation order.")
@click.option("--seed", default=0, show_default=True)
def marginal(data_path, template_path, sigma, method, samples, order, seed):
    """Log marginal over rotations of the template against the data."""
    y = load_shape(data_path)
    v = load_shape(template_path)
    kernel = build_rotation_kernel(y, v, sigma)
    diag = {
        "method": method,
        "sigma": sigma,
        "n": kernel.n,
        "scale_factor": kernel.scale_factor,
        "eigenvalues": kernel.eigenvalues.tolist(),
    }
    if method == "mc":
        estimate = rotation_marginal_mc(kernel, samples=samples, seed=seed)
        diag.update({"log_marginal": estimate.value, "stderr": estimate.stderr, "samples": estimate.samples})
    else:
        try:
            diag.update({"log_marginal": rotation_marginal_series(kernel, order=order), "order": order})
        except SeriesDivergenceError as exc:
            click.echo(json.dumps({"error": str(exc), **diag}))
            sys.exit(1)
    click.echo(json.dumps(diag))
