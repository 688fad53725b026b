"""Command line interface.

Exit codes: 0 success, 2 validation error, 3 numerical/degeneracy error,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .beam import BeamSpec, beam_benchmark, beam_compliance_analytic, benchmark_loads, default_benchmark_grid
from .compliance import Experiment, identify, prune, symmetrize, to_stiffness
from .errors import FieldFileError, NumericalError, StiffidError, ValidationError
from .estimators import get_estimator
from .fieldgen import NOISE_PRESETS, GridSpec, NoiseSpec, add_noise, apply_rigid, inject_outliers, make_grid, \
    simulate_experiment
from .geometry import LinearityWarning
from .stats import SignificanceConfig, deflection_covariance, estimate_sigma, outlier_indices
from .studies import STUDIES, StudyConfig, benchmark_summary, run_study, write_benchmark_tables


def _noise(args):
    if getattr(args, "noise_preset", None):
        return NoiseSpec.preset(args.noise_preset, args.seed)
    return NoiseSpec(args.sigma, args.seed)


def cmd_gen_field(args):
    grid = GridSpec(args.kind, args.extent, args.step, args.normal_axis, tuple(args.center))
    field = apply_rigid(make_grid(grid), args.t, np.radians(args.phi_deg), args.mode)
    noise = _noise(args)
    field = add_noise(field, noise)
    if args.outliers > 0:
        field, _ = inject_outliers(field, args.outliers, args.outlier_magnitude, noise.sigma, args.seed + 1)
    io.write_field(field, args.out)
    print(f"wrote {field.n} nodes to {args.out}", file=sys.stderr)


def _fit_field(field, estimator, outlier_percent):
    est = get_estimator(estimator)
    fit = est(field)
    removed = np.array([], dtype=int)
    if outlier_percent > 0:
        removed = outlier_indices(fit, outlier_percent)
        keep = np.ones(field.n, dtype=bool)
        keep[removed] = False
        field = field.subset(keep)
        fit = est(field)
    return field, fit, removed


def _fit_report(field, fit, removed, estimator):
    res = fit.residuals
    sigma_hat = estimate_sigma([res])
    cov = deflection_covariance(field, sigma_hat)
    out = {
        "estimator": estimator,
        "n_nodes": field.n,
        "t_mm": fit.t,
        "phi_rad": fit.phi,
        "phi_deg": np.degrees(fit.phi),
        "std_t_mm": np.sqrt(np.diag(cov.cov_t)),
        "std_phi_rad": np.sqrt(np.diag(cov.cov_phi)),
        "std_phi_deg": np.degrees(np.sqrt(np.diag(cov.cov_phi))),
        "sigma_hat_mm": sigma_hat,
        "residual_sum_sq_mm2": fit.residual_sum_sq,
        "residual_rms_mm": float(np.sqrt(np.mean(res ** 2))),
        "residual_max_abs_mm": float(np.max(np.abs(res))),
        "removed_nodes": removed,
    }
    if fit.rotation_matrix is not None:
        out["rotation_matrix"] = fit.rotation_matrix
    return out


def cmd_estimate(args):
    field = io.read_field(args.field)
    field, fit, removed = _fit_field(field, args.estimator, args.outlier_percent)
    io.write_json(_fit_report(field, fit, removed, args.estimator), args.out)


def cmd_identify(args):
    entries = io.read_manifest(args.manifest)
    config = SignificanceConfig(args.k_multiplier)
    fits, fields, per_exp = [], [], []
    for load, path in entries:
        field, fit, removed = _fit_field(io.read_field(path), args.estimator, args.outlier_percent)
        fits.append(fit)
        fields.append(field)
        per_exp.append({"label": load.label, "F_N": load.F, "M_Nmm": load.M, "field": str(path),
                        "t_mm": fit.t, "phi_rad": fit.phi, "phi_deg": np.degrees(fit.phi),
                        "n_nodes": field.n, "removed_nodes": removed})
    sigma_hat = estimate_sigma([f.residuals for f in fits])
    experiments = [Experiment(load, fit.deflection, deflection_covariance(f, 1.0).at_sigma(sigma_hat))
                   for (load, _), fit, f in zip(entries, fits, fields)]
    raw = identify(experiments)
    pruned = prune(raw, config)
    final = symmetrize(pruned)
    report = {
        "experiments": per_exp,
        "sigma_hat_mm": sigma_hat,
        "k_multiplier": config.k,
        "k": raw.k,
        "std": raw.std,
        "ci": raw.ci(config.k),
        "significant": pruned.significant,
        "k_pruned": pruned.k,
        "k_symmetric": final.k,
    }
    try:
        K, lam = to_stiffness(final)
        report["K"] = K
        report["K_min_eigenvalue"] = lam
    except NumericalError as exc:
        report["K"] = None
        report["K_error"] = str(exc)
    io.write_json(report, args.out)


def _study_config(args):
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise FieldFileError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise FieldFileError(f"{args.config}: invalid JSON ({exc})") from exc
    for key in ("study", "seed", "trials", "estimator", "outlier_percent", "k_multiplier", "sigma"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    if "study" not in d:
        raise ValidationError("no study given (use --study or a config file)")
    return StudyConfig.from_dict(d)


def cmd_study(args):
    config = _study_config(args)
    summary = run_study(config, args.out_dir, figures=args.figures)
    if args.out_dir is None:
        io.write_json(summary)


def cmd_beam_bench(args):
    spec = BeamSpec(L=args.length, b=args.width, h=args.height, E=args.youngs_modulus, nu=args.poisson)
    noise = _noise(args)
    config = SignificanceConfig(args.k_multiplier)
    grid = default_benchmark_grid()
    rep = beam_benchmark(spec, grid, noise, outlier_percent=args.outlier_percent, config=config,
                         estimator=args.estimator, mode=args.mode)
    summary = benchmark_summary(rep)
    if args.out_dir:
        out = Path(args.out_dir)
        write_benchmark_tables(rep, out)
        io.write_json(summary, out / "summary.json")
        if args.figures:
            from .plotting import plot_compliance
            plot_compliance(rep, out / "compliance.png")
    else:
        io.write_json(summary)
    if args.export_manifest:
        export_beam_manifest(spec, grid, noise, args.export_manifest, args.mode)


def export_beam_manifest(spec, grid, noise, directory, mode="exact"):
    """Write the six simulated benchmark fields plus a manifest for ``identify``."""
    directory = Path(directory)
    truth = beam_compliance_analytic(spec)
    entries = []
    for e, load in enumerate(benchmark_loads()):
        f = simulate_experiment(truth, load, grid, NoiseSpec(noise.sigma, noise.seed + e), mode)
        name = f"{load.label.lower()}.json"
        io.write_field(f, directory / name)
        entries.append((load, name))
    io.write_manifest(directory / "manifest.json", entries)
    return directory / "manifest.json"


def build_parser():
    p = argparse.ArgumentParser(prog="stiffid", description="Rigid deflection and compliance identification "
                                                            "from displacement fields.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-field", help="generate a synthetic displacement field")
    g.add_argument("--kind", choices=["cubic", "planar"], default="cubic")
    g.add_argument("--extent", type=float, default=10.0, help="grid extent a [mm]")
    g.add_argument("--step", type=float, default=1.0, help="mesh step h [mm]")
    g.add_argument("--normal-axis", choices=["x", "y", "z"], default="x")
    g.add_argument("--center", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar=("X", "Y", "Z"))
    g.add_argument("--t", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar=("TX", "TY", "TZ"),
                   help="translation [mm]")
    g.add_argument("--phi-deg", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar=("RX", "RY", "RZ"),
                   help="rotation vector [deg]")
    g.add_argument("--mode", choices=["exact", "linearized", "elementary"], default="exact")
    g.add_argument("--sigma", type=float, default=0.0, help="noise std [mm]")
    g.add_argument("--noise-preset", choices=sorted(NOISE_PRESETS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--outliers", type=float, default=0.0, help="fraction of nodes to contaminate")
    g.add_argument("--outlier-magnitude", type=float, default=10.0, help="outlier size in multiples of sigma")
    g.add_argument("--out", required=True, help="output path (.json or .csv)")
    g.set_defaults(func=cmd_gen_field)

    e = sub.add_parser("estimate", help="estimate the rigid deflection of one field")
    e.add_argument("field")
    e.add_argument("--estimator", default="lin", help="lin, lin-full, svd+, svd-, svd± (or svd+-)")
    e.add_argument("--outlier-percent", type=float, default=0.0)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_estimate)

    i = sub.add_parser("identify", help="identify the compliance matrix from an experiment manifest")
    i.add_argument("manifest")
    i.add_argument("--estimator", default="lin")
    i.add_argument("--outlier-percent", type=float, default=0.10)
    i.add_argument("--k-multiplier", type=float, default=3.0)
    i.add_argument("--out", default="-")
    i.set_defaults(func=cmd_identify)

    s = sub.add_parser("study", help="run an accuracy study")
    s.add_argument("--config", help="StudyConfig JSON file")
    s.add_argument("--study", choices=STUDIES)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--estimator")
    s.add_argument("--outlier-percent", type=float)
    s.add_argument("--k-multiplier", type=float)
    s.add_argument("--sigma", type=float)
    s.add_argument("--out-dir")
    s.add_argument("--figures", action="store_true", help="also render PNG figures into --out-dir")
    s.set_defaults(func=cmd_study)

    b = sub.add_parser("beam-bench", help="cantilever beam compliance benchmark")
    b.add_argument("--length", type=float, default=1000.0)
    b.add_argument("--width", type=float, default=10.0)
    b.add_argument("--height", type=float, default=10.0)
    b.add_argument("--youngs-modulus", type=float, default=2.0e5)
    b.add_argument("--poisson", type=float, default=0.266)
    b.add_argument("--sigma", type=float, default=NOISE_PRESETS["parabolic-2mm"])
    b.add_argument("--noise-preset", choices=sorted(NOISE_PRESETS))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--estimator", default="lin")
    b.add_argument("--outlier-percent", type=float, default=0.10)
    b.add_argument("--k-multiplier", type=float, default=3.0)
    b.add_argument("--mode", choices=["exact", "linearized", "elementary"], default="exact")
    b.add_argument("--out-dir")
    b.add_argument("--figures", action="store_true")
    b.add_argument("--export-manifest", metavar="DIR", help="also write the simulated fields and a manifest")
    b.set_defaults(func=cmd_beam_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "figures", False) and not getattr(args, "out_dir", None):
        print("stiffid: --figures requires --out-dir", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinearityWarning)
            args.func(args)
    except StiffidError as exc:
        print(f"stiffid: error: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code in (2, 3, 4) else 2
    except OSError as exc:
        print(f"stiffid: I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
