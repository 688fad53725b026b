"""Monte Carlo and sweep studies of the deflection estimators.

* ``table2`` - translation recovery on noiseless fields over translation amplitudes
* ``table3`` - rotation linearization error over rotation amplitudes, per estimator
* ``noise-study`` - repeated noisy identifications: error moments and histograms
* ``beam-bench`` - the cantilever compliance benchmark
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats as sps

from . import io
from .beam import BeamSpec, beam_benchmark, default_benchmark_grid
from .errors import ValidationError
from .estimators import canonical_estimator_name, d_matrix, get_estimator
from .fieldgen import GridSpec, NoiseSpec, add_noise, apply_rigid, make_grid
from .geometry import LinearityWarning
from .stats import SignificanceConfig, filter_outliers

STUDIES = ("table2", "table3", "noise-study", "beam-bench")
TABLE2_AMPLITUDES = (0.01, 0.1, 1.0, 10.0)
TABLE3_AMPLITUDES = (0.01, 0.1, 1.0, 5.0)
TABLE2_METHODS = ("svd", "lin")
TABLE3_METHODS = ("svd+", "svd-", "svd±", "lin")
HIST_BINS = 20


@dataclass
class StudyConfig:
    study: str = "noise-study"
    grid: Optional[GridSpec] = None
    amplitudes: Optional[list] = None
    sigma: float = 5e-5
    trials: int = 1000
    seed: int = 0
    estimator: str = "lin"
    outlier_percent: float = 0.0
    k_multiplier: float = 3.0
    translation: float = 1.0
    rotation_deg: float = 0.1
    rotation_mode: str = "elementary"

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValidationError(f"unknown study {self.study!r}; expected one of {', '.join(STUDIES)}")
        if int(self.trials) < 1:
            raise ValidationError("trials must be >= 1")
        if isinstance(self.grid, dict):
            self.grid = GridSpec(**self.grid)
        if self.grid is None:
            self.grid = default_benchmark_grid() if self.study == "beam-bench" else GridSpec()
        self.estimator = canonical_estimator_name(self.estimator)
        SignificanceConfig(self.k_multiplier)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown study config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        if "grid" in d and isinstance(d["grid"], dict):
            g = dict(d["grid"])
            if "center" in g:
                g["center"] = tuple(g["center"])
            d["grid"] = GridSpec(**g)
        return cls(**d)

    def to_dict(self):
        return asdict(self)


def _max_abs(x):
    return float(np.max(np.abs(x)))


def run_table2(config):
    """Translation error (mm, max over components) on noiseless fields, no rotation."""
    base = make_grid(config.grid)
    rows = []
    for a in config.amplitudes or TABLE2_AMPLITUDES:
        t = np.full(3, float(a))
        f = apply_rigid(base, t, np.zeros(3), config.rotation_mode)
        for m in TABLE2_METHODS:
            fit = get_estimator(m)(f)
            rows.append({"method": m.upper(), "amplitude_mm": float(a), "error_mm": _max_abs(fit.t - t)})
    return rows


def run_table3(config):
    """Rotation error (deg, max over components) for phi = (b, b, b) on noiseless fields."""
    base = make_grid(config.grid)
    rows = []
    for b in config.amplitudes or TABLE3_AMPLITUDES:
        phi = np.radians(np.full(3, float(b)))
        t = np.full(3, config.translation)
        f = apply_rigid(base, t, phi, config.rotation_mode)
        for m in TABLE3_METHODS:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinearityWarning)
                fit = get_estimator(m)(f)
            rows.append({"method": m.upper(), "amplitude_deg": float(b),
                         "error_deg": float(np.degrees(_max_abs(fit.phi - phi)))})
    return rows


@dataclass
class NoiseStudyResult:
    errors_t: np.ndarray      # trials x 3, mm
    errors_phi: np.ndarray    # trials x 3, deg
    sigma: float
    n: int
    d_diag: np.ndarray

    @property
    def predicted_std_t(self):
        return self.sigma / np.sqrt(self.n)

    @property
    def predicted_std_phi_deg(self):
        return np.degrees(self.sigma / np.sqrt(self.d_diag))

    def moments(self):
        out = {}
        for name, e in (("t", self.errors_t), ("phi", self.errors_phi)):
            out[name] = {
                "mean": e.mean(axis=0),
                "std": e.std(axis=0, ddof=1),
                "rms": np.sqrt(np.mean(e ** 2, axis=0)),
                "skewness": sps.skew(e, axis=0),
                "excess_kurtosis": sps.kurtosis(e, axis=0, fisher=True),
            }
        return out

    def histograms(self, bins=HIST_BINS):
        """{(quantity, axis): (edges, counts)} for every error component."""
        out = {}
        for name, e in (("t", self.errors_t), ("phi", self.errors_phi)):
            for j, ax in enumerate("xyz"):
                counts, edges = np.histogram(e[:, j], bins=bins)
                out[(name, ax)] = (edges, counts)
        return out


def run_noise_study(config):
    """Repeat estimation on independently contaminated copies of one field.

    Trial ``i`` uses noise seed ``config.seed + i``.
    """
    base = make_grid(config.grid)
    t = np.full(3, config.translation)
    phi = np.radians(np.full(3, config.rotation_deg))
    clean = apply_rigid(base, t, phi, config.rotation_mode)
    est = get_estimator(config.estimator)
    et = np.empty((config.trials, 3))
    ep = np.empty((config.trials, 3))
    for i in range(config.trials):
        f = add_noise(clean, NoiseSpec(config.sigma, config.seed + i))
        fit = est(f)
        if config.outlier_percent > 0:
            fit = est(filter_outliers(f, fit, config.outlier_percent))
        et[i] = fit.t - t
        ep[i] = np.degrees(fit.phi - phi)
    return NoiseStudyResult(et, ep, config.sigma, base.n, np.diag(d_matrix(base)))


def run_study(config, out_dir=None, figures=False):
    """Run a study; with ``out_dir`` write CSV tables, histograms and summary.json there.

    Returns the JSON-ready summary.
    """
    summary = {"config": config.to_dict()}
    out = Path(out_dir) if out_dir is not None else None
    if config.study in ("table2", "table3"):
        rows = run_table2(config) if config.study == "table2" else run_table3(config)
        summary["rows"] = rows
        if out:
            header = list(rows[0])
            io.write_csv(out / f"{config.study}.csv", header, [[r[h] for h in header] for r in rows])
            if figures:
                from .plotting import plot_amplitude_errors
                plot_amplitude_errors(rows, out / f"{config.study}.png")
    elif config.study == "noise-study":
        res = run_noise_study(config)
        summary["moments"] = res.moments()
        summary["predicted_std"] = {"t_mm": res.predicted_std_t, "phi_deg": res.predicted_std_phi_deg}
        summary["n_nodes"] = res.n
        if out:
            rows = []
            for (name, ax), (edges, counts) in res.histograms().items():
                unit = "mm" if name == "t" else "deg"
                for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                    rows.append([f"{name}_{ax}", unit, lo, hi, int(c)])
            io.write_csv(out / "histograms.csv", ["component", "unit", "bin_lo", "bin_hi", "count"], rows)
            io.write_csv(out / "errors.csv", ["trial", "t_x_mm", "t_y_mm", "t_z_mm",
                                              "phi_x_deg", "phi_y_deg", "phi_z_deg"],
                         [[i, *et, *ep] for i, (et, ep) in enumerate(zip(res.errors_t, res.errors_phi))])
            if figures:
                from .plotting import plot_error_histograms
                plot_error_histograms(res, out / "histograms.png")
    else:
        rep = beam_benchmark(BeamSpec(), config.grid, NoiseSpec(config.sigma, config.seed),
                             outlier_percent=config.outlier_percent,
                             config=SignificanceConfig(config.k_multiplier))
        summary.update(benchmark_summary(rep))
        if out:
            write_benchmark_tables(rep, out)
            if figures:
                from .plotting import plot_compliance
                plot_compliance(rep, out / "compliance.png")
    if out:
        io.write_json(summary, out / "summary.json")
    return summary


def benchmark_summary(rep):
    return {
        "analytic_k": rep.analytic,
        "identified_k": rep.raw.k,
        "final_k": rep.final.k,
        "ci": rep.raw.ci(rep.k_multiplier),
        "significant": rep.final.significant,
        "sigma_hat_mm": rep.sigma_hat,
        "max_relative_error": rep.max_relative_error,
        "max_relative_error_before_pruning": float(rep.relative_errors("raw").max()),
        "min_margin": rep.min_margin,
        "zeros_detected": rep.zeros_detected,
        "false_nonzero": rep.false_nonzero,
        "nonzero_kept": rep.nonzero_kept,
        "false_zero": rep.false_zero,
        "removed_nodes": rep.removed_nodes,
        "printed_L_over_3EI": rep.printed_rotational,
        "k_multiplier": rep.k_multiplier,
    }


def write_benchmark_tables(rep, out):
    rows = []
    ci = rep.raw.ci(rep.k_multiplier)
    err = rep.relative_errors()
    for i in range(6):
        for j in range(6):
            rows.append([f"k{i + 1}{j + 1}", rep.analytic[i, j], rep.raw.k[i, j], ci[i, j],
                         rep.final.k[i, j], int(rep.final.significant[i, j]), err[i, j]])
    io.write_csv(Path(out) / "compliance.csv",
                 ["element", "analytic", "identified", "ci_half_width", "final", "significant",
                  "relative_error"], rows)
