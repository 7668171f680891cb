"""Run a configured experiment and compare simulation with theory."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .analytic import point_source_cir, uca_cir
from .config import ExperimentConfig
from .csvio import write_csv, write_summary
from .errors import GridMismatchError
from .model import CirCurve, ReceiverKind, TimeGrid
from .simulation import EnsembleResult, run_ensemble
from .volume import DeviationCurve, Peak, pta_deviation, surface_tx_cir_3d, volume_cir, volume_peak


@dataclass(frozen=True)
class ComparisonReport:
    z_scores: np.ndarray
    max_rel_error: float
    fraction_within: float
    k: float
    min_reference: float
    points_considered: int
    sim_peak: Peak
    reference_peak: Peak

    def as_dict(self, prefix: str = "") -> Dict[str, object]:
        return {
            f"{prefix}max_rel_error": self.max_rel_error,
            f"{prefix}fraction_within_{self.k:g}se": self.fraction_within,
            f"{prefix}points_considered": self.points_considered,
            f"{prefix}min_reference": self.min_reference,
            f"{prefix}sim_peak_time_s": self.sim_peak.time,
            f"{prefix}sim_peak_value": self.sim_peak.value,
            f"{prefix}reference_peak_time_s": self.reference_peak.time,
            f"{prefix}reference_peak_value": self.reference_peak.value,
        }


def _grid_peak(times, values) -> Peak:
    k = int(np.argmax(values))
    return Peak(float(times[k]), float(values[k]))


def compare(sim: EnsembleResult, reference: CirCurve, k: float = 4.0,
            min_reference: float = 5.0) -> ComparisonReport:
    """z-scores of the ensemble mean against a reference curve.

    Relative errors and the within-``k`` fraction only use points where the
    reference is at least ``min_reference`` molecules.
    """
    times = np.asarray(sim.times, dtype=float)
    ref_times = np.asarray(reference.times, dtype=float)
    if times.shape != ref_times.shape or not np.allclose(times, ref_times, rtol=1e-12, atol=0.0):
        raise GridMismatchError("simulation and reference are on different time grids")
    ref = np.asarray(reference.values, dtype=float)
    diff = sim.mean_count - ref
    se = sim.standard_error
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.copysign(np.inf, diff)))
        rel = np.abs(diff) / ref
    mask = ref >= min_reference
    n = int(mask.sum())
    return ComparisonReport(
        z_scores=z,
        max_rel_error=float(rel[mask].max()) if n else math.nan,
        fraction_within=float(np.mean(np.abs(z[mask]) <= k)) if n else math.nan,
        k=k,
        min_reference=min_reference,
        points_considered=n,
        sim_peak=_grid_peak(times, sim.mean_count),
        reference_peak=_grid_peak(ref_times, ref),
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    times: np.ndarray
    columns: Dict[str, np.ndarray]
    peak_time: float
    normalizer: Optional[float] = None
    ensemble: Optional[EnsembleResult] = None
    deviation: Optional[DeviationCurve] = None
    report: Optional[ComparisonReport] = None
    summary: Dict[str, object] = field(default_factory=dict)

    def write(self, csv_path, summary_path=None):
        csv_path = Path(csv_path)
        write_csv(self.columns, csv_path, self.times)
        if summary_path is None:
            summary_path = csv_path.with_suffix(".summary.txt")
        write_summary(self.summary, summary_path)
        return csv_path, Path(summary_path)


def _normalizer(cfg: ExperimentConfig, times, volume) -> float:
    # passive: continuous maximum; absorbing curves are monotone so the
    # window maximum is the last point
    if cfg.kind is ReceiverKind.PASSIVE:
        return volume_peak(cfg.spec, cfg.kind, cfg.reference_model).value
    return float(np.max(volume))


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Evaluate every selected curve on one shared time grid.

    With a simulation the grid is the simulation's record times (whole
    multiples of ``dt``); otherwise it is the configured log grid.
    """
    spec, kind = cfg.spec, cfg.kind
    tp = cfg.peak_time
    grid = cfg.grid.resolve(tp)
    ensemble = None
    if "simulated" in cfg.outputs:
        params = cfg.sim.params(tp, grid)
        ensemble = run_ensemble(spec, kind, cfg.transmitter, params, threads=threads)
        times = np.asarray(ensemble.times, dtype=float)
    else:
        times = grid.times

    columns: Dict[str, np.ndarray] = {}
    if ensemble is not None:
        columns["sim_mean"] = ensemble.mean_count
        columns["sim_std"] = ensemble.std_count
    if "volume_analytic" in cfg.outputs:
        columns["volume_analytic"] = np.asarray(volume_cir(spec, kind, times, cfg.reference_model), dtype=float)
    if "pta" in cfg.outputs:
        columns["pta"] = np.asarray(point_source_cir(spec, kind, times), dtype=float)
    if "uca" in cfg.outputs:
        columns["uca"] = np.asarray(uca_cir(spec, times), dtype=float)
    if "surface_analytic" in cfg.outputs:
        columns["surface_analytic"] = np.asarray(surface_tx_cir_3d(spec, kind, times), dtype=float)

    deviation = None
    if "deviation" in cfg.outputs:
        deviation = pta_deviation(spec, kind, TimeGrid(times), model=cfg.reference_model)
        dev = np.full(times.shape, np.nan)
        dev[np.isin(times, deviation.times)] = deviation.deviations
        columns["dev_pct"] = dev

    summary: Dict[str, object] = {
        "name": cfg.name,
        "dimension": spec.dimension.value,
        "receiver": kind.value,
        "transmitter": cfg.transmitter.value,
        "analytic_transmitter": cfg.reference_model.value,
        "distance_m": float(spec.distance),
        "molecules": int(spec.molecules),
        "peak_time_s": float(tp),
        "points": int(times.size),
    }

    report = None
    if ensemble is not None:
        summary.update({
            "dt_s": float(cfg.sim.dt),
            "realizations": int(ensemble.realization_count),
            "seed": int(cfg.sim.seed),
            "absorption_mode": cfg.sim.absorption_mode.value,
            "tx_solidity": cfg.sim.tx_solidity.value,
        })
        for name in ("volume_analytic", "pta", "uca", "surface_analytic"):
            if name in columns:
                ref = CirCurve(times, columns[name], provenance="analytic", label=name)
                rep = compare(ensemble, ref)
                summary.update(rep.as_dict(prefix=f"{name}."))
                if name == "volume_analytic":
                    report = rep
    if deviation is not None:
        summary["deviation_excluded_points"] = int(deviation.excluded.size)
        summary["deviation_max_abs_pct"] = float(np.max(np.abs(deviation.deviations)))

    normalizer = None
    if cfg.normalize:
        normalizer = _normalizer(cfg, times, columns["volume_analytic"])
        for name in list(columns):
            if name != "dev_pct":
                columns[name] = columns[name] / normalizer
        summary["normalizer"] = float(normalizer)

    return ExperimentResult(
        config=cfg,
        times=np.asarray(times, dtype=float),
        columns=columns,
        peak_time=tp,
        normalizer=normalizer,
        ensemble=ensemble,
        deviation=deviation,
        report=report,
        summary=summary,
    )
