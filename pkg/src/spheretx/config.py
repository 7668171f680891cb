"""Experiment configuration files.

INI-style text with ``[channel]``, ``[scenario]``, ``[grid]``, optional
``[simulation]`` and ``[output]`` sections.  All physical values are SI.
Grid bounds and the simulation horizon are given either in seconds
(``start_s``, ``stop_s``, ``horizon_s``) or as multiples of the
point-transmitter peak time (``start_over_peak``, ``stop_over_peak``,
``horizon_over_peak``).  See ``docs/config.md`` for the full key list.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

from .analytic import peak_time
from .errors import ParseError, SpecError, ValidationError
from .model import ChannelSpec, Dimension, ReceiverKind, TimeGrid, TransmitterModel, validate
from .simulation import AbsorptionMode, SimParams, TxSolidity, log_record_times

CURVES = ("simulated", "volume_analytic", "pta", "uca", "surface_analytic", "deviation")

_SECTIONS = {
    "channel": {"dimension", "r_tx", "r_rx", "distance", "diffusion", "molecules"},
    "scenario": {"name", "receiver", "transmitter", "analytic_transmitter"},
    "grid": {"start_s", "stop_s", "start_over_peak", "stop_over_peak", "points_per_decade"},
    "simulation": {"dt", "horizon_s", "horizon_over_peak", "realizations", "seed",
                   "absorption_mode", "tx_solidity"},
    "output": {"curves", "normalize", "path"},
}


@dataclass(frozen=True)
class GridConfig:
    start: float = 0.01
    stop: float = 100.0
    points_per_decade: int = 40
    relative: bool = True

    def resolve(self, peak: float) -> TimeGrid:
        scale = peak if self.relative else 1.0
        return TimeGrid.log_spaced(self.start * scale, self.stop * scale, self.points_per_decade)


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float = 20.0
    horizon_relative: bool = True
    realizations: int = 100
    seed: int = 0
    absorption_mode: AbsorptionMode = AbsorptionMode.SEGMENT_INTERSECTION
    tx_solidity: TxSolidity = TxSolidity.TRANSPARENT

    def params(self, peak: float, grid: TimeGrid) -> SimParams:
        horizon = self.horizon * peak if self.horizon_relative else self.horizon
        spacing = grid.spacing
        stop = min(horizon, grid.times[-1])
        if spacing is not None:
            times = log_record_times(grid.times[0], stop, self.dt, spacing.points_per_decade)
        else:
            times = log_record_times(grid.times[0], stop, self.dt)
        return SimParams(
            dt=self.dt,
            horizon=horizon,
            realizations=self.realizations,
            master_seed=self.seed,
            absorption_mode=self.absorption_mode,
            tx_solidity=self.tx_solidity,
            record_times=times[times > 0],
        )


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ChannelSpec
    kind: ReceiverKind
    transmitter: TransmitterModel = TransmitterModel.UNIFORM_VOLUME
    analytic_transmitter: Optional[TransmitterModel] = None
    grid: GridConfig = GridConfig()
    sim: Optional[SimConfig] = None
    outputs: Tuple[str, ...] = ("volume_analytic", "pta")
    normalize: bool = False
    output_path: str = ""
    name: str = field(default="")

    @property
    def reference_model(self) -> TransmitterModel:
        """Transmitter model behind the ``volume_analytic`` curve."""
        return self.analytic_transmitter or self.transmitter

    @property
    def peak_time(self) -> float:
        return peak_time(self.spec, self.kind)

    def with_overrides(self, seed=None, realizations=None, outputs=None) -> "ExperimentConfig":
        cfg = self
        if self.sim is not None and (seed is not None or realizations is not None):
            sim = self.sim
            if seed is not None:
                sim = replace(sim, seed=int(seed))
            if realizations is not None:
                sim = replace(sim, realizations=int(realizations))
            cfg = replace(cfg, sim=sim)
        if outputs is not None:
            cfg = replace(cfg, outputs=tuple(outputs))
        return check_config(cfg)


def check_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Enforce channel invariants and the curve-selector rules."""
    try:
        validate(cfg.spec)
    except SpecError as exc:
        raise ValidationError(f"invalid channel: {exc}", cause=exc) from exc
    unknown = set(cfg.outputs) - set(CURVES)
    if unknown:
        raise ValidationError(f"unknown curves: {sorted(unknown)}")
    if "uca" in cfg.outputs and cfg.kind is not ReceiverKind.PASSIVE:
        raise ValidationError("uca is only defined for passive receivers")
    if "deviation" in cfg.outputs and not {"volume_analytic", "pta"} <= set(cfg.outputs):
        raise ValidationError("deviation needs both volume_analytic and pta")
    if "simulated" in cfg.outputs and cfg.sim is None:
        raise ValidationError("simulated curve needs a [simulation] section")
    if "surface_analytic" in cfg.outputs and not cfg.spec.is_3d:
        raise ValidationError("surface_analytic is only defined in 3D")
    if cfg.normalize and "volume_analytic" not in cfg.outputs:
        raise ValidationError("normalize needs the volume_analytic curve")
    three_d_only = TransmitterModel.SURFACE_RELEASE
    if not cfg.spec.is_3d and three_d_only in (cfg.transmitter, cfg.analytic_transmitter):
        raise ValidationError("surface release is only defined in 3D")
    if cfg.sim is not None and cfg.sim.tx_solidity is TxSolidity.REFLECTIVE:
        if cfg.transmitter is not TransmitterModel.SURFACE_RELEASE:
            raise ValidationError("a reflective transmitter needs surface release")
    return cfg


# --------------------------------------------------------------- parsing


def _get(section, key, convert, path, default=None, required=True):
    if key not in section:
        if required:
            raise ParseError(f"{path}: [{section.name}] missing key '{key}'")
        return default
    raw = section[key]
    try:
        return convert(raw)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{path}: [{section.name}] {key} = {raw!r}: {exc}") from exc


def _bool(raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _int(raw):
    value = float(raw)
    if value != int(value):
        raise ValueError("expected an integer")
    return int(value)


def _bounds(section, path, lo_key, hi_key):
    keys = set(section)
    absolute = {f"{lo_key}_s", f"{hi_key}_s"} & keys
    relative = {f"{lo_key}_over_peak", f"{hi_key}_over_peak"} & keys
    if absolute and relative:
        raise ParseError(f"{path}: [grid] mixes *_s and *_over_peak keys")
    suffix = "_s" if absolute else "_over_peak"
    lo = _get(section, lo_key + suffix, float, path, 0.01, required=bool(absolute))
    hi = _get(section, hi_key + suffix, float, path, 100.0, required=bool(absolute))
    return lo, hi, not absolute


def parse_config(text: str, path: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ParseError(f"{path}: unknown section [{name}]")
        extra = set(parser[name]) - _SECTIONS[name]
        if extra:
            raise ParseError(f"{path}: [{name}] unknown keys {sorted(extra)}")
    for name in ("channel", "scenario"):
        if not parser.has_section(name):
            raise ParseError(f"{path}: missing section [{name}]")

    ch = parser["channel"]
    spec = ChannelSpec(
        dimension=_get(ch, "dimension", lambda s: Dimension(s.strip().upper()), path),
        r_tx=_get(ch, "r_tx", float, path),
        r_rx=_get(ch, "r_rx", float, path),
        distance=_get(ch, "distance", float, path),
        diffusion=_get(ch, "diffusion", float, path),
        molecules=_get(ch, "molecules", _int, path),
    )
    sc = parser["scenario"]
    kind = _get(sc, "receiver", lambda s: ReceiverKind(s.strip().lower()), path)
    transmitter = _get(sc, "transmitter", lambda s: TransmitterModel(s.strip().lower()), path,
                       TransmitterModel.UNIFORM_VOLUME, required=False)
    analytic_tx = _get(sc, "analytic_transmitter", lambda s: TransmitterModel(s.strip().lower()), path,
                       None, required=False)
    name = _get(sc, "name", str.strip, path, "", required=False)

    grid = GridConfig()
    if parser.has_section("grid"):
        g = parser["grid"]
        start, stop, relative = _bounds(g, path, "start", "stop")
        grid = GridConfig(start, stop, _get(g, "points_per_decade", _int, path, 40, required=False), relative)
        if not 0 < grid.start < grid.stop or grid.points_per_decade < 1:
            raise ParseError(f"{path}: [grid] needs 0 < start < stop and points_per_decade >= 1")

    sim = None
    if parser.has_section("simulation"):
        s = parser["simulation"]
        if "horizon_s" in s and "horizon_over_peak" in s:
            raise ParseError(f"{path}: [simulation] give horizon_s or horizon_over_peak, not both")
        relative = "horizon_s" not in s
        horizon = _get(s, "horizon_over_peak" if relative else "horizon_s", float, path, 20.0, required=False)
        sim = SimConfig(
            dt=_get(s, "dt", float, path),
            horizon=horizon,
            horizon_relative=relative,
            realizations=_get(s, "realizations", _int, path, 100, required=False),
            seed=_get(s, "seed", _int, path, 0, required=False),
            absorption_mode=_get(s, "absorption_mode", lambda v: AbsorptionMode(v.strip().lower()), path,
                                 AbsorptionMode.SEGMENT_INTERSECTION, required=False),
            tx_solidity=_get(s, "tx_solidity", lambda v: TxSolidity(v.strip().lower()), path,
                             TxSolidity.TRANSPARENT, required=False),
        )
        if not (sim.dt > 0 and sim.horizon > 0 and sim.realizations >= 1):
            raise ParseError(f"{path}: [simulation] needs dt > 0, horizon > 0, realizations >= 1")

    outputs, normalize, out_path = ("volume_analytic", "pta"), False, ""
    if parser.has_section("output"):
        o = parser["output"]
        outputs = _get(o, "curves", lambda v: tuple(c.strip() for c in v.split(",") if c.strip()),
                       path, outputs, required=False)
        normalize = _get(o, "normalize", _bool, path, False, required=False)
        out_path = _get(o, "path", str.strip, path, "", required=False)

    cfg = ExperimentConfig(
        spec=spec, kind=kind, transmitter=transmitter, analytic_transmitter=analytic_tx,
        grid=grid, sim=sim, outputs=outputs, normalize=normalize, output_path=out_path, name=name,
    )
    return check_config(cfg)


def load_config(path) -> ExperimentConfig:
    """Read and validate an experiment file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    cfg = parse_config(text, str(path))
    if not cfg.name:
        cfg = replace(cfg, name=path.stem)
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize a config; ``parse_config(dump_config(c)) == c``."""
    parser = configparser.ConfigParser()
    s = cfg.spec
    parser["channel"] = {
        "dimension": s.dimension.value,
        "r_tx": repr(float(s.r_tx)),
        "r_rx": repr(float(s.r_rx)),
        "distance": repr(float(s.distance)),
        "diffusion": repr(float(s.diffusion)),
        "molecules": str(int(s.molecules)),
    }
    scenario = {"receiver": cfg.kind.value, "transmitter": cfg.transmitter.value}
    if cfg.analytic_transmitter is not None:
        scenario["analytic_transmitter"] = cfg.analytic_transmitter.value
    if cfg.name:
        scenario["name"] = cfg.name
    parser["scenario"] = scenario
    g = cfg.grid
    suffix = "_over_peak" if g.relative else "_s"
    parser["grid"] = {
        "start" + suffix: repr(float(g.start)),
        "stop" + suffix: repr(float(g.stop)),
        "points_per_decade": str(g.points_per_decade),
    }
    if cfg.sim is not None:
        sim = cfg.sim
        parser["simulation"] = {
            "dt": repr(float(sim.dt)),
            ("horizon_over_peak" if sim.horizon_relative else "horizon_s"): repr(float(sim.horizon)),
            "realizations": str(sim.realizations),
            "seed": str(sim.seed),
            "absorption_mode": sim.absorption_mode.value,
            "tx_solidity": sim.tx_solidity.value,
        }
    parser["output"] = {
        "curves": ", ".join(cfg.outputs),
        "normalize": "true" if cfg.normalize else "false",
        "path": cfg.output_path,
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
