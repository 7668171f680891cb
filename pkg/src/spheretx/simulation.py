"""Particle-based Brownian dynamics simulator.

Each realization releases ``N`` molecules at ``t = 0``, moves every live
molecule by an independent Gaussian step of variance ``2 D dt`` per axis,
and observes the receiver at the requested record times.  Absorbing
receivers check every step's straight-line segment against the receiver
surface.  Realization ``i`` draws from ``SeedSequence([master_seed, i])``, so
results do not depend on how realizations are spread over threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError, ModelError
from .model import ChannelSpec, ReceiverKind, TransmitterModel, validate

__all__ = [
    "AbsorptionMode",
    "TxSolidity",
    "SimParams",
    "MoleculeState",
    "EnsembleResult",
    "tx_center",
    "init_molecules",
    "diffuse_step",
    "detect_absorption",
    "realization_rng",
    "run_realization",
    "run_ensemble",
    "log_record_times",
]

MAX_BOUNCES = 8


class AbsorptionMode(str, Enum):
    SEGMENT_INTERSECTION = "segment_intersection"
    SEGMENT_INTERSECTION_WITH_BRIDGE = "segment_intersection_with_bridge"


class TxSolidity(str, Enum):
    TRANSPARENT = "transparent"
    REFLECTIVE = "reflective"


def log_record_times(start: float, stop: float, dt: float, points_per_decade: int = 40) -> np.ndarray:
    """Log-spaced record times snapped to whole steps, duplicates removed."""
    start = max(start, dt)
    if stop < start:
        return np.array([stop])
    n = max(2, int(round(math.log10(stop / start) * points_per_decade)) + 1)
    steps = np.rint(np.geomspace(start, stop, n) / dt).astype(np.int64)
    steps = np.unique(np.minimum(steps, int(math.floor(stop / dt * (1 + 1e-12)))))
    return steps * dt


@dataclass(frozen=True)
class SimParams:
    dt: float
    horizon: float
    realizations: int = 100
    master_seed: int = 0
    absorption_mode: AbsorptionMode = AbsorptionMode.SEGMENT_INTERSECTION
    tx_solidity: TxSolidity = TxSolidity.TRANSPARENT
    record_times: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt!r}")
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon!r}")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise DomainError(f"realizations must be a positive integer, got {self.realizations!r}")
        object.__setattr__(self, "absorption_mode", AbsorptionMode(self.absorption_mode))
        object.__setattr__(self, "tx_solidity", TxSolidity(self.tx_solidity))
        if self.record_times is None:
            times = log_record_times(self.horizon / 1e4, self.horizon, self.dt)
        else:
            times = np.asarray(self.record_times, dtype=float).reshape(-1)
        if times.size == 0 or np.any(times < 0) or not np.all(np.isfinite(times)):
            raise DomainError("record times must be finite and non-negative")
        if np.any(np.diff(times) <= 0):
            raise DomainError("record times must be strictly increasing")
        if times[-1] > self.horizon * (1 + 1e-12):
            raise DomainError("horizon must cover every record time")
        times.setflags(write=False)
        object.__setattr__(self, "record_times", times)

    @property
    def record_steps(self) -> np.ndarray:
        """Step index of each record time (nearest whole step)."""
        return np.rint(self.record_times / self.dt).astype(np.int64)

    @property
    def sampled_times(self) -> np.ndarray:
        """Record times as actually observed: whole multiples of ``dt``."""
        return self.record_steps * self.dt

    def __eq__(self, other):
        if not isinstance(other, SimParams):
            return NotImplemented
        same = (self.dt, self.horizon, self.realizations, self.master_seed,
                self.absorption_mode, self.tx_solidity) == (
            other.dt, other.horizon, other.realizations, other.master_seed,
            other.absorption_mode, other.tx_solidity)
        return same and np.array_equal(self.record_times, other.record_times)

    __hash__ = None


@dataclass
class MoleculeState:
    """Positions (shape ``(N, dim)``) and live flags of a molecule population."""

    positions: np.ndarray
    alive: np.ndarray

    def __len__(self):
        return self.alive.size


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean_count: np.ndarray
    std_count: np.ndarray
    realization_count: int
    counts: np.ndarray
    absorbed_total: Optional[np.ndarray] = None

    @property
    def standard_error(self) -> np.ndarray:
        return self.std_count / math.sqrt(self.realization_count)


def tx_center(spec: ChannelSpec) -> np.ndarray:
    """Transmitter center in the receiver-centered frame."""
    center = np.zeros(3 if spec.is_3d else 1)
    center[0] = -spec.distance
    return center


def _unit_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def init_molecules(spec: ChannelSpec, model: TransmitterModel, rng: np.random.Generator) -> MoleculeState:
    """Initial positions of all ``N`` molecules for a transmitter model."""
    validate(spec)
    model = TransmitterModel(model)
    n = int(spec.molecules)
    center = tx_center(spec)
    if model is TransmitterModel.SURFACE_RELEASE and not spec.is_3d:
        raise ModelError("surface release is only defined in 3D")
    if model is TransmitterModel.POINT or spec.r_tx == 0:
        offsets = np.zeros((n, center.size))
    elif not spec.is_3d:
        offsets = rng.uniform(-spec.r_tx, spec.r_tx, size=(n, 1))
    elif model is TransmitterModel.UNIFORM_VOLUME:
        radius = spec.r_tx * np.cbrt(rng.random(n))
        offsets = _unit_vectors(rng, n) * radius[:, None]
    else:
        offsets = _unit_vectors(rng, n) * spec.r_tx
    return MoleculeState(center + offsets, np.ones(n, dtype=bool))


def diffuse_step(state: MoleculeState, diffusion: float, dt: float, rng: np.random.Generator) -> MoleculeState:
    """Advance live molecules by one Gaussian step; absorbed ones stay put."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    sigma = math.sqrt(2.0 * diffusion * dt)
    steps = rng.standard_normal(state.positions.shape) * sigma
    positions = state.positions + np.where(state.alive[:, None], steps, 0.0)
    return MoleculeState(positions, state.alive.copy())


def detect_absorption(prev, next, spec: ChannelSpec, mode: AbsorptionMode,
                      diffusion: float, dt: float, rng: Optional[np.random.Generator] = None) -> bool:
    """Whether a molecule stepping ``prev -> next`` is absorbed by the receiver.

    Coordinates are receiver-centered.  The bridge mode also absorbs with the
    planar Brownian-bridge crossing probability and needs ``rng``.
    """
    prev = np.atleast_1d(np.asarray(prev, dtype=float))
    nxt = np.atleast_1d(np.asarray(next, dtype=float))
    r = spec.r_rx
    if spec.is_3d:
        hit = _kernels.segment_hits_sphere(prev[0], prev[1], prev[2], nxt[0], nxt[1], nxt[2], r)
        gaps = (float(np.linalg.norm(prev)) - r, float(np.linalg.norm(nxt)) - r)
    else:
        hit = _kernels.segment_hits_interval(prev[0], nxt[0], r)
        gaps = (abs(prev[0]) - r, abs(nxt[0]) - r)
    if hit or AbsorptionMode(mode) is AbsorptionMode.SEGMENT_INTERSECTION:
        return bool(hit)
    if rng is None:
        raise ValueError("bridge absorption needs a random generator")
    return bool(rng.random() < _kernels.bridge_probability(gaps[0], gaps[1], diffusion, dt))


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _check_combination(spec, model, params):
    if params.tx_solidity is TxSolidity.REFLECTIVE:
        if not spec.is_3d or TransmitterModel(model) is not TransmitterModel.SURFACE_RELEASE:
            raise ModelError("a reflective transmitter needs 3D surface release")


def _simulate(spec, kind, model, params, rng):
    state = init_molecules(spec, model, rng)
    steps = params.record_steps
    counts = np.zeros(steps.size, dtype=np.int64)
    sigma = math.sqrt(2.0 * spec.diffusion * params.dt)
    absorbing = ReceiverKind(kind) is ReceiverKind.ABSORBING
    bridge = params.absorption_mode is AbsorptionMode.SEGMENT_INTERSECTION_WITH_BRIDGE
    positions = np.ascontiguousarray(state.positions)
    if spec.is_3d:
        reflect = params.tx_solidity is TxSolidity.REFLECTIVE
        absorbed = _kernels.walk_3d(
            rng, positions, steps, sigma, spec.r_rx, absorbing, bridge,
            spec.diffusion, params.dt, reflect, -spec.distance, spec.r_tx, MAX_BOUNCES, counts,
        )
    else:
        absorbed = _kernels.walk_1d(
            rng, positions, steps, sigma, spec.r_rx, absorbing, bridge,
            spec.diffusion, params.dt, counts,
        )
    return counts, absorbed


def run_realization(spec: ChannelSpec, kind: ReceiverKind, model: TransmitterModel,
                    params: SimParams, seed) -> np.ndarray:
    """Counts at each record time for one realization.

    ``seed`` is anything :class:`numpy.random.SeedSequence` accepts, or a
    ready :class:`numpy.random.Generator`.
    """
    validate(spec)
    _check_combination(spec, model, params)
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    counts, _ = _simulate(spec, kind, model, params, rng)
    return counts


def run_ensemble(spec: ChannelSpec, kind: ReceiverKind, model: TransmitterModel,
                 params: SimParams, threads: int = 1) -> EnsembleResult:
    """Mean and sample std of the receiver count over independent realizations."""
    validate(spec)
    _check_combination(spec, model, params)

    def one(index):
        return _simulate(spec, kind, model, params, realization_rng(params.master_seed, index))

    indices = range(params.realizations)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, indices))
    else:
        results = [one(i) for i in indices]
    counts = np.stack([c for c, _ in results]).astype(float)
    absorbing = ReceiverKind(kind) is ReceiverKind.ABSORBING
    std = counts.std(axis=0, ddof=1) if params.realizations > 1 else np.zeros(counts.shape[1])
    return EnsembleResult(
        times=params.sampled_times,
        mean_count=counts.mean(axis=0),
        std_count=std,
        realization_count=params.realizations,
        counts=counts,
        absorbed_total=np.array([a for _, a in results]) if absorbing else None,
    )
