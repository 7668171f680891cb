"""Scenario description shared by the analytic, quadrature and simulation code.

Everything is in SI base units: meters, seconds, m^2/s.  The receiver sits at
the origin and the transmitter center at ``-distance`` on the x axis; in 1D
the same convention applies to the single coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, OverlapError


class Dimension(str, Enum):
    ONE_D = "1D"
    THREE_D = "3D"


class ReceiverKind(str, Enum):
    PASSIVE = "passive"
    ABSORBING = "absorbing"


class TransmitterModel(str, Enum):
    POINT = "point"
    UNIFORM_VOLUME = "uniform_volume"
    SURFACE_RELEASE = "surface_release"


@dataclass(frozen=True)
class ChannelSpec:
    """Physical scenario: one transmitter, one spherical receiver.

    In 1D ``r_tx`` and ``r_rx`` are half-lengths of the transmitter segment
    and receiver interval.
    """

    dimension: Dimension
    r_tx: float
    r_rx: float
    distance: float
    diffusion: float
    molecules: int

    def __post_init__(self):
        object.__setattr__(self, "dimension", Dimension(self.dimension))

    def replace(self, **changes) -> "ChannelSpec":
        fields = {
            "dimension": self.dimension,
            "r_tx": self.r_tx,
            "r_rx": self.r_rx,
            "distance": self.distance,
            "diffusion": self.diffusion,
            "molecules": self.molecules,
        }
        fields.update(changes)
        return ChannelSpec(**fields)

    @property
    def is_3d(self) -> bool:
        return self.dimension is Dimension.THREE_D


# Relative slack on the disjointness check so that d = r_tx + r_rx written
# as decimal literals (e.g. 1e-6 + 1e-6 vs 2e-6) is accepted as tangent.
_TANGENT_RTOL = 1e-12


def validate(spec: ChannelSpec) -> ChannelSpec:
    """Return ``spec`` unchanged if it describes a physical scenario.

    Raises :class:`DomainError` for non-positive or non-finite quantities and
    :class:`OverlapError` when transmitter and receiver intersect.
    """
    values = {
        "r_tx": spec.r_tx,
        "r_rx": spec.r_rx,
        "distance": spec.distance,
        "diffusion": spec.diffusion,
    }
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    if spec.r_tx < 0:
        raise DomainError(f"r_tx must be >= 0, got {spec.r_tx!r}")
    if spec.r_rx <= 0:
        raise DomainError(f"r_rx must be > 0, got {spec.r_rx!r}")
    if spec.diffusion <= 0:
        raise DomainError(f"diffusion must be > 0, got {spec.diffusion!r}")
    if int(spec.molecules) != spec.molecules or spec.molecules < 1:
        raise DomainError(f"molecules must be a positive integer, got {spec.molecules!r}")
    contact = spec.r_tx + spec.r_rx
    if spec.distance < contact * (1 - _TANGENT_RTOL):
        raise OverlapError(
            f"distance {spec.distance!r} < r_tx + r_rx = {contact!r}: "
            "transmitter and receiver overlap"
        )
    return spec


class TxEdges(NamedTuple):
    x_i: float
    x_f: float


def derived_geometry(spec: ChannelSpec) -> TxEdges:
    """Near and far transmitter edges measured from the receiver center."""
    return TxEdges(spec.distance - spec.r_tx, spec.distance + spec.r_tx)


@dataclass(frozen=True)
class SourcePoint:
    """A point inside the transmitter, in transmitter-centered polar form.

    ``offset`` is signed in 1D (in ``[-r_tx, r_tx]``) and a radius in 3D.
    """

    offset: float
    polar: float = 0.0
    azimuth: float = 0.0


@dataclass(frozen=True)
class LogSpacing:
    start: float
    stop: float
    points_per_decade: int


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray
    spacing: Optional[LogSpacing] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        if times.size == 0:
            raise DomainError("time grid is empty")
        if not np.all(np.isfinite(times)) or np.any(times <= 0):
            raise DomainError("time grid must contain finite positive times")
        if np.any(np.diff(times) <= 0):
            raise DomainError("time grid must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @classmethod
    def log_spaced(cls, start: float, stop: float, points_per_decade: int = 40) -> "TimeGrid":
        """Log grid including both endpoints, ``points_per_decade`` per factor of 10."""
        if not (0 < start < stop):
            raise DomainError(f"need 0 < start < stop, got {start!r}, {stop!r}")
        decades = math.log10(stop / start)
        n = max(2, int(round(decades * points_per_decade)) + 1)
        times = np.logspace(math.log10(start), math.log10(stop), n)
        times[0], times[-1] = start, stop
        return cls(times, LogSpacing(start, stop, points_per_decade))

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.times, other.times) and self.spacing == other.spacing

    __hash__ = None


@dataclass(frozen=True)
class CirCurve:
    """Expected receiver count on a time grid.

    ``provenance`` is one of ``"analytic"``, ``"quadrature"`` or
    ``"simulated"``; simulated curves carry the per-time sample std and the
    number of realizations behind the mean.
    """

    times: np.ndarray
    values: np.ndarray
    provenance: str = "analytic"
    std: Optional[np.ndarray] = None
    realizations: Optional[int] = None
    label: str = field(default="", compare=False)

    @property
    def standard_error(self) -> Optional[np.ndarray]:
        if self.std is None or not self.realizations:
            return None
        return self.std / math.sqrt(self.realizations)
