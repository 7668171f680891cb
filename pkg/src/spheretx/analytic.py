"""Closed-form point-source channel impulse responses.

The ``*_probability`` helpers return the per-molecule probability for an
arbitrary source-to-receiver-center distance and broadcast over numpy arrays;
the quadrature code integrates them over the transmitter.  The public
``*_cir`` functions take a :class:`ChannelSpec` and scale by ``N``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError, KindError
from .model import ChannelSpec, Dimension, ReceiverKind, validate

__all__ = [
    "erf",
    "erfc",
    "point_probability",
    "point_source_cir",
    "point_concentration",
    "uca_cir",
    "peak_time",
]


def erf(x):
    """Error function, ``2/sqrt(pi) * int_0^x exp(-y^2) dy``."""
    return special.erf(x)


def erfc(x):
    """Complementary error function, evaluated directly (no ``1 - erf``)."""
    return special.erfc(x)


def _positive_time(t):
    t = np.asarray(t, dtype=float)
    return t > 0, np.where(t > 0, t, 1.0)


def absorbing_probability(dist, r_rx, diffusion, t, dimension):
    """Probability a molecule released at ``dist`` has been absorbed by ``t``."""
    dist = np.asarray(dist, dtype=float)
    ok, ts = _positive_time(t)
    p = erfc((dist - r_rx) / np.sqrt(4.0 * diffusion * ts))
    if Dimension(dimension) is Dimension.THREE_D:
        p = p * (r_rx / dist)
    return np.where(ok, p, 0.0)


def passive_probability(dist, r_rx, diffusion, t, dimension):
    """Probability a molecule released at ``dist`` is inside the receiver at ``t``."""
    dist = np.asarray(dist, dtype=float)
    ok, ts = _positive_time(t)
    width = 2.0 * np.sqrt(diffusion * ts)
    # erf(a) - erf(b) == erfc(b) - erfc(a): keeps precision once both -> 1.
    p = 0.5 * (erfc((dist - r_rx) / width) - erfc((dist + r_rx) / width))
    if Dimension(dimension) is Dimension.THREE_D:
        four_dt = 4.0 * diffusion * ts
        tails = np.exp(-((dist + r_rx) ** 2) / four_dt) - np.exp(-((dist - r_rx) ** 2) / four_dt)
        p = p + np.sqrt(diffusion * ts / math.pi) / dist * tails
        # roundoff can leave tiny negative residues at very early times
        p = np.maximum(p, 0.0)
    return np.where(ok, p, 0.0)


def point_probability(kind, dist, r_rx, diffusion, t, dimension):
    if ReceiverKind(kind) is ReceiverKind.ABSORBING:
        return absorbing_probability(dist, r_rx, diffusion, t, dimension)
    return passive_probability(dist, r_rx, diffusion, t, dimension)


def point_source_cir(spec: ChannelSpec, kind: ReceiverKind, t):
    """Expected receiver count for all ``N`` molecules released at the TX center.

    Absorbing receivers report the cumulative number absorbed by ``t``;
    passive receivers the number inside at ``t``.  ``t <= 0`` gives 0.
    """
    validate(spec)
    if spec.distance == 0:
        raise DomainError("point-source response is singular at distance 0")
    p = point_probability(kind, spec.distance, spec.r_rx, spec.diffusion, t, spec.dimension)
    return spec.molecules * p


def point_concentration(spec: ChannelSpec, t, distance=None):
    """Gaussian point-source concentration at ``distance`` from the source.

    Units are molecules/m in 1D and molecules/m^3 in 3D.  ``distance``
    defaults to ``spec.distance``.
    """
    d = spec.distance if distance is None else distance
    d = np.asarray(d, dtype=float)
    ok, ts = _positive_time(t)
    four_dt = 4.0 * spec.diffusion * ts
    power = 1.5 if spec.is_3d else 0.5
    c = spec.molecules / (math.pi * four_dt) ** power * np.exp(-(d**2) / four_dt)
    return np.where(ok, c, 0.0)


def receiver_volume(spec: ChannelSpec) -> float:
    if spec.is_3d:
        return 4.0 / 3.0 * math.pi * spec.r_rx**3
    return 2.0 * spec.r_rx


def uca_cir(spec: ChannelSpec, t, kind: ReceiverKind = ReceiverKind.PASSIVE):
    """Passive count assuming uniform concentration across the receiver."""
    if ReceiverKind(kind) is not ReceiverKind.PASSIVE:
        raise KindError("the uniform concentration assumption only applies to passive receivers")
    validate(spec)
    return receiver_volume(spec) * point_concentration(spec, t)


def peak_time(spec: ChannelSpec, kind: ReceiverKind) -> float:
    """Point-transmitter peak time.

    Passive: peak of the uniform-concentration count.  Absorbing: peak of the
    absorption *rate*, the cumulative count being non-decreasing.
    """
    validate(spec)
    d, D = spec.distance, spec.diffusion
    if ReceiverKind(kind) is ReceiverKind.ABSORBING:
        gap = d - spec.r_rx
        if gap <= 0:
            raise DomainError("absorbing peak time needs distance > r_rx")
        return gap**2 / (6.0 * D)
    if spec.is_3d:
        return d**2 / (6.0 * D)
    return d**2 / (2.0 * D)
