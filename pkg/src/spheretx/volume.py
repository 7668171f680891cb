"""Channel impulse responses for finite transmitters.

1D line transmitters have closed forms.  In 3D the volume average of the
point-source response depends on the source point only through its distance
``s`` to the receiver center, so the default path integrates the point
response against the exact density of ``s``:

* uniform ball:    p(s) = 3 s (R^2 - (d - s)^2) / (4 R^3 d)
* uniform sphere:  p(s) = s / (2 R d)

both on ``[d - R, d + R]``.  The triple integral over (c, theta, phi) is kept
as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import quadrature
from .analytic import erfc, peak_time, point_probability, point_source_cir
from .errors import DimensionError, DomainError, EmptyCurveError, ModelError
from .model import (
    ChannelSpec,
    Dimension,
    ReceiverKind,
    SourcePoint,
    TimeGrid,
    TransmitterModel,
    derived_geometry,
    validate,
)


class QuadratureMethod(str, Enum):
    RADIAL_DENSITY_1D = "radial_density_1d"
    DIRECT_SPHERICAL_3D = "direct_spherical_3d"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the 3D and generic volume integrals.

    ``abs_tol`` is in molecules.  It defaults to 0 so early-time responses,
    which can be many orders of magnitude below one molecule, still get
    ``rel_tol`` relative accuracy.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    max_subdivisions: int = 10_000
    method: QuadratureMethod = QuadratureMethod.RADIAL_DENSITY_1D

    def __post_init__(self):
        if not self.rel_tol > 0 or self.abs_tol < 0:
            raise DomainError("quadrature tolerances must be positive")
        object.__setattr__(self, "method", QuadratureMethod(self.method))


@dataclass(frozen=True)
class DeviationCurve:
    """Percent deviation of the point-transmitter response, per grid time.

    ``excluded`` lists the absolute times dropped because the reference
    (volume) response underflowed to zero.
    """

    normalized_times: np.ndarray
    deviations: np.ndarray
    times: np.ndarray
    peak_time: float
    excluded: np.ndarray


def _scalar_or_array(values, t):
    return float(values) if np.ndim(t) == 0 else values


# ----------------------------------------------------------------- 1D forms


def _ierfc_scaled(x, width):
    """``int_x^inf erfc(u / width) du`` for ``x >= 0``.

    Equals ``width * (exp(-z^2)/sqrt(pi) - z erfc(z))`` with ``z = x/width``.
    """
    z = x / width
    return width * (np.exp(-z * z) / math.sqrt(math.pi) - z * erfc(z))


def _require_1d(spec):
    if spec.dimension is not Dimension.ONE_D:
        raise DimensionError("line-transmitter closed forms are 1D only")


def line_tx_cir_passive_1d(spec: ChannelSpec, t):
    """Passive receiver count for molecules released uniformly on a segment.

    This is the closed-form segment average of the 1D passive point
    response.  The ``x erf`` terms of the textbook expression are rewritten
    through the integrated complementary error function, which is the same
    function but keeps full precision when the response is tiny.
    """
    validate(spec)
    _require_1d(spec)
    if spec.r_tx == 0:
        return point_source_cir(spec, ReceiverKind.PASSIVE, t)
    x_i, x_f = derived_geometry(spec)
    r = spec.r_rx
    tt = np.asarray(t, dtype=float)
    ok = tt > 0
    width = 2.0 * np.sqrt(spec.diffusion * np.where(ok, tt, 1.0))
    h = lambda x: _ierfc_scaled(x, width)
    bracket = h(x_f + r) - h(x_i + r) - h(x_f - r) + h(x_i - r)
    value = spec.molecules / (2.0 * spec.r_tx) * 0.5 * bracket
    value = np.where(ok, np.clip(value, 0.0, spec.molecules), 0.0)
    return _scalar_or_array(value, t)


def line_tx_cir_absorbing_1d(spec: ChannelSpec, t):
    """Cumulative absorbed count for molecules released uniformly on a segment."""
    validate(spec)
    _require_1d(spec)
    if spec.r_tx == 0:
        return point_source_cir(spec, ReceiverKind.ABSORBING, t)
    x_i, x_f = derived_geometry(spec)
    r = spec.r_rx
    tt = np.asarray(t, dtype=float)
    ok = tt > 0
    width = 2.0 * np.sqrt(spec.diffusion * np.where(ok, tt, 1.0))
    # near edge may sit a hair inside the receiver from decimal rounding
    near = max(x_i - r, 0.0)
    far = x_f - r
    value = spec.molecules / (2.0 * spec.r_tx) * (_ierfc_scaled(near, width) - _ierfc_scaled(far, width))
    value = np.where(ok, np.clip(value, 0.0, spec.molecules), 0.0)
    return _scalar_or_array(value, t)


# ------------------------------------------------------------ geometry / 3D


def source_distance(spec: ChannelSpec, p: SourcePoint) -> float:
    """Distance from the receiver center to a point inside the transmitter."""
    d, c = spec.distance, p.offset
    if spec.dimension is Dimension.ONE_D:
        return d + c
    cross = math.cos(p.azimuth) * math.sin(p.polar)
    return math.sqrt(max(c * c + d * d - 2.0 * c * d * cross, 0.0))


def radial_distance_density(spec: ChannelSpec, model: TransmitterModel, s):
    """Density of the source-to-receiver distance for a 3D transmitter.

    Zero outside ``[d - r_tx, d + r_tx]``.
    """
    validate(spec)
    model = TransmitterModel(model)
    if not spec.is_3d:
        raise DimensionError("radial distance density is defined in 3D only")
    if model is TransmitterModel.POINT or spec.r_tx == 0:
        raise ModelError("a point transmitter has no distance density")
    R, d = spec.r_tx, spec.distance
    s = np.asarray(s, dtype=float)
    inside = (s >= d - R) & (s <= d + R)
    if model is TransmitterModel.UNIFORM_VOLUME:
        dens = 3.0 * s * (R * R - (d - s) ** 2) / (4.0 * R**3 * d)
    else:
        dens = s / (2.0 * R * d)
    dens = np.where(inside, np.maximum(dens, 0.0), 0.0)
    return float(dens) if dens.ndim == 0 else dens


def _edge_breakpoints(edge, length, diffusion, t):
    """Breakpoints graded toward ``edge`` down to the shortest diffusion length.

    At early times the integrands live in a layer of width ~sqrt(4 D t)
    next to the near transmitter edge; without these the first panels can
    straddle the layer with every node outside it.
    """
    t = np.asarray(t, dtype=float)
    t = t[t > 0]
    if t.size == 0:
        return None
    width = math.sqrt(4.0 * diffusion * float(t.min()))
    if width >= length / 8:
        return None
    n = int(math.ceil(math.log2(length / width)))
    return edge + width * 2.0 ** np.arange(-1, n)


def _radial_average(spec, kind, model, t, q):
    R, d = spec.r_tx, spec.distance
    tt = np.atleast_1d(np.asarray(t, dtype=float))

    def integrand(s):
        dens = radial_distance_density(spec, model, s)
        prob = point_probability(kind, s[None, :], spec.r_rx, spec.diffusion, tt[:, None], spec.dimension)
        return dens[None, :] * prob

    res = quadrature.integrate(
        integrand, d - R, d + R,
        rel_tol=q.rel_tol,
        abs_tol=q.abs_tol / spec.molecules,
        max_subdivisions=q.max_subdivisions,
        initial_intervals=4,
        points=_edge_breakpoints(d - R, 2.0 * R, spec.diffusion, tt),
    )
    value = np.clip(spec.molecules * res.value, 0.0, spec.molecules)
    return value[0] if np.ndim(t) == 0 else value.reshape(np.shape(t))


def _direct_spherical(spec, kind, t, q):
    """Triple integral over (c, theta, phi) with the c^2 sin(theta) Jacobian."""
    R, d = spec.r_tx, spec.distance
    opts = dict(rel_tol=q.rel_tol, abs_tol=0.0, max_subdivisions=q.max_subdivisions)
    abs_tol = q.abs_tol / spec.molecules

    def at_time(tk):
        def over_phi(c, theta):
            def f(phi):
                cross = np.cos(phi)[None, None, :] * np.sin(theta)[None, :, None]
                cc = c[:, None, None]
                dint = np.sqrt(np.maximum(cc * cc + d * d - 2.0 * cc * d * cross, 0.0))
                return point_probability(kind, dint, spec.r_rx, spec.diffusion, tk, spec.dimension)

            return quadrature.integrate(f, 0.0, 2.0 * math.pi, initial_intervals=4, **opts).value

        def over_theta(c):
            f = lambda theta: over_phi(c, theta) * np.sin(theta)[None, :]
            return quadrature.integrate(f, 0.0, math.pi, initial_intervals=2, **opts).value

        f = lambda c: over_theta(c) * c * c
        res = quadrature.integrate(f, 0.0, R, rel_tol=q.rel_tol, abs_tol=abs_tol,
                                   max_subdivisions=q.max_subdivisions)
        return res.value / (4.0 / 3.0 * math.pi * R**3)

    tt = np.asarray(t, dtype=float)
    values = np.array([at_time(tk) if tk > 0 else 0.0 for tk in tt.reshape(-1)])
    values = np.clip(spec.molecules * values, 0.0, spec.molecules).reshape(tt.shape)
    return _scalar_or_array(values, t)


def _require_3d(spec):
    if not spec.is_3d:
        raise DimensionError("spherical transmitter responses are 3D only")


def sphere_tx_cir_3d(spec: ChannelSpec, kind: ReceiverKind, t, q: Optional[QuadratureSpec] = None):
    """Response to molecules released uniformly throughout a sphere."""
    q = q or QuadratureSpec()
    validate(spec)
    _require_3d(spec)
    if spec.r_tx == 0:
        return point_source_cir(spec, kind, t)
    if q.method is QuadratureMethod.DIRECT_SPHERICAL_3D:
        return _direct_spherical(spec, kind, t, q)
    return _radial_average(spec, kind, TransmitterModel.UNIFORM_VOLUME, t, q)


def surface_tx_cir_3d(spec: ChannelSpec, kind: ReceiverKind, t, q: Optional[QuadratureSpec] = None):
    """Response to molecules released uniformly on a transparent sphere's surface."""
    q = q or QuadratureSpec()
    validate(spec)
    _require_3d(spec)
    if spec.r_tx == 0:
        return point_source_cir(spec, kind, t)
    return _radial_average(spec, kind, TransmitterModel.SURFACE_RELEASE, t, q)


def volume_cir_generic(spec: ChannelSpec, kind: ReceiverKind, t, q: Optional[QuadratureSpec] = None):
    """Brute-force average of the point response over the transmitter volume.

    1D integrates over the signed offset ``c``; 3D always uses the direct
    spherical triple integral regardless of ``q.method``.
    """
    q = q or QuadratureSpec()
    validate(spec)
    if spec.r_tx == 0:
        return point_source_cir(spec, kind, t)
    if spec.is_3d:
        return _direct_spherical(spec, kind, t, q)
    R, d = spec.r_tx, spec.distance
    tt = np.atleast_1d(np.asarray(t, dtype=float))

    def integrand(c):
        return point_probability(kind, d + c[None, :], spec.r_rx, spec.diffusion, tt[:, None], spec.dimension)

    res = quadrature.integrate(integrand, -R, R, rel_tol=q.rel_tol, abs_tol=q.abs_tol / spec.molecules,
                               max_subdivisions=q.max_subdivisions, initial_intervals=4,
                               points=_edge_breakpoints(-R, 2.0 * R, spec.diffusion, tt))
    value = np.clip(spec.molecules * res.value / (2.0 * R), 0.0, spec.molecules)
    return value[0] if np.ndim(t) == 0 else value.reshape(np.shape(t))


def volume_cir(spec: ChannelSpec, kind: ReceiverKind, t,
               model: TransmitterModel = TransmitterModel.UNIFORM_VOLUME,
               q: Optional[QuadratureSpec] = None):
    """Dispatch to the right response for a transmitter model."""
    model = TransmitterModel(model)
    kind = ReceiverKind(kind)
    if model is TransmitterModel.POINT:
        return point_source_cir(spec, kind, t)
    if spec.dimension is Dimension.ONE_D:
        if model is TransmitterModel.SURFACE_RELEASE:
            raise ModelError("surface release is only defined in 3D")
        if kind is ReceiverKind.PASSIVE:
            return line_tx_cir_passive_1d(spec, t)
        return line_tx_cir_absorbing_1d(spec, t)
    if model is TransmitterModel.SURFACE_RELEASE:
        return surface_tx_cir_3d(spec, kind, t, q)
    return sphere_tx_cir_3d(spec, kind, t, q)


# ------------------------------------------------------------ PTA deviation


def pta_deviation(spec: ChannelSpec, kind: ReceiverKind, grid: TimeGrid,
                  q: Optional[QuadratureSpec] = None,
                  model: TransmitterModel = TransmitterModel.UNIFORM_VOLUME) -> DeviationCurve:
    """Percent deviation of the point-transmitter response from the volume one.

    Times are reported divided by the point-transmitter peak time.
    """
    times = grid.times
    reference = np.asarray(volume_cir(spec, kind, times, model, q), dtype=float)
    pta = np.asarray(point_source_cir(spec, kind, times), dtype=float)
    usable = np.isfinite(reference) & (reference > 0)
    if not usable.any():
        raise EmptyCurveError("volume response is zero at every grid time")
    tp = peak_time(spec, kind)
    dev = 100.0 * (pta[usable] - reference[usable]) / reference[usable]
    return DeviationCurve(
        normalized_times=times[usable] / tp,
        deviations=dev,
        times=times[usable],
        peak_time=tp,
        excluded=times[~usable],
    )


# ------------------------------------------------------------ peak finding


class Peak(NamedTuple):
    time: float
    value: float


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def find_peak(fn: Callable[[np.ndarray], np.ndarray], t_lo: float, t_hi: float,
              points: int = 400, rtol: float = 1e-6) -> Peak:
    """Maximize ``fn`` over ``[t_lo, t_hi]``.

    Coarse log-grid argmax, then golden-section search in log-time on the
    neighbouring grid cells until the bracket is below ``rtol`` relative.
    """
    grid = np.geomspace(t_lo, t_hi, points)
    values = np.asarray(fn(grid), dtype=float)
    k = int(np.argmax(values))
    if k == 0 or k == points - 1:
        return Peak(float(grid[k]), float(values[k]))
    lo, hi = math.log(grid[k - 1]), math.log(grid[k + 1])
    f = lambda u: float(np.asarray(fn(np.array([math.exp(u)])), dtype=float)[0])
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    # bracket in log-time, so its width is the relative time accuracy
    while hi - lo > rtol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
    u = 0.5 * (lo + hi)
    best = max((f(u), u), (float(values[k]), math.log(grid[k])))
    return Peak(math.exp(best[1]), best[0])


def volume_peak(spec: ChannelSpec, kind: ReceiverKind,
                model: TransmitterModel = TransmitterModel.UNIFORM_VOLUME,
                q: Optional[QuadratureSpec] = None) -> Peak:
    """Peak of the passive volume response, searched over 1e-2..1e2 peak times."""
    tp = peak_time(spec, kind)
    return find_peak(lambda t: volume_cir(spec, kind, t, model, q), tp / 100.0, tp * 100.0)
