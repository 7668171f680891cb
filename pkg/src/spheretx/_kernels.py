"""Numba kernels for the particle simulator.

Molecules are independent, so each kernel walks one molecule through every
time step before moving to the next one; an absorbed molecule simply stops.
The receiver is centered at the origin.  ``counts`` is accumulated in place:
passive kernels add molecules found inside the receiver at each record step,
absorbing kernels add the molecule to every record at or after its
absorption step.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True, error_model="numpy")
def segment_hits_sphere(px, py, pz, qx, qy, qz, radius):
    """True if the segment p->q touches the ball of ``radius`` at the origin."""
    r2 = radius * radius
    if qx * qx + qy * qy + qz * qz <= r2:
        return True
    dx, dy, dz = qx - px, qy - py, qz - pz
    a = dx * dx + dy * dy + dz * dz
    if a == 0.0:
        return px * px + py * py + pz * pz <= r2
    s = -(px * dx + py * dy + pz * dz) / a
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    cx, cy, cz = px + s * dx, py + s * dy, pz + s * dz
    return cx * cx + cy * cy + cz * cz <= r2


@numba.njit(cache=True, error_model="numpy")
def segment_hits_interval(p, q, half_width):
    if -half_width <= q <= half_width:
        return True
    return (p < -half_width and q > half_width) or (p > half_width and q < -half_width)


@numba.njit(cache=True, error_model="numpy")
def bridge_probability(gap_prev, gap_next, diffusion, dt):
    """Chance a Brownian bridge between two outside points crossed a plane."""
    if gap_prev <= 0.0 or gap_next <= 0.0:
        return 1.0
    return math.exp(-gap_prev * gap_next / (diffusion * dt))


@numba.njit(cache=True, error_model="numpy")
def reflect_off_sphere(px, py, pz, qx, qy, qz, cx, cy, cz, radius, max_bounces):
    """Specularly reflect the step p->q off a solid sphere; returns the new end.

    Bounces are applied iteratively; if the cap is reached with the end
    point still inside, it is projected back onto the surface.
    """
    for _ in range(max_bounces):
        dx, dy, dz = qx - px, qy - py, qz - pz
        ox, oy, oz = px - cx, py - cy, pz - cz
        a = dx * dx + dy * dy + dz * dz
        if a == 0.0:
            break
        b = 2.0 * (ox * dx + oy * dy + oz * dz)
        c = ox * ox + oy * oy + oz * oz - radius * radius
        disc = b * b - 4.0 * a * c
        if disc <= 0.0:
            break
        root = math.sqrt(disc)
        t_in = (-b - root) / (2.0 * a)
        t_out = (-b + root) / (2.0 * a)
        if t_out <= 0.0 or t_in >= 1.0:
            break
        if t_in < 0.0:
            t_in = 0.0
        hx, hy, hz = px + t_in * dx, py + t_in * dy, pz + t_in * dz
        nx, ny, nz = hx - cx, hy - cy, hz - cz
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        nx, ny, nz = nx / norm, ny / norm, nz / norm
        rx, ry, rz = qx - hx, qy - hy, qz - hz
        dot = rx * nx + ry * ny + rz * nz
        if dot >= 0.0:
            break
        qx, qy, qz = qx - 2.0 * dot * nx, qy - 2.0 * dot * ny, qz - 2.0 * dot * nz
        px, py, pz = hx, hy, hz
    ox, oy, oz = qx - cx, qy - cy, qz - cz
    dist = math.sqrt(ox * ox + oy * oy + oz * oz)
    if dist < radius:
        scale = radius / dist
        qx, qy, qz = cx + ox * scale, cy + oy * scale, cz + oz * scale
    return qx, qy, qz


@numba.njit(cache=True, nogil=True, error_model="numpy")
def walk_3d(rng, positions, record_steps, sigma, r_rx, absorbing, bridge,
            diffusion, dt, reflect, tx_x, r_tx, max_bounces, counts):
    n_records = record_steps.shape[0]
    last_step = record_steps[n_records - 1]
    r2 = r_rx * r_rx
    absorbed = 0
    for i in range(positions.shape[0]):
        x, y, z = positions[i, 0], positions[i, 1], positions[i, 2]
        j = 0
        while j < n_records and record_steps[j] == 0:
            if not absorbing and x * x + y * y + z * z <= r2:
                counts[j] += 1
            j += 1
        for k in range(1, last_step + 1):
            nx = x + sigma * rng.standard_normal()
            ny = y + sigma * rng.standard_normal()
            nz = z + sigma * rng.standard_normal()
            if reflect:
                nx, ny, nz = reflect_off_sphere(x, y, z, nx, ny, nz, tx_x, 0.0, 0.0, r_tx, max_bounces)
            if absorbing:
                hit = segment_hits_sphere(x, y, z, nx, ny, nz, r_rx)
                if not hit and bridge:
                    gap_prev = math.sqrt(x * x + y * y + z * z) - r_rx
                    gap_next = math.sqrt(nx * nx + ny * ny + nz * nz) - r_rx
                    hit = rng.random() < bridge_probability(gap_prev, gap_next, diffusion, dt)
                if hit:
                    absorbed += 1
                    for m in range(j, n_records):
                        counts[m] += 1
                    break
            x, y, z = nx, ny, nz
            while j < n_records and record_steps[j] == k:
                if not absorbing and x * x + y * y + z * z <= r2:
                    counts[j] += 1
                j += 1
    return absorbed


@numba.njit(cache=True, nogil=True, error_model="numpy")
def walk_1d(rng, positions, record_steps, sigma, r_rx, absorbing, bridge,
            diffusion, dt, counts):
    n_records = record_steps.shape[0]
    last_step = record_steps[n_records - 1]
    absorbed = 0
    for i in range(positions.shape[0]):
        x = positions[i, 0]
        j = 0
        while j < n_records and record_steps[j] == 0:
            if not absorbing and -r_rx <= x <= r_rx:
                counts[j] += 1
            j += 1
        for k in range(1, last_step + 1):
            nx = x + sigma * rng.standard_normal()
            if absorbing:
                hit = segment_hits_interval(x, nx, r_rx)
                if not hit and bridge:
                    gap_prev = abs(x) - r_rx
                    gap_next = abs(nx) - r_rx
                    hit = rng.random() < bridge_probability(gap_prev, gap_next, diffusion, dt)
                if hit:
                    absorbed += 1
                    for m in range(j, n_records):
                        counts[m] += 1
                    break
            x = nx
            while j < n_records and record_steps[j] == k:
                if not absorbing and -r_rx <= x <= r_rx:
                    counts[j] += 1
                j += 1
    return absorbed
