"""
coordinate_utils.py
====================================
The module responsible for handling generic functions dealing with coordinates.
Generates the sample points (z, and (x, y, u, r) for curvature checks) inside admissible regions,
keeping a margin from the boundary and the guard band of the P singularity.
"""
import numpy as np
from scipy.stats import qmc
from SasakiLift.errors import DomainError
from SasakiLift.geometry.lift import R_MAX

# fraction of the box width kept free at each side, so stencils stay inside the region
MARGIN = 0.1


def inner_box(domain, margin=MARGIN):
    """
    The admissible box shrunk by `margin` of its width on each side.

    Returns
    -------
    box : tuple of 4 floats
        (x_min, y_min, x_max, y_max)
    """
    (x0, x1), (y0, y1) = domain.x_range, domain.y_range
    dx, dy = (x1 - x0) * margin, (y1 - y0) * margin
    return x0 + dx, y0 + dy, x1 - dx, y1 - dy


def check_r_range(r_range):
    """Makes sure the r-range stays inside |r| <= R_MAX."""
    if max(abs(r) for r in r_range) > R_MAX:
        raise DomainError(f'r-range {r_range} reaches into the guard band |r| > {R_MAX}')
    return r_range


def _halton(dimension, count, seed):
    return qmc.Halton(d=dimension, scramble=True, seed=seed).random(count)


def sample_plane(domain, count, seed=0, margin=MARGIN):
    """
    Seeded low-discrepancy points z inside the admissible region.

    Parameters
    ----------
    domain : Domain
        admissible region
    count : int
        number of points
    seed : int
        seed of the scrambled Halton sequence
    margin : float
        fraction of the box kept free at each side

    Returns
    -------
    points : list of complex
    """
    x_min, y_min, x_max, y_max = inner_box(domain, margin)
    points = []
    batch = max(2 * count, 16)
    offset = 0
    while len(points) < count:
        unit = _halton(2, batch + offset, seed)[offset:]
        offset += batch
        for ux, uy in unit:
            x = x_min + ux * (x_max - x_min)
            y = y_min + uy * (y_max - y_min)
            # keep the same relative margin from a bounding circle
            if domain.radius is not None and np.hypot(x, y) >= (1.0 - margin) * domain.radius:
                continue
            points.append(complex(x, y))
            if len(points) == count:
                break
        if offset > 1000 * count:
            raise DomainError(f'could not place {count} samples inside {domain.describe()}')
    return points


def sample_spacetime(domain, count, seed=0, u_range=(-1.0, 1.0), r_range=(-2.0, 2.0), margin=MARGIN):
    """
    Seeded points (x, y, u, r) with z inside the admissible region and r inside r_range.

    Returns
    -------
    points : list of 4-tuples of float
    """
    check_r_range(r_range)
    planar = sample_plane(domain, count, seed, margin)
    unit = _halton(2, count, seed + 1)
    points = []
    for z, (uu, ur) in zip(planar, unit):
        u = u_range[0] + uu * (u_range[1] - u_range[0])
        r = r_range[0] + ur * (r_range[1] - r_range[0])
        points.append((z.real, z.imag, float(u), float(r)))
    return points
