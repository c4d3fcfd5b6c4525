"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def msd_advance(m1, m2, c1, c2, k1, k2, z1, z2, v1, v2, u1, u2, dt, n_iter):
    """Run ``n_iter`` velocity-Verlet substeps with the input held constant."""
    half_dt2 = 0.5 * dt * dt
    half_dt = 0.5 * dt
    for _ in range(n_iter):
        a1 = (-(c1 + c2) * v1 + c2 * v2 - (k1 + k2) * z1 + k2 * z2 + u1) / m1
        a2 = (c2 * v1 - c2 * v2 + k2 * z1 - k2 * z2 + u2) / m2
        zn1 = z1 + dt * v1 + half_dt2 * a1
        zn2 = z2 + dt * v2 + half_dt2 * a2
        vp1 = v1 + dt * a1
        vp2 = v2 + dt * a2
        b1 = (-(c1 + c2) * vp1 + c2 * vp2 - (k1 + k2) * zn1 + k2 * zn2 + u1) / m1
        b2 = (c2 * vp1 - c2 * vp2 + k2 * zn1 - k2 * zn2 + u2) / m2
        v1 = v1 + half_dt * (a1 + b1)
        v2 = v2 + half_dt * (a2 + b2)
        z1 = zn1
        z2 = zn2
    return z1, z2, v1, v2


def efe_grid(grid, out, mean_offset, mean_slope, q0, q1, q2, ratio, goal_mean, goal_var, eta):
    """Fill ``out`` with the regularized objective on ``grid``; return the argmin index.

    Ties go to the smallest ``|u|``, then to the lower index.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if out.shape[0] != grid.shape[0]:
        raise ValueError("output buffer length does not match grid")
    u = grid
    with np.errstate(all="ignore"):
        d = (mean_offset + mean_slope * u) - goal_mean
        q = q0 + 2.0 * q1 * u + q2 * u * u
        out[:] = (d * d + ratio * (q + 1.0)) / (2.0 * goal_var) - 0.5 * np.log(q + 1.0) + 0.5 * eta * u * u
    if np.isnan(out).all():
        return 0
    ties = np.flatnonzero(out == np.nanmin(out))
    # stable sort keeps the lower index among equal |u|
    return int(ties[np.argsort(np.abs(u[ties]), kind="stable")[0]])
