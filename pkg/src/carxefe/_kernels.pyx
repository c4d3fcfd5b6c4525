# cython: language_level=3
"""Compiled inner loops: Verlet substepping and grid scoring of the EFE objective.

Arithmetic is written in the same operation order as ``_fallback`` so both
backends agree bitwise on the plant and to the last ulp of ``log`` on the grid.
"""
from libc.math cimport log, fabs


cdef inline void _accel(double m1, double m2, double c1, double c2, double k1, double k2,
                        double z1, double z2, double v1, double v2, double u1, double u2,
                        double* a1, double* a2) noexcept nogil:
    a1[0] = (-(c1 + c2) * v1 + c2 * v2 - (k1 + k2) * z1 + k2 * z2 + u1) / m1
    a2[0] = (c2 * v1 - c2 * v2 + k2 * z1 - k2 * z2 + u2) / m2


def msd_advance(double m1, double m2, double c1, double c2, double k1, double k2,
                double z1, double z2, double v1, double v2,
                double u1, double u2, double dt, long n_iter):
    """Run ``n_iter`` velocity-Verlet substeps with the input held constant."""
    cdef double a1, a2, b1, b2, zn1, zn2, vp1, vp2
    cdef double half_dt2 = 0.5 * dt * dt
    cdef double half_dt = 0.5 * dt
    cdef long i
    with nogil:
        for i in range(n_iter):
            _accel(m1, m2, c1, c2, k1, k2, z1, z2, v1, v2, u1, u2, &a1, &a2)
            zn1 = z1 + dt * v1 + half_dt2 * a1
            zn2 = z2 + dt * v2 + half_dt2 * a2
            vp1 = v1 + dt * a1
            vp2 = v2 + dt * a2
            _accel(m1, m2, c1, c2, k1, k2, zn1, zn2, vp1, vp2, u1, u2, &b1, &b2)
            v1 = v1 + half_dt * (a1 + b1)
            v2 = v2 + half_dt * (a2 + b2)
            z1 = zn1
            z2 = zn2
    return z1, z2, v1, v2


def efe_grid(const double[::1] grid, double[::1] out,
             double mean_offset, double mean_slope,
             double q0, double q1, double q2,
             double ratio, double goal_mean, double goal_var, double eta):
    """Fill ``out`` with the regularized objective on ``grid``; return the argmin index.

    Ties go to the smallest ``|u|``, then to the lower index.
    """
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t i, best = -1
    cdef double u, m, d, q, j, best_j = 0.0, best_abs = 0.0
    if out.shape[0] != n:
        raise ValueError("output buffer length does not match grid")
    with nogil:
        for i in range(n):
            u = grid[i]
            m = mean_offset + mean_slope * u
            d = m - goal_mean
            q = q0 + 2.0 * q1 * u + q2 * u * u
            j = (d * d + ratio * (q + 1.0)) / (2.0 * goal_var) - 0.5 * log(q + 1.0) + 0.5 * eta * u * u
            out[i] = j
            if best < 0 or j < best_j or (j == best_j and fabs(u) < best_abs):
                best = i
                best_j = j
                best_abs = fabs(u)
    return best
