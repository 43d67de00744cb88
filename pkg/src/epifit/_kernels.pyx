# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernel. Mirrors _kernels_py.run_sir exactly."""

from libc.math cimport isfinite


def run_sir(double s0, double i0, double r0, double beta, double gamma,
            double rho, double population, int n_days, int n_sub,
            double neg_tol, double[::1] out_s, double[::1] out_i,
            double[::1] out_r):
    cdef double h = 1.0 / n_sub
    cdef double beta_eff = (1.0 - rho) * beta
    cdef double s = s0, i = i0, r = r0
    cdef double flow1, rec1, k1s, k1i
    cdef double s2, i2, flow2, rec2, k2s, k2i
    cdef double s3, i3, flow3, rec3, k3s, k3i
    cdef double s4, i4, flow4, rec4, k4s, k4i
    cdef double sixth
    cdef Py_ssize_t d, k
    out_s[0] = s
    out_i[0] = i
    out_r[0] = r
    for d in range(n_days):
        for k in range(n_sub):
            flow1 = beta_eff * s * i / population
            rec1 = gamma * i
            k1s = -flow1
            k1i = flow1 - rec1

            s2 = s + 0.5 * h * k1s
            i2 = i + 0.5 * h * k1i
            flow2 = beta_eff * s2 * i2 / population
            rec2 = gamma * i2
            k2s = -flow2
            k2i = flow2 - rec2

            s3 = s + 0.5 * h * k2s
            i3 = i + 0.5 * h * k2i
            flow3 = beta_eff * s3 * i3 / population
            rec3 = gamma * i3
            k3s = -flow3
            k3i = flow3 - rec3

            s4 = s + h * k3s
            i4 = i + h * k3i
            flow4 = beta_eff * s4 * i4 / population
            rec4 = gamma * i4
            k4s = -flow4
            k4i = flow4 - rec4

            sixth = h / 6.0
            s = s + sixth * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
            i = i + sixth * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
            r = r + sixth * (rec1 + 2.0 * rec2 + 2.0 * rec3 + rec4)

            if not (isfinite(s) and isfinite(i) and isfinite(r)):
                return d + 1
            if s < 0.0:
                if s < -neg_tol:
                    return d + 1
                s = 0.0
            if i < 0.0:
                if i < -neg_tol:
                    return d + 1
                i = 0.0
            if r < 0.0:
                if r < -neg_tol:
                    return d + 1
                r = 0.0
        out_s[d + 1] = s
        out_i[d + 1] = i
        out_r[d + 1] = r
    return -1
