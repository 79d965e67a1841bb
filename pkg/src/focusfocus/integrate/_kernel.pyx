# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) stepper for the linear normal-form fields.

The field is ``a X_q1 + b X_q2``, i.e. ``z1' = (a + ib) z1``, ``z2' = (-a + ib) z2``.
Mirrors ``_kernel_py`` exactly; see there for the argument conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, isnan, INFINITY

cnp.import_array()

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0, E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFETY = 0.9, FAC_MIN = 0.2, FAC_MAX = 5.0
cdef double ALPHA = 0.7 / 5.0, BETA = 0.4 / 5.0


cdef inline void _step(double complex lam, double complex mu,
                       double complex z1, double complex z2, double h,
                       double complex *o1, double complex *o2,
                       double complex *e1, double complex *e2) nogil:
    cdef double complex k1a, k2a, k3a, k4a, k5a, k6a, k7a
    cdef double complex k1b, k2b, k3b, k4b, k5b, k6b, k7b
    cdef double complex y1, y2
    k1a = lam * z1
    k1b = mu * z2
    k2a = lam * (z1 + h * A21 * k1a)
    k2b = mu * (z2 + h * A21 * k1b)
    k3a = lam * (z1 + h * (A31 * k1a + A32 * k2a))
    k3b = mu * (z2 + h * (A31 * k1b + A32 * k2b))
    k4a = lam * (z1 + h * (A41 * k1a + A42 * k2a + A43 * k3a))
    k4b = mu * (z2 + h * (A41 * k1b + A42 * k2b + A43 * k3b))
    k5a = lam * (z1 + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a))
    k5b = mu * (z2 + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b))
    k6a = lam * (z1 + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a))
    k6b = mu * (z2 + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b))
    y1 = z1 + h * (B1 * k1a + B3 * k3a + B4 * k4a + B5 * k5a + B6 * k6a)
    y2 = z2 + h * (B1 * k1b + B3 * k3b + B4 * k4b + B5 * k5b + B6 * k6b)
    k7a = lam * y1
    k7b = mu * y2
    o1[0] = y1
    o2[0] = y2
    e1[0] = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
    e2[0] = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)


cdef inline double _sq(double e, double y0, double y1, double tol) nogil:
    cdef double s = tol * (1.0 + (fabs(y0) if fabs(y0) > fabs(y1) else fabs(y1)))
    return (e / s) * (e / s)


cdef inline double _logabs(double complex z) nogil:
    cdef double r = sqrt(z.real * z.real + z.imag * z.imag)
    if r > 0.0:
        return log(r)
    return -INFINITY


def dopri_step(double a, double b, y, double h):
    """One Dormand-Prince step; returns ``(y_new, err)`` as 4-arrays."""
    cdef double complex lam = a + 1j * b, mu = -a + 1j * b
    cdef double complex z1 = y[0] + 1j * y[1], z2 = y[2] + 1j * y[3]
    cdef double complex o1, o2, e1, e2
    _step(lam, mu, z1, z2, h, &o1, &o2, &e1, &e2)
    return (np.array([o1.real, o1.imag, o2.real, o2.imag]),
            np.array([e1.real, e1.imag, e2.real, e2.imag]))


def dopri_linear(double a, double b, y0, double t_end, double tol, long max_steps,
                 double h0=0.0, double w1=0.0, double w2=0.0, double level=0.0,
                 int direction=0):
    """Adaptive integration of the linear field from t = 0 to ``t_end``.

    Returns ``(ts, ys, status, err_sum)``; ``status`` is 0 (reached ``t_end``),
    1 (event ``w1 ln|z1| + w2 ln|z2| - level`` crossed in ``direction``;
    the last node is just past the crossing), 2 (step budget), 3 (NaN).
    """
    cdef double complex lam = a + 1j * b, mu = -a + 1j * b
    cdef double complex z1 = y0[0] + 1j * y0[1], z2 = y0[2] + 1j * y0[3]
    cdef double complex o1, o2, e1, e2
    cdef Py_ssize_t cap = 256, n = 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts = np.empty(cap)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ys = np.empty((cap, 4))
    cdef double t = 0.0, h, err, err_prev = 1e-4, fac, err_sum = 0.0
    cdef double g_prev = 0.0, g_new
    cdef long steps = 0
    cdef int status = 0
    cdef bint rejected = False
    cdef double speed = sqrt(a * a + b * b)

    ts[0] = 0.0
    ys[0, 0] = z1.real; ys[0, 1] = z1.imag; ys[0, 2] = z2.real; ys[0, 3] = z2.imag
    if t_end <= 0.0:
        return ts[:1].copy(), ys[:1].copy(), 0, 0.0
    if direction != 0:
        g_prev = w1 * _logabs(z1) + w2 * _logabs(z2) - level
    h = h0
    if h <= 0.0:
        h = 0.2 * tol ** 0.2 / (speed if speed > 0.0 else 1.0)
    while t < t_end:
        if steps >= max_steps:
            status = 2
            break
        if h > t_end - t:
            h = t_end - t
        _step(lam, mu, z1, z2, h, &o1, &o2, &e1, &e2)
        steps += 1
        err = sqrt(0.25 * (_sq(e1.real, z1.real, o1.real, tol) + _sq(e1.imag, z1.imag, o1.imag, tol)
                           + _sq(e2.real, z2.real, o2.real, tol) + _sq(e2.imag, z2.imag, o2.imag, tol)))
        if isnan(err):
            status = 3
            break
        if err <= 1.0:
            t = t + h if t_end - t - h > 1e-15 * t_end else t_end
            z1 = o1
            z2 = o2
            err_sum += err * tol
            if n == cap:
                cap *= 2
                ts = np.resize(ts, cap)
                ys = np.resize(ys, (cap, 4))
            ts[n] = t
            ys[n, 0] = z1.real; ys[n, 1] = z1.imag; ys[n, 2] = z2.real; ys[n, 3] = z2.imag
            n += 1
            if err < 1e-10:
                fac = FAC_MAX
            else:
                fac = SAFETY * err ** (-ALPHA) * err_prev ** BETA
                fac = FAC_MIN if fac < FAC_MIN else (FAC_MAX if fac > FAC_MAX else fac)
            if rejected and fac > 1.0:
                fac = 1.0
            h *= fac
            err_prev = err if err > 1e-4 else 1e-4
            rejected = False
            if direction != 0:
                g_new = w1 * _logabs(z1) + w2 * _logabs(z2) - level
                if (direction > 0 and g_prev < 0.0 and g_new >= 0.0) or \
                   (direction < 0 and g_prev > 0.0 and g_new <= 0.0):
                    status = 1
                    break
                g_prev = g_new
        else:
            fac = SAFETY * err ** (-ALPHA)
            h *= (FAC_MIN if fac < FAC_MIN else fac)
            rejected = True
    return ts[:n].copy(), ys[:n].copy(), status, err_sum
