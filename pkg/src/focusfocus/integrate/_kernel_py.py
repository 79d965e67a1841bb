"""Pure-Python Dormand-Prince 5(4) stepper for the linear normal-form fields.

Reference implementation of the compiled kernel, selected at import when the
extension is unavailable (or ``FOCUSFOCUS_PURE_PYTHON=1``).  The field is
``a X_q1 + b X_q2``: ``z1' = (a + ib) z1``, ``z2' = (-a + ib) z2``.
"""

from __future__ import annotations

import math

import numpy as np

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY, FAC_MIN, FAC_MAX = 0.9, 0.2, 5.0
ALPHA, BETA = 0.7 / 5, 0.4 / 5


def _step(lam, mu, z1, z2, h):
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
    e1 = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
    e2 = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
    return y1, y2, e1, e2


def _sq(e, y0, y1, tol):
    s = tol * (1.0 + max(abs(y0), abs(y1)))
    return (e / s) ** 2


def _logabs(z):
    r = abs(z)
    return math.log(r) if r > 0.0 else -math.inf


def dopri_step(a, b, y, h):
    """One Dormand-Prince step; returns ``(y_new, err)`` as 4-arrays."""
    z1 = complex(y[0], y[1])
    z2 = complex(y[2], y[3])
    o1, o2, e1, e2 = _step(complex(a, b), complex(-a, b), z1, z2, h)
    return (
        np.array([o1.real, o1.imag, o2.real, o2.imag]),
        np.array([e1.real, e1.imag, e2.real, e2.imag]),
    )


def dopri_linear(a, b, y0, t_end, tol, max_steps, h0=0.0, w1=0.0, w2=0.0, level=0.0, direction=0):
    """Adaptive integration of the linear field from t = 0 to ``t_end``.

    Returns ``(ts, ys, status, err_sum)``; ``status`` is 0 (reached ``t_end``),
    1 (event ``w1 ln|z1| + w2 ln|z2| - level`` crossed in ``direction``; the last
    node is just past the crossing), 2 (step budget), 3 (NaN).
    """
    lam, mu = complex(a, b), complex(-a, b)
    z1 = complex(y0[0], y0[1])
    z2 = complex(y0[2], y0[3])
    ts = [0.0]
    ys = [(z1.real, z1.imag, z2.real, z2.imag)]
    if t_end <= 0.0:
        return np.array(ts), np.array(ys), 0, 0.0
    speed = math.hypot(a, b)
    h = h0 if h0 > 0.0 else 0.2 * tol**0.2 / (speed if speed > 0.0 else 1.0)
    t = 0.0
    err_prev = 1e-4
    err_sum = 0.0
    steps = 0
    status = 0
    rejected = False
    g_prev = w1 * _logabs(z1) + w2 * _logabs(z2) - level if direction else 0.0
    while t < t_end:
        if steps >= max_steps:
            status = 2
            break
        if h > t_end - t:
            h = t_end - t
        o1, o2, e1, e2 = _step(lam, mu, z1, z2, h)
        steps += 1
        err = math.sqrt(
            0.25
            * (
                _sq(e1.real, z1.real, o1.real, tol)
                + _sq(e1.imag, z1.imag, o1.imag, tol)
                + _sq(e2.real, z2.real, o2.real, tol)
                + _sq(e2.imag, z2.imag, o2.imag, tol)
            )
        )
        if math.isnan(err):
            status = 3
            break
        if err <= 1.0:
            t = t + h if t_end - t - h > 1e-15 * t_end else t_end
            z1, z2 = o1, o2
            err_sum += err * tol
            ts.append(t)
            ys.append((z1.real, z1.imag, z2.real, z2.imag))
            if err < 1e-10:
                fac = FAC_MAX
            else:
                fac = min(FAC_MAX, max(FAC_MIN, SAFETY * err ** (-ALPHA) * err_prev**BETA))
            if rejected and fac > 1.0:
                fac = 1.0
            h *= fac
            err_prev = max(err, 1e-4)
            rejected = False
            if direction:
                g_new = w1 * _logabs(z1) + w2 * _logabs(z2) - level
                if (direction > 0 and g_prev < 0.0 <= g_new) or (direction < 0 and g_prev > 0.0 >= g_new):
                    status = 1
                    break
                g_prev = g_new
        else:
            h *= max(FAC_MIN, SAFETY * err ** (-ALPHA))
            rejected = True
    return np.array(ts), np.array(ys), status, err_sum
