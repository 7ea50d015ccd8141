"""Embedded Dormand-Prince 5(4) stepping with cubic-Hermite dense output.

One generic adaptive driver serves both the flow ODE (3 components) and the
batched geodesic/Jacobi ray systems (directions x 21 components).  The driver
is a generator of accepted steps so consumers can process results online
without retaining the whole solution in memory.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import StepSizeUnderflowError

# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

MAX_STEPS = 2_000_000


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, t_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, abs(t_end - t0))
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, abs(t_end - t0))


def integrate_adaptive(f, t0, y0, t_end, rtol, atol, h_max=np.inf, h_fixed=None,
                       h0=None, max_steps=MAX_STEPS):
    """Yield accepted steps ``(t0, y0, f0, t1, y1, f1)`` from t0 to t_end.

    ``h_fixed`` disables error control and marches with a constant step
    (used to measure the raw convergence order of the formula); ``h0`` seeds
    the adaptive controller instead of the startup heuristic.  Raises
    StepSizeUnderflowError when the controller drives h below resolution.
    """
    t = float(t0)
    y = np.asarray(y0, dtype=float).copy()
    k1 = np.asarray(f(t, y), dtype=float)
    if h_fixed is not None:
        h = float(h_fixed)
    elif h0 is not None:
        h = min(float(h0), h_max, abs(t_end - t0))
    else:
        h = min(_initial_step(f, t, y, k1, t_end, rtol, atol), h_max)
    direction = 1.0 if t_end >= t0 else -1.0
    nsteps = 0
    while direction * (t_end - t) > 1e-15 * max(1.0, abs(t)):
        if nsteps >= max_steps:
            raise StepSizeUnderflowError(f"step budget exhausted at t={t!r}")
        h = min(h, abs(t_end - t))
        if h_fixed is None and h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(f"step size underflow at t={t!r} (h={h!r})")
        ks = [k1]
        for i in range(1, 7):
            yi = y + direction * h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(np.asarray(f(t + direction * h * _C[i], yi), dtype=float))
        y1 = y + direction * h * sum(b * k for b, k in zip(_B5[:6], ks[:6]))
        # FSAL: ks[6] is f at (t+h, y1)
        if h_fixed is not None:
            accept, norm = True, 0.0
        else:
            err = direction * h * sum(e * k for e, k in zip(_E, ks))
            norm = _error_norm(err, y, y1, rtol, atol)
            accept = norm <= 1.0
        if accept:
            t1 = t + direction * h
            yield t, y, k1, t1, y1, ks[6]
            t, y, k1 = t1, y1, ks[6]
        if h_fixed is None:
            factor = 0.9 * (norm ** -0.2) if norm > 0 else 5.0
            h = min(h * min(5.0, max(0.2, factor)), h_max)
        nsteps += 1


def hermite_eval(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite value of the step interpolant at ``t`` in [t0, t1]."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1


def hermite_deriv(t0, y0, f0, t1, y1, f1, t):
    """Derivative of the cubic Hermite interpolant at ``t``."""
    h = t1 - t0
    s = (t - t0) / h
    d00 = 6 * s * (s - 1) / h
    d10 = (1 - s) * (1 - 3 * s)
    d01 = -d00
    d11 = s * (3 * s - 2)
    return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1
