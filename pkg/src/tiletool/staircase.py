"""Unit-mass staircase step functions, their Fourier transforms, and the
perturbation profile built from scaled copies of them.

The order-k staircase redistributes a point mass of k over k shrinking
pieces: it takes the value k-j+1 on [2(j-1)/(k(k+1)), 2j/(k(k+1))) for
j = 1..k and vanishes outside [0, 2/(k+1)).  Equivalently it is the stack
of the k indicator functions 1_[0, 2j/(k(k+1))), which is what the moment
and transform formulas below use.
"""

from __future__ import annotations

import numpy as np

from .core import SeqWindow

#: Arguments with |xi| * support_width below this use the 4-term Taylor
#: branch of the piecewise transform (avoids cancellation in the
#: difference-quotient form).
TAYLOR_SWITCH = 1e-3

#: Maximum |xi| * support_width handled by the series form of
#: ``staircase_ft_minus_one`` before falling back to the closed form.
SERIES_LIMIT = 0.5


def _check_order(k) -> int:
    ki = int(k)
    if ki != k or ki < 1:
        raise ValueError(f"staircase order must be a positive integer, got {k!r}")
    return ki


def support_width(k) -> float:
    return 2.0 / (_check_order(k) + 1)


def breakpoints(k) -> np.ndarray:
    """The k+1 piece boundaries 2j/(k(k+1)), j = 0..k."""
    k = _check_order(k)
    bp = 2.0 * np.arange(k + 1) / (k * (k + 1.0))
    bp[-1] = support_width(k)  # same real number; match the user-computable form
    return bp


def levels(k) -> np.ndarray:
    """Piece values k-j+1 for j = 1..k."""
    k = _check_order(k)
    return np.arange(k, 0, -1, dtype=float)


def staircase(k, x):
    """Value of the order-k staircase at x (pieces are right-open)."""
    k = _check_order(k)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    bp = breakpoints(k)
    idx = np.searchsorted(bp, xv, side="right") - 1
    out = np.zeros_like(xv)
    hit = (idx >= 0) & (idx < k)
    out[hit] = k - idx[hit].astype(float)
    return float(out[0]) if scalar else out


def staircase_moment(k, p: int) -> float:
    """Exact piecewise value of the p-th moment of the order-k staircase."""
    k = _check_order(k)
    bp = breakpoints(k)
    pw = bp ** (p + 1)
    return float(np.dot(levels(k), pw[1:] - pw[:-1]) / (p + 1))


def staircase_ft(k, xi):
    """Transform integral( staircase(k, x) e^{-2 pi i xi x} dx ), closed form.

    The weighted sum over pieces of
    (e^{-2 pi i xi b} - e^{-2 pi i xi a}) / (-2 pi i xi); pieces with
    |xi| * support_width below the switch threshold use a 4-term Taylor
    expansion of the piece integral instead.
    """
    k = _check_order(k)
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    xv = np.atleast_1d(xi).ravel()
    out = np.empty(xv.size, dtype=complex)

    small = np.abs(xv) * support_width(k) < TAYLOR_SWITCH
    bp = breakpoints(k)
    lvl = levels(k)

    if np.any(small):
        xs = xv[small]
        z = -2j * np.pi * xs
        acc = np.zeros(xs.size, dtype=complex)
        zp = np.ones(xs.size, dtype=complex)
        fact = 1.0
        for p in range(4):
            if p:
                zp = zp * z
                fact *= p
            pw = bp ** (p + 1)
            mom = np.dot(lvl, pw[1:] - pw[:-1]) / (p + 1)
            acc += zp * (mom / fact)
        out[small] = acc

    if np.any(~small):
        xl = xv[~small]
        # chunk the (k+1) x len(xl) phase table
        max_cells = 1 << 22
        step = max(1, max_cells // (k + 1))
        for i0 in range(0, xl.size, step):
            blk = xl[i0:i0 + step]
            ph = np.exp(-2j * np.pi * np.outer(bp, blk))
            pieces = (ph[1:] - ph[:-1]) / (-2j * np.pi * blk)[None, :]
            vals = lvl @ pieces
            idx = np.flatnonzero(~small)[i0:i0 + step]
            out[idx] = vals

    out = out.reshape(np.atleast_1d(xi).shape)
    return complex(out[0]) if scalar else out


def staircase_ft_minus_one(k, xi):
    """Cancellation-free evaluation of ``staircase_ft(k, xi) - 1``.

    For |xi| * support_width <= SERIES_LIMIT the value is computed from the
    moment series  sum_{p>=1} (-2 pi i xi)^p mu_p / p!  truncated once the
    term bound (2 pi |xi| width)^p / p! drops below 1e-18; larger arguments
    fall back to the closed form.  The subtraction of 1 never happens in
    the series branch, so tiny values keep full relative accuracy.
    """
    k = _check_order(k)
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    xv = np.atleast_1d(xi).ravel()
    out = np.empty(xv.size, dtype=complex)

    width = support_width(k)
    small = np.abs(xv) * width <= SERIES_LIMIT
    if np.any(small):
        xs = xv[small]
        bp = breakpoints(k)
        lvl = levels(k)
        z = -2j * np.pi * xs
        acc = np.zeros(xs.size, dtype=complex)
        zp = np.ones(xs.size, dtype=complex)
        fact = 1.0
        bound = 1.0
        zmax = 2 * np.pi * float(np.max(np.abs(xs), initial=0.0)) * width
        for p in range(1, 60):
            zp = zp * z
            fact *= p
            bound *= zmax / p
            pw = bp ** (p + 1)
            mom = np.dot(lvl, pw[1:] - pw[:-1]) / (p + 1)
            acc += zp * (mom / fact)
            if bound < 1e-18:
                break
        out[small] = acc
    if np.any(~small):
        out[~small] = staircase_ft(k, xv[~small]) - 1.0

    out = out.reshape(np.atleast_1d(xi).shape)
    return complex(out[0]) if scalar else out


def perturbation(alpha: SeqWindow, x: float) -> float:
    """The perturbation profile at x: sum over n of
    sign(alpha_n) * staircase(n^2+1, (x - n)/alpha_n), zero terms skipped.

    Only indices whose scaled support can contain x are visited, located by
    index arithmetic; the full series is never materialized.
    """
    x = float(x)
    if alpha.values.size == 0:
        return 0.0
    reach = max(1.0, alpha.sup_norm)  # support of term n lies within |x - n| < |alpha_n|
    lo = max(-alpha.half_width, int(np.floor(x - reach)))
    hi = min(alpha.half_width, int(np.ceil(x + reach)))
    total = 0.0
    for n in range(lo, hi + 1):
        a = alpha.value(n)
        if a == 0.0:
            continue
        total += np.sign(a) * staircase(n * n + 1, (x - n) / a)
    return float(total)
