"""Shared domain types: truncated point sets, band-limited functions,
sequence windows, grid functions, pure point spectra, and periodic
structures.

Band-limited functions are represented on the Fourier side only: a function
is stored as samples of its compactly supported transform on a uniform grid,
and every spatial value is produced by composite-trapezoid quadrature of the
inversion integral.  All types are immutable after construction and all
operations are pure.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

#: Points closer than this are considered duplicates and merged.
MERGE_TOL = 1e-12

#: Default Fourier-side grid size (power of two plus one).
DEFAULT_GRID_SIZE = 4097


def bump(t, flatness: int = 1):
    """Smooth compactly supported profile on (-1, 1), equal to 1 at 0.

    ``bump(t) = exp(1 - (1 - t^2)^-flatness)`` inside (-1, 1) and 0 outside.
    Higher ``flatness`` trades a flatter center for faster decay of the
    Fourier transform (roughly ``exp(-c |xi|^(s/(s+1)))`` for flatness s).
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - (1.0 - ti * ti) ** (-float(flatness)))
    return float(out[0]) if scalar else out


def trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    """Composite-trapezoid weights for ``n`` uniform nodes."""
    if n < 2:
        raise ValueError("trapezoid rule needs at least 2 nodes")
    w = np.full(n, spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def write_atomic(path: str, data: str) -> None:
    """Write text to ``path`` via a temporary file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tiletool-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------
# Point sets


@dataclass(frozen=True)
class PointSet:
    """A finite, sorted, multiplicity-free truncation of a translation set.

    ``points`` are strictly increasing and contained in the closed
    ``window``.  Construct through :func:`validate_point_set` unless the
    input is already known to satisfy the invariants.
    """

    points: np.ndarray
    window: tuple[float, float]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1:
            raise ValueError("points must be a 1-d sequence")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("non-finite point coordinate")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise ValueError("points must be strictly increasing")
        lo, hi = float(self.window[0]), float(self.window[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError("invalid window")
        if pts.size and (pts[0] < lo or pts[-1] > hi):
            raise ValueError("point outside window")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "window", (lo, hi))

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def min_gap(self) -> float:
        if len(self) < 2:
            return math.inf
        return float(np.min(np.diff(self.points)))

    @property
    def max_gap(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.max(np.diff(self.points)))

    def count_in(self, lo: float, hi: float) -> int:
        """Number of points in the half-open interval [lo, hi)."""
        i = np.searchsorted(self.points, lo, side="left")
        j = np.searchsorted(self.points, hi, side="left")
        return int(j - i)

    def translate(self, dx: float) -> "PointSet":
        return PointSet(self.points + dx, (self.window[0] + dx, self.window[1] + dx))

    def to_csv(self, path: str) -> None:
        """One coordinate per line, 17 significant digits."""
        write_atomic(path, "".join(f"{x:.17g}\n" for x in self.points))

    @staticmethod
    def from_csv(path: str, window: tuple[float, float] | None = None) -> "PointSet":
        with open(path) as fh:
            pts = [float(line) for line in fh if line.strip()]
        if window is None:
            if not pts:
                raise ValueError(f"empty point file {path!r} needs an explicit window")
            window = (min(pts), max(pts))
        return validate_point_set(pts, window)


def validate_point_set(points, window, merge_tol: float = MERGE_TOL) -> PointSet:
    """Sort, deduplicate and window-check raw coordinates.

    Coordinates closer than ``merge_tol`` are merged (first survivor kept)
    with a warning; non-finite values and points outside the window are
    rejected.  Validating the output again returns an identical set.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.size and not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point coordinate")
    pts = np.sort(pts)
    if pts.size:
        kept = [pts[0]]
        merged = 0
        for x in pts[1:]:
            if x - kept[-1] <= merge_tol:
                merged += 1
            else:
                kept.append(x)
        if merged:
            warnings.warn(f"merged {merged} duplicate point(s) within {merge_tol:g}")
        pts = np.asarray(kept)
    return PointSet(pts, (float(window[0]), float(window[1])))


# ----------------------------------------------------------------------
# Band-limited functions


@dataclass(frozen=True)
class BandlimitedFunction:
    """A real function represented by samples of its compactly supported
    Fourier transform.

    ``ft_samples`` hold the transform on a uniform grid over
    ``[-band_radius, band_radius]``.  The represented function is the
    ``deriv_order``-th derivative of the inverse transform, rescaled by
    ``factor``:

        f(x) = Re[ factor * integral (2 pi i t)^m phihat(t) e^{2 pi i t x} dt ]

    with the integral evaluated by the composite trapezoid rule on the
    stored grid.  The samples must be Hermitian-symmetric (so that the
    represented function is real-valued) and vanish at the grid endpoints.
    """

    band_radius: float
    ft_samples: np.ndarray
    deriv_order: int = 0
    factor: complex = 1.0 + 0.0j

    _CHUNK = 512  # x chunk size for batched quadrature

    def __post_init__(self):
        a = float(self.band_radius)
        if not (a > 0 and math.isfinite(a)):
            raise ValueError("band radius must be positive and finite")
        s = np.asarray(self.ft_samples, dtype=complex)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("ft_samples must be a 1-d array of length >= 2")
        if not np.all(np.isfinite(s)):
            raise ValueError("non-finite transform sample")
        scale = max(1.0, float(np.max(np.abs(s))))
        if abs(s[0]) > 1e-12 * scale or abs(s[-1]) > 1e-12 * scale:
            raise ValueError("transform samples must vanish at the band endpoints")
        herm = np.max(np.abs(s - np.conj(s[::-1])))
        if herm > 1e-10 * scale:
            raise ValueError(
                f"transform samples are not Hermitian-symmetric (defect {herm:.3g})"
            )
        if int(self.deriv_order) < 0:
            raise ValueError("derivative order must be nonnegative")
        object.__setattr__(self, "band_radius", a)
        object.__setattr__(self, "ft_samples", _readonly(s))
        object.__setattr__(self, "deriv_order", int(self.deriv_order))
        object.__setattr__(self, "factor", complex(self.factor))

    @cached_property
    def grid(self) -> np.ndarray:
        a = self.band_radius
        return np.linspace(-a, a, self.ft_samples.size)

    @cached_property
    def _kernel(self) -> np.ndarray:
        # trapezoid weights folded with (2 pi i t)^m and the samples
        w = trapezoid_weights(self.ft_samples.size, 2 * self.band_radius / (self.ft_samples.size - 1))
        return w * (2j * np.pi * self.grid) ** self.deriv_order * self.ft_samples

    def inversion_integral(self, x):
        """Complex quadrature value of the inversion integral (factor excluded)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xf = np.atleast_1d(x).ravel()
        out = np.empty(xf.size, dtype=complex)
        for i0 in range(0, xf.size, self._CHUNK):
            blk = xf[i0:i0 + self._CHUNK]
            phases = np.exp(2j * np.pi * np.outer(blk, self.grid))
            out[i0:i0 + self._CHUNK] = phases @ self._kernel
        out = out.reshape(np.atleast_1d(x).shape)
        return complex(out[0]) if scalar else out

    def eval(self, x):
        """Spatial value(s) of the represented real function."""
        v = self.factor * np.asarray(self.inversion_integral(x))
        v = v.real
        return float(v) if v.ndim == 0 else v

    __call__ = eval

    def ft_quadrature_sum(self) -> complex:
        """Quadrature approximation of the transform's integral.

        Identical summation order to ``eval(0)`` with ``deriv_order == 0``.
        """
        return self.derivative(-self.deriv_order).inversion_integral(0.0)

    def derivative(self, orders: int = 1) -> "BandlimitedFunction":
        """The same transform samples with the derivative order shifted."""
        return BandlimitedFunction(
            self.band_radius, self.ft_samples, self.deriv_order + orders, self.factor
        )

    def ft_value(self, t):
        """The represented function's transform, interpolated off the grid.

        Piecewise-linear between samples, exactly zero outside the band.
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        re = np.interp(tt, self.grid, self.ft_samples.real, left=0.0, right=0.0)
        im = np.interp(tt, self.grid, self.ft_samples.imag, left=0.0, right=0.0)
        out = self.factor * (2j * np.pi * tt) ** self.deriv_order * (re + 1j * im)
        out[np.abs(tt) > self.band_radius] = 0.0
        return complex(out[0]) if scalar else out

    def to_json(self) -> dict:
        return {
            "bandRadius": self.band_radius,
            "derivOrder": self.deriv_order,
            "factorRe": self.factor.real,
            "factorIm": self.factor.imag,
            "ftSamplesRe": self.ft_samples.real.tolist(),
            "ftSamplesIm": self.ft_samples.imag.tolist(),
        }

    @staticmethod
    def from_json(d: dict) -> "BandlimitedFunction":
        samples = np.asarray(d["ftSamplesRe"], dtype=float) + 1j * np.asarray(
            d["ftSamplesIm"], dtype=float
        )
        return BandlimitedFunction(
            d["bandRadius"],
            samples,
            int(d["derivOrder"]),
            complex(d["factorRe"], d["factorIm"]),
        )

    def save(self, path: str) -> None:
        write_atomic(path, json.dumps(self.to_json(), sort_keys=True))

    @staticmethod
    def load(path: str) -> "BandlimitedFunction":
        with open(path) as fh:
            return BandlimitedFunction.from_json(json.load(fh))


def make_bandlimited(
    ft_callable,
    band_radius: float,
    grid_size: int = DEFAULT_GRID_SIZE,
    deriv_order: int = 0,
    factor: complex = 1.0,
) -> BandlimitedFunction:
    """Sample a transform callable on the uniform band grid."""
    t = np.linspace(-band_radius, band_radius, grid_size)
    return BandlimitedFunction(
        band_radius, np.asarray(ft_callable(t), dtype=complex), deriv_order, factor
    )


def eval_bandlimited(f: BandlimitedFunction, x):
    """Functional form of :meth:`BandlimitedFunction.eval`."""
    return f.eval(x)


# ----------------------------------------------------------------------
# Sequence windows


@dataclass(frozen=True)
class SeqWindow:
    """A real sequence truncated to indices ``|n| <= half_width``.

    ``values[n + half_width]`` stores the entry at index ``n``.
    """

    half_width: int
    values: np.ndarray

    def __post_init__(self):
        n = int(self.half_width)
        if n < 0:
            raise ValueError("half width must be nonnegative")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2 * n + 1,):
            raise ValueError(f"expected {2 * n + 1} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite sequence value")
        object.__setattr__(self, "half_width", n)
        object.__setattr__(self, "values", _readonly(v))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def value(self, n: int) -> float:
        if abs(n) > self.half_width:
            return 0.0
        return float(self.values[n + self.half_width])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


# ----------------------------------------------------------------------
# Grid functions


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on a uniform grid over a closed interval."""

    interval: tuple[float, float]
    samples: np.ndarray

    def __post_init__(self):
        lo, hi = float(self.interval[0]), float(self.interval[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("invalid interval")
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("need at least 2 samples")
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "samples", _readonly(s))

    @cached_property
    def grid(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.samples.size)

    @property
    def spacing(self) -> float:
        return (self.interval[1] - self.interval[0]) / (self.samples.size - 1)

    def hermitian_defect(self) -> float:
        """Max deviation from psi(-t) = conj(psi(t)) at mirrored nodes.

        Only meaningful when the interval is symmetric about the origin.
        """
        return float(np.max(np.abs(self.samples - np.conj(self.samples[::-1]))))


# ----------------------------------------------------------------------
# Pure point spectra


@dataclass(frozen=True)
class SpectrumAtom:
    location: float
    weight: complex
    deriv_order: int = 0


@dataclass(frozen=True)
class SpectrumMeasure:
    """A pure point measure given by finitely many weighted (derivative) atoms."""

    atoms: tuple[SpectrumAtom, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        for a in atoms:
            if a.weight == 0:
                raise ValueError("zero-weight atom")
            if a.deriv_order < 0:
                raise ValueError("negative derivative order")
        by_order: dict[int, list[float]] = {}
        for a in atoms:
            by_order.setdefault(a.deriv_order, []).append(a.location)
        for locs in by_order.values():
            if any(y <= x for x, y in zip(locs, locs[1:])):
                raise ValueError("atom locations must be strictly increasing per order")
        object.__setattr__(self, "atoms", atoms)

    def locations(self, deriv_order: int = 0) -> np.ndarray:
        return np.asarray(
            [a.location for a in self.atoms if a.deriv_order == deriv_order]
        )

    def weight_at(self, location: float, deriv_order: int = 0, tol: float = 1e-12) -> complex:
        for a in self.atoms:
            if a.deriv_order == deriv_order and abs(a.location - location) <= tol:
                return a.weight
        return 0.0


# ----------------------------------------------------------------------
# Periodic structures


@dataclass(frozen=True)
class PeriodicStructure:
    """A finite disjoint union of arithmetic progressions a_j Z + b_j."""

    progressions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        progs = tuple((float(a), float(b)) for a, b in self.progressions)
        if not progs:
            raise ValueError("at least one progression required")
        if any(a <= 0 for a, _ in progs):
            raise ValueError("periods must be positive")
        object.__setattr__(self, "progressions", progs)
        self._check_disjoint()

    def _check_disjoint(self, tol: float = 1e-9):
        # disjointness is checked on a finite window spanning several periods
        amax = max(a for a, _ in self.progressions)
        bmax = max(abs(b) for _, b in self.progressions)
        w = 4 * amax + bmax + 1
        merged = []
        for idx, (a, b) in enumerate(self.progressions):
            ns = np.arange(math.ceil((-w - b) / a), math.floor((w - b) / a) + 1)
            for x in ns * a + b:
                merged.append((x, idx))
        merged.sort()
        for (x1, i1), (x2, i2) in zip(merged, merged[1:]):
            if i1 != i2 and x2 - x1 <= tol:
                raise ValueError(
                    f"progressions {i1} and {i2} intersect near {x1:.6g}"
                )

    def points_in(self, lo: float, hi: float) -> np.ndarray:
        """All points of the union inside the closed interval [lo, hi], sorted."""
        out = []
        for a, b in self.progressions:
            ns = np.arange(math.ceil((lo - b) / a - 1e-12), math.floor((hi - b) / a + 1e-12) + 1)
            pts = ns * a + b
            out.append(pts[(pts >= lo - 1e-12) & (pts <= hi + 1e-12)])
        return np.sort(np.concatenate(out))

    @property
    def density(self) -> float:
        return float(sum(1.0 / a for a, _ in self.progressions))
