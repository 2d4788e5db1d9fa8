"""Verification and analysis of tilings: spatial tiling sums, density and
gap statistics, distributional pairings, spectra of periodic structures,
arithmetic-progression detection, and the exact cyclic-group oracle.

Tiling sums over large point sets cancel heavily (the scattered sets tile
with zero-integral functions), so accumulation uses exactly rounded
compensated summation over terms ordered by increasing distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BandlimitedFunction,
    GridFunction,
    PeriodicStructure,
    PointSet,
    SpectrumAtom,
    SpectrumMeasure,
)

#: Locations closer than this merge into one spectrum atom.
MERGE_LOCATION_TOL = 1e-12


# ----------------------------------------------------------------------
# Shifted-value tables and compensated accumulation


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _shifted_value_table(f, xs: np.ndarray, pts: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Table V[i, j] = f(xs[i] - pts[j]) as complex values.

    Band-limited functions use factored quadrature phases
    e^{2 pi i t (x - p)} = e^{2 pi i t x} e^{-2 pi i t p}, so the table
    costs one small matrix product per point chunk instead of a full
    quadrature per entry.
    """
    if isinstance(f, BandlimitedFunction):
        t = f.grid
        a_mat = np.exp(2j * np.pi * np.outer(xs, t)) * f._kernel[None, :]
        out = np.empty((xs.size, pts.size), dtype=complex)
        for j0 in range(0, pts.size, chunk):
            blk = pts[j0:j0 + chunk]
            out[:, j0:j0 + chunk] = f.factor * (a_mat @ np.exp(-2j * np.pi * np.outer(t, blk)))
        return out.real.astype(complex)
    if callable(f):
        out = np.empty((xs.size, pts.size), dtype=complex)
        for j0 in range(0, pts.size, chunk):
            blk = pts[j0:j0 + chunk]
            out[:, j0:j0 + chunk] = np.asarray(f(xs[:, None] - blk[None, :]), dtype=complex)
        return out
    raise TypeError(f"cannot evaluate shifted values of {type(f).__name__}")


def _decay_envelope(f, distances: np.ndarray, probes_per_unit: int = 9) -> np.ndarray:
    """Measured sup of |f| on [d, d+1] and [-d-1, -d] for each distance d."""
    env = np.empty(distances.size)
    for i, d in enumerate(distances):
        u = np.linspace(d, d + 1.0, probes_per_unit)
        u = np.concatenate([u, -u])
        vals = _shifted_value_table(f, u, np.zeros(1)).ravel()
        env[i] = float(np.max(np.abs(vals)))
    return env


def _tail_bound(f, lam: PointSet, xs: np.ndarray, horizon: int = 24) -> float:
    """Heuristic bound on the mass the window truncation discards.

    Extrapolates the per-unit point count beyond the window from the count
    in the outermost unit intervals and the fitted growth exponent, and
    multiplies by the measured decay envelope of f.  A diagnostic, not a
    certified bound.
    """
    if len(lam) == 0:
        return 0.0
    lo, hi = lam.window
    edge_count = max(lam.count_in(lo, lo + 1.0), lam.count_in(hi - 1.0, hi), 1)
    gamma = growth_exponent(lam.points) if len(lam) >= 8 else 1.0
    half_width = max((hi - lo) / 2.0, 1.0)
    dist = min(hi - float(np.max(xs)), float(np.min(xs)) - lo)
    dist = max(dist, 0.0)
    ds = dist + np.arange(horizon, dtype=float)
    env = _decay_envelope(f, ds)
    growth = ((half_width + np.arange(horizon)) / half_width) ** max(gamma - 1.0, 0.0)
    return float(np.sum(edge_count * growth * env))


# ----------------------------------------------------------------------
# Tiling sums


@dataclass(frozen=True)
class TilingSumResult:
    """Sampled tiling sum with its mean level and deviation diagnostics."""

    grid: GridFunction
    level: complex
    max_deviation: float
    tail_bound: float

    @property
    def reported_deviation(self) -> float:
        """Measured deviation plus the window-truncation tail bound."""
        return self.max_deviation + self.tail_bound


def _resolve_xs(xs) -> tuple[np.ndarray, tuple[float, float]]:
    if isinstance(xs, GridFunction):
        return np.asarray(xs.grid), xs.interval
    arr = np.asarray(xs, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least two evaluation points")
    return arr, (float(arr[0]), float(arr[-1]))


def tiling_sum(f, lam: PointSet, xs, tail_margin: float | None = None) -> TilingSumResult:
    """Sampled translates sum  x -> sum_{p in lam} f(x - p).

    ``f`` is a band-limited function or any vectorized callable; ``xs`` is
    a grid template or an array of sample points.  The evaluation interval
    must keep a distance of at least ``tail_margin`` (default: an eighth
    of the window span) from the window edges, and terms are accumulated
    per sample in order of increasing |x - p| with exactly rounded
    compensated summation.
    """
    if len(lam) == 0:
        raise ValueError("empty translation set")
    x_arr, interval = _resolve_xs(xs)
    lo, hi = lam.window
    if tail_margin is None:
        tail_margin = (hi - lo) / 8.0
    if interval[0] - lo < tail_margin or hi - interval[1] < tail_margin:
        raise ValueError(
            f"evaluation interval {interval} closer than {tail_margin:g} "
            f"to the window {lam.window}"
        )
    table = _shifted_value_table(f, x_arr, lam.points)
    sums = np.empty(x_arr.size, dtype=complex)
    for i, x in enumerate(x_arr):
        order = np.argsort(np.abs(x - lam.points), kind="stable")
        sums[i] = _fsum_complex(table[i, order])
    level = _fsum_complex(sums) / sums.size
    max_dev = float(np.max(np.abs(sums - level)))
    tail = _tail_bound(f, lam, x_arr)
    return TilingSumResult(GridFunction(interval, sums), level, max_dev, tail)


# ----------------------------------------------------------------------
# Density statistics


@dataclass(frozen=True)
class DensityReport:
    """Windowed density statistics of a point set."""

    max_per_unit: int
    uniform_density: float
    density_pairs: tuple[tuple[float, float], ...]
    fit_residual: float
    max_gap: float
    growth_exponent: float

    def to_json(self) -> dict:
        return {
            "maxPerUnit": self.max_per_unit,
            "uniformDensity": self.uniform_density,
            "uniformDensityEstimates": [[r, d] for r, d in self.density_pairs],
            "fitResidual": self.fit_residual,
            "maxGap": self.max_gap,
            "growthExponent": self.growth_exponent,
        }


def growth_exponent(points, r_values=None) -> float:
    """Log-log slope of the centered counting function r -> #(S in (c-r, c+r)).

    The center c is the origin when the extent straddles it, otherwise the
    midpoint of the extent.
    """
    pts = np.sort(np.asarray(points, dtype=float))
    if pts.size < 4:
        raise ValueError("need at least 4 points to fit a growth exponent")
    lo, hi = pts[0], pts[-1]
    center = 0.0 if lo < 0 < hi else 0.5 * (lo + hi)
    r_max = 0.98 * min(hi - center, center - lo)
    if r_max <= 0:
        raise ValueError("degenerate extent")
    if r_values is None:
        r_values = np.geomspace(r_max / 16.0, r_max, 10)
    counts = np.array(
        [
            np.searchsorted(pts, center + r, side="left")
            - np.searchsorted(pts, center - r, side="right")
            for r in r_values
        ],
        dtype=float,
    )
    keep = counts > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("too few nonempty count windows")
    slope = np.polyfit(np.log(np.asarray(r_values)[keep]), np.log(counts[keep]), 1)[0]
    return float(slope)


def _max_per_unit(pts: np.ndarray) -> int:
    # the sup over x of #(pts in [x, x+1)) is attained with x at a point
    ends = np.searchsorted(pts, pts + 1.0, side="left")
    return int(np.max(ends - np.arange(pts.size)))


def _sliding_average_count(pts: np.ndarray, lo: float, hi: float, r: float) -> float:
    """Exact average over x in [lo, hi - r] of #(pts in [x, x+r))."""
    a, b = lo, hi - r
    if b <= a:
        raise ValueError("window too small for this r")
    left = np.maximum(pts - r, a)
    right = np.minimum(pts, b)
    return float(np.sum(np.maximum(right - left, 0.0)) / (b - a))


def density_report(lam: PointSet, r_values=None) -> DensityReport:
    """All four windowed statistics of a nonempty point set.

    The uniform density is the least-squares slope of the exact sliding
    averages of #(lam in [x, x+r)) against r; the residual reports the
    largest deviation from the fitted line (the o(r) part).
    """
    if len(lam) == 0:
        raise ValueError("empty point set")
    pts = lam.points
    lo, hi = lam.window
    span = hi - lo
    if r_values is None:
        r_values = np.linspace(span / 10.0, span / 2.0, 9)
    avgs = np.array([_sliding_average_count(pts, lo, hi, r) for r in r_values])
    r_arr = np.asarray(r_values, dtype=float)
    slope, _ = np.polyfit(r_arr, avgs, 1)
    resid = float(np.max(np.abs(avgs - slope * r_arr)))
    pairs = tuple((float(r), float(c / r)) for r, c in zip(r_arr, avgs))
    try:
        gamma = growth_exponent(pts)
    except ValueError:
        gamma = float("nan")
    return DensityReport(
        max_per_unit=_max_per_unit(pts),
        uniform_density=float(slope),
        density_pairs=pairs,
        fit_residual=resid,
        max_gap=lam.max_gap,
        growth_exponent=gamma,
    )


# ----------------------------------------------------------------------
# Distributional pairing


@dataclass(frozen=True)
class PairingResult:
    value: float
    tail_bound: float


def pair_with_test_function(lam: PointSet, psi: BandlimitedFunction) -> PairingResult:
    """The pairing  sum_{p in lam} psihat(p)  of the set's comb transform
    with a test function given by its samples on a band inside (-1/2, 1/2).

    ``psi`` stores the test function itself as ``ft_samples`` (order 0,
    unit factor), so its transform at p is the band-limited evaluation at
    -p.  Returns the compensated sum and a heuristic bound for the mass of
    the pairing beyond the window, from the measured decay of the
    transform.
    """
    if psi.band_radius >= 0.5:
        raise ValueError("test function support must lie inside (-1/2, 1/2)")
    if psi.deriv_order != 0 or psi.factor != 1.0:
        raise ValueError("test function must carry order 0 and unit factor")
    if len(lam) == 0:
        return PairingResult(0.0, 0.0)
    vals = psi.eval(-lam.points)
    order = np.argsort(np.abs(lam.points), kind="stable")
    value = math.fsum(np.atleast_1d(vals)[order])
    tail = _tail_bound(psi, lam, np.zeros(1))
    return PairingResult(float(value), tail)


# ----------------------------------------------------------------------
# Spectra of periodic structures


def periodic_spectrum(ps: PeriodicStructure, tmax: float) -> SpectrumMeasure:
    """Pure point transform of the structure's comb, truncated to |t| <= tmax.

    Each progression aZ + b contributes atoms (1/a) e^{-2 pi i k b / a} at
    k/a; coinciding locations merge and cancelled weights are dropped.
    """
    if tmax <= 0:
        raise ValueError("tmax must be positive")
    locs: list[float] = []
    weights: list[complex] = []
    for a, b in ps.progressions:
        kmax = math.floor(tmax * a + 1e-9)
        for k in range(-kmax, kmax + 1):
            locs.append(k / a)
            weights.append(np.exp(-2j * np.pi * k * b / a) / a)
    order = np.argsort(locs)
    atoms: list[SpectrumAtom] = []
    scale = ps.density
    i = 0
    locs_arr = np.asarray(locs)[order]
    w_arr = np.asarray(weights)[order]
    while i < locs_arr.size:
        j = i + 1
        while j < locs_arr.size and locs_arr[j] - locs_arr[j - 1] <= MERGE_LOCATION_TOL:
            j += 1
        w = complex(np.sum(w_arr[i:j]))
        if abs(w) > 1e-12 * scale:
            atoms.append(SpectrumAtom(float(locs_arr[i]), w))
        i = j
    return SpectrumMeasure(tuple(atoms))


@dataclass(frozen=True)
class PeriodicCheckResult:
    tiles: bool
    level: complex
    max_abs_at_atoms: float
    first_failing_atom: float | None

    def to_json(self) -> dict:
        return {
            "tiles": self.tiles,
            "levelRe": self.level.real,
            "levelIm": self.level.imag,
            "maxAbsAtAtoms": self.max_abs_at_atoms,
            "firstFailingAtom": self.first_failing_atom,
        }


def periodic_tiling_check(
    fhat, ps: PeriodicStructure, tmax: float, tol: float = 1e-9
) -> PeriodicCheckResult:
    """Spectral tiling verdict for a periodic-structure translation set.

    ``fhat`` is a vectorized callable for the candidate's transform.  The
    verdict is true iff |fhat| <= tol at every nonzero atom of the comb
    transform up to tmax; the level is density * fhat(0).
    """
    spectrum = periodic_spectrum(ps, tmax)
    locs = spectrum.locations()
    nonzero = locs[np.abs(locs) > MERGE_LOCATION_TOL]
    level = ps.density * complex(np.asarray(fhat(np.zeros(1))).ravel()[0])
    if nonzero.size == 0:
        return PeriodicCheckResult(True, level, 0.0, None)
    vals = np.abs(np.asarray(fhat(nonzero)))
    worst = float(np.max(vals))
    if worst <= tol:
        return PeriodicCheckResult(True, level, worst, None)
    bad = nonzero[np.abs(nonzero).argsort(kind="stable")]
    bad_vals = np.abs(np.asarray(fhat(bad)))
    first = float(bad[np.argmax(bad_vals > tol)])
    return PeriodicCheckResult(False, level, worst, first)


# ----------------------------------------------------------------------
# Structure detection


def _circular_clusters(residues: np.ndarray, period: float, tol: float):
    """Group residues mod ``period`` into arcs with consecutive gaps <= tol.

    Returns a list of representative residues (circular means) or None
    when the clustering is degenerate (a cluster wraps more than the full
    circle).
    """
    order = np.argsort(residues)
    sorted_res = residues[order]
    n = sorted_res.size
    gaps = np.diff(sorted_res)
    wrap_gap = period - (sorted_res[-1] - sorted_res[0])
    breaks = np.flatnonzero(gaps > tol)
    if breaks.size == 0:
        # single arc; if it spans more than a tolerance band the set is diffuse
        if sorted_res[-1] - sorted_res[0] > 2 * tol and wrap_gap > tol:
            return None
        return [float(np.mean(sorted_res))] if wrap_gap > tol else [0.0]
    segments = np.split(sorted_res, breaks + 1)
    if wrap_gap <= tol and len(segments) > 1:
        # the first and last arcs meet across 0; merge with a shift
        merged = np.concatenate([segments[-1] - period, segments[0]])
        segments = [merged] + segments[1:-1]
    reps = []
    for seg in segments:
        rep = float(np.mean(seg))
        reps.append(rep % period)
    return reps


def detect_periodic_structure(
    lam: PointSet, max_progressions: int, tol: float = 1e-9
) -> PeriodicStructure | None:
    """Search for a representation of the set as a disjoint union of at
    most ``max_progressions`` arithmetic progressions with a common period.

    For each candidate count m the common period is hypothesized from the
    m-th difference structure (the median of p[i+m] - p[i], which is exact
    for a true union of m progressions), residues mod the period are
    clustered with tolerance ``tol``, and the hypothesis is accepted only
    if every point matches its progression within ``tol`` and every
    progression is fully populated on the window interior.  The smallest
    m wins; returns None when no candidate passes.
    """
    pts = lam.points
    if pts.size < 2 * (max_progressions + 1):
        raise ValueError(
            f"need at least {2 * (max_progressions + 1)} points "
            f"to probe up to {max_progressions} progressions"
        )
    lo, hi = lam.window
    for m in range(1, max_progressions + 1):
        diffs = pts[m:] - pts[:-m]
        period = float(np.median(diffs))
        if period <= tol:
            continue
        residues = np.mod(pts, period)
        reps = _circular_clusters(residues, period, tol)
        if reps is None or len(reps) != m:
            continue
        reps_arr = np.asarray(sorted(reps))
        # nearest representative on the circle
        d = np.abs(residues[:, None] - reps_arr[None, :])
        d = np.minimum(d, period - d)
        assign = np.argmin(d, axis=1)
        if np.max(d[np.arange(pts.size), assign]) > tol:
            continue
        ok = True
        for idx, b in enumerate(reps_arr):
            members = pts[assign == idx]
            if members.size == 0:
                ok = False
                break
            # full population on the window interior
            n_lo = math.ceil((lo + period - b) / period - 1e-9)
            n_hi = math.floor((hi - period - b) / period + 1e-9)
            expected = np.arange(n_lo, n_hi + 1) * period + b
            if expected.size == 0:
                ok = False
                break
            pos = np.searchsorted(members, expected)
            pos = np.clip(pos, 0, members.size - 1)
            near = np.minimum(
                np.abs(members[pos] - expected),
                np.abs(members[np.maximum(pos - 1, 0)] - expected),
            )
            if np.max(near) > tol:
                ok = False
                break
        if not ok:
            continue
        progs = []
        for idx, b in enumerate(reps_arr):
            members = pts[assign == idx]
            # re-estimate the offset from the members for exactness
            anchor = np.round((members - b) / period)
            offset = float(np.mean(members - anchor * period))
            progs.append((period, offset % period))
        try:
            return PeriodicStructure(tuple(sorted(progs, key=lambda ab: ab[1])))
        except ValueError:
            continue
    return None


# ----------------------------------------------------------------------
# Cyclic-group oracle


@dataclass(frozen=True)
class CyclicInstance:
    """A function and a translation subset on the cyclic group Z_modulus."""

    modulus: int
    f: np.ndarray
    lam: tuple[int, ...]

    def __post_init__(self):
        n = int(self.modulus)
        if n < 1:
            raise ValueError("modulus must be positive")
        f = np.asarray(self.f, dtype=complex)
        if f.shape != (n,):
            raise ValueError(f"f must have length {n}")
        lam = tuple(int(x) for x in self.lam)
        if len(set(lam)) != len(lam):
            raise ValueError("duplicate translation elements")
        if any(not 0 <= x < n for x in lam):
            raise ValueError("translation element out of range")
        object.__setattr__(self, "modulus", n)
        f = np.array(f, copy=True)
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class CyclicCheckResult:
    direct_tiles: bool
    spectral_tiles: bool
    level: complex | None
    direct_deviation: float
    max_offzero_product: float

    @property
    def agree(self) -> bool:
        return self.direct_tiles == self.spectral_tiles

    def to_json(self) -> dict:
        return {
            "directTiles": self.direct_tiles,
            "spectralTiles": self.spectral_tiles,
            "levelRe": None if self.level is None else self.level.real,
            "levelIm": None if self.level is None else self.level.imag,
            "directDeviation": self.direct_deviation,
            "maxOffZeroProduct": self.max_offzero_product,
        }


def cyclic_tiling_check(inst: CyclicInstance, atol: float = 1e-9) -> CyclicCheckResult:
    """Tiling verdict on a cyclic group, two independent ways.

    Direct: the translate sum  s[x] = sum_{l} f[(x - l) mod N]  must be
    constant.  Spectral: DFT(f)[k] * DFT(indicator)[k] must vanish for all
    k != 0.  Returns both verdicts and the level when the sum is constant.
    """
    n = inst.modulus
    indicator = np.zeros(n)
    indicator[list(inst.lam)] = 1.0
    s = np.zeros(n, dtype=complex)
    for l in inst.lam:
        s += np.roll(inst.f, l)
    mean = complex(np.mean(s)) if inst.lam else 0.0 + 0.0j
    dev = float(np.max(np.abs(s - mean))) if n else 0.0
    direct = dev <= atol
    prod = np.fft.fft(inst.f) * np.fft.fft(indicator)
    off = float(np.max(np.abs(prod[1:]))) if n > 1 else 0.0
    spectral = off <= atol * n
    level = mean if direct else None
    return CyclicCheckResult(direct, spectral, level, dev, off)


@dataclass(frozen=True)
class CensusResult:
    modulus: int
    max_support: int
    max_set_size: int
    total: int
    disagreements: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "maxSupport": self.max_support,
            "maxSetSize": self.max_set_size,
            "total": self.total,
            "agreements": self.total - len(self.disagreements),
            "disagreements": [list(map(list, d)) for d in self.disagreements],
        }


def _subsets_up_to(n: int, kmax: int, nonempty: bool):
    from itertools import combinations

    start = 1 if nonempty else 0
    for k in range(start, kmax + 1):
        yield from combinations(range(n), k)


def cyclic_census(
    modulus: int, max_support: int, max_set_size: int, atol: float = 1e-9
) -> CensusResult:
    """Exhaustive agreement census of the two cyclic verdicts.

    Runs every 0/1 indicator function with at most ``max_support`` ones
    against every translation subset with at most ``max_set_size``
    elements, comparing the direct and the spectral verdicts.
    """
    n = modulus
    f_supports = list(_subsets_up_to(n, max_support, nonempty=True))
    subsets = list(_subsets_up_to(n, max_set_size, nonempty=False))
    f_mat = np.zeros((len(f_supports), n))
    for i, sup in enumerate(f_supports):
        f_mat[i, list(sup)] = 1.0
    l_mat = np.zeros((len(subsets), n))
    for j, sub in enumerate(subsets):
        if sub:
            l_mat[j, list(sub)] = 1.0
    # direct verdicts: translate sums via a rolled index tensor
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n  # (x, y) -> x - y
    rolled = l_mat[:, idx]  # (j, x, y): indicator[(x - y) mod n]
    sums = np.einsum("iy,jxy->jix", f_mat, rolled)
    means = sums.mean(axis=2, keepdims=True)
    direct = np.max(np.abs(sums - means), axis=2) <= atol  # (j, i)
    # spectral verdicts
    ff = np.fft.fft(f_mat, axis=1)
    fl = np.fft.fft(l_mat, axis=1)
    prod = np.abs(ff[None, :, 1:] * fl[:, None, 1:])
    spectral = np.max(prod, axis=2) <= atol * n
    disagreements = []
    bad = np.argwhere(direct != spectral)
    for j, i in bad:
        disagreements.append((tuple(f_supports[i]), tuple(subsets[j])))
    total = len(f_supports) * len(subsets)
    return CensusResult(n, max_support, max_set_size, total, tuple(disagreements))
