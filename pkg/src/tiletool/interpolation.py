"""Sparse-spectrum interpolation: given a union of long intervals and a
finite node set with target values, build a smooth function supported on
the union whose transform attains the targets at the nodes.

Each node s_j carries a modulated bump  b_j * Phi_{r_j}(x - tau_j)
e^{2 pi i s_j x}  supported on I_j = [tau_j - r_j, tau_j + r_j].  The radii
are grown until the transform cross-talk between nodes is small in the
l1 row-sum sense, which makes the interpolation matrix a near-identity
solvable by Neumann iteration no matter where the supports are placed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DEFAULT_GRID_SIZE, bump, trapezoid_weights, write_atomic
from .verify import growth_exponent


@dataclass(frozen=True)
class OmegaSpec:
    """A finite list of disjoint, sorted closed intervals hosting supports."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not ivs:
            raise ValueError("at least one interval required")
        for lo, hi in ivs:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid interval ({lo}, {hi})")
        for (_, hi1), (lo2, _) in zip(ivs, ivs[1:]):
            if lo2 <= hi1:
                raise ValueError("intervals must be disjoint and sorted")
        object.__setattr__(self, "intervals", ivs)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.intervals)

    def contains_interval(self, lo: float, hi: float, tol: float = 1e-12) -> bool:
        return any(a - tol <= lo and hi <= b + tol for a, b in self.intervals)


@dataclass(frozen=True)
class BumpProfile:
    """Smooth profile supported on [-1, 1] with unit integral.

    The shape is the standard compactly supported bump normalized so the
    quadrature integral is exactly 1; the transform is evaluated by the
    same cached composite-trapezoid rule.
    """

    grid_size: int = DEFAULT_GRID_SIZE
    flatness: int = 1

    @cached_property
    def _nodes(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.grid_size)

    @cached_property
    def _weighted(self) -> np.ndarray:
        w = trapezoid_weights(self.grid_size, 2.0 / (self.grid_size - 1))
        g = bump(self._nodes, flatness=self.flatness)
        return w * g / np.dot(w, g)

    @cached_property
    def _norm(self) -> float:
        w = trapezoid_weights(self.grid_size, 2.0 / (self.grid_size - 1))
        return float(np.dot(w, bump(self._nodes, flatness=self.flatness)))

    def value(self, x):
        """Profile values; exactly zero outside [-1, 1]."""
        return bump(x, flatness=self.flatness) / self._norm

    def ft(self, xi):
        """Transform values by cached quadrature; ft(0) == 1 exactly."""
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xv = np.atleast_1d(xi).ravel()
        out = np.empty(xv.size, dtype=complex)
        chunk = max(1, (1 << 22) // self.grid_size)
        for i0 in range(0, xv.size, chunk):
            blk = xv[i0:i0 + chunk]
            out[i0:i0 + chunk] = np.exp(-2j * np.pi * np.outer(blk, self._nodes)) @ self._weighted
        out = out.reshape(np.atleast_1d(xi).shape)
        return complex(out[0]) if scalar else out


DEFAULT_PROFILE = BumpProfile()


def _as_nodes(nodes) -> np.ndarray:
    s = np.asarray(nodes, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("nodes must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(s)):
        raise ValueError("non-finite node")
    s = np.sort(s)
    if s.size > 1 and np.min(np.diff(s)) <= 0:
        raise ValueError("coincident nodes")
    return s


def row_sums(nodes, radii, profile: BumpProfile = DEFAULT_PROFILE) -> np.ndarray:
    """Direct recomputation of sum_{k != j} |ft(r_j (s_k - s_j))| per node."""
    s = np.asarray(nodes, dtype=float)
    r = np.asarray(radii, dtype=float)
    out = np.empty(s.size)
    for j in range(s.size):
        others = np.delete(s, j)
        out[j] = float(np.sum(np.abs(profile.ft(r[j] * (others - s[j])))))
    return out


def choose_radii(
    nodes,
    profile: BumpProfile = DEFAULT_PROFILE,
    eps: float = 0.5,
    p: int = 4,
    r_base: float = 1.0,
    max_doublings: int = 60,
):
    """Smallest power-of-two multiples of ``r_base`` taming the cross-talk.

    For each node j the radius is doubled until the off-diagonal row sum
    sum_{k != j} |ft(r_j (s_k - s_j))| drops to ``eps``, evaluated directly
    on the finite node set.  Returns (radii, rowSumBound).  ``p`` must
    exceed the fitted growth exponent of the node set (the transform's
    |t|^-p decay is what makes the doubling terminate).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s = _as_nodes(nodes)
    if s.size >= 4:
        fitted = growth_exponent(s)
        if p <= fitted:
            raise ValueError(
                f"p = {p} must exceed the fitted growth exponent {fitted:.2f}"
            )
    radii = np.empty(s.size)
    bound = 0.0
    for j in range(s.size):
        others = np.delete(s, j)
        r = float(r_base)
        for _ in range(max_doublings + 1):
            row = float(np.sum(np.abs(profile.ft(r * (others - s[j])))))
            if row <= eps:
                break
            r *= 2.0
        else:
            raise RuntimeError(
                f"row sum at node {j} did not reach {eps} within {max_doublings} doublings"
            )
        radii[j] = r
        bound = max(bound, row)
    return radii, bound


def place_supports(nodes, omega: OmegaSpec, radii) -> np.ndarray:
    """Greedy left-to-right placement of I_j = [tau_j - r_j, tau_j + r_j].

    Nodes are processed in ascending order; each interval is put in the
    first hosting interval with room, keeping pairwise gaps >= 1.
    Deterministic given the input order.
    """
    s = _as_nodes(nodes)
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    centers = np.empty(s.size)
    iv = 0
    cursor = omega.intervals[0][0]
    prev_end = -math.inf
    for j in range(s.size):
        placed = False
        while iv < len(omega.intervals):
            lo, hi = omega.intervals[iv]
            start = max(cursor, lo, prev_end + 1.0)
            if start + 2 * r[j] <= hi:
                centers[j] = start + r[j]
                prev_end = start + 2 * r[j]
                cursor = prev_end
                placed = True
                break
            iv += 1
            if iv < len(omega.intervals):
                cursor = omega.intervals[iv][0]
        if not placed:
            raise ValueError(
                f"unplaceable support: node index {j} (radius {r[j]:g}) "
                "does not fit in the remaining intervals with unit gaps"
            )
    return centers


@dataclass(frozen=True)
class InterpolationSystem:
    """Nodes with radii, support centers, row-sum bound, and target values."""

    nodes: np.ndarray
    radii: np.ndarray
    centers: np.ndarray
    row_sum_bound: float
    values: np.ndarray
    omega: OmegaSpec | None = None

    def __post_init__(self):
        s = np.asarray(self.nodes, dtype=float)
        if s.ndim != 1 or s.size == 0 or not np.all(np.isfinite(s)):
            raise ValueError("nodes must be a nonempty finite 1-d sequence")
        if s.size > 1 and np.min(np.diff(s)) <= 0:
            raise ValueError("nodes must be strictly increasing")
        r = np.asarray(self.radii, dtype=float)
        tau = np.asarray(self.centers, dtype=float)
        c = np.asarray(self.values, dtype=complex)
        if not (r.shape == s.shape == tau.shape == c.shape):
            raise ValueError("nodes, radii, centers and values must share a shape")
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        if not 0 <= self.row_sum_bound < 1:
            raise ValueError("row-sum bound must lie in [0, 1)")
        order = np.argsort(tau)
        ends = tau[order] + r[order]
        starts = tau[order] - r[order]
        if np.any(starts[1:] - ends[:-1] < 1.0 - 1e-12):
            raise ValueError("support intervals must be pairwise at distance >= 1")
        if self.omega is not None:
            for t, rad in zip(tau, r):
                if not self.omega.contains_interval(t - rad, t + rad):
                    raise ValueError(f"support [{t - rad:g}, {t + rad:g}] escapes the host set")
        for name, arr in (("nodes", s), ("radii", r), ("centers", tau), ("values", c)):
            object.__setattr__(self, name, np.array(arr, copy=True))
            getattr(self, name).setflags(write=False)
        object.__setattr__(self, "row_sum_bound", float(self.row_sum_bound))

    def __len__(self) -> int:
        return int(self.nodes.size)

    def support_intervals(self) -> list[tuple[float, float]]:
        return [(t - r, t + r) for t, r in zip(self.centers, self.radii)]


def build_system(
    nodes,
    values,
    omega: OmegaSpec,
    profile: BumpProfile = DEFAULT_PROFILE,
    eps: float = 0.5,
    p: int = 4,
) -> InterpolationSystem:
    """Radii search, placement and assembly in one step."""
    s = _as_nodes(nodes)
    radii, bound = choose_radii(s, profile, eps=eps, p=p)
    centers = place_supports(s, omega, radii)
    return InterpolationSystem(s, radii, centers, bound, np.asarray(values, dtype=complex), omega)


def system_matrix(system: InterpolationSystem, profile: BumpProfile = DEFAULT_PROFILE) -> np.ndarray:
    """Dense interpolation matrix A with unit diagonal:
    A[k, j] = ft(r_j (s_k - s_j)) e^{-2 pi i tau_j (s_k - s_j)} for k != j."""
    s, r, tau = system.nodes, system.radii, system.centers
    n = s.size
    A = np.eye(n, dtype=complex)
    for j in range(n):
        d = s - s[j]
        col = profile.ft(r[j] * d) * np.exp(-2j * np.pi * tau[j] * d)
        col[j] = 1.0
        A[:, j] = col
    return A


@dataclass(frozen=True)
class NeumannSolution:
    coefficients: np.ndarray
    residual: float
    step_norms: tuple[float, ...]


def solve_coeffs(
    system: InterpolationSystem,
    profile: BumpProfile = DEFAULT_PROFILE,
    tol: float = 1e-13,
    max_iter: int = 400,
) -> NeumannSolution:
    """Neumann iteration  b <- c - (A - I) b  for the coefficients.

    Requires the l1 operator bound ||A - I|| = rowSumBound < 1; stops when
    the l1 step drops below ``tol`` and certifies the returned residual
    ||A b - c||_1 < tol * (1 + ||c||_1).
    """
    m = system.row_sum_bound
    if m >= 1:
        raise ValueError(f"row-sum bound {m} >= 1: the system is not near-identity")
    A = system_matrix(system, profile)
    offdiag = A - np.eye(len(system))
    c = system.values.astype(complex)
    b = c.copy()
    steps: list[float] = []
    for _ in range(max_iter):
        new = c - offdiag @ b
        step = float(np.sum(np.abs(new - b)))
        steps.append(step)
        b = new
        if step < tol:
            break
    else:
        raise RuntimeError(f"Neumann iteration did not converge in {max_iter} steps")
    residual = float(np.sum(np.abs(A @ b - c)))
    bound = tol * (1.0 + float(np.sum(np.abs(c))))
    if residual >= bound:
        raise RuntimeError(f"residual {residual:.3g} not certified below {bound:.3g}")
    return NeumannSolution(b, residual, tuple(steps))


@dataclass(frozen=True)
class SparseSupportFunction:
    """The synthesized interpolant: a finite sum of modulated bumps.

    Vanishes exactly outside the union of the support intervals; the
    transform attains the target values at the nodes up to the solver
    residual.
    """

    system: InterpolationSystem
    coefficients: np.ndarray
    profile: BumpProfile = DEFAULT_PROFILE

    def __post_init__(self):
        b = np.asarray(self.coefficients, dtype=complex)
        if b.shape != self.system.nodes.shape:
            raise ValueError("one coefficient per node required")
        b = np.array(b, copy=True)
        b.setflags(write=False)
        object.__setattr__(self, "coefficients", b)

    def eval(self, x):
        """Spatial values sum_j b_j Phi_{r_j}(x - tau_j) e^{2 pi i s_j x}."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        out = np.zeros(xv.shape, dtype=complex)
        sys = self.system
        for j in range(len(sys)):
            r = sys.radii[j]
            u = (xv - sys.centers[j]) / r
            hit = np.abs(u) < 1.0
            if not np.any(hit):
                continue
            out[hit] += (
                self.coefficients[j]
                * self.profile.value(u[hit]) / r
                * np.exp(2j * np.pi * sys.nodes[j] * xv[hit])
            )
        return complex(out[0]) if scalar else out

    __call__ = eval

    def ft_value(self, t):
        """Transform values sum_j b_j ft(r_j (t - s_j)) e^{-2 pi i tau_j (t - s_j)}."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tv = np.atleast_1d(t)
        out = np.zeros(tv.shape, dtype=complex)
        sys = self.system
        for j in range(len(sys)):
            d = tv - sys.nodes[j]
            out += (
                self.coefficients[j]
                * self.profile.ft(sys.radii[j] * d)
                * np.exp(-2j * np.pi * sys.centers[j] * d)
            )
        return complex(out[0]) if scalar else out

    def node_residual(self) -> float:
        """max_k |ft(s_k) - c_k|, by direct evaluation at the nodes."""
        return float(
            np.max(np.abs(self.ft_value(self.system.nodes) - self.system.values))
        )


def synthesize_interpolant(
    system: InterpolationSystem,
    coefficients,
    profile: BumpProfile = DEFAULT_PROFILE,
) -> SparseSupportFunction:
    return SparseSupportFunction(system, np.asarray(coefficients, dtype=complex), profile)


def system_to_json(system: InterpolationSystem, solution: NeumannSolution) -> dict:
    b = solution.coefficients
    return {
        "nodes": system.nodes.tolist(),
        "radii": system.radii.tolist(),
        "centers": system.centers.tolist(),
        "cRe": system.values.real.tolist(),
        "cIm": system.values.imag.tolist(),
        "bRe": b.real.tolist(),
        "bIm": b.imag.tolist(),
        "M": system.row_sum_bound,
        "residual": solution.residual,
    }


def save_system(path: str, system: InterpolationSystem, solution: NeumannSolution) -> None:
    write_atomic(path, json.dumps(system_to_json(system, solution), sort_keys=True))
