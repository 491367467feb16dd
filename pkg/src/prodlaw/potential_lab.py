"""Logarithmic-potential tools: smooth two-sided indicator approximants with
exact gradients and Laplacians, the power substitution that transports test
functions between the product plane and the linearization plane, empirical
potentials, and the grid discretization of the potential pairing

    integral f d(mu_n - mu_inf) = -(1/2pi) integral Laplacian(f) (U_n - U_inf).

All test functions here are radial products g1(|z - c|) g2(|z|), so their
derivatives are closed-form in the bump profile; no numerical
differentiation is used anywhere.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .ensembles import Linearization
from .limits import log_potential_limit

# cutoff radius: everything lives well inside this disc
_BETA = 7.0

# bump normalization: C * integral_{-1}^{1} exp(-1/(1-t^2)) dt = 1
_RAW_MASS = quad(lambda t: math.exp(-1.0 / max(1.0 - t * t, 1e-300)), -1.0, 1.0,
                 epsabs=1e-14, epsrel=1e-13)[0]
BUMP_CONSTANT = 1.0 / _RAW_MASS

# cumulative profile P(y) = integral_{-1}^{y} of the normalized bump: knot
# values from per-segment Gauss quadrature (machine accurate), joined by a
# clamped cubic spline so evaluations are C^2 between knots
def _build_cumulative():
    from scipy.interpolate import CubicSpline

    grid = np.linspace(-1.0, 1.0, 16001)
    gx, gw = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (grid[1:] + grid[:-1])
    half = 0.5 * np.diff(grid)
    t = mid[:, None] + half[:, None] * gx[None, :]
    vals = np.exp(-1.0 / np.maximum(1.0 - t * t, 1e-300))
    seg = (half[:, None] * gw[None, :] * vals).sum(axis=1)
    table = np.concatenate([[0.0], np.cumsum(seg)])
    table /= table[-1]
    return grid, CubicSpline(grid, table, bc_type=((1, 0.0), (1, 0.0)))


_P_GRID, _P_SPLINE = _build_cumulative()


def bump(y):
    """Normalized bump: C exp(-1/(1-y^2)) on (-1, 1), zero outside."""
    arr = np.asarray(y, dtype=float)
    t = np.atleast_1d(arr)
    inside = np.abs(t) < 1.0
    safe = np.where(inside, t, 0.0)
    out = np.where(inside, BUMP_CONSTANT * np.exp(-1.0 / (1.0 - safe * safe)), 0.0)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def bump_derivative(y):
    arr = np.asarray(y, dtype=float)
    t = np.atleast_1d(arr)
    inside = np.abs(t) < 1.0
    safe = np.where(inside, t, 0.0)
    val = BUMP_CONSTANT * np.exp(-1.0 / (1.0 - safe * safe))
    out = np.where(inside, val * (-2.0 * safe) / (1.0 - safe * safe) ** 2, 0.0)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def bump_cumulative(y):
    """P(y): 0 below -1, 1 above +1, smooth monotone ramp between."""
    y = np.asarray(y, dtype=float)
    out = _P_SPLINE(np.clip(y, -1.0, 1.0))
    return np.clip(out, 0.0, 1.0)


def _profile(r, b, a):
    """Radial factor g(r) = P(a(b - r)) with derivatives g', g''."""
    y = a * (b - r)
    g = bump_cumulative(y)
    gp = -a * bump(y)
    gpp = a * a * bump_derivative(y)
    return g, gp, gpp


@dataclass(frozen=True)
class MollifiedIndicator:
    """Smooth radial approximant of the indicator of the ball B_R(center).

    side "inner": supported in the closed ball, equal to 1 on B_{R - 2/a}
    (identically zero when R <= 2/a).  side "outer": equal to 1 on the closed
    ball, supported in B_{R + 2/a}.  A cutoff factor in |z| with the same
    profile caps the support inside the box radius 7 regardless of R.
    """

    center: complex
    radius: float
    smoothing: float
    side: str = "outer"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.smoothing <= 0:
            raise ValueError("smoothing must be positive")
        if self.side not in ("inner", "outer"):
            raise ValueError("side must be 'inner' or 'outer'")
        if self.side == "outer":
            reach = abs(self.center) + self.radius + 2.0 / self.smoothing
            if reach > _BETA + 2.0 / self.smoothing:
                raise ValueError(
                    f"outer approximant reaches |z| = {reach:.3f}, beyond the "
                    f"cutoff support radius {_BETA + 2.0 / self.smoothing:.3f}")

    @property
    def trivial(self) -> bool:
        return self.side == "inner" and self.radius <= 2.0 / self.smoothing

    def _b_ball(self) -> float:
        off = 1.0 / self.smoothing
        return self.radius - off if self.side == "inner" else self.radius + off

    def _b_cut(self) -> float:
        off = 1.0 / self.smoothing
        return _BETA - off if self.side == "inner" else _BETA + off

    @property
    def support_radius(self) -> float:
        pad = 0.0 if self.side == "inner" else 2.0 / self.smoothing
        return min(abs(self.center) + self.radius + pad, _BETA + pad)

    def _parts(self, z):
        a = self.smoothing
        r1 = np.abs(z - self.center)
        r2 = np.abs(z)
        if self.trivial:
            zero = np.zeros_like(r1)
            return r1, r2, zero, zero, zero, zero, zero, zero
        g1, g1p, g1pp = _profile(r1, self._b_ball(), a)
        g2, g2p, g2pp = _profile(r2, self._b_cut(), a)
        return r1, r2, g1, g1p, g1pp, g2, g2p, g2pp

    def value(self, z):
        arr = np.asarray(z, dtype=np.complex128)
        zz = np.atleast_1d(arr)
        _, _, g1, _, _, g2, _, _ = self._parts(zz)
        out = g1 * g2
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def gradient(self, z):
        """Euclidean gradient encoded as gx + i gy."""
        arr = np.asarray(z, dtype=np.complex128)
        zz = np.atleast_1d(arr)
        r1, r2, g1, g1p, _, g2, g2p, _ = self._parts(zz)
        e1 = np.divide(zz - self.center, r1, out=np.zeros_like(zz), where=r1 > 0)
        e2 = np.divide(zz, r2, out=np.zeros_like(zz), where=r2 > 0)
        out = g1p * g2 * e1 + g1 * g2p * e2
        return out.reshape(arr.shape) if arr.ndim else complex(out[0])

    def laplacian(self, z):
        arr = np.asarray(z, dtype=np.complex128)
        zz = np.atleast_1d(arr)
        r1, r2, g1, g1p, g1pp, g2, g2p, g2pp = self._parts(zz)
        # profiles are flat at their centers, so g'/r is 0/0-safe via masking
        t1 = g1pp + np.divide(g1p, r1, out=np.zeros_like(r1), where=r1 > 0)
        t2 = g2pp + np.divide(g2p, r2, out=np.zeros_like(r2), where=r2 > 0)
        e1 = np.divide(zz - self.center, r1, out=np.zeros_like(zz), where=r1 > 0)
        e2 = np.divide(zz, r2, out=np.zeros_like(zz), where=r2 > 0)
        cross = 2.0 * g1p * g2p * np.real(e1 * np.conj(e2))
        out = t1 * g2 + g1 * t2 + cross
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def laplacian_mask(self, z):
        """True where the Laplacian can be nonzero (profile transition
        annuli); a cheap superset used to prune grid sums."""
        if self.trivial:
            return np.zeros(np.shape(z), dtype=bool)
        z = np.asarray(z, dtype=np.complex128)
        a = self.smoothing
        r1 = np.abs(z - self.center)
        r2 = np.abs(z)
        b1, b2 = self._b_ball(), self._b_cut()
        m1 = (r1 > b1 - 1.0 / a) & (r1 < b1 + 1.0 / a)
        m2 = (r2 > b2 - 1.0 / a) & (r2 < b2 + 1.0 / a)
        return m1 | m2


@dataclass(frozen=True)
class PoweredIndicator:
    """Pullback f(z^m) of a radial-product test function; the chain rule for
    the holomorphic substitution w = z^m gives gradient and Laplacian in
    closed form from the base function's."""

    base: MollifiedIndicator
    power: int

    def __post_init__(self):
        if self.power < 1:
            raise ValueError("power must be a positive integer")

    @property
    def support_radius(self) -> float:
        return self.base.support_radius ** (1.0 / self.power)

    def value(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return self.base.value(z ** self.power)

    def gradient(self, z):
        z = np.asarray(z, dtype=np.complex128)
        m = self.power
        out = m * np.conj(z) ** (m - 1) * self.base.gradient(z ** m)
        return out if out.ndim else complex(out)

    def laplacian(self, z):
        z = np.asarray(z, dtype=np.complex128)
        m = self.power
        out = m * m * np.abs(z) ** (2 * (m - 1)) * self.base.laplacian(z ** m)
        return out if out.ndim else float(out)

    def laplacian_mask(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return self.base.laplacian_mask(z ** self.power)


def mollified_indicator_eval(f, z):
    """(value, gradient, laplacian) of a test function at z."""
    return f.value(z), f.gradient(z), f.laplacian(z)


def compose_power(f: MollifiedIndicator, m: int) -> PoweredIndicator:
    return PoweredIndicator(f, m)


# ---------------------------------------------------------------------------
# empirical potentials


@dataclass
class PotentialField:
    """Empirical log potential on a set of points, with the circular-law
    potential for reference and flags where an eigenvalue nearly collided
    with an evaluation point."""

    points: np.ndarray
    u_empirical: np.ndarray
    u_limit: np.ndarray
    provenance: str
    flags: np.ndarray


def _as_matrix(W):
    if isinstance(W, Linearization):
        return W.W
    return np.asarray(W, dtype=np.complex128)


def log_potential_empirical(W, z_points, form: str = "eigenvalue",
                            clamp: float = 1e-12) -> PotentialField:
    """U_n(z) = -(1/N) log|det(W - z)| on the given points.

    form "eigenvalue" sums log distances to the eigenvalues of W (one
    eigendecomposition for all points); form "singular-value" sums the log
    singular values of W - z (one SVD per point).  The two agree identically
    in exact arithmetic.
    """
    mat = _as_matrix(W)
    pts = np.asarray(z_points, dtype=np.complex128).ravel()
    N = mat.shape[0]
    u = np.empty(pts.size)
    flags = np.zeros(pts.size, dtype=bool)
    if form == "eigenvalue":
        lam = np.linalg.eigvals(mat)
        for i, z in enumerate(pts):
            dist = np.abs(lam - z)
            small = dist < clamp
            if np.any(small):
                flags[i] = True
                dist = np.maximum(dist, clamp)
            u[i] = -float(np.mean(np.log(dist)))
    elif form == "singular-value":
        eye = np.eye(N)
        for i, z in enumerate(pts):
            s = np.linalg.svd(mat - z * eye, compute_uv=False)
            small = s < clamp
            if np.any(small):
                flags[i] = True
                s = np.maximum(s, clamp)
            u[i] = -float(np.mean(np.log(s)))
    else:
        raise ValueError("form must be 'eigenvalue' or 'singular-value'")
    return PotentialField(pts, u, log_potential_limit(pts), form, flags)


def potential_from_roots(root_eigs, z_points, clamp: float = 1e-12):
    """Empirical potential directly from a set of eigenvalues."""
    lam = np.asarray(root_eigs, dtype=np.complex128).ravel()
    pts = np.asarray(z_points, dtype=np.complex128).ravel()
    dist = np.abs(pts[:, None] - lam[None, :])
    flagged = dist < clamp
    flags = flagged.any(axis=1)
    u = -np.log(np.maximum(dist, clamp)).mean(axis=1)
    return u, flags


def local_law_statistic(root_eigs, z_points, n: int) -> dict:
    """Max potential gap over a point set against the circular-law potential,
    raw and normalized by log^4(n)/n."""
    u, flags = potential_from_roots(root_eigs, z_points)
    gap = np.abs(u - log_potential_limit(np.asarray(z_points, dtype=np.complex128)))
    mx = float(np.max(gap))
    return {
        "max_gap": mx,
        "normalized": mx * n / math.log(n) ** 4,
        "argmax": complex(np.asarray(z_points).ravel()[int(np.argmax(gap))]),
        "flagged": int(np.sum(flags)),
    }


# ---------------------------------------------------------------------------
# randomized grids and the discretized pairing


@dataclass
class RandomGrid:
    """Square lattice of pitch 2 beta / sqrt(M) with a random sub-pitch
    shift, intersected with the box [-beta, beta]^2."""

    beta: float
    M: int
    shift: tuple
    points: np.ndarray

    @classmethod
    def build(cls, M: int, shift, beta: float = _BETA) -> "RandomGrid":
        if M < 4:
            raise ValueError("M must be at least 4")
        sx, sy = float(shift[0]), float(shift[1])
        if not (0.0 <= sx < 1.0 and 0.0 <= sy < 1.0):
            raise ValueError("shift components must lie in [0, 1)")
        step = 2.0 * beta / math.sqrt(M)
        lo_x = math.ceil(-beta / step - sx)
        hi_x = math.floor(beta / step - sx)
        lo_y = math.ceil(-beta / step - sy)
        hi_y = math.floor(beta / step - sy)
        xs = (np.arange(lo_x, hi_x + 1) + sx) * step
        ys = (np.arange(lo_y, hi_y + 1) + sy) * step
        pts = (xs[:, None] + 1j * ys[None, :]).ravel()
        return cls(beta, M, (sx, sy), pts)

    @classmethod
    def sample(cls, M: int, rng, beta: float = _BETA) -> "RandomGrid":
        return cls.build(M, (rng.random(), rng.random()), beta)

    @property
    def cell_area(self) -> float:
        return (2.0 * self.beta) ** 2 / self.M


@dataclass
class GridApproxResult:
    lhs: float
    rhs: float
    gap: float
    clamped: int
    M: int
    shift: tuple


def grid_approximation(eigs, f, grid: RandomGrid,
                       clamp: float = 1e-9) -> GridApproxResult:
    """Compare the eigenvalue average of f with the grid discretization of
    -(1/2pi) integral Laplacian(f) U_n.

    Requires supp f inside the grid box.  Potentials are clamped at
    distance `clamp` from an eigenvalue; clamped points are counted.
    """
    lam = np.asarray(eigs, dtype=np.complex128).ravel()
    if f.support_radius > grid.beta + 1e-12:
        raise ValueError(
            f"test function support radius {f.support_radius:.3f} exceeds "
            f"the grid box radius {grid.beta:.3f}")
    lhs = float(np.mean(np.real(f.value(lam))))
    mask = f.laplacian_mask(grid.points)
    pts = grid.points[mask]
    clamped = 0
    if pts.size:
        lap = f.laplacian(pts)
        dist = np.abs(pts[:, None] - lam[None, :])
        nclamp = int(np.count_nonzero(dist < clamp))
        clamped = nclamp
        u = -np.log(np.maximum(dist, clamp)).mean(axis=1)
        rhs = -float(np.sum(lap * u)) * grid.cell_area / (2.0 * math.pi)
    else:
        rhs = 0.0
    return GridApproxResult(lhs, rhs, abs(lhs - rhs), clamped, grid.M, grid.shift)


# ---------------------------------------------------------------------------
# the three-way identity check


@dataclass
class IdentityForms:
    """One number computed three ways: eigenvalue average in the product
    plane, root average in the linearization plane, and the potential-pairing
    quadrature."""

    eigen_form: float
    root_form: float
    quadrature_form: float


def limit_integral(f, m: int, radial_nodes: int = 64, angular_nodes: int = 256) -> float:
    """integral of f against the limit law of the m-fold product, computed as
    the angular average along the uniformized radius u = r^(2/m)."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(radial_nodes)
    u = 0.5 * (gl_x + 1.0)
    w = 0.5 * gl_w
    th = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    pts = u[:, None] ** (m / 2.0) * np.exp(1j * th)[None, :]
    vals = np.real(f.value(pts)).mean(axis=1)
    return float(np.sum(w * vals))


def local_law_identity_eval(product_eigs, f: MollifiedIndicator, m: int,
                            grid_points: int = 2048) -> IdentityForms:
    """Evaluate integral f d mu_n three ways: directly on the product
    eigenvalues, as the pullback average over the m-th roots (the
    linearization spectrum), and through the potential pairing on a midpoint
    grid of grid_points^2 cells covering the pullback support."""
    from .spectra import linearization_root_spectrum

    lam = np.asarray(product_eigs, dtype=np.complex128).ravel()
    n = lam.size
    ft = compose_power(f, m)
    eigen_form = float(np.mean(np.real(f.value(lam))))
    roots = linearization_root_spectrum(lam, m)
    root_form = float(np.mean(np.real(ft.value(roots))))

    L = ft.support_radius * 1.02
    step = 2.0 * L / grid_points
    axis = -L + (np.arange(grid_points) + 0.5) * step
    quad_sum = 0.0
    # row blocks keep the (points x roots) distance matrix in memory bounds
    block = max(1, int(4e6 / max(roots.size, 1) / grid_points))
    for i0 in range(0, grid_points, block):
        ys = axis[i0:i0 + block]
        pts = (axis[None, :] + 1j * ys[:, None]).ravel()
        mask = ft.laplacian_mask(pts)
        pts = pts[mask]
        if not pts.size:
            continue
        lap = ft.laplacian(pts)
        dist = np.abs(pts[:, None] - roots[None, :])
        u_emp = -np.log(np.maximum(dist, 1e-12)).mean(axis=1)
        u_gap = u_emp - log_potential_limit(pts)
        quad_sum += float(np.sum(lap * u_gap))
    quadrature_form = -quad_sum * step * step / (2.0 * math.pi) + limit_integral(f, m)
    return IdentityForms(eigen_form, root_form, quadrature_form)


def potential_field_to_csv(field: PotentialField, path) -> None:
    """Columns: re, im, u_n, u_limit, gap; one row per evaluation point."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["re", "im", "u_n", "u_limit", "gap"])
        for z, un, ul in zip(field.points, field.u_empirical, field.u_limit):
            out.writerow([repr(float(np.real(z))), repr(float(np.imag(z))),
                          repr(float(un)), repr(float(ul)),
                          repr(float(un - ul))])


def grid_results_to_json(results, path=None) -> str:
    """Serialize grid-approximation outcomes as a JSON array of
    {M, shift, lhs, rhs, gap} records; optionally write to path."""
    payload = [{"M": int(r.M), "shift": [float(r.shift[0]), float(r.shift[1])],
                "lhs": r.lhs, "rhs": r.rhs, "gap": r.gap}
               for r in results]
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
