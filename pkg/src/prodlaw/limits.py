"""Limit-theory objects: the m-th power of the circular law, its ball
measures, the logarithmic potential of the circular law, and the Stieltjes
fixed point of the shifted hermitization with density recovery.

Sign convention for the Stieltjes transform: the Herglotz branch, i.e.
Im s(z, w) > 0 for Im w > 0 and s(z, w) ~ -1/w at infinity.  The fixed-point
equation forces this branch; the opposite-tail convention differs by a
global sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import PrecisionError

_GL32_X, _GL32_W = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class LimitLaw:
    """The weak limit of the product's spectral distribution: density
    |z|^(2/m - 2) / (pi m) on the closed unit disc."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")

    def density(self, abs_z):
        r = np.asarray(abs_z, dtype=float)
        out = np.where((r > 0) & (r <= 1.0),
                       r ** (2.0 / self.m - 2.0) / (math.pi * self.m), 0.0)
        return out if out.ndim else float(out)

    def radial_cdf(self, r):
        r = np.asarray(r, dtype=float)
        out = np.clip(r, 0.0, None) ** (2.0 / self.m)
        out = np.minimum(out, 1.0)
        return out if out.ndim else float(out)


def _theta(r, d, R):
    """Angle subtended inside the ball B_R(d) by the circle of radius r."""
    r = np.asarray(r, dtype=float)
    q = (r * r + d * d - R * R) / (2.0 * r * d)
    q = np.clip(q, -1.0, 1.0)  # tangency radii touch +-1 up to rounding
    th = 2.0 * np.arccos(q)
    th = np.where(r <= R - d, 2.0 * math.pi, th)
    th = np.where(r <= d - R, 0.0, th)
    th = np.where(r >= d + R, 0.0, th)
    return th


def limit_ring_cdf(center_abs: float, radii, m: int) -> np.ndarray:
    """Limit measure of balls B_r(z0) for a batch of radii, |z0| = center_abs.

    Integrates the subtended angle against the radial law in the variable
    u = r^(2/m) (which makes the radial marginal uniform); the square-root
    behaviour at the tangency endpoints is removed by a cosine substitution,
    so a fixed Gauss rule is accurate to ~1e-9.
    """
    d = float(center_abs)
    rr = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(rr < 0):
        raise ValueError("radii must be nonnegative")
    out = np.zeros_like(rr)
    if d == 0.0:
        out[:] = np.minimum(rr ** (2.0 / m), 1.0)
        return out

    pos = rr > 0
    R = rr[pos]
    u1 = np.minimum(np.abs(R - d) ** (2.0 / m), 1.0)
    u2 = np.minimum((R + d) ** (2.0 / m), 1.0)
    # constant piece below u1: full circle when the ring is inside the ball
    base = np.where(R > d, u1, 0.0)

    # smooth piece on [u1, u2]: u = u1 + (u2-u1)(1-cos(pi v))/2, v in (0,1)
    v = 0.5 * (_GL32_X + 1.0)
    wv = 0.5 * _GL32_W
    s = 0.5 * (1.0 - np.cos(math.pi * v))
    ds = 0.5 * math.pi * np.sin(math.pi * v)
    width = (u2 - u1)[:, None]
    u = u1[:, None] + width * s[None, :]
    r_of_u = u ** (m / 2.0)
    th = _theta(r_of_u, d, R[:, None])
    piece = (width * ds[None, :] * wv[None, :] * th).sum(axis=1) / (2.0 * math.pi)

    out[pos] = np.clip(base + piece, 0.0, 1.0)
    return out


def limit_ball_measure(z0: complex, R: float, m: int) -> float:
    """Limit measure of the ball B_R(z0).

    Centered balls are exact: min(R^(2/m), 1).  Off-center balls integrate
    the circle-intersection angle against the radial law.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if m < 1:
        raise ValueError("m must be a positive integer")
    d = abs(complex(z0))
    if d == 0.0:
        return float(min(R ** (2.0 / m), 1.0))
    if d - R >= 1.0:
        return 0.0
    if R - d >= 1.0:
        return 1.0
    return float(limit_ring_cdf(d, np.array([R]), m)[0])


def log_potential_limit(z):
    """Logarithmic potential of the circular law: -log|z| outside the unit
    disc, (1 - |z|^2)/2 inside; continuous at the edge."""
    r = np.abs(np.asarray(z, dtype=complex))
    out = np.where(r > 1.0, -np.log(np.maximum(r, 1e-300)), 0.5 * (1.0 - r * r))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StieltjesPoint:
    """Solution of the hermitized fixed-point cubic at spectral parameter z
    and resolvent parameter w (upper half-plane)."""

    z: complex
    w: complex
    s: complex

    def residual(self) -> float:
        z, w, s = self.z, self.w, self.s
        return abs(s * ((w + s) ** 2 - abs(z) ** 2) + (w + s))


def _cubic_roots(z: complex, w: complex) -> np.ndarray:
    a2 = abs(z) ** 2
    return np.roots([1.0, 2.0 * w, w * w - a2 + 1.0, w])


def _polish(z: complex, w: complex, s: complex) -> complex:
    a2 = abs(z) ** 2
    for _ in range(4):
        f = s ** 3 + 2.0 * w * s ** 2 + (w * w - a2 + 1.0) * s + w
        fp = 3.0 * s ** 2 + 4.0 * w * s + (w * w - a2 + 1.0)
        if fp == 0:
            break
        step = f / fp
        s = s - step
        if abs(step) < 1e-16 * max(1.0, abs(s)):
            break
    return s


def stieltjes_limit(z: complex, w: complex) -> StieltjesPoint:
    """The Herglotz root of s((w+s)^2 - |z|^2) + (w+s) = 0.

    Picks the unique root with Im s > 0; when the selector is ambiguous
    (w close to the real axis), the root is tracked along the vertical
    homotopy from w + i, where it is unique.
    """
    z = complex(z)
    w = complex(w)
    if w.imag <= 0:
        raise ValueError("w must lie in the open upper half-plane")

    roots = _cubic_roots(z, w)
    pos = roots[roots.imag > 0]
    if len(pos) == 1:
        s = _polish(z, w, pos[0])
    else:
        # ambiguous near the real axis: continue from high up
        s = None
        prev = None
        for tau in np.geomspace(1.0 + w.imag, w.imag, 24):
            wt = complex(w.real, tau)
            cand = _cubic_roots(z, wt)
            if prev is None:
                up = cand[cand.imag > 0]
                if len(up) == 0:
                    raise PrecisionError("no upper-half-plane root at the homotopy start")
                prev = up[np.argmax(up.imag)]
            else:
                prev = cand[np.argmin(np.abs(cand - prev))]
        s = _polish(z, w, prev)
    point = StieltjesPoint(z, w, complex(s))
    tol = 1e-10 * (1.0 + abs(w)) ** 3
    if point.s.imag <= 0 or point.residual() > tol:
        raise PrecisionError(
            f"no admissible Stieltjes root at z={z}, w={w} "
            f"(residual {point.residual():.3e})")
    return point


def nu_z_density(z: complex, x: float, eps: float) -> float:
    """Density of the symmetrized singular-value law at x, via the Stieltjes
    boundary value at x + i*eps."""
    if not (0 < eps <= 0.1):
        raise ValueError("eps must lie in (0, 0.1]")
    s = stieltjes_limit(z, complex(x, eps)).s
    return max(s.imag / math.pi, 0.0)


def quarter_circle_cdf(x):
    """CDF of the quarter-circle law on [0, 2] (singular-value limit of a
    normalized square Gaussian matrix)."""
    xx = np.clip(np.asarray(x, dtype=float), 0.0, 2.0)
    out = (xx * np.sqrt(4.0 - xx * xx) / 2.0 + 2.0 * np.arcsin(xx / 2.0)) / math.pi
    return out if out.ndim else float(out)


def _mc_ball_measure(z0: complex, R: float, m: int, n_samples: int, seed: int) -> float:
    """Monte Carlo estimate of limit_ball_measure; test oracle helper."""
    rng = np.random.default_rng(seed)
    u = rng.random(n_samples)
    th = rng.random(n_samples) * 2.0 * math.pi
    pts = u ** (m / 2.0) * np.exp(1j * th)
    return float(np.mean(np.abs(pts - z0) <= R))
