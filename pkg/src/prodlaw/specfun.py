"""Exact spectral weights for products of independent Ginibre matrices.

The mean empirical spectral distribution of a normalized product of m
independent n x n Ginibre matrices is rotation invariant.  Its radial
weight is the Mellin inverse of Gamma(s)^m, evaluated here by saddle-point
Mellin-Barnes quadrature; the kernel eigenvalues eta_k built from that
weight drive both the exact mean ball measure and the determinantal
counting law.  A second, independent evaluation route goes through a
double contour integral (vertical line times a rectangle around the
cotangent poles) and is used for cross-validation.

All heavy evaluation happens in log-domain; quantities like eta_k stay
meaningful down to the underflow floor.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, loggamma, logsumexp, polygamma


class PrecisionError(RuntimeError):
    """An internal convergence or cancellation check failed.

    Raised instead of returning a silently inaccurate value.
    """


def _gauss(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


_GL16_X, _GL16_W = _gauss(16)
_GL24_X, _GL24_W = _gauss(24)


# ---------------------------------------------------------------------------
# Mellin-Barnes evaluation of the weight G(x) = Mellin inverse of Gamma(s)^m


@dataclass(frozen=True)
class MeijerWeight:
    """Configuration of the Mellin-Barnes evaluation of the radial weight.

    contour_abscissa and im_truncation are starting hints: the evaluator
    never goes below its own accuracy floor (the abscissa is moved to the
    integrand's real saddle and the truncation is grown until the tail is
    provably negligible), so every valid configuration meets the documented
    tolerances.
    """

    m: int
    contour_abscissa: float = 0.5
    im_truncation: float = 8.0
    panels: int = 16

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.contour_abscissa <= 0:
            raise ValueError("contour_abscissa must be positive")
        if self.im_truncation <= 0:
            raise ValueError("im_truncation must be positive")
        if self.panels < 8:
            raise ValueError("panels must be at least 8")


def _real_saddle(log_x: float, m: int) -> float:
    """Solve m*psi(c) = log x for c > 0 (the integrand's real saddle)."""
    target = log_x / m
    if target > 0.0:
        c = math.exp(target)
    else:
        # psi(c) ~ -1/c near 0; the shifted guess keeps Newton monotone
        c = min(1.4, -1.0 / (target - 0.6))
    c = max(c, 1e-8)
    for _ in range(80):
        step = (digamma(c) - target) / polygamma(1, c)
        c_new = c - step
        if c_new <= 0:
            c_new = c / 2.0
        if abs(c_new - c) < 1e-13 * c:
            return c_new
        c = c_new
    return c


def _line_panel_edges(c, sigma, T, omega, first):
    """Panel edges on [0, T]: widths ramp up but stay below the oscillation cap."""
    h_osc = 25.0 / max(omega, 1e-30)
    h = min(max(first, 1e-3 * c), h_osc)
    edges = [0.0]
    y = 0.0
    while y < T:
        h_max = min(max(sigma / 2.0, y / 3.0), h_osc)
        h = min(h * 1.4, h_max)
        step = h if T - y > h * 0.25 else T - y
        y = min(y + step, T)
        edges.append(y)
    return np.array(edges)


def _mb_quadrature(x: float, m: int, panels: int, min_trunc: float,
                   rtol: float = 1e-9, collect=None):
    """Log-magnitude and sign of the weight at x via saddle-line quadrature.

    Two refinement levels (halved initial panel width, extended truncation)
    must agree to rtol, otherwise PrecisionError.
    """
    if not (x > 0):
        raise ValueError("weight argument must be positive")
    gx, gw = (_GL16_X, _GL16_W) if panels <= 16 else _gauss(panels)

    log_x = math.log(x)
    c = _real_saddle(log_x, m)
    sigma = 1.0 / math.sqrt(m * polygamma(1, c))
    base = m * loggamma(c).real - c * log_x

    # truncation: probe the actual decay of the integrand magnitude
    T = max(10.0 * sigma, 4.0, min_trunc)
    while m * (loggamma(c + 1j * T).real - loggamma(c).real) > -50.0:
        T *= 1.5
        if T > 1e8:
            raise PrecisionError(f"no integrand decay up to T={T:.3g}")
    omega = m * (1.0 / c + math.log(2.0 + T / c))

    def level(T_lvl, first_width):
        edges = _line_panel_edges(c, sigma, T_lvl, omega, first_width)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        y = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        lg = m * loggamma(c + 1j * y) - (c + 1j * y) * log_x - base
        if collect is not None:
            collect.append((c + 1j * y, w, lg))
        return float(np.sum(w * np.exp(lg)).real)

    v1 = level(T, sigma / 2.0)
    v2 = level(T * 1.25, sigma / 4.0)
    if not math.isclose(v1, v2, rel_tol=rtol, abs_tol=1e-300):
        raise PrecisionError(
            f"refinement mismatch at x={x:.6g}, m={m}: {v1:.15e} vs {v2:.15e}")
    # the half-line integral doubles to the full line; 1/(2 pi i) * i = 1/(2 pi)
    val = v2 / math.pi
    if val <= 0.0:
        raise PrecisionError(f"nonpositive weight at x={x:.6g}, m={m}")
    return base + math.log(val), 1.0


def meijer_g_log(x: float, w: MeijerWeight):
    """(log magnitude, sign) of the radial weight at x under configuration w."""
    return _mb_quadrature(float(x), w.m, w.panels, w.im_truncation)


_DEFAULT_WEIGHTS: dict[int, MeijerWeight] = {}


def _weight(m: int) -> MeijerWeight:
    cfg = _DEFAULT_WEIGHTS.get(m)
    if cfg is None:
        cfg = _DEFAULT_WEIGHTS.setdefault(m, MeijerWeight(m=m))
    return cfg


def _log_weight(x: float, m: int) -> float:
    return _mb_quadrature(x, m, 16, 8.0)[0]


def dump_quadrature_nodes(x: float, w: MeijerWeight, path: str) -> int:
    """Write the Mellin-Barnes nodes used at x to CSV; returns the row count.

    Columns: re, im, weight, integrand_log_magnitude.
    """
    bags: list = []
    _mb_quadrature(float(x), w.m, w.panels, w.im_truncation, collect=bags)
    rows = 0
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["re", "im", "weight", "integrand_log_magnitude"])
        for s, wt, lg in bags:
            for j in range(len(s)):
                out.writerow([repr(s[j].real), repr(s[j].imag),
                              repr(float(wt[j])), repr(float(lg[j].real))])
                rows += 1
    return rows


# ---------------------------------------------------------------------------
# eta_k engine: shared t-grid with per-k prefix sums

_ETA_GL = 24


def _t_edges(t_max: float) -> np.ndarray:
    """Graded geometric edges near 0 (the weight is log-singular there for
    m >= 2), then panel widths growing like sqrt(t+1)/3."""
    edges = [0.0]
    t0 = min(1.0, t_max)
    graded = t0 * 2.0 ** -np.arange(48.0, -0.001, -1.0)
    edges.extend(e for e in graded if e < t_max)
    t = edges[-1]
    while t < t_max:
        t = min(t + max(0.25, math.sqrt(t + 1.0) / 3.0), t_max)
        edges.append(t)
    return np.array(edges)


class _EtaEngine:
    """Cached quadrature state for eta_k, k < n, at fixed (n, m).

    The integrand of eta_k in the t variable is gamma-like with peak near
    t = k.  The engine stores log G(t^m) on a shared graded grid and per-k
    prefix sums of the panel integrals, scaled by exp(-peak_k) so that each
    row keeps full relative precision near its own peak.  A ball evaluation
    then costs one partial panel (fresh weight values) plus a dot product.
    """

    def __init__(self, n: int, m: int, t_max: float):
        self.n = n
        self.m = m
        self.edges = _t_edges(t_max)
        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        half = 0.5 * (self.edges[1:] - self.edges[:-1])
        self.t = (mid[:, None] + half[:, None] * _GL24_X[None, :]).ravel()
        self.w = (half[:, None] * _GL24_W[None, :]).ravel()
        self.lg = np.array([_log_weight(ti ** m, m) for ti in self.t])
        npan = len(self.edges) - 1
        logt = np.log(np.maximum(self.t, 1e-320))
        self.peak = np.empty(n)
        self.prefix = np.empty((n, npan + 1))
        ks = np.arange(n)
        for k in ks:
            lw = self.lg + (m * k + m - 1) * logt
            pk = lw.max()
            v = (self.w * np.exp(lw - pk)).reshape(npan, _ETA_GL).sum(axis=1)
            self.peak[k] = pk
            self.prefix[k] = np.concatenate([[0.0], np.cumsum(v)])
        self.lgam = gammaln(ks + 1.0)

    @property
    def t_max(self) -> float:
        return float(self.edges[-1])

    def eta_all(self, R: float) -> np.ndarray:
        """eta_0..eta_{n-1} at radius R, clipped to [0, 1]."""
        m, n = self.m, self.n
        if R <= 0.0:
            return np.zeros(n)
        T = n * R ** (2.0 / m)
        if T > self.t_max + 1e-9:
            raise ValueError("engine grid too short; rebuild with larger t_max")
        npan = len(self.edges) - 1
        j = int(np.searchsorted(self.edges, T)) - 1
        j = max(0, min(j, npan - 1))
        lo = self.edges[j]
        part = np.zeros(n)
        if T > lo:
            mid, half = 0.5 * (lo + T), 0.5 * (T - lo)
            tp = mid + half * _GL24_X
            wp = half * _GL24_W
            lgp = np.array([_log_weight(ti ** m, m) for ti in tp])
            ltp = np.log(np.maximum(tp, 1e-320))
            ks = np.arange(n)[:, None]
            lwp = lgp[None, :] + (m * ks + m - 1) * ltp[None, :]
            part = (wp[None, :] * np.exp(lwp - self.peak[:, None])).sum(axis=1)
        eta = m * (self.prefix[:, j] + part) * np.exp(self.peak - m * self.lgam)
        return np.clip(eta, 0.0, 1.0)

    def complement_all(self, R: float) -> np.ndarray:
        """1 - eta_k with full relative precision, via the tail integral.

        Requires the truncation point T = n R^{2/m} to sit beyond every
        integrand peak (T > n), i.e. outer radii; the integrand is then
        decreasing on [T, inf) for every k < n.
        """
        m, n = self.m, self.n
        T = n * R ** (2.0 / m)
        if T <= n:
            raise ValueError("tail complement needs n*R^(2/m) > n")
        decay = m * (1.0 - (n - 1.0) / T)  # lower bound on -d(log integrand)/dt
        hi = T + 80.0 / decay
        edges = [T]
        t = T
        while t < hi:
            t = min(t + max(0.5, math.sqrt(t) / 6.0), hi)
            edges.append(t)
        edges = np.array(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        tt = (mid[:, None] + half[:, None] * _GL24_X[None, :]).ravel()
        ww = (half[:, None] * _GL24_W[None, :]).ravel()
        lg = np.array([_log_weight(ti ** m, m) for ti in tt])
        ltt = np.log(tt)
        ks = np.arange(n)[:, None]
        lw = lg[None, :] + (m * ks + m - 1) * ltt[None, :]
        pk = lw.max(axis=1)
        s = (ww[None, :] * np.exp(lw - pk[:, None])).sum(axis=1)
        comp = m * np.exp(pk + np.log(np.maximum(s, 1e-320)) - m * self.lgam)
        return np.clip(comp, 0.0, 1.0)


_ENGINES: dict[tuple[int, int], _EtaEngine] = {}
_ENGINE_LOCK = threading.Lock()


def _engine(n: int, m: int, t_need: float) -> _EtaEngine:
    """Engine for (n, m) whose grid covers [0, t_need]; grown on demand."""
    key = (n, m)
    with _ENGINE_LOCK:
        eng = _ENGINES.get(key)
        if eng is None or eng.t_max < t_need:
            t_max = max(t_need * 1.25 + 4.0, n * 1.35 + 4.0)
            if eng is not None:
                t_max = max(t_max, eng.t_max * 1.3)
            eng = _EtaEngine(n, m, t_max)
            _ENGINES[key] = eng
        return eng


def _validate_nm(n, m):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ValueError("m must be a positive integer")


def eta_k(k: int, n: int, m: int, R: float) -> float:
    """Kernel eigenvalue eta_k(R): Bernoulli parameter of the counting law.

    Computed as m/(k!)^m * integral of G(t^m) t^{mk+m-1} over [0, n R^{2/m}],
    with quadrature panels concentrated in a window around the integrand
    peak at t = k so that tiny values keep full relative precision.
    """
    _validate_nm(n, m)
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    if R < 0:
        raise ValueError("R must be nonnegative")
    if R == 0:
        return 0.0
    k = int(k)
    T = n * R ** (2.0 / m)
    W = max(12.0 * math.sqrt(k + 1.0), 60.0 / m)
    center = min(float(k), T)
    lo = max(0.0, center - W)
    hi = min(T, center + W)
    if lo == 0.0:
        edges = _t_edges(hi)
    else:
        edges = lo + (hi - lo) * np.linspace(0.0, 1.0, 41)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL24_X[None, :]).ravel()
    w = (half[:, None] * _GL24_W[None, :]).ravel()
    lg = np.array([_log_weight(ti ** m, m) for ti in t])
    lw = lg + (m * k + m - 1) * np.log(np.maximum(t, 1e-320))
    pk = lw.max()
    s = float(np.sum(w * np.exp(lw - pk)))
    if s <= 0:
        return 0.0
    val = math.log(m) + pk + math.log(s) - m * gammaln(k + 1.0)
    return float(min(math.exp(val), 1.0)) if val < 0 else 1.0


def mean_density(abs_z: float, n: int, m: int) -> float:
    """Radial density of the mean spectral measure at |z| = abs_z."""
    _validate_nm(n, m)
    if abs_z < 0:
        raise ValueError("abs_z must be nonnegative")
    if abs_z == 0.0:
        if m >= 2:
            raise ValueError("density diverges at the origin for m >= 2")
        # m = 1: only the k = 0 term survives and the weight tends to 1
        return 1.0 / math.pi
    x = float(n ** m * abs_z ** 2)
    lg = _log_weight(x, m)
    ks = np.arange(n)
    lt = (m - 1) * math.log(n) + ks * (m * math.log(n) + 2.0 * math.log(abs_z)) \
        - m * gammaln(ks + 1.0)
    return float(math.exp(logsumexp(lt) + lg - math.log(math.pi)))


def eta_profile(n: int, m: int, R: float) -> np.ndarray:
    """All kernel eigenvalues eta_0(R), ..., eta_{n-1}(R) at once."""
    _validate_nm(n, m)
    if R < 0:
        raise ValueError("R must be nonnegative")
    if R == 0:
        return np.zeros(n)
    T = n * R ** (2.0 / m)
    eng = _engine(n, m, T)
    return eng.eta_all(R)


def mean_ball_measure(R: float, n: int, m: int) -> float:
    """Mean measure of the centered ball of radius R: (1/n) sum_k eta_k(R)."""
    _validate_nm(n, m)
    if R < 0:
        raise ValueError("R must be nonnegative")
    if R == 0:
        return 0.0
    return float(eta_profile(n, m, R).mean())


def mean_ball_complement(R: float, n: int, m: int) -> float:
    """1 - mean ball measure, computed with full relative precision.

    For outer radii (n R^{2/m} > n, every eta_k near 1) the naive difference
    would lose all significant digits, so the tail integrals are used; for
    inner radii the difference is well conditioned already.
    """
    _validate_nm(n, m)
    T = n * R ** (2.0 / m)
    if T <= n:
        return 1.0 - mean_ball_measure(R, n, m)
    eng = _engine(n, m, T)
    return float(eng.complement_all(R).mean())


# ---------------------------------------------------------------------------
# double contour cross-validation


@dataclass(frozen=True)
class ContourConfig:
    """Geometry of the double contour evaluation.

    rect_offsets = (left Re, right Re offset past n, Im bottom, Im top) of
    the rectangle around the cotangent poles {1..n}.  The vertical line
    starts at vertical_abscissa; whenever poles sit to its right the
    evaluator shifts it to the stabilizing half-integer min(floor(n R^{2/m}),
    n) + 1/2 and splits the rectangle, keeping every separation at 1/4 and
    picking up the crossed residues as an exact count term.  Without that
    shift the s-line integral must cancel down to k!^m (n^m R^2)^{-k}, which
    float64 cannot do once n m is large.
    """

    rect_offsets: tuple[float, float, float, float] = (0.75, 0.25, -1.0, 1.0)
    vertical_abscissa: float = 0.5
    vertical_truncation: float | None = None
    panel_density: float = 4.0

    def __post_init__(self):
        left, right_off, im_lo, im_hi = self.rect_offsets
        if not (left > 0 and im_lo < 0 < im_hi):
            raise ValueError("invalid rectangle offsets")
        if abs(left - round(left)) < 0.25 - 1e-12 or \
           abs(right_off - round(right_off)) < 0.25 - 1e-12:
            raise ValueError("rectangle edge within 1/4 of an integer")
        # horizontal edges must also clear the integer poles of cot(pi t)
        if im_hi < 0.25 or -im_lo < 0.25:
            raise ValueError("rectangle height must clear the poles by 1/4")
        if self.vertical_abscissa <= 0:
            raise ValueError("vertical_abscissa must be positive")
        if self.vertical_truncation is not None and self.vertical_truncation <= 0:
            raise ValueError("vertical_truncation must be positive")
        if self.panel_density <= 0:
            raise ValueError("panel_density must be positive")


def _cot_pi(t: np.ndarray) -> np.ndarray:
    """cot(pi t), overflow-safe for |Im t| up to a few units."""
    t = np.asarray(t, dtype=complex)
    out = np.empty_like(t)
    up = t.imag >= 0
    q = np.exp(2j * np.pi * np.where(up, t, np.conj(t)))
    v = 1j * (q + 1.0) / (q - 1.0)
    out[up] = v[up]
    out[~up] = np.conj(v[~up])
    return out


def _gl_segment(a: complex, b: complex, h: float):
    L = abs(b - a)
    npan = max(1, int(math.ceil(L / h)))
    e = np.linspace(0.0, 1.0, npan + 1)
    mid = 0.5 * (e[1:] + e[:-1])
    half = 0.5 * (e[1:] - e[:-1])
    u = (mid[:, None] + half[:, None] * _GL16_X[None, :]).ravel()
    w = (half[:, None] * _GL16_W[None, :]).ravel() * (b - a)
    return a + (b - a) * u, w


def _rect_nodes(x0: float, x1: float, im_lo: float, im_hi: float, h: float):
    corners = [x0 + 1j * im_lo, x1 + 1j * im_lo, x1 + 1j * im_hi,
               x0 + 1j * im_hi, x0 + 1j * im_lo]
    ts, ws = [], []
    for a, b in zip(corners[:-1], corners[1:]):
        t, w = _gl_segment(a, b, h)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def _line_nodes(eta: float, m: float, min_trunc: float | None):
    """Nodes on the full vertical line Re s = eta (both halves), ds = i dy."""
    sig = math.sqrt(max(eta, 0.5) / m)
    T = max(10.0 * sig, min_trunc or 0.0)
    while m * (loggamma(eta + 1j * T).real - loggamma(eta).real) > -46.0:
        T *= 1.4
        if T > 1e4:
            raise PrecisionError("vertical line truncation failed to converge")
    edges = [0.0]
    y, h = 0.0, sig / 2.0
    while y < T:
        h = min(h * 1.4, max(sig / 2.0, y / 3.0))
        y = min(y + h, T)
        edges.append(y)
    edges = np.array(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL16_X[None, :]).ravel()
    w = (half[:, None] * _GL16_W[None, :]).ravel()
    y_all = np.concatenate([-u[::-1], u])
    w_all = np.concatenate([w[::-1], w])
    return eta + 1j * y_all, 1j * w_all


def mean_ball_measure_contour(R: float, n: int, m, cfg: ContourConfig | None = None) -> float:
    """Mean centered-ball measure via the double contour representation.

    Independent of the series route; intended for n <= 64.  Real m > 1 is
    accepted experimentally (the series representation is undefined there,
    so no cross-check exists).
    """
    if cfg is None:
        cfg = ContourConfig()
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= 64):
        raise ValueError("contour evaluation supports 1 <= n <= 64")
    if m < 1:
        raise ValueError("m must be >= 1")
    if R <= 0:
        raise ValueError("R must be positive")
    m = float(m)

    left, right_off, im_lo, im_hi = cfg.rect_offsets
    T_pole = n * R ** (2.0 / m)
    k_in = min(int(math.floor(T_pole)), n)
    eta = k_in + 0.5 if k_in >= 1 else cfg.vertical_abscissa
    log_nmR2 = m * math.log(n) + 2.0 * math.log(R)

    s, ws = _line_nodes(eta, m, cfg.vertical_truncation)
    f = m * loggamma(s) - s * log_nmR2
    fmax = f.real.max()

    rects = []
    if k_in >= 1:
        rects.append((left, eta - 0.25))
    if eta < n:
        rects.append((eta + 0.25, n + right_off))
    for x0, x1 in rects:
        if eta >= x0 - 0.25 + 1e-12 and eta <= x1 + 0.25 - 1e-12:
            raise ValueError("vertical line too close to the rectangle")

    h = 1.0 / cfg.panel_density
    total = 0.0 + 0.0j
    for x0, x1 in rects:
        t, wt = _rect_nodes(x0, x1, im_lo, im_hi, h)
        g = -m * loggamma(t) + t * log_nmR2
        gmax = g.real.max()
        kern = np.exp(f[None, :] + g[:, None] - fmax - gmax) / (t[:, None] - s[None, :])
        inner = kern @ ws
        total += np.exp(fmax + gmax) * np.sum(wt * inner * _cot_pi(t))

    val = k_in / n - (total / (4.0 * math.pi * n)).real
    resid = abs(total.imag) / (4.0 * math.pi * n)
    if resid > 1e-7 * max(abs(val), 1e-3):
        raise PrecisionError(
            f"contour imaginary residual {resid:.3e} at R={R}, n={n}, m={m}")
    return float(val)


# ---------------------------------------------------------------------------
# distance profile of the mean measure against the limit


@dataclass(frozen=True)
class DistanceProfile:
    """Signed differences mean_measure(B_R) - min(R^{2/m}, 1) on a grid,
    plus the located supremum of the absolute difference over (0, 1]."""

    radii: np.ndarray
    differences: np.ndarray
    sup_value: float
    sup_radius: float


def _limit_ball(R, m):
    return np.minimum(np.asarray(R, dtype=float) ** (2.0 / m), 1.0)


def _search_grid(n: int, m: int) -> np.ndarray:
    grid = np.geomspace(0.01, 1.0, 512)
    delta = 10.0 * math.sqrt(math.log(n) / n)
    dense = np.linspace(max(0.011, 1.0 - delta), 1.0, 257)
    return np.unique(np.concatenate([grid, dense]))


def mean_distance_profile(n: int, m: int, R_grid=None) -> DistanceProfile:
    """Profile of the mean-measure discrepancy and its supremum over (0, 1].

    The sup is located on a geometric grid densified near R = 1 (where the
    maximum sits for large n) and polished by golden-section search down to
    a radius resolution of 1e-6.
    """
    _validate_nm(n, m)
    search = _search_grid(n, m)
    if R_grid is None:
        radii = search
    else:
        radii = np.asarray(R_grid, dtype=float)
        if radii.size == 0:
            raise ValueError("empty radius grid")
        if np.any(radii <= 0) or np.any(np.diff(radii) < 0):
            raise ValueError("radius grid must be sorted and positive")

    eng = _engine(n, m, float(n * max(search.max(), radii.max()) ** (2.0 / m)))

    def diff(R: float) -> float:
        return float(eng.eta_all(R).mean() - _limit_ball(R, m))

    diffs = np.array([diff(R) for R in radii])
    sdiffs = diffs if radii is search else np.array([diff(R) for R in search])

    i = int(np.abs(sdiffs).argmax())
    lo = search[i - 1] if i > 0 else search[i] * 0.5
    hi = search[i + 1] if i + 1 < len(search) else 1.0

    # golden-section maximization of |diff| on [lo, hi]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = abs(diff(c1)), abs(diff(c2))
    while b - a > 1e-6:
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = abs(diff(c2))
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = abs(diff(c1))
    best_R = 0.5 * (a + b)
    best = abs(diff(best_R))
    if abs(sdiffs[i]) > best:
        best, best_R = abs(sdiffs[i]), search[i]
    return DistanceProfile(radii, diffs, float(best), float(best_R))


# ---------------------------------------------------------------------------


@dataclass
class MeanSpectralMeasure:
    """Mean spectral measure of the n x n, m-factor product, with a cache of
    kernel eigenvalues keyed by (k, R)."""

    n: int
    m: int
    eta_cache: dict = field(default_factory=dict)

    def __post_init__(self):
        _validate_nm(self.n, self.m)
        self._lock = threading.Lock()

    def eta(self, k: int, R: float) -> float:
        key = (int(k), float(R))
        with self._lock:
            if key in self.eta_cache:
                return self.eta_cache[key]
        val = eta_k(k, self.n, self.m, R)
        with self._lock:
            self.eta_cache.setdefault(key, val)
        return val

    def ball(self, R: float) -> float:
        return mean_ball_measure(R, self.n, self.m)

    def ball_complement(self, R: float) -> float:
        return mean_ball_complement(R, self.n, self.m)

    def density(self, abs_z: float) -> float:
        return mean_density(abs_z, self.n, self.m)

    def distance_profile(self, R_grid=None) -> DistanceProfile:
        return mean_distance_profile(self.n, self.m, R_grid)
