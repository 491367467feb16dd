"""Random matrix ensembles: i.i.d. factor sampling, the normalized product,
the block-cyclic linearization, the hermitization, and matrix I/O.

Entry laws are standardized to mean 0 and E|x|^2 = 1.  Real laws are used
as-is (their matrices are real, stored as complex); no complex rotation is
applied, so universality claims can be probed across genuinely different
fourth moments.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass

import numpy as np

_SQRT3 = math.sqrt(3.0)

# law name -> (sampler(rng, size) -> real/complex array, E|x|^4)
_LAWS = {
    "complex-gaussian": (
        lambda rng, size: (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        * math.sqrt(0.5),
        2.0,
    ),
    "real-gaussian": (lambda rng, size: rng.standard_normal(size), 3.0),
    "rademacher": (lambda rng, size: rng.integers(0, 2, size) * 2.0 - 1.0, 1.0),
    "uniform-centered": (lambda rng, size: rng.uniform(-_SQRT3, _SQRT3, size), 1.8),
    "student-t5": (lambda rng, size: rng.standard_t(5, size) * math.sqrt(0.6), 9.0),
}

ENTRY_LAWS = tuple(sorted(_LAWS))


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of one product-matrix ensemble."""

    n: int
    m: int
    entry_law: str = "complex-gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.entry_law not in _LAWS:
            raise ValueError(
                f"unknown entry law {self.entry_law!r}; choose from {ENTRY_LAWS}")


@dataclass
class ProductSample:
    """Factors X^(1..m) and the normalized product prod X^(q) / n^(m/2)."""

    spec: EnsembleSpec
    factors: list
    product: np.ndarray

    def recompute_check(self, tol: float = 1e-10) -> float:
        """Max abs deviation between the stored product and a fresh one."""
        fresh = _normalized_product(self.factors, self.spec.n)
        gap = float(np.max(np.abs(fresh - self.product)))
        if gap > tol:
            raise RuntimeError(f"stored product is stale (gap {gap:.3e})")
        return gap


def _normalized_product(factors, n):
    prod = factors[0].astype(np.complex128, copy=True)
    for f in factors[1:]:
        prod = prod @ f
    return prod / n ** (len(factors) / 2.0)


def sample_product(spec: EnsembleSpec, trial: int = 0) -> ProductSample:
    """Draw the m factors independently and form the normalized product.

    Each factor gets its own child stream of (seed, trial), so factor q is
    unaffected by how many entries the other factors consumed.  Same
    (spec, trial) always reproduces the same matrices bit for bit.
    """
    root = np.random.SeedSequence((spec.seed, trial))
    children = root.spawn(spec.m)
    sampler = _LAWS[spec.entry_law][0]
    factors = []
    for q in range(spec.m):
        rng = np.random.default_rng(children[q])
        x = sampler(rng, (spec.n, spec.n)).astype(np.complex128)
        factors.append(x)
    return ProductSample(spec, factors, _normalized_product(factors, spec.n))


@dataclass
class Linearization:
    """Block-cyclic companion matrix W of size nm: W[q, q+1] = X^(q+1)/sqrt(n)
    and W[m-1, 0] = X^(m)/sqrt(n), all other blocks zero.  W^m is block
    diagonal with cyclic rotations of the normalized product, so the
    eigenvalues of W are exactly the m-th roots of those of the product."""

    W: np.ndarray
    n: int
    m: int
    layout: tuple  # ((block_row, block_col, factor_index), ...)


def build_linearization(sample: ProductSample) -> Linearization:
    n, m = sample.spec.n, sample.spec.m
    W = np.zeros((n * m, n * m), dtype=np.complex128)
    s = 1.0 / math.sqrt(n)
    layout = []
    for q in range(m - 1):
        W[q * n:(q + 1) * n, (q + 1) * n:(q + 2) * n] = sample.factors[q] * s
        layout.append((q, q + 1, q))
    W[(m - 1) * n:m * n, 0:n] = sample.factors[m - 1] * s
    layout.append((m - 1, 0, m - 1))
    return Linearization(W, n, m, tuple(layout))


def build_hermitization(W, z: complex) -> np.ndarray:
    """Hermitization V(z) = [[0, W - z], [(W - z)*, 0]]; Hermitian, and its
    positive eigenvalues are the singular values of W - z."""
    if isinstance(W, Linearization):
        W = W.W
    W = np.asarray(W, dtype=np.complex128)
    N = W.shape[0]
    shifted = W - complex(z) * np.eye(N)
    V = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    V[:N, N:] = shifted
    V[N:, :N] = shifted.conj().T
    return V


def condition_c_report(law: str, samples: int = 200_000, seed: int = 0) -> dict:
    """Empirical moment report for one entry law: mean, variance, fourth
    absolute moment, and 4.5-th moment, with standard errors and the
    analytic targets."""
    if law not in _LAWS:
        raise ValueError(f"unknown entry law {law!r}")
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples for stable moments")
    sampler, m4 = _LAWS[law]
    rng = np.random.default_rng(np.random.SeedSequence((seed, 977)))
    x = sampler(rng, samples).astype(np.complex128)
    a = np.abs(x)
    rep = {
        "law": law,
        "samples": samples,
        "mean": complex(np.mean(x)),
        "variance": float(np.mean(a ** 2)),
        "abs_moment_4": float(np.mean(a ** 4)),
        "abs_moment_4_5": float(np.mean(a ** 4.5)),
        "target_mean": 0.0,
        "target_variance": 1.0,
        "target_abs_moment_4": m4,
    }
    # dispersion of x itself, not |x|: the latter is 0 for two-point laws
    rep["se_mean"] = float(np.std(x) / math.sqrt(samples))
    rep["se_variance"] = float(np.std(a ** 2) / math.sqrt(samples))
    rep["se_abs_moment_4"] = float(np.std(a ** 4) / math.sqrt(samples))
    rep["mean_ok"] = abs(rep["mean"]) <= 5 * rep["se_mean"] + 1e-12
    rep["variance_ok"] = abs(rep["variance"] - 1.0) <= 5 * rep["se_variance"]
    rep["abs_moment_4_ok"] = abs(rep["abs_moment_4"] - m4) <= 6 * rep["se_abs_moment_4"]
    return rep


def fourth_moment(law: str) -> float:
    if law not in _LAWS:
        raise ValueError(f"unknown entry law {law!r}")
    return _LAWS[law][1]


# ---------------------------------------------------------------------------
# I/O.  CSV: header row,col,re,im then one entry per line.  Binary: 8-byte
# magic PRDLMAT1, then little-endian uint32 n, m, dtype code (1 = complex128),
# then the m factors in order, each row-major as interleaved (re, im) float64.

_MAGIC = b"PRDLMAT1"
_DTYPE_COMPLEX128 = 1


def save_matrix_csv(mat, path) -> None:
    mat = np.asarray(mat, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "re", "im"])
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                v = mat[i, j]
                w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])


def load_matrix_csv(path) -> np.ndarray:
    rows, cols, res, ims = [], [], [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["row", "col", "re", "im"]:
            raise ValueError(f"unexpected CSV header {header}")
        for rec in r:
            rows.append(int(rec[0]))
            cols.append(int(rec[1]))
            res.append(float(rec[2]))
            ims.append(float(rec[3]))
    nr, nc = max(rows) + 1, max(cols) + 1
    out = np.zeros((nr, nc), dtype=np.complex128)
    out[rows, cols] = np.array(res) + 1j * np.array(ims)
    return out


def save_factors_binary(sample: ProductSample, path) -> None:
    n, m = sample.spec.n, sample.spec.m
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", n, m, _DTYPE_COMPLEX128))
        for f in sample.factors:
            fh.write(np.ascontiguousarray(f, dtype="<c16").tobytes())


def load_factors_binary(path) -> list:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        n, m, code = struct.unpack("<III", fh.read(12))
        if code != _DTYPE_COMPLEX128:
            raise ValueError(f"unsupported dtype code {code}")
        out = []
        count = n * n
        for _ in range(m):
            buf = fh.read(16 * count)
            if len(buf) != 16 * count:
                raise ValueError("truncated factor payload")
            out.append(np.frombuffer(buf, dtype="<c16").reshape(n, n).astype(np.complex128))
    return out
