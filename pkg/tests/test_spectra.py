"""Spectral statistics: eigenvalue extraction, radial KS distance, the
Bernoulli counting sampler, ball-family suprema, and singular values."""

import csv
import math

import numpy as np
import pytest

from prodlaw.ensembles import EnsembleSpec, build_linearization, sample_product
from prodlaw.limits import quarter_circle_cdf
from prodlaw.specfun import eta_profile, mean_ball_measure
from prodlaw.spectra import (
    BallDistanceStat,
    Spectrum,
    ball_sup_distance,
    ball_sup_doubling_gap,
    bernoulli_count_sample,
    counts_to_csv,
    eigenvalues,
    linearization_root_spectrum,
    radial_ks_distance,
    singular_values,
    spectrum_to_csv,
)


def ginibre_spectrum(n, m, seed):
    s = sample_product(EnsembleSpec(n=n, m=m, entry_law="complex-gaussian", seed=seed))
    return eigenvalues(s.product, check_det=False)


class TestEigenvalues:
    def test_diagonal(self):
        spec = eigenvalues(np.diag([1.0, 2.0j]))
        assert sorted(spec.eigenvalues, key=lambda z: z.real) == pytest.approx([2j, 1])
        assert np.array_equal(spec.sorted_moduli, [1.0, 2.0])
        assert spec.n == 2

    def test_companion(self):
        # companion matrix of z^2 - 1
        spec = eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.sort(spec.eigenvalues.real) == pytest.approx([-1.0, 1.0], abs=1e-12)

    def test_not_square(self):
        with pytest.raises(ValueError):
            eigenvalues(np.ones((2, 3)))

    def test_determinant_check_runs(self):
        rng = np.random.default_rng(0)
        mat = rng.standard_normal((16, 16))
        eigenvalues(mat, check_det=True)  # must not raise on a sane matrix

    def test_ginibre_spectral_radius_envelope(self):
        hits = 0
        for seed in range(50):
            spec = ginibre_spectrum(256, 1, seed)
            hits += spec.sorted_moduli[-1] <= 1.2
        assert hits == 50


class TestRadialKS:
    def test_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for m in (1, 2, 3):
            eig = rng.standard_normal(50) + 1j * rng.standard_normal(50)
            spec = Spectrum.from_eigenvalues(0.6 * eig)
            stat = radial_ks_distance(spec, m)
            r = spec.sorted_moduli
            best = 0.0
            for j in range(1, 51):  # sup attained at a data radius, either side
                F = min(r[j - 1] ** (2.0 / m), 1.0)
                best = max(best, abs(j / 50 - F), abs((j - 1) / 50 - F))
            assert stat.value == pytest.approx(best, abs=1e-15)

    def test_two_point_example(self):
        spec = Spectrum.from_eigenvalues([0.25, 1.0])
        stat = radial_ks_distance(spec, 2)
        assert stat.value == pytest.approx(0.5, abs=1e-15)
        assert stat.argmax_radius == pytest.approx(1.0)

    @pytest.mark.parametrize("n,m", [(10, 1), (10, 2), (25, 3)])
    def test_interleaved_quantiles(self, n, m):
        radii = (((np.arange(1, n + 1) - 0.5) / n) ** (m / 2.0))
        stat = radial_ks_distance(Spectrum.from_eigenvalues(radii), m)
        assert stat.value == pytest.approx(1.0 / (2 * n), abs=1e-15)

    def test_point_mass_at_origin(self):
        stat = radial_ks_distance(Spectrum.from_eigenvalues([0.0]), 1)
        assert stat.value == pytest.approx(1.0)

    def test_empty_spectrum(self):
        with pytest.raises(ValueError):
            radial_ks_distance(Spectrum.from_eigenvalues([]), 1)


class TestBernoulliCounts:
    def test_large_radius_saturates(self):
        counts = bernoulli_count_sample(12, 2, 50.0, trials=40, seed=1)
        assert np.all(counts == 12)

    def test_single_bernoulli_mean(self):
        # n=1, m=1, R=1: count ~ Bernoulli(1 - 1/e)
        counts = bernoulli_count_sample(1, 1, 1.0, trials=10 ** 5, seed=2)
        assert counts.mean() == pytest.approx(0.6321, abs=0.005)

    def test_mean_matches_ball_measure(self):
        n, m, R, trials = 16, 2, 0.8, 20_000
        counts = bernoulli_count_sample(n, m, R, trials=trials, seed=3)
        eta = eta_profile(n, m, R)
        se = math.sqrt(float(np.sum(eta * (1.0 - eta))) / trials)
        target = n * mean_ball_measure(R, n, m)
        assert abs(counts.mean() - target) <= 3 * se

    def test_determinism(self):
        a = bernoulli_count_sample(8, 1, 0.9, trials=100, seed=5)
        b = bernoulli_count_sample(8, 1, 0.9, trials=100, seed=5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, bernoulli_count_sample(8, 1, 0.9, trials=100, seed=6))

    def test_validation(self):
        with pytest.raises(ValueError):
            bernoulli_count_sample(8, 1, 0.9, trials=0)

    def test_distributional_equality_smoke(self):
        # small-n version of the eigensolver-vs-Bernoulli comparison; the
        # full n=16 run with 2e4 trials lives in the acceptance suite
        n, m, R, trials = 8, 2, 0.8, 4000
        emp = np.zeros(n + 1)
        for t in range(trials):
            s = sample_product(EnsembleSpec(n=n, m=m, entry_law="complex-gaussian", seed=9), trial=t)
            k = int(np.sum(np.abs(np.linalg.eigvals(s.product)) <= R))
            emp[k] += 1
        ber = np.bincount(bernoulli_count_sample(n, m, R, trials=trials, seed=9), minlength=n + 1)
        tv = 0.5 * np.sum(np.abs(emp / trials - ber / trials))
        assert tv <= 0.1


class TestBallSup:
    def test_centered_family_equals_radial_ks(self):
        spec = ginibre_spectrum(64, 2, 0)
        ks = radial_ks_distance(spec, 2)
        stat = ball_sup_distance(spec, 2, family="centered")
        assert stat.value == ks.value
        assert stat.value <= ks.value + 1e-12

    def test_empty_interior(self):
        # all mass outside B_{1+tau}: the best bulk ball is the largest
        # admissible centered one, measure 0.8^2 under the m=1 limit
        eig = 1.3 * np.exp(2j * math.pi * np.arange(8) / 8)
        stat = ball_sup_distance(Spectrum.from_eigenvalues(eig), 1, "bulk", tau=0.2)
        assert stat.value >= 0.64 - 1e-9
        assert abs(stat.argmax_center) <= 1e-12

    def test_single_point_mass(self):
        spec = Spectrum.from_eigenvalues([0.5])
        stat = ball_sup_distance(spec, 1, "bulk", tau=0.2, radial_step=0.05)
        assert stat.value >= 1.0 - 1e-9  # tiny ball around the atom
        assert abs(stat.argmax_center - 0.5) <= 0.05

    def test_ginibre_envelope(self):
        n, m, tau = 512, 2, 0.2
        bound = 1.5 * math.sqrt(math.log(n) / n)
        hits = 0
        for seed in range(50):
            stat = ball_sup_distance(ginibre_spectrum(n, m, seed), m, "bulk", tau)
            hits += stat.value <= bound
        assert hits >= 45

    def test_annulus_avoiding_family(self):
        spec = ginibre_spectrum(128, 1, 3)
        stat = ball_sup_distance(spec, 1, "annulus-avoiding", tau=0.2)
        assert isinstance(stat, BallDistanceStat)
        assert 0.0 <= stat.value <= 1.0
        assert stat.family == "annulus-avoiding"
        # admissible balls keep their boundary circle away from 0 and |z|=1
        d, r = abs(stat.argmax_center), stat.argmax_radius
        assert abs(d - r) >= 0.2 - 1e-9 or d - r >= -1e-12
        assert d + r <= 0.8 + 1e-9 or d - r >= 1.2 - 1e-9

    def test_validation(self):
        spec = Spectrum.from_eigenvalues([0.1, 0.2])
        with pytest.raises(ValueError):
            ball_sup_distance(spec, 1, family="square")
        with pytest.raises(ValueError):
            ball_sup_distance(spec, 1, tau=1.5)

    def test_doubling_monotone_and_median_gap(self):
        # the doubled grid is a superset, so the lower bound cannot drop;
        # individual seeds can jump by >5%, the median gap stays under it
        gaps = []
        for m in (1, 2):
            for seed in range(3):
                spec = ginibre_spectrum(256, m, seed)
                g = ball_sup_doubling_gap(spec, m, "bulk", 0.2)
                assert g["fine"] >= g["coarse"] - 1e-15
                gaps.append(g["relative_gap"])
        assert float(np.median(gaps)) <= 0.05


class TestLinearizationConsistency:
    def test_root_spectrum_identity(self):
        lam = np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.05j])
        roots = linearization_root_spectrum(lam, 3)
        assert roots.shape == (9,)
        back = np.sort_complex(roots ** 3)
        assert np.allclose(back, np.sort_complex(np.repeat(lam, 3)), atol=1e-12)

    def test_zero_maps_to_zero(self):
        roots = linearization_root_spectrum([0.0, 1.0], 2)
        assert np.sum(roots == 0) == 2

    def test_ks_invariant_under_linearization(self):
        n, m = 16, 3
        s = sample_product(EnsembleSpec(n=n, m=m, entry_law="complex-gaussian", seed=4))
        direct = radial_ks_distance(eigenvalues(s.product, check_det=False), m)
        W = build_linearization(s).W
        powered = np.sort(np.abs(np.linalg.eigvals(W)) ** m)
        dedup = powered.reshape(n, m).mean(axis=1)  # m copies of each modulus
        via_w = radial_ks_distance(Spectrum.from_eigenvalues(dedup), m)
        assert via_w.value == pytest.approx(direct.value, abs=1e-9)


class TestSingularValues:
    def test_diagonal(self):
        assert np.array_equal(singular_values(np.diag([3.0, 4.0])), [4.0, 3.0])

    def test_unitary(self):
        q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((12, 12)))
        assert np.max(np.abs(singular_values(q) - 1.0)) <= 1e-10

    def test_squares_are_gram_eigenvalues(self):
        rng = np.random.default_rng(1)
        mat = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        sv = singular_values(mat)
        gram = np.sort(np.linalg.eigvalsh(mat.conj().T @ mat))[::-1]
        assert np.max(np.abs(sv ** 2 - gram) / gram[0]) <= 1e-9

    def test_linearization_quarter_circle(self):
        # W at z=0 for two Ginibre factors: singular value law is the
        # quarter circle on [0, 2]
        s = sample_product(EnsembleSpec(n=512, m=2, entry_law="complex-gaussian", seed=6))
        sv = np.sort(singular_values(build_linearization(s).W))
        k = sv.size
        F = quarter_circle_cdf(sv)
        j = np.arange(1, k + 1)
        ks = float(np.max(np.maximum(np.abs(j / k - F), np.abs((j - 1) / k - F))))
        assert ks <= 0.05


class TestExports:
    def test_spectrum_csv(self, tmp_path):
        spec = Spectrum.from_eigenvalues([1.0 + 2.0j, -0.5])
        path = tmp_path / "spec.csv"
        spectrum_to_csv(spec, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["re", "im", "modulus"]
        got = [complex(float(r[0]), float(r[1])) for r in rows[1:]]
        assert got == [1.0 + 2.0j, -0.5 + 0.0j]
        assert float(rows[1][2]) == abs(1.0 + 2.0j)

    def test_counts_csv(self, tmp_path):
        path = tmp_path / "counts.csv"
        counts_to_csv(np.array([3, 1, 4]), path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows == [["trial", "count"], ["0", "3"], ["1", "1"], ["2", "4"]]
