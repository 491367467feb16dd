"""Command-line front end.

One binary with subcommands for the exact computations (density,
mean-distance, contour-check), simulation diagnostics (esd, ball-sup,
bernoulli, potential, grid-approx), and the experiment harness (report,
rate-fit).  Exit status: 0 success, 2 verdict failure, 1 execution error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import harness, limits, potential_lab, spectra, specfun
from .ensembles import ENTRY_LAWS, EnsembleSpec, sample_product

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for verdict failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--m", type=int, default=1, help="number of factors")
    p.add_argument("--n", type=int, default=128, help="matrix size (or lattice size for grid-approx)")
    p.add_argument("--n-grid", type=str, default=None,
                   help="comma-separated increasing sizes, e.g. 64,256,1024")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--tau", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", type=str, default="complex-gaussian",
                   choices=list(ENTRY_LAWS))
    p.add_argument("--out", type=str, default=None, metavar="DIR")
    p.add_argument("--format", type=str, default="csv", choices=["csv", "json"])


def _parse_grid(args):
    if args.n_grid is None:
        return None
    try:
        return tuple(int(tok) for tok in args.n_grid.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad --n-grid value {args.n_grid!r}")


def _write_table(path, header, rows, fmt):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        with open(path + ".json", "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return path + ".json"
    with open(path + ".csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path + ".csv"


# --------------------------------------------------------------------------
# subcommand handlers; each returns a process exit code


def _cmd_density(args):
    n, m = args.n, args.m
    # the density is singular at the origin for m >= 2, so start off zero
    r = np.linspace(0.0, 1.5, 301)[1:]
    law = limits.LimitLaw(m)
    rows = [(repr(float(ri)),
             repr(float(specfun.mean_density(ri, n, m))),
             repr(float(law.density(ri))))
            for ri in r]
    if args.out:
        path = _write_table(os.path.join(args.out, f"density-n{n}-m{m}"),
                            ["r", "density", "limit_density"], rows, args.format)
        print(f"wrote {path}")
    else:
        for ri in (0.1, 0.5, 0.9, 1.0, 1.1):
            print(f"r={ri:4.2f}  density={specfun.mean_density(ri, n, m):.8f}  "
                  f"limit={law.density(ri):.8f}")
    return EXIT_OK


def _cmd_mean_distance(args):
    prof = specfun.mean_distance_profile(args.n, args.m)
    scale = math.sqrt(2 * math.pi * args.n) if args.m == 1 else math.sqrt(args.n * args.m)
    print(f"n={args.n} m={args.m}  sup={prof.sup_value:.8e}  "
          f"argmax_R={prof.sup_radius:.6f}  scaled={prof.sup_value * scale:.6f}")
    if args.out:
        rows = [(repr(float(R)), repr(float(d)))
                for R, d in zip(prof.radii, prof.differences)]
        path = _write_table(os.path.join(args.out, f"mean-distance-n{args.n}-m{args.m}"),
                            ["R", "distance"], rows, args.format)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_contour_check(args):
    tol = 1e-6
    worst = 0.0
    for R in (0.5, 1.0, 1.5):
        series = specfun.mean_ball_measure(R, args.n, args.m)
        contour = specfun.mean_ball_measure_contour(R, args.n, args.m)
        rel = abs(series - contour) / max(abs(series), 1e-300)
        worst = max(worst, rel)
        print(f"R={R:3.1f}  series={series:.12f}  contour={contour:.12f}  rel={rel:.3e}")
    print(f"worst relative gap {worst:.3e} (tolerance {tol:.0e})")
    return EXIT_OK if worst <= tol else EXIT_VERDICT


def _cmd_esd(args):
    out = args.out or "."
    for t in range(args.trials):
        spec = EnsembleSpec(n=args.n, m=args.m, entry_law=args.ensemble,
                            seed=args.seed)
        samp = sample_product(spec, trial=t)
        spect = spectra.eigenvalues(samp.product, check_det=False)
        ks = spectra.radial_ks_distance(spect, args.m)
        path = os.path.join(out, f"esd-n{args.n}-m{args.m}-t{t}.csv")
        spectra.spectrum_to_csv(spect, path)
        print(f"trial={t}  radial_ks={ks.value:.6f}  wrote {path}")
    return EXIT_OK


def _cmd_ball_sup(args):
    vals = []
    for t in range(args.trials):
        spec = EnsembleSpec(n=args.n, m=args.m, entry_law=args.ensemble,
                            seed=args.seed)
        samp = sample_product(spec, trial=t)
        spect = spectra.eigenvalues(samp.product, check_det=False)
        stat = spectra.ball_sup_distance(spect, args.m, family="bulk",
                                         tau=args.tau)
        vals.append(stat.value)
        print(f"trial={t}  ball_sup={stat.value:.6f}  "
              f"center={stat.argmax_center:.4f}  radius={stat.argmax_radius:.4f}")
    print(f"median over {args.trials} trials: {float(np.median(vals)):.6f}")
    if args.out:
        rows = [(args.n, t, repr(float(v)), 0.0) for t, v in enumerate(vals)]
        path = _write_table(os.path.join(args.out, f"ball-sup-n{args.n}-m{args.m}"),
                            ["n", "trial", "statistic", "argmax"], rows, args.format)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_bernoulli(args):
    R = args.radius
    counts = spectra.bernoulli_count_sample(args.n, args.m, R,
                                            trials=args.trials, seed=args.seed)
    mean = float(np.mean(counts))
    exact = args.n * specfun.mean_ball_measure(R, args.n, args.m)
    print(f"n={args.n} m={args.m} R={R}  mean count={mean:.4f}  "
          f"exact n*measure={exact:.4f}")
    if args.out:
        path = os.path.join(args.out, f"bernoulli-n{args.n}-m{args.m}.csv")
        os.makedirs(args.out, exist_ok=True)
        spectra.counts_to_csv(counts, path)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_potential(args):
    spec = EnsembleSpec(n=args.n, m=args.m, entry_law=args.ensemble,
                        seed=args.seed)
    samp = sample_product(spec, trial=0)
    lam = np.linalg.eigvals(samp.product)
    roots = spectra.linearization_root_spectrum(lam, args.m)
    pts = harness._local_law_grid(args.tau)
    u_emp, flags = potential_lab.potential_from_roots(roots, pts)
    u_lim = limits.log_potential_limit(pts)
    stat = potential_lab.local_law_statistic(roots, pts, args.n)
    print(f"n={args.n} m={args.m}  max|U_n-U_inf|={stat['max_gap']:.6e}  "
          f"normalized={stat['normalized']:.6f}")
    if args.out:
        rows = [(repr(float(z.real)), repr(float(z.imag)), repr(float(ue)),
                 repr(float(ul)), int(fl))
                for z, ue, ul, fl in zip(pts, u_emp, u_lim, flags)]
        path = _write_table(os.path.join(args.out, f"potential-n{args.n}-m{args.m}"),
                            ["re", "im", "u_empirical", "u_limit", "clamped"],
                            rows, args.format)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_grid_approx(args):
    f = potential_lab.MollifiedIndicator(
        center=0j, radius=2.0, smoothing=harness.GRID_APPROX_SMOOTHING,
        side="outer")
    lam = np.array([0j])
    gaps = []
    for t in range(args.trials):
        rng = np.random.default_rng(np.random.SeedSequence((args.seed, args.n, t)))
        grid = potential_lab.RandomGrid.sample(args.n, rng)
        res = potential_lab.grid_approximation(lam, f, grid)
        gaps.append(res.gap)
        print(f"shift={t}  M={args.n}  gap={res.gap:.6e}")
    print(f"median gap over {args.trials} shifts: {float(np.median(gaps)):.6e}")
    return EXIT_OK


def _cmd_rate_fit(args):
    with open(args.input, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(int(r["n"]), float(r["statistic"])) for r in reader]
    if not rows:
        raise ValueError(f"no rows in {args.input}")
    per_n = {}
    for n, v in rows:
        per_n.setdefault(n, []).append(v)
    pairs = [(n, float(np.median(vs))) for n, vs in sorted(per_n.items())]
    slope, intercept, resid = harness.fit_rate(pairs)
    if args.format == "json":
        print(json.dumps({"slope": slope, "intercept": intercept,
                          "rms_residual": resid}, sort_keys=True))
    else:
        print(f"slope={slope:.6f}  intercept={intercept:.6f}  "
              f"rms_residual={resid:.3e}")
    if args.band:
        lo, hi = (float(tok) for tok in args.band.split(","))
        if not (lo <= slope <= hi):
            print(f"slope outside [{lo}, {hi}]")
            return EXIT_VERDICT
    return EXIT_OK


def _cmd_report(args):
    grid = _parse_grid(args)
    if grid is None:
        raise ValueError("report requires --n-grid")
    plan = harness.ExperimentPlan(
        target=args.target, n_grid=grid, m=args.m, trials=args.trials,
        tau=args.tau, seed=args.seed, entry_law=args.ensemble, out=args.out,
        cell_budget=args.cell_budget)
    report = harness.run_plan(plan)
    if args.format == "json":
        print(json.dumps({"verdicts": report.verdicts,
                          "constants": report.constants,
                          "fit": report.fit}, sort_keys=True))
    else:
        for name, ok in sorted(report.verdicts.items()):
            print(f"{'PASS' if ok else 'FAIL'}  {args.target}:{name}")
        if report.fit is not None:
            print(f"fit slope={report.fit[0]:.4f}  residual={report.fit[2]:.3e}")
    return EXIT_OK if report.passed else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="prodlaw",
                  description="products of independent random matrices: "
                              "exact measures, simulation, convergence rates")
    sub = top.add_subparsers(dest="command", required=True)

    handlers = {}

    def add(name, fn, help_text, extra=None):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if extra:
            extra(p)
        handlers[name] = fn
        return p

    add("density", _cmd_density, "mean spectral density on a radial grid")
    add("mean-distance", _cmd_mean_distance,
        "sup distance between mean measure and its limit over ball radii")
    add("contour-check", _cmd_contour_check,
        "cross-validate series and contour ball measures")
    add("esd", _cmd_esd, "sample products and write eigenvalue CSVs")
    add("ball-sup", _cmd_ball_sup,
        "per-trial supremum of |ESD - limit| over bulk balls")
    add("bernoulli", _cmd_bernoulli, "Bernoulli-sum ball count sampler",
        extra=lambda p: p.add_argument("--radius", type=float, default=0.8))
    add("potential", _cmd_potential,
        "log-potential of a sampled linearization vs the limit")
    add("grid-approx", _cmd_grid_approx,
        "randomized-lattice integral approximation gaps (--n is the lattice size)")
    add("rate-fit", _cmd_rate_fit, "fit a rate from a rows CSV",
        extra=lambda p: (p.add_argument("--input", required=True),
                         p.add_argument("--band", type=str, default=None,
                                        help="lo,hi acceptance band for the slope")))
    add("report", _cmd_report, "run an experiment plan and emit CSV+JSON",
        extra=lambda p: (p.add_argument("--target", required=True,
                                        choices=list(harness.TARGETS)),
                         p.add_argument("--cell-budget", type=float,
                                        default=None)))

    top.set_defaults(_handlers=handlers)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = args._handlers[args.command]
    try:
        return handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
