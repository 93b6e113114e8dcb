"""Command-line interface: ``stochcorr {pdf,simulate,fit,sweep}``.

Exit codes: 0 success, 1 numerical failure, 2 usage or input error. Output
files go to ``--output-dir``, defaulting to ``$STOCHCORR_OUTPUT_DIR`` or the
current directory, and start with ``#`` provenance lines.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy.stats import kurtosis

from . import dist
from ._version import __version__
from .ensemble import EnsembleSpec, sample_ensemble_return, sample_wishart_correlation, zero_eigenvalue_counts
from .errors import DataFormatError
from .ingest import (ReturnMatrix, generate_synthetic, load_prices, load_returns, provenance,
                     result_record, synthetic_tickers, write_histogram, write_results,
                     write_returns, write_table)
from .linalg import CovarianceModel
from .rng import RngStream
from .study import (SCALES, SWEEP_AXES, WEIGHT_SCHEMES, StudyConfig, _returns_at, run_fit_study,
                    run_sweep, synthetic_returns)

OUTPUT_ENV = "STOCHCORR_OUTPUT_DIR"
EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
RANK_DRAWS = 1000


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("range needs LOW < HIGH")
    return lo, hi


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--output-dir", default=None,
                   help=f"output directory (default ${OUTPUT_ENV} or the current directory)")


def _add_data_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="returns CSV (date,TICKER1,...)")
    src.add_argument("--prices", help="price CSV; returns are computed at --dt")
    p.add_argument("--synthetic-n", type=float, default=3.9,
                   help="N for synthetic data when no input is given (default 3.9)")
    p.add_argument("--universe", type=_positive_int, default=None,
                   help="synthetic universe size (default: --k)")
    p.add_argument("--t", type=_positive_int, default=20000, help="synthetic length in days")


def _add_study(p):
    p.add_argument("--portfolios", type=_positive_int, default=600)
    p.add_argument("--k", type=_positive_int, default=20, help="assets per portfolio")
    p.add_argument("--weights", choices=WEIGHT_SCHEMES, default="uniform")
    p.add_argument("--a", type=float, default=0.5, help="uniform weight half width")
    p.add_argument("--normalization", choices=("shift", "ratio"), default="shift")
    p.add_argument("--dt", type=_positive_int, default=1, help="return interval in trading days")
    p.add_argument("--method", choices=("min_dist_cvm", "mle"), default="min_dist_cvm")
    p.add_argument("--weight-c", type=float, default=0.07)
    p.add_argument("--scale", choices=SCALES, default="rescaled")
    p.add_argument("--bins", type=_positive_int, default=100)


def build_parser():
    parser = argparse.ArgumentParser(prog="stochcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", help="tabulate the portfolio return density")
    p.add_argument("--n", type=_float_list, required=True, help="comma-separated N values")
    p.add_argument("--alpha", type=float, default=1.0, help="portfolio variance (1 = rescaled)")
    p.add_argument("--range", type=_range, default=(-5.0, 5.0), help="LOW:HIGH")
    p.add_argument("--points", type=_positive_int, default=201)
    p.add_argument("--overlay", action="append", choices=("normal", "t"), default=[],
                   help="add a baseline curve with the same variance (repeatable)")
    p.add_argument("--t-nu", type=float, default=3.0, help="degrees of freedom for the t overlay")
    _add_common(p)

    p = sub.add_parser("simulate", help="draw synthetic returns from the averaged model")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--m", type=_positive_int, default=100000, help="number of return vectors")
    p.add_argument("--rho", type=float, default=0.0, help="equal pairwise correlation")
    p.add_argument("--sigma", type=float, default=1.0, help="volatility of every asset")
    p.add_argument("--route", choices=("mixture", "wishart"), default="mixture")
    _add_common(p)

    p = sub.add_parser("fit", help="fit N to pooled portfolio returns")
    _add_data_source(p)
    _add_study(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="alpha and N along one study parameter")
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", type=_float_list, required=True)
    _add_data_source(p)
    _add_study(p)
    _add_common(p)
    return parser


def _output_dir(args) -> Path:
    out = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output_dir",)}


def _header(args) -> dict:
    return provenance(args.seed, _config_dict(args))


def cmd_pdf(args):
    if not args.alpha > 0 or any(not n > 0 for n in args.n):
        raise UsageError("--alpha and every --n must be positive")
    if "t" in args.overlay and not args.t_nu > 2:
        raise UsageError("--t-nu must exceed 2 so the t overlay has finite variance")
    r = np.linspace(*args.range, args.points)
    columns, curves = ["r"], [r]
    for n in args.n:
        columns.append(f"n={n:g}")
        curves.append(dist.PortfolioKDist(args.alpha, n).pdf(r))
    sd = np.sqrt(args.alpha)
    if "normal" in args.overlay:
        columns.append("normal")
        curves.append(dist.normal_pdf(0.0, sd, r))
    if "t" in args.overlay:
        columns.append(f"t(nu={args.t_nu:g})")
        scale = sd * np.sqrt((args.t_nu - 2) / args.t_nu)
        curves.append(dist.student_t_pdf(args.t_nu, 0.0, scale, r))
    path = _output_dir(args) / "pdf.csv"
    write_table(path, columns, zip(*(c.tolist() for c in curves)), _header(args))
    return [path]


def _equicorrelation(k, rho):
    corr = np.full((k, k), rho)
    np.fill_diagonal(corr, 1.0)
    return corr


def cmd_simulate(args):
    if not args.n > 0 or not args.sigma > 0:
        raise UsageError("--n and --sigma must be positive")
    if args.k > 1 and not -1.0 / (args.k - 1) < args.rho < 1:
        raise UsageError(f"--rho must lie in (-1/(k-1), 1) for k={args.k}")
    model = CovarianceModel.from_corr(np.full(args.k, args.sigma), _equicorrelation(args.k, args.rho))
    spec = EnsembleSpec(model, args.n)
    root = RngStream(args.seed)
    if args.route == "wishart":
        if not spec.is_integer:
            raise UsageError("--route wishart needs an integer --n")
        x = sample_ensemble_return(spec, root.child(0), size=args.m)
        returns = ReturnMatrix(synthetic_tickers(args.k), x.T)
    else:
        returns = generate_synthetic(spec, args.m, root.child(0))
    z = returns.values / args.sigma
    kurt = kurtosis(z, axis=1, fisher=True, bias=True)
    summary = {
        "provenance": _header(args),
        "m": args.m,
        "variance": np.var(z, axis=1).tolist(),
        "excess_kurtosis": kurt.tolist(),
        "mean_excess_kurtosis": float(np.mean(kurt)),
        "expected_excess_kurtosis": 6.0 / args.n,
    }
    if spec.is_integer:
        mats = sample_wishart_correlation(spec, root.child(1), size=RANK_DRAWS)
        zeros = zero_eigenvalue_counts(mats)
        values, counts = np.unique(zeros, return_counts=True)
        summary["rank"] = {
            "draws": RANK_DRAWS,
            "expected_zero_eigenvalues": max(args.k - int(args.n), 0),
            "zero_eigenvalue_counts": {str(int(v)): int(c) for v, c in zip(values, counts)},
        }
    out = _output_dir(args)
    returns_path, summary_path = out / "simulate_returns.csv", out / "simulate_summary.json"
    write_returns(returns, returns_path, _header(args))
    write_results(summary, summary_path)
    return [returns_path, summary_path]


def _study_config(args) -> StudyConfig:
    return StudyConfig(portfolios=args.portfolios, k=args.k, weights=args.weights, a=args.a,
                       normalization=args.normalization, dt=args.dt, seed=args.seed,
                       method=args.method, weight_c=args.weight_c, scale=args.scale)


def _load_data(args):
    """Returns or prices from file, or synthetic daily returns."""
    if args.input:
        return load_returns(args.input)
    if args.prices:
        return load_prices(args.prices)
    if not args.synthetic_n > 0:
        raise UsageError("--synthetic-n must be positive")
    return synthetic_returns(args.synthetic_n, args.universe or args.k, args.t, args.seed)


def cmd_fit(args):
    try:
        config = _study_config(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = _returns_at(_load_data(args), args.dt)
    if args.input and args.dt != 1:
        raise UsageError("--dt applies to --prices or synthetic data, not to a returns file")
    res = run_fit_study(data, config)
    out = _output_dir(args)
    header = _header(args)
    centers = write_histogram(res.samples, out / "fit_histogram.csv", args.bins, (-6.0, 6.0),
                              header)[0]
    n_hat = res.fit.n_hat
    curves = [centers, dist.rescaled_pdf(n_hat, centers),
              dist.normal_pdf(res.normal.mu, res.normal.sigma, centers),
              dist.student_t_pdf(res.student_t.nu, res.student_t.mu, res.student_t.scale, centers)]
    write_table(out / "fit_model.csv", ["y", "model", "normal", "student_t"],
                zip(*(np.asarray(c).tolist() for c in curves)), header)
    write_table(out / "fit_alpha.csv", ["portfolio", "alpha"],
                enumerate(res.alphas.tolist()), header)
    write_histogram(res.alphas, out / "fit_alpha_histogram.csv", min(args.bins, max(res.alphas.size, 1)),
                    None, header)
    record = result_record(res.fit, alpha=res.alpha_mean, seed=args.seed, config=config.to_dict(),
                           extra={
                               "portfolio_count": int(res.alphas.size),
                               "fit_unit": res.fit_variable_scale,
                               "baselines": {"normal": res.normal._asdict(),
                                             "student_t": res.student_t._asdict()},
                               "command": header["config"],
                           })
    write_results(record, out / "fit.json")
    return [out / name for name in ("fit.json", "fit_histogram.csv", "fit_model.csv", "fit_alpha.csv",
                                    "fit_alpha_histogram.csv")]


def cmd_sweep(args):
    try:
        config = _study_config(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(v <= 0 for v in args.values):
        raise UsageError("sweep values must be positive")
    if args.axis in ("dt", "k") and any(not float(v).is_integer() for v in args.values):
        raise UsageError(f"{args.axis} sweep values must be integers")
    if args.axis == "dt" and args.input:
        raise UsageError("a dt sweep needs --prices or synthetic data")
    data = _load_data(args)
    values = [int(v) if args.axis in ("dt", "k") else v for v in args.values]
    rows = run_sweep(data, config, args.axis, values)
    path = _output_dir(args) / f"sweep_{args.axis}.csv"
    write_table(path, [args.axis, "alpha", "n_hat", "boundary"],
                ((v, a, n, int(b)) for v, a, n, b in rows), _header(args))
    return [path]


COMMANDS = {"pdf": cmd_pdf, "simulate": cmd_simulate, "fit": cmd_fit, "sweep": cmd_sweep}


def _join_negative_values(argv):
    # let "--range -5:5" through argparse, which would read -5:5 as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--range", "--values", "--n"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        paths = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"stochcorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"stochcorr {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, DataFormatError, ValueError) as exc:
        print(f"stochcorr {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
