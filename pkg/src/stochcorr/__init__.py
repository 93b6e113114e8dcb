"""Return distributions averaged over a Wishart ensemble of correlation matrices."""

from ._backend import BACKEND
from ._version import __version__
from .dist import (MvKDist, PortfolioKDist, bessel_k, log_bessel_k, mvk_logpdf, mvk_pdf,
                   mvk_pdf_integral, rescaled_cdf, rescaled_logpdf, rescaled_moments, rescaled_pdf)
from .ensemble import (EnsembleSpec, sample_ensemble_return, sample_mixture_return, sample_w,
                       sample_wishart_correlation)
from .errors import (DataFormatError, DivergenceError, NotPositiveDefiniteError, QuadratureError,
                     ZeroVarianceError)
from .fit import FitConfig, FitResult, fit_n_min_dist, fit_n_mle, fit_normal_mle, fit_student_t_mle
from .ingest import PriceMatrix, ReturnMatrix, compute_returns, load_prices, load_returns
from .linalg import CovarianceModel, sample_covariance
from .portfolio import PortfolioSpec, markowitz_weights, portfolio_alpha, uniform_weights
from .rng import RngStream

__all__ = [
    "BACKEND", "__version__",
    "MvKDist", "PortfolioKDist", "bessel_k", "log_bessel_k", "mvk_logpdf", "mvk_pdf",
    "mvk_pdf_integral", "rescaled_cdf", "rescaled_logpdf", "rescaled_moments", "rescaled_pdf",
    "EnsembleSpec", "sample_ensemble_return", "sample_mixture_return", "sample_w",
    "sample_wishart_correlation",
    "DataFormatError", "DivergenceError", "NotPositiveDefiniteError", "QuadratureError",
    "ZeroVarianceError",
    "FitConfig", "FitResult", "fit_n_min_dist", "fit_n_mle", "fit_normal_mle", "fit_student_t_mle",
    "PriceMatrix", "ReturnMatrix", "compute_returns", "load_prices", "load_returns",
    "CovarianceModel", "sample_covariance",
    "PortfolioSpec", "markowitz_weights", "portfolio_alpha", "uniform_weights",
    "RngStream",
]
