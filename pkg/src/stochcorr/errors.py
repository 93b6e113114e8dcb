"""Exception types raised by :mod:`stochcorr`."""

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization failed.

    ``pivot`` is the zero-based index of the leading minor that is not
    positive definite.
    """

    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (failed at pivot {pivot})")


class ZeroVarianceError(ValueError):
    """An asset return series has zero variance."""

    def __init__(self, asset_index, label=None):
        self.asset_index = asset_index
        self.label = label
        name = f" ({label})" if label is not None else ""
        super().__init__(f"asset {asset_index}{name} has zero variance")


class DivergenceError(ArithmeticError):
    """A density diverges at the requested point."""


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message if achieved is None else f"{message} (achieved error {achieved:.3g})")


class DataFormatError(ValueError):
    """Malformed input file. ``lineno`` is one-based, or None when not line specific."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        super().__init__(message if lineno is None else f"line {lineno}: {message}")
