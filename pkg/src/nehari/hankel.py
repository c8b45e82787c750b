"""Truncated block Hankel and Toeplitz matrices of a matrix symbol.

For a band-limited symbol the Hankel operator is finite rank, so the degree-N
truncation with ``N >= |lo|`` carries its norm and Schmidt data exactly.
Dense SVD throughout; the target sizes are desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError
from .symbol import MatrixSymbol

#: Relative width of the top singular-value cluster counted as one level.
DEFAULT_MULT_TOL = 1e-8

#: Absolute singular-value threshold for approximate Toeplitz kernels
#: (inputs are assumed normalized to about unit norm).
DEFAULT_KERNEL_TOL = 1e-8


@dataclass
class TruncatedHankel:
    """Degree-N truncation with block ``(j, k) = S_hat(-j-k-1)``."""

    symbol: MatrixSymbol
    degree: int
    matrix: np.ndarray

    @classmethod
    def build(cls, s: MatrixSymbol, degree: int) -> "TruncatedHankel":
        if degree < 1:
            raise ConfigurationError("Hankel degree must be >= 1")
        m, n = s.rows, s.cols
        mat = np.zeros((degree * m, degree * n), dtype=complex)
        for j in range(degree):
            for k in range(degree):
                c = s.coeff(-j - k - 1)
                if c.any():
                    mat[j * m : (j + 1) * m, k * n : (k + 1) * n] = c
        return cls(symbol=s, degree=degree, matrix=mat)


@dataclass
class TruncatedToeplitz:
    """Degree-N truncation with block ``(j, k) = S_hat(j-k)``."""

    symbol: MatrixSymbol
    degree: int
    matrix: np.ndarray

    @classmethod
    def build(cls, s: MatrixSymbol, degree: int) -> "TruncatedToeplitz":
        if degree < 1:
            raise ConfigurationError("Toeplitz degree must be >= 1")
        m, n = s.rows, s.cols
        mat = np.zeros((degree * m, degree * n), dtype=complex)
        for j in range(degree):
            for k in range(degree):
                c = s.coeff(j - k)
                if c.any():
                    mat[j * m : (j + 1) * m, k * n : (k + 1) * n] = c
        return cls(symbol=s, degree=degree, matrix=mat)


@dataclass
class SchmidtPair:
    """Maximizing-vector pair of a Hankel operator.

    ``f`` is an analytic column with ``||H f||_2 = norm * ||f||_2``;
    ``g = norm**-1 * conj(z) * conj(H f)`` is analytic by construction and
    maximizes the Hankel operator of the transposed symbol.
    """

    f: MatrixSymbol
    g: MatrixSymbol
    norm: float
    multiplicity: int


def _column_to_symbol(vec: np.ndarray, degree: int, n: int) -> MatrixSymbol:
    cols = vec.reshape(degree, n, 1)
    return MatrixSymbol(0, cols).trim(1e-14)


def _required_degree(s: MatrixSymbol) -> int:
    return max(1, -s.lo)


def hankel_norm_and_schmidt(
    s: MatrixSymbol,
    degree: int | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
):
    """Hankel norm, top Schmidt pair and top-cluster multiplicity.

    Returns ``(norm, pair, multiplicity)``; an analytic symbol has a zero
    Hankel operator and yields ``(0.0, None, 0)``.
    """
    if s.is_empty or s.part("antianalytic").is_zero(1e-300):
        return 0.0, None, 0
    if degree is None:
        degree = _required_degree(s)
    if degree < _required_degree(s):
        raise ConfigurationError(
            f"degree {degree} < |lo| = {-s.lo}; the truncation would drop Hankel data"
        )
    h = TruncatedHankel.build(s, degree)
    u, sv, vh = np.linalg.svd(h.matrix)
    norm = float(sv[0])
    if norm == 0.0:
        return 0.0, None, 0
    multiplicity = int(np.count_nonzero(sv >= norm * (1.0 - mult_tol)))
    f = _column_to_symbol(vh[0].conj(), degree, s.cols)
    hf = h.matrix @ vh[0].conj()
    # stack of coefficients at z^-1, z^-2, ... -> antianalytic symbol
    blocks = hf.reshape(degree, s.rows, 1)
    anti = MatrixSymbol(-degree, blocks[::-1]).trim(1e-14)
    g = (anti.conj().shifted(-1) * (1.0 / norm)).trim(1e-14)
    pair = SchmidtPair(f=f, g=g, norm=norm, multiplicity=multiplicity)
    return norm, pair, multiplicity


def maximizing_subspace(
    s: MatrixSymbol,
    degree: int | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
) -> list[MatrixSymbol]:
    """Orthonormal basis of the top singular subspace, as analytic columns."""
    norm, pair, multiplicity = hankel_norm_and_schmidt(s, degree, mult_tol)
    if norm == 0.0:
        raise DegenerateInputError("zero Hankel operator has no maximizing vectors")
    if degree is None:
        degree = _required_degree(s)
    h = TruncatedHankel.build(s, degree)
    _, sv, vh = np.linalg.svd(h.matrix)
    basis = []
    for i in range(multiplicity):
        basis.append(_column_to_symbol(vh[i].conj(), degree, s.cols))
    return basis


def toeplitz_kernel(
    s: MatrixSymbol,
    candidate_degree: int,
    check_degree: int | None = None,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
) -> list[MatrixSymbol]:
    """Approximate kernel of the Toeplitz operator among low-degree polynomials.

    Finds an orthonormal (coefficient inner product) basis of analytic columns
    ``f`` of degree <= candidate_degree whose products ``S f`` have vanishing
    analytic coefficients up to ``check_degree``.  With
    ``check_degree >= candidate_degree + s.hi`` the window covers the whole
    analytic band of ``S f``, so membership is certified, not guessed.  The
    degree bound is a search parameter: an empty result never proves the true
    kernel trivial.
    """
    if candidate_degree < 0:
        raise ConfigurationError("candidate degree must be >= 0")
    full_window = candidate_degree + max(s.hi, 0)
    if check_degree is None:
        check_degree = full_window
    if check_degree < full_window:
        raise ConfigurationError(
            f"check degree {check_degree} < candidate_degree + hi = {full_window}"
        )
    m, n = s.rows, s.cols
    d1 = candidate_degree + 1
    rows = (check_degree + 1) * m
    mat = np.zeros((rows, d1 * n), dtype=complex)
    for a in range(check_degree + 1):
        for k in range(d1):
            c = s.coeff(a - k)
            if c.any():
                mat[a * m : (a + 1) * m, k * n : (k + 1) * n] = c
    _, sv, vh = np.linalg.svd(mat)
    sv = np.concatenate([sv, np.zeros(d1 * n - sv.size)])
    basis = []
    for i in range(d1 * n):
        if sv[i] < kernel_tol:
            basis.append(_column_to_symbol(vh[i].conj(), d1, n))
    return basis


def essential_norm_estimate(s: MatrixSymbol) -> float:
    """Essential norm of the Hankel operator of a band-limited symbol.

    Finite band means finite rank, hence compact, hence essential norm zero.
    Kept as an explicit gate so admissibility (essential norm below every
    nonzero superoptimal singular value) is tested rather than assumed.
    """
    return 0.0
