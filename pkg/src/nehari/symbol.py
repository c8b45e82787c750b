"""Matrix trigonometric polynomials on the unit circle.

A symbol is a finite Laurent series ``S(z) = sum_{k=lo..hi} C_k z^k`` with
dense complex matrix coefficients.  Everything downstream (Hankel/Toeplitz
truncations, factorizations) is built on top of exact coefficient arithmetic
here; grids only enter for pointwise evaluation, norms and band-fitting.

Keeping symbols band-limited makes every Hankel operator finite rank, so the
essential Hankel norm vanishes and the admissibility hypotheses of the
approximation theory hold automatically.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigurationError, SymbolFormatError

DEFAULT_GRID_SIZE = 1024

#: Environment variable capping worker threads for per-grid-point work.
THREADS_ENV = "SUPEROPT_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class CircleGrid:
    """Uniform sampling ``zeta_t = exp(2*pi*i*t/size)`` of the unit circle.

    ``size`` must be a power of two, and large enough for any symbol that is
    evaluated on it: ``size >= 2*(hi - lo) + 2`` guarantees the stored band is
    alias-free.
    """

    def __init__(self, size: int):
        size = int(size)
        if size < 2 or size & (size - 1):
            raise ConfigurationError(f"grid size must be a power of two >= 2, got {size}")
        self.size = size
        self.theta = 2.0 * np.pi * np.arange(size) / size
        self.points = np.exp(1j * self.theta)
        self.theta.setflags(write=False)
        self.points.setflags(write=False)

    @classmethod
    def for_symbol(cls, s: "MatrixSymbol", min_size: int = DEFAULT_GRID_SIZE) -> "CircleGrid":
        """Smallest admissible power-of-two grid, at least ``min_size``."""
        need = 2 * (s.hi - s.lo) + 2
        size = 2
        while size < max(min_size, need):
            size *= 2
        return cls(size)

    def admits(self, s: "MatrixSymbol") -> bool:
        return self.size >= 2 * (s.hi - s.lo) + 2

    def require(self, s: "MatrixSymbol") -> None:
        if not self.admits(s):
            raise ConfigurationError(
                f"grid size {self.size} aliases band [{s.lo}, {s.hi}]; "
                f"need at least {2 * (s.hi - s.lo) + 2} points"
            )

    def refined(self) -> "CircleGrid":
        return CircleGrid(2 * self.size)

    def __repr__(self):
        return f"CircleGrid(size={self.size})"


class MatrixSymbol:
    """Matrix Laurent polynomial with band ``[lo, hi]``.

    ``coeffs[k - lo]`` is the ``rows x cols`` coefficient of ``z**k``.  Values
    are immutable after construction; all operations return new symbols.
    """

    __slots__ = ("lo", "coeffs")

    def __init__(self, lo: int, coeffs):
        arr = np.array(coeffs, dtype=complex, copy=True)
        if arr.ndim != 3:
            raise ValueError(f"coeffs must have shape (terms, rows, cols), got {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("a symbol stores at least one coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "lo", int(lo))
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("MatrixSymbol is immutable")

    # -- shape and band -----------------------------------------------------

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[2]

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.shape[0] - 1

    @property
    def band(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def is_empty(self) -> bool:
        return self.rows == 0 or self.cols == 0

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "MatrixSymbol":
        return cls(0, np.zeros((1, rows, cols), dtype=complex))

    @classmethod
    def constant(cls, mat) -> "MatrixSymbol":
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        return cls(0, mat[None, :, :])

    @classmethod
    def identity(cls, n: int) -> "MatrixSymbol":
        return cls.constant(np.eye(n, dtype=complex))

    @classmethod
    def monomial(cls, k: int, mat) -> "MatrixSymbol":
        """``mat * z**k``; a scalar ``mat`` gives a 1x1 symbol."""
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        return cls(k, mat[None, :, :])

    @classmethod
    def scalar(cls, terms: dict[int, complex]) -> "MatrixSymbol":
        """1x1 symbol from ``{power: coefficient}``."""
        if not terms:
            return cls.zeros(1, 1)
        lo, hi = min(terms), max(terms)
        arr = np.zeros((hi - lo + 1, 1, 1), dtype=complex)
        for k, c in terms.items():
            arr[k - lo, 0, 0] = c
        return cls(lo, arr)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: dict) -> "MatrixSymbol":
        """Assemble from scalar symbols placed at ``{(i, j): scalar_symbol}``."""
        if not entries:
            return cls.zeros(rows, cols)
        lo = min(s.lo for s in entries.values())
        hi = max(s.hi for s in entries.values())
        arr = np.zeros((hi - lo + 1, rows, cols), dtype=complex)
        for (i, j), s in entries.items():
            if s.rows != 1 or s.cols != 1:
                raise ValueError("entries must be 1x1 symbols")
            arr[s.lo - lo : s.hi - lo + 1, i, j] += s.coeffs[:, 0, 0]
        return cls(lo, arr)

    # -- coefficient access ---------------------------------------------------

    def coeff(self, k: int) -> np.ndarray:
        """Coefficient of ``z**k`` (zeros outside the stored band)."""
        if self.lo <= k <= self.hi:
            return np.array(self.coeffs[k - self.lo])
        return np.zeros((self.rows, self.cols), dtype=complex)

    def coeff_l2(self) -> float:
        """Frobenius norm over all coefficients (the H^2-type norm for columns)."""
        return float(np.linalg.norm(self.coeffs))

    def part(self, which: str) -> "MatrixSymbol":
        """Analytic (k >= 0) or antianalytic (k < 0) part; they sum to self."""
        if which not in ("analytic", "antianalytic"):
            raise ValueError("part must be 'analytic' or 'antianalytic'")
        keep = np.arange(self.lo, self.hi + 1) >= 0
        if which == "antianalytic":
            keep = ~keep
        arr = np.where(keep[:, None, None], self.coeffs, 0.0)
        return MatrixSymbol(self.lo, arr).trim()

    def antianalytic_energy(self) -> float:
        if self.lo >= 0:
            return 0.0
        cut = min(-self.lo, self.coeffs.shape[0])
        return float(np.linalg.norm(self.coeffs[:cut]))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    # -- algebra --------------------------------------------------------------

    def _binary(self, other: "MatrixSymbol", op) -> "MatrixSymbol":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}")
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        arr = np.zeros((hi - lo + 1, self.rows, self.cols), dtype=complex)
        arr[self.lo - lo : self.hi - lo + 1] += self.coeffs
        arr[other.lo - lo : other.hi - lo + 1] += op * other.coeffs
        return MatrixSymbol(lo, arr)

    def __add__(self, other):
        return self._binary(other, +1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __neg__(self):
        return MatrixSymbol(self.lo, -self.coeffs)

    def __mul__(self, scalar):
        return MatrixSymbol(self.lo, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        """Exact Laurent convolution; bands add."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        la, lb = self.coeffs.shape[0], other.coeffs.shape[0]
        out = np.zeros((la + lb - 1, self.rows, other.cols), dtype=complex)
        for p in range(la):
            # one block row of the convolution at a time
            out[p : p + lb] += np.einsum("ij,kjl->kil", self.coeffs[p], other.coeffs)
        return MatrixSymbol(self.lo + other.lo, out)

    def conj(self) -> "MatrixSymbol":
        """Complex conjugate: entries conjugated, powers negated."""
        return MatrixSymbol(-self.hi, np.conj(self.coeffs[::-1]))

    def transpose(self) -> "MatrixSymbol":
        return MatrixSymbol(self.lo, np.transpose(self.coeffs, (0, 2, 1)))

    def adjoint(self) -> "MatrixSymbol":
        """Pointwise conjugate transpose: ``(S*)(z) = S(z)^H`` on the circle."""
        return self.conj().transpose()

    def shifted(self, m: int) -> "MatrixSymbol":
        """Multiply by ``z**m``."""
        return MatrixSymbol(self.lo + m, self.coeffs)

    def submatrix(self, row_idx, col_idx) -> "MatrixSymbol":
        arr = self.coeffs[:, row_idx, :][:, :, col_idx]
        return MatrixSymbol(self.lo, arr)

    def trim(self, tol: float = 0.0) -> "MatrixSymbol":
        """Drop leading/trailing coefficients with norm <= tol * max-coeff-norm."""
        if self.is_empty:
            return self
        norms = np.linalg.norm(self.coeffs, axis=(1, 2))
        scale = float(norms.max())
        if scale == 0.0:
            return MatrixSymbol.zeros(self.rows, self.cols)
        keep = norms > tol * scale
        idx = np.nonzero(keep)[0]
        if idx.size == 0:
            return MatrixSymbol.zeros(self.rows, self.cols)
        a, b = int(idx[0]), int(idx[-1])
        return MatrixSymbol(self.lo + a, self.coeffs[a : b + 1])

    def __repr__(self):
        return f"MatrixSymbol({self.rows}x{self.cols}, band=[{self.lo}, {self.hi}])"


# -- free-function operation aliases -------------------------------------------


def multiply(a: MatrixSymbol, b: MatrixSymbol) -> MatrixSymbol:
    """Exact product; result band is ``[a.lo + b.lo, a.hi + b.hi]``."""
    return a @ b


def adjoint_symbol(s: MatrixSymbol) -> MatrixSymbol:
    return s.adjoint()


def transpose_symbol(s: MatrixSymbol) -> MatrixSymbol:
    return s.transpose()


def conj_symbol(s: MatrixSymbol) -> MatrixSymbol:
    return s.conj()


# -- block assembly -----------------------------------------------------------


def _placed(symbols, rows, cols, offsets):
    los = [s.lo for s in symbols if not s.is_empty]
    his = [s.hi for s in symbols if not s.is_empty]
    lo, hi = (min(los), max(his)) if los else (0, 0)
    arr = np.zeros((hi - lo + 1, rows, cols), dtype=complex)
    for s, (r0, c0) in zip(symbols, offsets):
        if s.is_empty:
            continue
        arr[s.lo - lo : s.hi - lo + 1, r0 : r0 + s.rows, c0 : c0 + s.cols] += s.coeffs
    return MatrixSymbol(lo, arr)


def hcat(*symbols: MatrixSymbol) -> MatrixSymbol:
    symbols = [s for s in symbols if s.cols > 0]
    if not symbols:
        raise ValueError("hcat needs at least one nonempty symbol")
    rows = symbols[0].rows
    if any(s.rows != rows for s in symbols):
        raise ValueError("hcat requires equal row counts")
    offsets, c = [], 0
    for s in symbols:
        offsets.append((0, c))
        c += s.cols
    return _placed(symbols, rows, c, offsets)


def vcat(*symbols: MatrixSymbol) -> MatrixSymbol:
    return hcat(*[s.transpose() for s in symbols]).transpose()


def block_diag(*symbols: MatrixSymbol) -> MatrixSymbol:
    symbols = [s for s in symbols if not s.is_empty]
    if not symbols:
        raise ValueError("block_diag needs at least one nonempty symbol")
    rows = sum(s.rows for s in symbols)
    cols = sum(s.cols for s in symbols)
    offsets, r, c = [], 0, 0
    for s in symbols:
        offsets.append((r, c))
        r += s.rows
        c += s.cols
    return _placed(symbols, rows, cols, offsets)


# -- evaluation, fitting and grid norms ----------------------------------------


def evaluate(s: MatrixSymbol, grid: CircleGrid) -> np.ndarray:
    """Values ``S(zeta_t)``, shape ``(grid.size, rows, cols)``.

    Exact for the stored band (the grid admission invariant rules out index
    collisions mod grid size), computed with one inverse FFT per entry.
    """
    grid.require(s)
    buf = np.zeros((grid.size, s.rows, s.cols), dtype=complex)
    for idx in range(s.coeffs.shape[0]):
        buf[(s.lo + idx) % grid.size] = s.coeffs[idx]
    return np.fft.ifft(buf, axis=0) * grid.size


def fit_from_samples(values, grid: CircleGrid, band=None, trim_tol: float = 1e-13):
    """Least-squares band fit of grid samples back to a symbol.

    The DFT of the samples gives coefficients on the full representable band
    ``[-size/2 + 1, size/2]``; ``band`` restricts to a requested window.
    Returns ``(symbol, tail_energy)`` where the tail is the l2 mass outside
    the requested band — nonzero tails flag non-polynomial content honestly.
    """
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None, None]
    n = grid.size
    c = np.fft.fft(values, axis=0) / n
    total = float(np.linalg.norm(c))
    if band is None:
        band = (-n // 2 + 1, n // 2)
    lo, hi = int(band[0]), int(band[1])
    if hi - lo + 1 > n:
        raise ConfigurationError(f"band [{lo}, {hi}] exceeds grid resolution {n}")
    arr = np.empty((hi - lo + 1, values.shape[1], values.shape[2]), dtype=complex)
    for k in range(lo, hi + 1):
        arr[k - lo] = c[k % n]
    kept = float(np.linalg.norm(arr))
    tail = float(np.sqrt(max(total**2 - kept**2, 0.0)))
    return MatrixSymbol(lo, arr).trim(trim_tol), tail


def _batched_svdvals(vals: np.ndarray) -> np.ndarray:
    workers = worker_count()
    if workers <= 1 or vals.shape[0] < 4 * workers:
        return np.linalg.svd(vals, compute_uv=False)
    chunks = np.array_split(vals, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda a: np.linalg.svd(a, compute_uv=False), chunks))
    return np.concatenate(parts, axis=0)


def linf_norm(s: MatrixSymbol, grid: CircleGrid | None = None) -> float:
    """Max over the grid of the spectral norm of ``S(zeta_t)``.

    A lower bound on the essential sup, exact in the grid limit for the
    polynomial symbols stored here.
    """
    if s.is_empty:
        return 0.0
    if grid is None:
        grid = CircleGrid.for_symbol(s)
    vals = evaluate(s, grid)
    if s.rows == 1 and s.cols == 1:
        return float(np.abs(vals[:, 0, 0]).max())
    return float(_batched_svdvals(vals).max())


def pointwise_svd(s: MatrixSymbol, grid: CircleGrid):
    """Per-point SVD ``S(zeta_t) = U_t diag(s_t) Vh_t``.

    Returns ``(svals, U, Vh)`` with shapes ``(T, k)``, ``(T, rows, k)``,
    ``(T, k, cols)``; singular values descend, right Schmidt vectors are the
    conjugated rows of ``Vh``.
    """
    vals = evaluate(s, grid)
    u, sv, vh = np.linalg.svd(vals, full_matrices=False)
    return sv, u, vh


# -- textual symbol format ------------------------------------------------------


def symbol_to_dict(s: MatrixSymbol) -> dict:
    terms = []
    for idx in range(s.coeffs.shape[0]):
        k = s.lo + idx
        mat = s.coeffs[idx]
        for i in range(s.rows):
            for j in range(s.cols):
                v = mat[i, j]
                if v != 0:
                    terms.append({"k": k, "i": i, "j": j, "re": float(v.real), "im": float(v.imag)})
    terms.sort(key=lambda t: (t["k"], t["i"], t["j"]))
    return {"rows": s.rows, "cols": s.cols, "terms": terms}


def symbol_from_dict(d: dict) -> MatrixSymbol:
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        terms = d["terms"]
    except (KeyError, TypeError) as exc:
        raise SymbolFormatError(f"missing or malformed field: {exc}") from exc
    if rows < 1 or cols < 1:
        raise SymbolFormatError(f"rows/cols must be positive, got {rows}x{cols}")
    seen = set()
    entries = []
    for pos, t in enumerate(terms):
        try:
            k, i, j = int(t["k"]), int(t["i"]), int(t["j"])
            v = complex(float(t["re"]), float(t["im"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SymbolFormatError(f"term #{pos}: {exc}") from exc
        if not (0 <= i < rows and 0 <= j < cols):
            raise SymbolFormatError(f"term #{pos}: entry ({i}, {j}) outside {rows}x{cols}")
        if (k, i, j) in seen:
            raise SymbolFormatError(f"term #{pos}: duplicate key (k={k}, i={i}, j={j})")
        seen.add((k, i, j))
        entries.append((k, i, j, v))
    if not entries:
        return MatrixSymbol.zeros(rows, cols)
    lo = min(e[0] for e in entries)
    hi = max(e[0] for e in entries)
    arr = np.zeros((hi - lo + 1, rows, cols), dtype=complex)
    for k, i, j, v in entries:
        arr[k - lo, i, j] = v
    return MatrixSymbol(lo, arr)


def dumps_symbol(s: MatrixSymbol) -> str:
    return json.dumps(symbol_to_dict(s), sort_keys=True, indent=2) + "\n"


def loads_symbol(text: str) -> MatrixSymbol:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SymbolFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return symbol_from_dict(d)


def save_symbol(s: MatrixSymbol, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_symbol(s))


def load_symbol(path) -> MatrixSymbol:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_symbol(fh.read())
