"""Scalar Hardy-space toolkit.

Riesz projections, grid-based Szego outer factorization, winding numbers and
the inner-outer factorization of analytic column functions.  These scalar
primitives drive the thematic recursion: a Schmidt vector f factors as
``f = theta * h * v`` with theta a scalar inner function, h scalar outer and
v an inner, co-outer column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CannotDetermineError, DegenerateInputError, FactorizationError
from .symbol import CircleGrid, MatrixSymbol, evaluate, fit_from_samples

#: Modulus floor for logarithms; near-zeros are flagged, not smoothed away.
DEFAULT_FLOOR = 1e-9

#: Fraction of floored grid points above which a factorization is flagged.
ILL_CONDITIONED_FRACTION = 0.10

MAX_WINDING_GRID = 1 << 20


def riesz_project(s: MatrixSymbol, part: str) -> MatrixSymbol:
    """Analytic (k >= 0) or antianalytic (k < 0) Riesz projection."""
    return s.part(part)


@dataclass
class ScalarFactorization:
    """Inner/outer split of a scalar symbol on a grid.

    ``inner`` is unimodular on the grid, ``outer`` analytic with the modulus of
    the original; ``inner @ outer`` reproduces the input up to the recorded
    reconstruction residual.  ``metadata`` carries floor statistics and band-fit
    tail energies.
    """

    inner: MatrixSymbol
    outer: MatrixSymbol
    degree: int
    metadata: dict = field(default_factory=dict)


def outer_values_from_modulus(modulus, grid: CircleGrid, floor: float = DEFAULT_FLOOR):
    """Szego outer function with prescribed modulus, sampled on the grid.

    Computes ``exp(P_+ log|s|)`` by folding the FFT of ``log|s|`` onto the
    analytic side (conjugate-function construction).  Returns the sample
    values plus floor statistics; the modulus match ``|outer| = |s|`` is exact
    at the nodes except where the floor was applied.
    """
    modulus = np.asarray(modulus, dtype=float)
    n = grid.size
    if modulus.shape != (n,):
        raise ValueError(f"modulus must have shape ({n},)")
    if not np.any(modulus > floor):
        raise DegenerateInputError("modulus is identically zero (below floor)")
    floored = modulus < floor
    logmod = np.log(np.maximum(modulus, floor))
    c = np.fft.fft(logmod) / n
    spectrum = np.zeros(n, dtype=complex)
    spectrum[0] = c[0]
    spectrum[1 : n // 2] = 2.0 * c[1 : n // 2]
    spectrum[n // 2] = c[n // 2]
    analytic_log = np.fft.ifft(spectrum) * n
    values = np.exp(analytic_log)
    meta = {
        "floored_fraction": float(np.count_nonzero(floored) / n),
        "ill_conditioned": bool(np.count_nonzero(floored) / n > ILL_CONDITIONED_FRACTION),
    }
    return values, meta


def outer_factor(s: MatrixSymbol, g: CircleGrid, floor: float = DEFAULT_FLOOR) -> ScalarFactorization:
    """Inner/outer factorization of a scalar symbol on a grid.

    The outer part comes from the Szego construction on ``log|s|``; the inner
    part is the sampled quotient ``s / outer`` band-fit back to a symbol.
    Inner factors of polynomial data can be genuine Blaschke products, so the
    fit's tail energy is reported rather than hidden.
    """
    if s.rows != 1 or s.cols != 1:
        raise ValueError("outer_factor expects a scalar (1x1) symbol")
    if s.is_zero():
        raise DegenerateInputError("cannot factor the zero symbol")
    vals = evaluate(s, g)[:, 0, 0]
    outer_vals, meta = outer_values_from_modulus(np.abs(vals), g, floor=floor)
    outer, outer_tail = fit_from_samples(outer_vals, g, band=(0, g.size // 2))
    inner_vals = vals / outer_vals
    inner, inner_tail = fit_from_samples(inner_vals, g)
    meta["outer_tail"] = outer_tail
    meta["inner_tail"] = inner_tail
    meta["unimodularity_residual"] = float(np.abs(np.abs(inner_vals) - 1.0).max())
    recon = evaluate(inner, g)[:, 0, 0] * evaluate(outer, g)[:, 0, 0]
    meta["reconstruction_residual"] = float(np.abs(recon - vals).max())
    return ScalarFactorization(inner=inner, outer=outer, degree=outer.hi, metadata=meta)


def winding_number(s: MatrixSymbol, g: CircleGrid, nonvanish_tol: float = 1e-8) -> int:
    """Winding number of a nonvanishing scalar symbol around the origin.

    Sums argument increments along the grid and rounds; the grid is refined
    until the residual from an integer drops below 0.1.
    """
    if s.rows != 1 or s.cols != 1:
        raise ValueError("winding_number expects a scalar (1x1) symbol")
    grid = g
    while True:
        vals = evaluate(s, grid)[:, 0, 0]
        mags = np.abs(vals)
        if mags.min() <= nonvanish_tol * max(mags.max(), 1.0):
            raise CannotDetermineError(
                f"symbol nearly vanishes on the grid (min |s| = {mags.min():.3e}); "
                "winding number undefined"
            )
        increments = np.angle(np.roll(vals, -1) / vals)
        total = float(increments.sum() / (2.0 * np.pi))
        nearest = round(total)
        if abs(total - nearest) < 0.1:
            return int(nearest)
        if grid.size >= MAX_WINDING_GRID:
            raise CannotDetermineError(
                f"winding residual {abs(total - nearest):.3f} did not settle "
                f"by grid size {grid.size}"
            )
        grid = grid.refined()


# -- column inner-outer factorization ------------------------------------------


def _component_polynomials(col: MatrixSymbol, rel_tol: float = 1e-10):
    """Rows of an analytic column as coefficient vectors starting at power 0."""
    scale = max(col.coeff_l2(), 1.0)
    pad = np.zeros((max(col.lo, 0),), dtype=complex)
    comps = []
    for i in range(col.rows):
        coeffs = np.concatenate([pad, col.coeffs[:, i, 0]])
        if np.linalg.norm(coeffs) <= rel_tol * scale:
            comps.append(None)  # effectively zero component
        else:
            comps.append(coeffs)
    return comps


def _valuation(coeffs, rel_tol=1e-10) -> int:
    scale = np.abs(coeffs).max()
    nz = np.nonzero(np.abs(coeffs) > rel_tol * scale)[0]
    return int(nz[0]) if nz.size else len(coeffs)


def _inside_roots(coeffs, margin=1e-6, rel_tol=1e-10):
    """Roots strictly inside the unit disk of a polynomial given ascending coeffs."""
    scale = np.abs(coeffs).max()
    keep = np.abs(coeffs) > rel_tol * scale
    last = np.nonzero(keep)[0][-1]
    poly = coeffs[: last + 1]
    if len(poly) <= 1:
        return []
    roots = np.roots(poly[::-1])
    return [complex(r) for r in roots if abs(r) < 1.0 - margin]


def _match_common_roots(root_lists, match_tol=1e-5):
    """Greedy multiset intersection of inside-disk roots across components."""
    common = list(root_lists[0])
    for other in root_lists[1:]:
        pool = list(other)
        kept = []
        for r in common:
            if not pool:
                break
            dists = [abs(r - p) for p in pool]
            j = int(np.argmin(dists))
            if dists[j] < match_tol:
                kept.append((r + pool.pop(j)) / 2.0)
        common = kept
        if not common:
            break
    return common


def _blaschke_samples(roots, grid: CircleGrid):
    vals = np.ones(grid.size, dtype=complex)
    z = grid.points
    for a in roots:
        vals *= (z - a) / (1.0 - np.conj(a) * z)
    return vals


def column_inner_outer(f: MatrixSymbol, g: CircleGrid, tol: float = 1e-7):
    """Factor an analytic column as ``f = theta * h * v``.

    ``h`` is the scalar outer factor of ``zeta -> ||f(zeta)||``; ``theta`` the
    greatest common scalar inner factor of the components of ``f / h``
    (valuation at 0 plus matched inside-disk roots, i.e. a finite Blaschke
    product); ``v = f / (theta h)`` is checked to be pointwise unit-norm and
    analytic within ``tol``.
    """
    if f.cols != 1:
        raise ValueError("column_inner_outer expects a column (n x 1) symbol")
    if f.is_zero():
        raise DegenerateInputError("cannot factor the zero column")
    if f.antianalytic_energy() > tol * max(f.coeff_l2(), 1.0):
        raise FactorizationError(
            "input column has antianalytic energy",
            {"antianalytic_energy": f.antianalytic_energy()},
        )
    f = f.part("analytic")
    fvals = evaluate(f, g)[:, :, 0]
    norms = np.linalg.norm(fvals, axis=1)
    hvals, meta = outer_values_from_modulus(norms, g)
    h, h_tail = fit_from_samples(hvals, g, band=(0, g.size // 2))

    # common scalar inner factor of f / h, found from the coefficient data
    comps = _component_polynomials(f)
    live = [c for c in comps if c is not None]
    valuation = min(_valuation(c) for c in live)
    # strip the shared monomial before root extraction to avoid spurious 0-roots
    root_lists = [_inside_roots(c[valuation:]) for c in live]
    common = _match_common_roots(root_lists) if root_lists else []
    theta_vals = g.points**valuation * _blaschke_samples(common, g)
    theta, theta_tail = fit_from_samples(theta_vals, g, band=(0, g.size // 2))

    vvals = fvals / (theta_vals * hvals)[:, None]
    v, v_tail = fit_from_samples(vvals[:, :, None], g, band=(0, g.size // 2))

    vnorm_dev = float(np.abs(np.linalg.norm(vvals, axis=1) - 1.0).max())
    recon = theta_vals[:, None] * hvals[:, None] * evaluate(v, g)[:, :, 0]
    recon_dev = float(np.abs(recon - fvals).max())
    diagnostics = {
        "h_tail": h_tail,
        "theta_tail": theta_tail,
        "v_tail": v_tail,
        "v_norm_deviation": vnorm_dev,
        "reconstruction_residual": recon_dev,
        "valuation": valuation,
        "blaschke_roots": len(common),
        **meta,
    }
    if v_tail > tol or vnorm_dev > tol or recon_dev > tol * max(1.0, norms.max()):
        raise FactorizationError("column inner-outer factorization failed", diagnostics)
    return theta, h, v
