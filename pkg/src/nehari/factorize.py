"""Balanced completions and inner factors of shift-invariant subspaces.

Two constructions live here:

* ``stacked_inner_factor`` computes the inner function generating the minimal
  shift-invariant subspace spanned by given analytic columns, via the
  wandering subspace ``M - z M`` in coefficient space (Beurling-Lax).
* ``balanced_completion`` completes an inner, co-outer ``n x r`` function
  Upsilon to a unitary-valued ``V = (Upsilon, conj(Theta))``.  Theta is built
  from the kernel of the Toeplitz operator with symbol ``Upsilon^t`` (whose
  range is exactly the missing columns), while the classical minor-based
  analytic matrix G certifies that the orthogonal complement family is
  analytic.

Outerness is not decidable from finite data, so co-outer checks are degree
bounded and reported as residuals "verified to degree D".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateInputError, FactorizationError
from .hankel import toeplitz_kernel
from .symbol import CircleGrid, MatrixSymbol, evaluate, fit_from_samples, hcat

DEFAULT_INNER_TOL = 1e-7


def associated_vector(a) -> np.ndarray:
    """Vector orthogonal to all columns of an ``(r+1) x r`` matrix.

    Component ``j`` is ``(-1)**j`` times the minor obtained by deleting row
    ``j``; Laplace expansion along an adjoined column makes ``a.T @ alpha = 0``
    an exact identity.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] + 1:
        raise ValueError(f"expected an (r+1) x r matrix, got {a.shape}")
    out = np.empty(a.shape[0], dtype=complex)
    for j in range(a.shape[0]):
        out[j] = (-1) ** j * np.linalg.det(np.delete(a, j, axis=0))
    return out


# -- scalar-symbol determinants (exact Laurent arithmetic) ---------------------


def _entry(s: MatrixSymbol, i: int, j: int) -> MatrixSymbol:
    return s.submatrix([i], [j]).trim(0.0)


def _det_scalar_matrix(rows: list[list[MatrixSymbol]]) -> MatrixSymbol:
    r = len(rows)
    acc = MatrixSymbol.zeros(1, 1)
    for perm in itertools.permutations(range(r)):
        sign = 1.0
        seen = list(perm)
        # permutation parity by counting inversions
        inv = sum(1 for i in range(r) for j in range(i + 1, r) if seen[i] > seen[j])
        sign = -1.0 if inv % 2 else 1.0
        term = MatrixSymbol.scalar({0: sign})
        for i in range(r):
            term = term @ rows[i][perm[i]]
        acc = acc + term
    return acc.trim(0.0)


def _associated_vector_symbols(rows: list[list[MatrixSymbol]]) -> list[MatrixSymbol]:
    out = []
    for j in range(len(rows)):
        minor = rows[:j] + rows[j + 1 :]
        det = _det_scalar_matrix(minor)
        out.append((det * ((-1.0) ** j)).trim(0.0))
    return out


# -- minimal shift-invariant subspaces -----------------------------------------


def _canonical_phase(coeffs: np.ndarray) -> np.ndarray:
    flat = coeffs.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    pivot = flat[k]
    if abs(pivot) == 0.0:
        return coeffs
    return coeffs * (abs(pivot) / pivot)

def _shift_matrix(columns, depth, length):
    """Coefficient vectors of z^k * c_i for 0 <= k <= depth, as matrix columns."""
    n = columns[0].rows
    cols = []
    for c in columns:
        base = np.zeros((length, n), dtype=complex)
        base[c.lo : c.hi + 1] = c.coeffs[:, :, 0]
        for k in range(depth + 1):
            shifted = np.zeros_like(base)
            shifted[k:] = base[: length - k]
            cols.append(shifted.reshape(-1))
    return np.array(cols).T


def _orth(mat: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    rank = int(np.count_nonzero(sv > rel_tol * sv[0]))
    return u[:, :rank]


def stacked_inner_factor(
    columns: list[MatrixSymbol],
    shift_depth: int | None = None,
    inner_tol: float = 1e-8,
    residual_tol: float = 1e-6,
) -> MatrixSymbol:
    """Inner factor of the minimal shift-invariant subspace of given columns.

    Stacks coefficient vectors of ``z^k c_i`` and extracts an orthonormal
    basis of the wandering subspace ``M - zM``; its members, read back as
    analytic columns, form the inner function whose multiples exhaust the
    subspace.  Validated by pointwise isometry and by projecting each input
    column back onto the computed range.
    """
    columns = [c.part("analytic").trim(1e-14) for c in columns]
    columns = [c for c in columns if not c.is_zero(1e-300)]
    if not columns:
        raise DegenerateInputError("no nonzero analytic columns given")
    n = columns[0].rows
    if any(c.rows != n or c.cols != 1 for c in columns):
        raise ValueError("columns must share the same height and be n x 1")
    max_deg = max(c.hi for c in columns)
    depth = shift_depth if shift_depth is not None else max_deg + 4

    last_diag = {}
    for attempt in range(6):
        length = depth + max_deg + 1
        full = _shift_matrix(columns, depth, length)
        s_count = len(columns)
        shifted_idx = [i * (depth + 1) + k for i in range(s_count) for k in range(1, depth + 1)]
        q_m = _orth(full)
        q_b = _orth(full[:, shifted_idx])
        wander = q_m - q_b @ (q_b.conj().T @ q_m)
        u, sv, _ = np.linalg.svd(wander, full_matrices=False)
        d = int(np.count_nonzero(sv > 0.5))
        if d == 0:
            raise DegenerateInputError("wandering subspace is empty")
        basis = [
            MatrixSymbol(0, _canonical_phase(u[:, i].reshape(length, n, 1))).trim(1e-12)
            for i in range(d)
        ]
        upsilon = hcat(*basis)

        grid = CircleGrid.for_symbol(upsilon, 256)
        vals = evaluate(upsilon, grid)
        gram = np.einsum("tji,tjk->tik", vals.conj(), vals)
        inner_dev = float(np.abs(gram - np.eye(d)).max())

        stack_vals = evaluate(hcat(*columns), CircleGrid.for_symbol(hcat(*columns), 256))
        sv_cols = np.linalg.svd(stack_vals, compute_uv=False)
        lead = sv_cols[:, 0].max()
        ranks = (sv_cols > 1e-8 * max(lead, 1e-300)).sum(axis=1)
        rank_mode = int(np.bincount(ranks).argmax())
        rank_frac = float((ranks == rank_mode).mean())

        proj_dev = 0.0
        for c in columns:
            cvals = evaluate(c, grid)[:, :, 0]
            p_vals = np.einsum("tji,tj->ti", vals.conj(), cvals)
            p, _ = fit_from_samples(p_vals[:, :, None], grid, band=(0, grid.size // 2))
            resid = (upsilon @ p - c).coeff_l2() / max(c.coeff_l2(), 1e-300)
            proj_dev = max(proj_dev, resid)

        last_diag = {
            "inner_deviation": inner_dev,
            "rank_constant_fraction": rank_frac,
            "pointwise_rank": rank_mode,
            "wandering_dimension": d,
            "projection_residual": proj_dev,
            "shift_depth": depth,
        }
        if rank_frac < 0.99:
            raise DegenerateInputError(
                f"pointwise rank is not a.e. constant (constant on {rank_frac:.1%} of points)"
            )
        if inner_dev <= max(inner_tol, 1e-8) and proj_dev <= residual_tol and rank_mode == d:
            return upsilon
        depth *= 2

    raise FactorizationError("inner factor of stacked columns did not converge", last_diag)


def transpose_outer_residual(u: MatrixSymbol, degree: int) -> float:
    """Degree-bounded co-outer test for an analytic ``n x d`` function.

    ``u`` is co-outer when ``u^t`` is outer, i.e. polynomial multiples of
    ``u^t`` are dense.  At degree ``D`` we check that the constant targets are
    reachable: max over unit constants of the least-squares residual of
    ``u^t q = e_i`` over polynomials ``q`` of degree <= D.  A small value
    verifies outerness "to degree D" only.
    """
    u = u.part("analytic")
    n, d = u.rows, u.cols
    out_deg = degree + max(u.hi, 0)
    mat = np.zeros(((out_deg + 1) * d, (degree + 1) * n), dtype=complex)
    ut = u.transpose()
    for a in range(out_deg + 1):
        for k in range(degree + 1):
            c = ut.coeff(a - k)
            if c.any():
                mat[a * d : (a + 1) * d, k * n : (k + 1) * n] = c
    resid = 0.0
    for i in range(d):
        target = np.zeros((out_deg + 1) * d, dtype=complex)
        target[i] = 1.0
        sol, *_ = np.linalg.lstsq(mat, target, rcond=None)
        resid = max(resid, float(np.linalg.norm(mat @ sol - target)))
    return resid


# -- balanced completion ---------------------------------------------------------


@dataclass
class BalancedCompletion:
    """Unitary-valued completion ``V = (Upsilon, conj(Theta))`` with diagnostics."""

    upsilon: MatrixSymbol
    theta: MatrixSymbol
    V: MatrixSymbol
    diagnostics: dict = field(default_factory=dict)


def _pivot_rows(upsilon: MatrixSymbol, grid: CircleGrid, r: int) -> list[int]:
    """Row subset with a well-conditioned r x r minor, via column-pivoted QR."""
    vals = evaluate(upsilon, grid)
    idx = np.linspace(0, grid.size, num=8, endpoint=False, dtype=int)
    sample = np.concatenate([vals[t] for t in idx], axis=1)  # n x (8 r)
    _, _, piv = scipy.linalg.qr(sample.conj().T, pivoting=True, mode="economic")
    return sorted(int(p) for p in piv[:r])


def _minor_certificate(upsilon: MatrixSymbol, pivots: list[int], grid: CircleGrid):
    """Minor-based analytic matrix G with Upsilon^t G = 0 (exact arithmetic)."""
    n, r = upsilon.rows, upsilon.cols
    non_pivots = [k for k in range(n) if k not in pivots]
    entries = {}
    for col, k in enumerate(non_pivots):
        rows = [[_entry(upsilon, p, c) for c in range(r)] for p in pivots]
        rows.append([_entry(upsilon, k, c) for c in range(r)])
        alpha = _associated_vector_symbols(rows)
        for m, p in enumerate(pivots):
            entries[(p, col)] = alpha[m]
        entries[(k, col)] = alpha[r]
    g_sym = MatrixSymbol.from_entries(n, len(non_pivots), entries)
    resid = (upsilon.transpose() @ g_sym).trim(0.0).coeff_l2()
    scale = max(g_sym.coeff_l2(), 1e-300)
    return g_sym, float(resid / scale)


def balanced_completion(
    upsilon: MatrixSymbol,
    g: CircleGrid,
    kernel_degree: int | None = None,
    inner_tol: float = DEFAULT_INNER_TOL,
    unitarity_tol: float = DEFAULT_INNER_TOL,
) -> BalancedCompletion:
    """Complete an inner, co-outer ``n x r`` function to a unitary-valued one.

    Theta spans the kernel of the Toeplitz operator with symbol
    ``Upsilon^t`` — an exact description of the missing columns — and is
    extracted as the inner factor of low-degree kernel vectors.  The minor
    matrix G is computed alongside as an analyticity certificate for the
    complement family, and pivot rows are chosen by column-pivoted QR so the
    defining minor is numerically nonsingular.
    """
    n, r = upsilon.rows, upsilon.cols
    if n <= r:
        raise DegenerateInputError(f"nothing to complete: {n} rows, {r} columns")
    upsilon = upsilon.part("analytic").trim(1e-14)
    vals = evaluate(upsilon, g)
    gram = np.einsum("tji,tjk->tik", vals.conj(), vals)
    inner_dev = float(np.abs(gram - np.eye(r)).max())
    if inner_dev > inner_tol:
        raise FactorizationError(
            "input is not inner on the grid", {"inner_deviation": inner_dev}
        )

    pivots = _pivot_rows(upsilon, g, r)
    g_sym, g_resid = _minor_certificate(upsilon, pivots, g)

    deg = max(upsilon.hi, 0)
    d_search = kernel_degree if kernel_degree is not None else r * deg + 2
    theta = None
    diag_extra = {}
    for attempt in range(2):
        kernel = toeplitz_kernel(upsilon.transpose(), candidate_degree=d_search)
        if kernel:
            theta = stacked_inner_factor(kernel)
            if theta.cols == n - r:
                break
        d_search = 2 * d_search + 2
        theta = None
    if theta is None:
        raise FactorizationError(
            "could not span the orthogonal complement from the Toeplitz kernel",
            {"kernel_degree": d_search, "g_residual": g_resid},
        )

    v = hcat(upsilon, theta.conj())
    grid_v = g if g.admits(v) else CircleGrid.for_symbol(v, g.size)
    vvals = evaluate(v, grid_v)
    vgram = np.einsum("tji,tjk->tik", vvals.conj(), vvals)
    unit_dev = float(np.abs(vgram - np.eye(n)).max())

    # G certifies analyticity of the complement: its columns must lie in
    # range(Theta) pointwise.
    big = CircleGrid.for_symbol(g_sym, grid_v.size)
    if not big.admits(theta):
        big = CircleGrid.for_symbol(theta, big.size)
    gvals = evaluate(g_sym, big)
    tvals = evaluate(theta, big)
    proj = np.einsum("tij,tkj->tik", tvals, tvals.conj())
    leak = gvals - np.einsum("tij,tjk->tik", proj, gvals)
    g_range_resid = float(np.abs(leak).max() / max(np.abs(gvals).max(), 1e-300))

    outer_deg = 2 * max(v.hi, 1) + 2
    diagnostics = {
        "unitarity_residual": unit_dev,
        "upsilon_antianalytic_energy": upsilon.antianalytic_energy(),
        "theta_antianalytic_energy": theta.antianalytic_energy(),
        "g_certificate_residual": g_resid,
        "g_range_residual": g_range_resid,
        "pivot_rows": pivots,
        "kernel_degree": d_search,
        "upsilon_outer_residual_to_degree": transpose_outer_residual(upsilon, outer_deg),
        "theta_outer_residual_to_degree": transpose_outer_residual(theta, outer_deg),
        "outer_degree": outer_deg,
        **diag_extra,
    }
    if unit_dev > unitarity_tol:
        raise FactorizationError(
            "completion is not unitary-valued (is the input co-outer?)", diagnostics
        )
    return BalancedCompletion(upsilon=upsilon, theta=theta, V=v, diagnostics=diagnostics)
