"""Partial thematic/canonical factorization and superoptimal singular values.

One step peels the top superoptimal level: from the Schmidt data of the
Hankel operator it builds inner, co-outer functions Upsilon (from the
maximizing vectors) and Omega (from those of the transposed symbol),
completes both to unitary-valued ``V = (Upsilon, conj(Theta))`` and
``W^t = (Omega, conj(Xi))``, extracts the unitary-valued corner block U and
hands the trailing corner Psi to the next level:

    Phi - F = W* . blockdiag(sigma_0 U_0, ..., sigma_{d-1} U_{d-1}, Psi) . V*

The approximant F is recovered from the factorization and certified analytic,
rather than computed by an independent Nehari solver; when no best
approximant is compatible with the computed corners (inconsistent data), the
step fails loudly instead of returning a wrong residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, FactorizationError
from .factorize import balanced_completion, stacked_inner_factor
from .hankel import (
    DEFAULT_MULT_TOL,
    essential_norm_estimate,
    hankel_norm_and_schmidt,
    maximizing_subspace,
)
from .hardy import column_inner_outer
from .symbol import (
    CircleGrid,
    MatrixSymbol,
    block_diag,
    evaluate,
    fit_from_samples,
    linf_norm,
    pointwise_svd,
    symbol_to_dict,
)

DEFAULT_STOP_TOL = 1e-10
DEFAULT_STEP_TOL = 1e-6
DEFAULT_ANALYTIC_TOL = 1e-7


@dataclass
class ThematicBlock:
    """One peeled level of the factorization.

    For multiplicity one the scalar data of the step is kept alongside:
    ``f = theta1 * h * v``, ``g = theta2 * h * w`` and the badly approximable
    unimodular quotient ``u = conj(z) conj(theta1) conj(theta2) conj(h) / h``.
    """

    sigma: float
    r: int
    U: MatrixSymbol
    V: MatrixSymbol
    W: MatrixSymbol
    theta1: MatrixSymbol | None = None
    theta2: MatrixSymbol | None = None
    h: MatrixSymbol | None = None
    u: MatrixSymbol | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "sigma": self.sigma,
            "r": self.r,
            "U": symbol_to_dict(self.U),
            "V": symbol_to_dict(self.V),
            "W": symbol_to_dict(self.W),
        }
        if self.u is not None:
            d["u"] = symbol_to_dict(self.u)
            d["theta1"] = symbol_to_dict(self.theta1)
            d["theta2"] = symbol_to_dict(self.theta2)
            d["h"] = symbol_to_dict(self.h)
        return d


@dataclass
class SuperoptReport:
    """Superoptimal singular values plus the assembled factorization."""

    t: list[float]
    sigma: list[float]
    r: list[int]
    t_inf: float
    blocks: list[ThematicBlock]
    F: MatrixSymbol
    Psi: MatrixSymbol | None
    reconstruction_residual: float
    partial: bool
    tail_model: bool
    grid_size: int

    def to_dict(self) -> dict:
        return {
            "t": [float(x) for x in self.t],
            "sigma": [float(x) for x in self.sigma],
            "r": [int(x) for x in self.r],
            "t_inf": float(self.t_inf),
            "blocks": [b.to_dict() for b in self.blocks],
            "F": symbol_to_dict(self.F),
            "Psi": None if self.Psi is None else symbol_to_dict(self.Psi),
            "reconstruction_residual": float(self.reconstruction_residual),
            "partial": self.partial,
            "tail_model": self.tail_model,
            "grid_size": self.grid_size,
        }


def _grid_admitting(symbols, base: CircleGrid) -> CircleGrid:
    size = base.size
    need = max(2 * (s.hi - s.lo) + 2 for s in symbols if not s.is_empty)
    while size < need:
        size *= 2
    return base if size == base.size else CircleGrid(size)


def _gram_deviation(vals: np.ndarray) -> float:
    k = vals.shape[2]
    gram = np.einsum("tji,tjk->tik", vals.conj(), vals)
    return float(np.abs(gram - np.eye(k)).max())


def _extract_unitary_block(phi, sigma, fs, upsilon, omega, grid):
    """Pointwise least-squares solve of ``sigma U P = Omega^t K`` with
    ``K_i = P_-(Phi f_i)`` and ``P_i = Upsilon^H f_i`` the coordinates of the
    maximizing vectors; valid whether or not zero is a best approximant."""
    ks = [(phi @ f).part("antianalytic") for f in fs]
    syms = [upsilon, omega, phi] + ks + fs
    g = _grid_admitting(syms, grid)
    uvals = evaluate(upsilon, g)
    ovals = evaluate(omega, g)
    kvals = np.stack([evaluate(k, g)[:, :, 0] for k in ks], axis=2)  # (T, m, s)
    fvals = np.stack([evaluate(f, g)[:, :, 0] for f in fs], axis=2)  # (T, n, s)
    a = np.einsum("tij,tis->tjs", ovals, kvals)  # Omega^t K, (T, r, s)
    p = np.einsum("tij,tis->tjs", uvals.conj(), fvals)  # Upsilon^H f, (T, r, s)
    ph = np.transpose(p.conj(), (0, 2, 1))
    gram = p @ ph
    u_pt = a @ ph @ np.linalg.inv(gram) / sigma
    u_sym, tail = fit_from_samples(u_pt, g)
    return u_sym.trim(1e-12), tail, g


def thematic_step(
    phi: MatrixSymbol,
    degree: int | None = None,
    grid: CircleGrid | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
    step_tol: float = DEFAULT_STEP_TOL,
    analytic_tol: float = DEFAULT_ANALYTIC_TOL,
):
    """Peel the top superoptimal level off ``phi``.

    Returns ``(block, psi)`` with ``psi`` the trailing-corner residual (empty
    when the multiplicity exhausts the smaller dimension).  Raises
    ``FactorizationError`` when the corner data cannot be completed by an
    analytic correction within tolerance.
    """
    if grid is None:
        grid = CircleGrid.for_symbol(phi)
    degree = max(degree or 1, -phi.lo, 1)
    ess = essential_norm_estimate(phi)
    sigma, pair, mult = hankel_norm_and_schmidt(phi, degree, mult_tol)
    if sigma == 0.0:
        raise DegenerateInputError("zero Hankel operator: nothing to factor")
    if not ess < sigma:
        raise DegenerateInputError(
            f"essential norm {ess} is not below the Hankel norm {sigma}"
        )

    fs = maximizing_subspace(phi, degree, mult_tol)
    gs = maximizing_subspace(phi.transpose(), degree, mult_tol)
    upsilon = stacked_inner_factor(fs)
    omega = stacked_inner_factor(gs)
    r = upsilon.cols
    if omega.cols != r:
        raise FactorizationError(
            "maximizing subspaces of Phi and Phi^t generate different ranks",
            {"r_upsilon": r, "r_omega": omega.cols},
        )
    if r > mult:
        raise FactorizationError(
            "shift-invariant rank exceeds the singular multiplicity",
            {"r": r, "multiplicity": mult},
        )

    u_block, u_tail, ugrid = _extract_unitary_block(phi, sigma, fs, upsilon, omega, grid)
    # canonical phase: constant diagonal unitary making U(1) diag real >= 0
    u1 = evaluate(u_block, ugrid)[0]
    d = np.ones(r, dtype=complex)
    for j in range(r):
        if abs(u1[j, j]) > 1e-12:
            d[j] = np.conj(u1[j, j]) / abs(u1[j, j])
    dmat = MatrixSymbol.constant(np.diag(d))
    u_block = (u_block @ dmat).trim(1e-12)
    upsilon = (upsilon @ dmat).trim(1e-12)

    m, n = phi.rows, phi.cols
    diagnostics = {"u_fit_tail": u_tail, "multiplicity": mult}
    if r < n:
        comp_v = balanced_completion(upsilon, _grid_admitting([upsilon], grid))
        v = comp_v.V
        diagnostics["v_completion"] = comp_v.diagnostics
    else:
        v = upsilon
    if r < m:
        comp_w = balanced_completion(omega, _grid_admitting([omega], grid))
        w = comp_w.V.transpose()
        diagnostics["w_completion"] = comp_w.diagnostics
    else:
        w = omega.transpose()

    for name, q in (("V", v), ("W", w)):
        qg = _grid_admitting([q], grid)
        dev = _gram_deviation(evaluate(q, qg))
        diagnostics[f"{name.lower()}_unitarity"] = dev
        if dev > step_tol:
            raise FactorizationError(f"{name} is not unitary-valued", diagnostics)

    z = (w @ phi @ v).trim(1e-14)
    psi = z.submatrix(range(r, m), range(r, n)).trim(1e-12) if (r < m and r < n) else None

    scaled_u = (u_block * sigma).trim(1e-14)
    b = scaled_u if psi is None or psi.is_empty else block_diag(scaled_u, psi)
    f0 = (phi - w.adjoint() @ b @ v.adjoint()).trim(1e-14)
    anti = f0.antianalytic_energy()
    scale = max(phi.coeff_l2(), 1.0)
    diagnostics["f0_antianalytic_energy"] = anti
    if anti > analytic_tol * scale:
        raise FactorizationError(
            "no analytic correction matches the computed corners "
            "(a best approximant interferes with the corner blocks)",
            diagnostics,
        )

    ug = _grid_admitting([u_block], grid)
    usv = np.linalg.svd(evaluate(u_block, ug), compute_uv=False)
    diagnostics["u_unitarity"] = float(np.abs(usv - 1.0).max())
    if diagnostics["u_unitarity"] > step_tol:
        raise FactorizationError("U block is not unitary-valued", diagnostics)

    if psi is not None and not psi.is_empty:
        pg = _grid_admitting([psi], grid)
        psi_norm = linf_norm(psi, pg)
        diagnostics["psi_linf"] = psi_norm
        if psi_norm > sigma * (1.0 + 1e-8) + 1e-12:
            raise FactorizationError(
                f"residual sup-norm {psi_norm} exceeds the level {sigma}", diagnostics
            )
        psi_hankel, _, _ = hankel_norm_and_schmidt(psi)
        diagnostics["psi_hankel"] = psi_hankel
        if not psi_hankel < sigma * (1.0 + 1e-9):
            raise FactorizationError(
                f"residual Hankel norm {psi_hankel} did not drop below {sigma}",
                diagnostics,
            )

    theta1 = theta2 = h = u_scalar = None
    if r == 1:
        sg = _grid_admitting([pair.f, pair.g, phi], grid)
        theta1, h, _v_col = column_inner_outer(pair.f, sg)
        theta2, _h2, _w_col = column_inner_outer(pair.g, sg)
        t1 = evaluate(theta1, sg)[:, 0, 0]
        t2 = evaluate(theta2, sg)[:, 0, 0]
        hv = evaluate(h, sg)[:, 0, 0]
        uvals = np.conj(sg.points) * np.conj(t1 * t2 * hv) / hv
        u_scalar, u_scalar_tail = fit_from_samples(uvals, sg)
        u_scalar = u_scalar.trim(1e-12)
        diagnostics["u_scalar_tail"] = u_scalar_tail
        umod = np.abs(np.abs(evaluate(u_scalar, _grid_admitting([u_scalar], sg))[:, 0, 0]) - 1.0).max()
        diagnostics["u_scalar_unimodularity"] = float(umod)
        # the least-squares block must agree with the scalar formula up to a
        # unimodular constant
        gg = _grid_admitting([u_scalar, u_block], grid)
        us = evaluate(u_scalar, gg)[:, 0, 0]
        ub = evaluate(u_block, gg)[:, 0, 0]
        c = ub[0] / us[0]
        diagnostics["u_formula_vs_block"] = float(np.abs(ub - c * us).max())
        if diagnostics["u_formula_vs_block"] > step_tol:
            raise FactorizationError(
                "scalar-path u disagrees with the extracted corner block", diagnostics
            )

    block = ThematicBlock(
        sigma=sigma,
        r=r,
        U=u_block,
        V=v,
        W=w,
        theta1=theta1,
        theta2=theta2,
        h=h,
        u=u_scalar,
        diagnostics=diagnostics,
    )
    return block, psi


def _embed(sym: MatrixSymbol, pad: int) -> MatrixSymbol:
    if pad == 0:
        return sym
    return block_diag(MatrixSymbol.identity(pad), sym)


def superopt_factorize(
    phi: MatrixSymbol,
    depth: int | None = None,
    degree: int | None = None,
    grid: CircleGrid | None = None,
    stop_tol: float = DEFAULT_STOP_TOL,
    tail_sigma: float | None = None,
    mult_tol: float = DEFAULT_MULT_TOL,
    step_tol: float = DEFAULT_STEP_TOL,
    analytic_tol: float = DEFAULT_ANALYTIC_TOL,
) -> SuperoptReport:
    """Peel levels recursively and assemble the canonical factorization.

    Stops when the residual Hankel norm falls below ``stop_tol``, when the
    smaller matrix dimension is exhausted, at ``depth`` levels, or at the
    declared tail level ``tail_sigma`` (the emulation mode for infinite
    symbols: remaining levels are treated as a tail with
    ``t_inf = tail_sigma``).
    """
    if grid is None:
        grid = CircleGrid.for_symbol(phi)
    kmax = min(phi.rows, phi.cols)
    if depth is None:
        depth = kmax
    if depth < 1:
        raise DegenerateInputError("depth must be >= 1")

    blocks: list[ThematicBlock] = []
    cur: MatrixSymbol | None = phi
    residual_norm, _, _ = hankel_norm_and_schmidt(phi, max(degree or 1, -phi.lo, 1), mult_tol)
    capped = False
    while cur is not None and not cur.is_empty and residual_norm > stop_tol:
        if tail_sigma is not None and residual_norm < tail_sigma * (1.0 - 1e-9) - 1e-12:
            break
        if len(blocks) >= depth:
            capped = True
            break
        block, psi = thematic_step(
            cur,
            degree=degree,
            grid=grid,
            mult_tol=mult_tol,
            step_tol=step_tol,
            analytic_tol=analytic_tol,
        )
        blocks.append(block)
        cur = psi
        if cur is None or cur.is_empty:
            residual_norm = 0.0
        else:
            residual_norm, _, _ = hankel_norm_and_schmidt(cur, None, mult_tol)

    t: list[float] = []
    sigmas: list[float] = []
    rs: list[int] = []
    total_r = 0
    for b in blocks:
        t.extend([b.sigma] * b.r)
        sigmas.append(b.sigma)
        total_r += b.r
        rs.append(total_r)

    partial = capped and residual_norm > stop_tol and tail_sigma is None
    tail_model = tail_sigma is not None
    if tail_model:
        t_inf = float(tail_sigma)
    elif partial:
        t_inf = float(residual_norm)
    else:
        t_inf = float(residual_norm)
        t.extend([residual_norm] * (kmax - len(t)))

    # assemble W_total* . blockdiag(...) . V_total*
    if blocks:
        pads = np.cumsum([0] + [b.r for b in blocks])[:-1]
        w_star = None
        for pad, b in zip(pads, blocks):
            factor = _embed(b.W.adjoint(), int(pad))
            w_star = factor if w_star is None else w_star @ factor
        v_star = None
        for pad, b in zip(pads, blocks):
            factor = _embed(b.V.adjoint(), int(pad))
            v_star = factor if v_star is None else factor @ v_star
        parts = [b.U * b.sigma for b in blocks]
        if cur is not None and not cur.is_empty:
            parts.append(cur)
        product = (w_star @ block_diag(*parts) @ v_star).trim(1e-14)
        f_raw = phi - product
        f = f_raw.part("analytic").trim(1e-12)
        rg = _grid_admitting([phi, f, product], grid)
        recon = linf_norm(phi - f - product, rg)
    else:
        f = phi.part("analytic").trim(1e-12)
        product = (phi - f).trim(1e-14)
        rg = _grid_admitting([phi, f], grid)
        recon = linf_norm(phi - f - product, rg)
        cur = product if not product.is_zero(1e-300) else None

    return SuperoptReport(
        t=[float(x) for x in t],
        sigma=[float(x) for x in sigmas],
        r=rs,
        t_inf=t_inf,
        blocks=blocks,
        F=f,
        Psi=cur if cur is not None and not cur.is_empty else None,
        reconstruction_residual=float(recon),
        partial=partial,
        tail_model=tail_model,
        grid_size=grid.size,
    )


@dataclass
class MembershipReport:
    """Pointwise singular-value certificate for a candidate approximant."""

    member: bool
    depth: int
    t: list[float]
    deviations: list[float]
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "depth": self.depth,
            "t": [float(x) for x in self.t],
            "deviations": [float(x) for x in self.deviations],
            "diagnostics": self.diagnostics,
        }


def verify_superoptimal_membership(
    phi: MatrixSymbol,
    f: MatrixSymbol,
    depth: int,
    grid: CircleGrid | None = None,
    report: SuperoptReport | None = None,
    level_tol: float = 1e-6,
    **factorize_kwargs,
) -> MembershipReport:
    """Check that ``s_j((Phi - F)(zeta))`` is constant at ``t_j`` for j < depth.

    This is the necessary certificate for membership in the j-th superoptimal
    minimizer sets; combined with optimality of the computed ``t_j`` it is
    decisive for the engineered corpus.
    """
    if grid is None:
        grid = CircleGrid.for_symbol(phi)
    anti = f.antianalytic_energy()
    if anti > 1e-9 * max(1.0, f.coeff_l2()):
        raise DegenerateInputError(f"candidate approximant is not analytic ({anti:.2e})")
    if report is None:
        report = superopt_factorize(phi, grid=grid, **factorize_kwargs)
    diff = phi - f
    dg = _grid_admitting([diff], grid)
    sv, _, _ = pointwise_svd(diff, dg)
    kmax = min(depth, sv.shape[1], len(report.t))
    deviations = []
    for j in range(kmax):
        deviations.append(float(np.abs(sv[:, j] - report.t[j]).max()))
    member = bool(all(d <= level_tol for d in deviations)) and kmax > 0
    return MembershipReport(
        member=member,
        depth=depth,
        t=list(report.t),
        deviations=deviations,
        diagnostics={"levels_checked": kmax, "level_tol": level_tol},
    )
