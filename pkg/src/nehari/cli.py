"""Command-line front end.

Subcommands:

* ``info``     — shape, band, norms and singular-value profile of a symbol file
* ``superopt`` — superoptimal factorization report (JSON), optional CSV trace
                 of the pointwise singular values and rendered figures
* ``certify``  — badly-approximable / very-badly-approximable / isometry
                 certificates; exit code 0 = pass, 2 = fail, 3 = inconclusive
* ``complete`` — balanced (thematic) completion of an inner column block
* ``example``  — built-in corpus generators

Reports are byte-deterministic for a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import certify as certify_mod
from .errors import NehariError
from .factorize import balanced_completion
from .hankel import hankel_norm_and_schmidt
from .superopt import superopt_factorize
from .symbol import (
    DEFAULT_GRID_SIZE,
    CircleGrid,
    MatrixSymbol,
    block_diag,
    dumps_symbol,
    linf_norm,
    load_symbol,
    pointwise_svd,
    save_symbol,
    symbol_to_dict,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3


@dataclass
class RunConfig:
    """Numerical settings shared by the pipeline commands."""

    grid: int = DEFAULT_GRID_SIZE
    degree: int = 16
    kernel_degree: int = 6
    depth: int | None = None
    mult_tol: float = 1e-8
    kernel_tol: float = 1e-8
    angle_tol: float = 1e-6
    const_tol: float = 1e-7
    stop_tol: float = 1e-10
    tail_sigma: float | None = None
    seed: int = 0

    def validate(self) -> None:
        for name in ("mult_tol", "kernel_tol", "angle_tol", "const_tol", "stop_tol"):
            if getattr(self, name) <= 0:
                raise NehariError(f"tolerance {name} must be positive")
        if self.grid < 2 or self.grid & (self.grid - 1):
            raise NehariError(f"grid size must be a power of two, got {self.grid}")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls(
            grid=args.grid,
            degree=args.degree,
            kernel_degree=args.kernel_degree,
            depth=getattr(args, "depth", None),
            mult_tol=args.tol_mult,
            kernel_tol=args.tol_kernel,
            angle_tol=args.tol_angle,
            const_tol=args.tol_const,
            stop_tol=args.tol_stop,
            tail_sigma=getattr(args, "tail_sigma", None),
            seed=args.seed,
        )
        cfg.validate()
        return cfg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE, help="circle grid size (power of two)")
    parser.add_argument("--degree", type=int, default=16, help="Hankel/Toeplitz truncation degree N")
    parser.add_argument("--kernel-degree", type=int, default=6, help="Toeplitz kernel search degree D")
    parser.add_argument("--tol.mult", dest="tol_mult", type=float, default=1e-8)
    parser.add_argument("--tol.kernel", dest="tol_kernel", type=float, default=1e-8)
    parser.add_argument("--tol.angle", dest="tol_angle", type=float, default=1e-6)
    parser.add_argument("--tol.const", dest="tol_const", type=float, default=1e-7)
    parser.add_argument("--tol.stop", dest="tol_stop", type=float, default=1e-10)
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized witness search")
    parser.add_argument("--out", type=str, default=None, help="output file (default: stdout)")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)


def _load(path: str) -> MatrixSymbol:
    return load_symbol(path)


def _grid_for(phi: MatrixSymbol, cfg: RunConfig) -> CircleGrid:
    return CircleGrid.for_symbol(phi, cfg.grid)


# -- subcommands -----------------------------------------------------------------


def cmd_info(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = _load(args.symbol)
    g = _grid_for(phi, cfg)
    norm, _, mult = hankel_norm_and_schmidt(phi, max(cfg.degree, -phi.lo, 1), cfg.mult_tol)
    sv, _, _ = pointwise_svd(phi, g)
    lines = [
        f"shape: {phi.rows} x {phi.cols}",
        f"band: [{phi.lo}, {phi.hi}]",
        f"grid: {g.size}",
        f"sup norm (grid): {linf_norm(phi, g):.12g}",
        f"hankel norm: {norm:.12g} (top multiplicity {mult})",
        "singular value profile (mean / min / max):",
    ]
    for j in range(sv.shape[1]):
        lines.append(
            f"  s{j}: {sv[:, j].mean():.9g} / {sv[:, j].min():.9g} / {sv[:, j].max():.9g}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _write_trace_csv(path, theta, sv_phi, sv_resid) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = (
            ["theta"]
            + [f"s{j}" for j in range(sv_phi.shape[1])]
            + [f"res_s{j}" for j in range(sv_resid.shape[1])]
        )
        writer.writerow(header)
        for t in range(theta.size):
            writer.writerow(
                [repr(float(theta[t]))]
                + [repr(float(x)) for x in sv_phi[t]]
                + [repr(float(x)) for x in sv_resid[t]]
            )


def cmd_superopt(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = _load(args.symbol)
    g = _grid_for(phi, cfg)
    report = superopt_factorize(
        phi,
        depth=cfg.depth,
        degree=max(cfg.degree, -phi.lo, 1),
        grid=g,
        stop_tol=cfg.stop_tol,
        tail_sigma=cfg.tail_sigma,
        mult_tol=cfg.mult_tol,
    )
    _dump_json(report.to_dict(), args.out)
    if args.trace_csv or args.plot:
        diff = phi - report.F
        dg = CircleGrid.for_symbol(diff, cfg.grid)
        sv_phi, _, _ = pointwise_svd(phi, dg)
        sv_resid, _, _ = pointwise_svd(diff, dg)
        if args.trace_csv:
            _write_trace_csv(args.trace_csv, dg.theta, sv_phi, sv_resid)
        if args.plot:
            from . import plotting

            plotting.save_profile_figure(
                dg.theta, sv_phi, sv_resid, report.t, f"{args.plot}_profile.png"
            )
            plotting.save_levels_figure(report.t, f"{args.plot}_levels.png")
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = RunConfig.from_args(args)
    phi = _load(args.symbol)
    g = _grid_for(phi, cfg)
    if args.which == "ba":
        cert = certify_mod.badly_approximable(
            phi,
            g,
            cfg.kernel_degree,
            const_tol=cfg.const_tol,
            angle_tol=cfg.angle_tol,
            kernel_tol=cfg.kernel_tol,
            seed=cfg.seed,
        )
    elif args.which == "vba":
        cert = certify_mod.condition_c(
            phi,
            g,
            cfg.kernel_degree,
            t_inf=cfg.tail_sigma or 0.0,
            const_tol=cfg.const_tol,
            angle_tol=cfg.angle_tol,
            kernel_tol=cfg.kernel_tol,
        )
    else:
        cert = certify_mod.isometry_uniqueness(
            phi,
            g,
            cfg.kernel_degree,
            const_tol=cfg.const_tol,
            angle_tol=cfg.angle_tol,
            kernel_tol=cfg.kernel_tol,
        )
    _dump_json(cert.to_dict(), args.out)
    if cert.verdict == "pass":
        return EXIT_OK
    if cert.verdict == "fail":
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE


def cmd_complete(args) -> int:
    cfg = RunConfig.from_args(args)
    ups = _load(args.symbol)
    g = _grid_for(ups, cfg)
    comp = balanced_completion(ups, g, kernel_degree=None)
    payload = {
        "upsilon": symbol_to_dict(comp.upsilon),
        "theta": symbol_to_dict(comp.theta),
        "V": symbol_to_dict(comp.V),
        "diagnostics": certify_mod._plain(comp.diagnostics),
    }
    _dump_json(payload, args.out)
    return EXIT_OK


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def build_example(name: str, levels=None, powers=None, k: int = 1) -> MatrixSymbol:
    """Built-in corpus symbols.

    * ``diag5``: diag(0, t_0 u_0, t_1 u_1, ...) with ``u_j = conj(z)**p_j``
      (the finite emulation of the infinite-diagonal construction)
    * ``scalar-bp``: conj(z)**k
    * ``py-nonunique``: diag(conj(z), 0), the classical 2x2 non-uniqueness
      example
    """
    if name == "scalar-bp":
        return MatrixSymbol.scalar({-k: 1.0})
    if name == "py-nonunique":
        return block_diag(MatrixSymbol.scalar({-1: 1.0}), MatrixSymbol.zeros(1, 1))
    if name == "diag5":
        levels = levels if levels else [1.0, 0.9, 0.8]
        powers = powers if powers else [1] * len(levels)
        if len(powers) != len(levels):
            raise NehariError("--powers must match --t in length")
        entries = [MatrixSymbol.zeros(1, 1)]
        entries += [
            MatrixSymbol.scalar({-p: t}) for t, p in zip(levels, powers)
        ]
        return block_diag(*entries)
    raise NehariError(f"unknown example '{name}'")


def cmd_example(args) -> int:
    sym = build_example(args.name, levels=args.t, powers=args.powers, k=args.k)
    if args.out is None:
        sys.stdout.write(dumps_symbol(sym))
    else:
        save_symbol(sym, args.out)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nehari",
        description="Superoptimal analytic approximation of matrix functions on the circle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_info = sub.add_parser("info", help="summarize a symbol file")
    p_info.add_argument("symbol")
    _add_common(p_info)
    p_info.set_defaults(func=cmd_info)

    p_so = sub.add_parser("superopt", help="superoptimal factorization report")
    p_so.add_argument("symbol")
    _add_common(p_so)
    p_so.add_argument("--depth", type=int, default=None, help="levels to peel (default: min(m, n))")
    p_so.add_argument("--tail-sigma", type=float, default=None, help="declared tail level t_inf (emulation mode)")
    p_so.add_argument("--trace-csv", type=str, default=None, help="write per-grid-point singular values")
    p_so.add_argument("--plot", type=str, default=None, help="prefix for rendered PNG figures")
    p_so.set_defaults(func=cmd_superopt)

    p_cert = sub.add_parser("certify", help="run a certificate")
    p_cert.add_argument("which", choices=["ba", "vba", "iso"])
    p_cert.add_argument("symbol")
    _add_common(p_cert)
    p_cert.add_argument("--tail-sigma", type=float, default=None, help="t_inf for the vba certificate")
    p_cert.set_defaults(func=cmd_certify)

    p_comp = sub.add_parser("complete", help="balanced completion of an inner column block")
    p_comp.add_argument("symbol")
    _add_common(p_comp)
    p_comp.set_defaults(func=cmd_complete)

    p_ex = sub.add_parser("example", help="emit a built-in corpus symbol")
    p_ex.add_argument("name", choices=["diag5", "scalar-bp", "py-nonunique"])
    p_ex.add_argument("--t", type=_parse_floats, default=None, help="levels for diag5, e.g. 1,0.9,0.8")
    p_ex.add_argument("--powers", type=_parse_ints, default=None, help="conj(z) powers for diag5")
    p_ex.add_argument("--k", type=int, default=1, help="power for scalar-bp")
    p_ex.add_argument("--out", type=str, default=None)
    p_ex.set_defaults(func=cmd_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NehariError as exc:
        sys.stderr.write(f"error: {exc}\n")
        diag = getattr(exc, "diagnostics", None)
        if diag:
            sys.stderr.write(f"diagnostics: {json.dumps(certify_mod._plain(diag), sort_keys=True)}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
