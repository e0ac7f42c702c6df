"""Command-line front end.

Every command writes one JSON report (to ``--out`` or stdout) and exits with
0 when all pass flags hold, 1 on a numerical failure, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import io as tio
from .hardy import (
    GramSchmidtBreakdown,
    build_ladder_basis,
    dim_hom_minus,
    enumerate_hom_minus,
)
from .measure import (
    DegreeError,
    MeasureContext,
    monomials_up_to,
    moment,
    normalization_C,
    phi_polys,
    inner,
    precompute,
    sample_boundary_arrays,
)
from .symbols import SymbolExpr, SymbolSyntaxError, parse_symbol
from .toeplitz import (
    BH_TOL,
    QUADRATURE_TOL,
    RECOVERY_TOL,
    DictionarySingular,
    WindowTooSmall,
    brown_halmos_residual,
    check_tuple_relations,
    compactness_probe,
    ladder_shift_check,
    required_degree,
    symbol_recovery,
    toeplitz_window,
    visible_terms,
)

ALGEBRAIC_TOL = 1e-12
MAX_BASIS_DEGREE = 16
MAX_MEASURE_DEGREE = 64

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class ValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _check_range(name: str, value: int, lo: int, hi: Optional[int] = None) -> None:
    if value < lo or (hi is not None and value > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ValidationError(f"--{name} must be {bound}, got {value}")


def _context(degree: int) -> MeasureContext:
    if degree > MAX_MEASURE_DEGREE:
        raise ValidationError(f"request needs quadrature degree {degree} > {MAX_MEASURE_DEGREE}")
    return MeasureContext(max(degree, 2))


def _symbol(args) -> SymbolExpr:
    try:
        return parse_symbol(args.symbol)
    except SymbolSyntaxError as exc:
        raise ValidationError(f"symbol: {exc}") from None


def _basis(args, hi: int, degree: int):
    """Ladder basis up to degree ``hi`` on a grid exact to ``degree``."""
    path = getattr(args, "basis_file", None)
    ctx = _context(max(degree, 2 * hi))
    if path and Path(path).exists():
        basis = tio.load_basis(path)
        if basis.N < hi:
            raise ValidationError(f"basis file {path} reaches degree {basis.N}, need {hi}")
        if basis.ctx.spec.max_degree < ctx.spec.max_degree:
            basis.ctx = ctx
        return basis
    return build_ladder_basis(hi, ctx)


def _measure_info(ctx: MeasureContext) -> Dict[str, object]:
    return ctx.describe()


def _report(args, check: str, N, tol, residuals, passed, ctx=None, **extra) -> Dict[str, object]:
    out = {
        "schema": tio.SCHEMA,
        "check": check,
        "command": _echo(args),
        "N": N,
        "tol": tol,
        "residuals": residuals,
        "pass": bool(passed),
        "basis_file": getattr(args, "basis_file", None),
        "measure": _measure_info(ctx) if ctx is not None else None,
    }
    out.update(extra)
    return out


def _echo(args) -> Dict[str, object]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "timing")}


# ---------------------------------------------------------------------------
# commands


def cmd_moments(args):
    D = args.max_degree
    _check_range("max-degree", D, 2, MAX_MEASURE_DEGREE)
    ctx = _context(D)
    if args.cache and Path(args.cache).exists():
        tio.load_moment_cache(args.cache, ctx)
    before = ctx.quadrature_evaluations
    pairs = [(a, b) for a in monomials_up_to(D // 2) for b in monomials_up_to(D // 2)
             if a.degree == b.degree and a.degree + b.degree <= D]
    precompute(ctx, pairs)
    p3 = phi_polys()[2]
    unit = abs(moment((0, 0, 0), (0, 0, 0), ctx) - 1.0)
    det = abs(inner(p3, p3, ctx) - 1.0)
    conj = max(abs(moment(a, b, ctx) - moment(b, a, ctx).conjugate()) for a, b in pairs)
    zeros = max((abs(moment(a, b, ctx)) for a, b in pairs if a.weight() != b.weight()), default=0.0)
    C = normalization_C(ctx)
    if args.cache:
        tio.save_moment_cache(ctx, args.cache)
    residuals = {
        "unit_mass": unit,
        "unimodular_det": det,
        "conjugate_symmetry": conj,
        "selection_rule_zeros": zeros,
        "C_minus_4_moment33": abs(C - 4.0 * moment((0, 0, 1), (0, 0, 1), ctx).real),
    }
    passed = unit == 0.0 and det <= args.tol and conj <= ALGEBRAIC_TOL and zeros <= ALGEBRAIC_TOL
    return _report(args, "moments", D, args.tol, residuals, passed, ctx,
                   cached_moments=len(ctx.cache), quadrature_evaluations=ctx.quadrature_evaluations - before)


def cmd_basis(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE)
    ctx = _context(2 * N)
    basis = build_ladder_basis(N, ctx)
    gram_dev = max(float(np.abs(basis.gram_of_basis(n) - np.eye(basis.dim(n))).max()) for n in basis.degrees)
    ladder = all(basis.ladder_link_holds(n) for n in basis.degrees)
    dims = all(basis.dim(n) == dim_hom_minus(n) for n in basis.degrees)
    cross = 0.0
    for n in range(1, N + 1):
        for m in range(n + 1, N + 1):
            if n + m <= ctx.spec.max_degree:
                for a in enumerate_hom_minus(n):
                    for b in enumerate_hom_minus(m):
                        cross = max(cross, abs(moment(a, b, ctx)))
    if args.basis_file:
        tio.save_basis(basis, args.basis_file)
    residuals = {"gram_minus_identity": gram_dev, "cross_degree": cross}
    passed = gram_dev <= args.tol and ladder and dims and cross <= ALGEBRAIC_TOL
    return _report(args, "basis", N, args.tol, residuals, passed, ctx,
                   ladder_links_exact=ladder, dimensions=[basis.dim(n) for n in basis.degrees])


def cmd_relations(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE)
    basis = _basis(args, N, 2 * (N + 2))
    rep = check_tuple_relations(basis, N, args.tol)
    return _report(args, "relations", N, args.tol, rep.residuals, rep.passed, basis.ctx)


def _operator(args, basis, hi: int):
    if args.symbol is not None:
        return toeplitz_window(_symbol(args), basis, hi)
    try:
        win = tio.load_window(args.matrix, basis)
    except (OSError, KeyError, ValueError) as exc:
        raise ValidationError(f"matrix file {args.matrix}: {exc}") from None
    if win.hi < hi:
        raise ValidationError(str(WindowTooSmall(hi, win.hi)))
    return win.restrict(hi)


def cmd_bh_check(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE - 2)
    hi = N + 2
    need = required_degree(_symbol(args), hi) if args.symbol is not None else 0
    basis = _basis(args, hi, max(need, 2 * hi))
    A = _operator(args, basis, hi)
    res = brown_halmos_residual(A, basis, N)
    return _report(args, "bh-check", N, args.tol, res, max(res.values()) <= args.tol, basis.ctx)


def cmd_ladder(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE)
    rs = [args.r] if args.r is not None else list(range(1, (N - 1) // 2 + 1))
    for r in rs:
        _check_range("r", r, 0, (N - 1) // 2)
    s = _symbol(args)
    basis = _basis(args, N, max(required_degree(s, N), 2 * N))
    W = toeplitz_window(s, basis, N)
    res = {f"r={r}": ladder_shift_check(s, basis, N, r, window=W) for r in rs}
    passed = max(res.values(), default=0.0) <= args.tol
    return _report(args, "ladder", N, args.tol, res, passed, basis.ctx, symbol=s.to_text())


def cmd_probe(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE)
    s = _symbol(args)
    seed = args.seed_degree
    if seed is not None:
        _check_range("seed-degree", seed, 1, N)
    basis = _basis(args, N, max(required_degree(s, N), 2 * N))
    profile = compactness_probe(s, basis, N, seed_degree=seed)
    base = profile[0][1]
    lowest = min(v for _, v in profile)
    if s.is_zero():
        passed = lowest == 0.0 and max(v for _, v in profile) == 0.0
    else:
        passed = base > args.tol and lowest >= 0.1 * base
    if args.csv:
        Path(args.csv).write_text(tio.decay_csv(profile))
    res = {"r0_value": base, "min_over_r": lowest, "ratio": (lowest / base) if base else 0.0}
    return _report(args, "probe", N, args.tol, res, passed, basis.ctx, symbol=s.to_text(),
                   profile=[[r, v] for r, v in profile], decay_csv=args.csv)


def cmd_recover(args):
    N = args.max_degree
    _check_range("max-degree", N, 1, MAX_BASIS_DEGREE - 2)
    _check_range("dict-degree", args.dict_degree, 0, 8)
    hi = N + 2
    terms = visible_terms(args.dict_degree, hi)
    need = max(required_degree(SymbolExpr.term(*k), hi) for k in terms)
    if args.symbol is not None:
        need = max(need, required_degree(_symbol(args), hi))
    basis = _basis(args, hi, max(need, 2 * hi))
    A = _operator(args, basis, hi)
    sym, rel = symbol_recovery(A, basis, N, args.dict_degree)
    coeffs = [[a, b, k, c.real, c.imag] for (a, b, k), c in sym.items()]
    return _report(args, "recover", N, args.tol, {"relative_residual": rel}, rel <= args.tol, basis.ctx,
                   symbol=sym.to_text(), coefficients=coeffs)


def cmd_coe_sample(args):
    _check_range("count", args.count, 1)
    w11, w22, w12 = sample_boundary_arrays(args.count, args.seed)
    W = np.stack([np.stack([w11, w12], -1), np.stack([w12, w22], -1)], -2)
    unit = float(np.abs(np.conj(np.swapaxes(W, -1, -2)) @ W - np.eye(2)).max())
    det = float(np.abs(np.abs(w11 * w22 - w12**2) - 1.0).max())
    f = np.abs(w12) ** 2
    mean, se = float(f.mean()), float(f.std() / np.sqrt(args.count))
    ctx = _context(2)
    exact = moment((0, 0, 1), (0, 0, 1), ctx).real
    if args.samples:
        lines = ["w11_re,w11_im,w22_re,w22_im,w12_re,w12_im"]
        for a, b, c in zip(w11, w22, w12):
            lines.append(",".join("%.17g" % x for x in (a.real, a.imag, b.real, b.imag, c.real, c.imag)))
        Path(args.samples).write_text("\n".join(lines) + "\n")
    z = abs(mean - exact) / se if se > 0 else 0.0
    res = {"unitarity": unit, "det_modulus": det, "abs_w12_sq_mean": mean, "abs_w12_sq_se": se,
           "abs_w12_sq_quadrature": exact, "z_score": z}
    passed = unit <= ALGEBRAIC_TOL and det <= ALGEBRAIC_TOL and z <= 4.0
    return _report(args, "coe-sample", None, ALGEBRAIC_TOL, res, passed, ctx,
                   count=args.count, seed=args.seed, samples_file=args.samples)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tetralab", description="Toeplitz operators on the Hardy space of the tetrablock.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, tol: float, help: str):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="report JSON path (default: stdout)")
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--timing", action="store_true", help="add wall time to the report")
        return sp

    sp = add("moments", cmd_moments, 1e-10, "compute and cache boundary moments")
    sp.add_argument("--max-degree", type=int, required=True)
    sp.add_argument("--cache", help="moment cache CSV (loaded if present, then rewritten)")

    sp = add("basis", cmd_basis, QUADRATURE_TOL, "build the ladder basis")
    sp.add_argument("--max-degree", type=int, required=True)
    sp.add_argument("--basis-file", help="write the basis JSON here")

    sp = add("relations", cmd_relations, QUADRATURE_TOL, "check the coordinate tuple relations")
    sp.add_argument("--max-degree", type=int, required=True)
    sp.add_argument("--basis-file")

    for name, func, tol, hlp in (
        ("bh-check", cmd_bh_check, BH_TOL, "Brown-Halmos relations for an operator window"),
        ("recover", cmd_recover, RECOVERY_TOL, "recover a symbol from an operator window"),
    ):
        sp = add(name, func, tol, hlp)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--symbol")
        src.add_argument("--matrix", help="operator window JSON")
        sp.add_argument("--max-degree", type=int, required=True)
        sp.add_argument("--basis-file")
        if name == "recover":
            sp.add_argument("--dict-degree", type=int, default=3)

    sp = add("ladder", cmd_ladder, QUADRATURE_TOL, "ladder-shift invariance of a Toeplitz window")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--max-degree", type=int, required=True)
    sp.add_argument("--r", type=int)
    sp.add_argument("--basis-file")

    sp = add("probe", cmd_probe, ALGEBRAIC_TOL, "entry profile along the ladder (compactness probe)")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--max-degree", type=int, required=True)
    sp.add_argument("--seed-degree", type=int)
    sp.add_argument("--csv", help="write the decay profile CSV here")
    sp.add_argument("--basis-file")

    sp = add("coe-sample", cmd_coe_sample, ALGEBRAIC_TOL, "sample the boundary measure")
    sp.add_argument("--count", type=int, default=100000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", help="write the sampled points as CSV")
    return p


def _emit(report: Dict[str, object], out: Optional[str]) -> None:
    text = tio.dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run_command(argv: Sequence[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(list(argv))
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        if args.tol <= 0:
            raise ValidationError("--tol must be positive")
        report = args.func(args)
        if not report["pass"]:
            code = EXIT_FAIL
    except (ValidationError, DegreeError, WindowTooSmall, tio.CacheFormatError) as exc:
        report = _error_report(args, exc)
        code = EXIT_INVALID
    except (np.linalg.LinAlgError, GramSchmidtBreakdown, DictionarySingular, FloatingPointError) as exc:
        report = _error_report(args, exc)
        code = EXIT_FAIL
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - t0
    _emit(report, args.out)
    return code


def _error_report(args, exc: Exception) -> Dict[str, object]:
    return {
        "schema": tio.SCHEMA,
        "check": args.command,
        "command": _echo(args),
        "pass": False,
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
