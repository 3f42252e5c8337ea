"""Command-line front end: ``bvforge <command> --model FILE``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 model error.
"""
from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .algebra import GradedPoly, mono_grading
from .bvcomplex import check_nilpotency as nilpotency_report
from .bvcomplex import (TruncationOverflow, build_truncated_complex,
                        cme_residual, differential_from_lagrangian, homology_dims)
from .expr import ExprError, parse_expr
from .gaugefix import (brst_table, expected_brst_table, gauge_fix, homomorphism_check,
                       lorenz_fermion)
from .lattice import ModelError, build_ym_model
from .modelfile import ModelFileError, parse_model_file
from .peierls import Background, greens_functions, linearize, peierls_bracket
from .report import Report, model_summary, render, versions
from .sampling import DEFAULT_SEED, random_homogeneous

__all__ = ["main", "run", "RunConfig", "COMMANDS"]

COMMANDS = ("cme", "nilpotency", "homology", "gaugefix", "peierls", "all")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MODEL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model_path: str
    output: str = "text"
    seed: int = DEFAULT_SEED
    tol: float = 1e-8
    af_window: tuple = (0, 2)
    cap: int = 1
    degree: int | None = None
    alpha: Fraction | None = None
    check: bool = False
    samples: int = 50
    background: str = "zero"
    F: str | None = None
    G: str | None = None
    horizon: int | None = None
    threads: int | None = None
    verbose: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise UsageError("tolerance must be positive")
        lo, hi = self.af_window
        if lo < 0 or hi < lo:
            raise UsageError(f"bad antifield window {lo}..{hi}")
        if self.cap < 1:
            raise UsageError("--cap must be >= 1")
        if self.samples < 0:
            raise UsageError("--samples must be >= 0")
        if self.background != "zero":
            raise UsageError("only --background zero is supported")

    def as_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "tol": self.tol,
                "af_window": list(self.af_window), "cap": self.cap, "degree": self.degree,
                "alpha": None if self.alpha is None else str(self.alpha),
                "check": self.check, "samples": self.samples, "background": self.background,
                "F": self.F, "G": self.G, "horizon": self.horizon, "threads": self.threads}


# individual checks -------------------------------------------------------------

def _sectors(p: GradedPoly) -> dict:
    """Count terms by the multiset of generator kinds (e.g. 'Field^2 Ghost')."""
    cnt: Counter = Counter()
    for m in p.terms:
        kinds: Counter = Counter()
        for g, e in m:
            kinds[g.kind.label] += e
        cnt[" ".join(k if n == 1 else f"{k}^{n}" for k, n in sorted(kinds.items()))] += 1
    return dict(sorted(cnt.items()))


def _gen_text(p: GradedPoly) -> str:
    return " ".join(g.text() for g in sorted(p.generators()))


def _meta(cfg: RunConfig, **kw) -> dict:
    return {"seed": cfg.seed, **kw}


def check_cme(model, cfg: RunConfig) -> list:
    lag = model.lagrangian
    bad = lag.parity() != 0 or lag.ghost_number() != 0
    res = cme_residual(lag, model.weight)
    caveats = []
    if res:
        caveats.append("residual is nonzero; sectors listed under result.residual_sectors")
    return [Report("cme", not res and not bad,
                   inputs={"lagrangian_terms": len(lag)},
                   result={"residual_terms": len(res), "residual_sectors": _sectors(res),
                           "lagrangian_homogeneous": not bad},
                   residual=res, tolerance="exact", caveats=caveats,
                   metadata=_meta(cfg, arithmetic="exact Gaussian rationals"))]


def check_nilpotency(model, cfg: RunConfig) -> list:
    gens = model.generators()
    s = differential_from_lagrangian(model.lagrangian, gens, model.weight)
    rep = nilpotency_report(s, [GradedPoly.gen(g) for g in gens])
    failing = [_gen_text(x) for x, _ in rep.failures]
    first = rep.failures[0][1] if rep.failures else GradedPoly.zero()
    return [Report("nilpotency", rep.passed, inputs={"generators": rep.checked},
                   result={"failures": len(failing), "failing_generators": failing[:10]},
                   residual=first, tolerance="exact",
                   metadata=_meta(cfg, convention="s g = {L, g}"))]


def check_homology(model, cfg: RunConfig) -> list:
    lo, hi = cfg.af_window
    if cfg.degree is not None and not lo <= cfg.degree < hi:
        raise UsageError(f"--degree must lie in {lo}..{hi - 1} (H_k needs C_(k+1))")
    degrees = [cfg.degree] if cfg.degree is not None else list(range(lo, hi))
    gens = model.generators()
    s = differential_from_lagrangian(model.lagrangian, gens, model.weight)
    caveats = [f"complex truncated at polynomial degree {cfg.cap}; constants excluded",
               f"antifield window {lo}..{hi}"]
    inputs = {"af_window": [lo, hi], "cap": cfg.cap, "degrees": degrees}
    try:
        cx = build_truncated_complex(s.koszul_tate, gens, (lo, hi), cfg.cap)
    except TruncationOverflow as exc:
        return [Report("homology", False, inputs, {"error": str(exc)},
                       caveats=caveats + ["truncation cap exceeded; raise --cap"],
                       metadata=_meta(cfg))]
    except ArithmeticError as exc:
        return [Report("homology", False, inputs, {"error": str(exc), "d_squared_zero": False},
                       caveats=caveats, metadata=_meta(cfg))]
    dims = {f"H_{k}": homology_dims(cx, k) for k in degrees}
    chain = {f"C_{k}": cx.dimension(k) for k in range(lo, hi + 1)}
    if model.kind == "scalar" and dims.get("H_1"):
        caveats.append("periodic lattice: H_1 counts zero modes of the lattice wave operator, "
                       "so it need not vanish as it does on noncompact space-time")
    return [Report("homology", True, inputs,
                   {"homology": dims, "chain_dims": chain, "d_squared_zero": True},
                   residual=0, tolerance="exact", caveats=caveats,
                   metadata=_meta(cfg, arithmetic="exact sparse rank"))]


def _require_ym(model, what: str):
    if model.kind != "yang-mills":
        raise ModelError(f"{what} needs a Yang-Mills model ([gauge] section)")


def _theory(model, cfg: RunConfig):
    if cfg.alpha is not None and cfg.alpha != model.alpha:
        model = build_ym_model(model.lattice, model.dim_g, cfg.alpha, model.structure_constants)
    return gauge_fix(model, lorenz_fermion(model))


def _table_key(label: str, a: int, mu: int) -> str:
    return f"{label}[{a},{'-' if mu < 0 else mu}]@(0,0)"


def check_gaugefix(model, cfg: RunConfig) -> list:
    _require_ym(model, "gauge fixing")
    th = _theory(model, cfg)
    alpha = str(th.fermion.alpha)
    table = brst_table(th)
    out = [Report("gaugefix", True, inputs={"alpha": alpha, "fermion": "Lorenz"},
                  result={"L_g": th.L_g,
                          "brst_table": {_table_key(k, a, mu): v
                                         for (k, a, mu), v in table.items()}},
                  tolerance="exact", metadata=_meta(cfg))]
    if not cfg.check:
        return out
    gens = th.model.generators()
    res = cme_residual(th.L_tilde, th.weight)
    out.append(Report("gaugefix.cme", not res, {"alpha": alpha},
                      {"residual_terms": len(res), "residual_sectors": _sectors(res)},
                      residual=res, tolerance="exact", metadata=_meta(cfg)))
    rep = nilpotency_report(th.s_tilde, [GradedPoly.gen(g) for g in gens])
    out.append(Report("gaugefix.nilpotency", rep.passed, {"alpha": alpha, "generators": rep.checked},
                      {"failures": len(rep.failures),
                       "failing_generators": [_gen_text(x) for x, _ in rep.failures][:10]},
                      residual=rep.failures[0][1] if rep.failures else 0, tolerance="exact",
                      metadata=_meta(cfg)))
    g_l = th.gamma_config(th.L_g)
    out.append(Report("gaugefix.gamma_invariance", not g_l, {"alpha": alpha},
                      {"gamma_L_g_terms": len(g_l)}, residual=g_l, tolerance="exact",
                      metadata=_meta(cfg)))
    exp = expected_brst_table(th.model)
    bad = sorted(_table_key(k, a, mu) for (k, a, mu), v in table.items() if exp[(k, a, mu)] != v)
    out.append(Report("gaugefix.brst_table", not bad, {"site": [0, 0]},
                      {"mismatches": bad, "rule": "A -> DC, C -> -1/2[C,C], Cbar -> iB, B -> 0"},
                      tolerance="exact", metadata=_meta(cfg)))
    rng = np.random.default_rng(cfg.seed)
    pairs = [(random_homogeneous(rng, gens), random_homogeneous(rng, gens))
             for _ in range(cfg.samples)]
    hom = homomorphism_check(th, pairs)
    out.append(Report("gaugefix.homomorphism", hom.passed, {"alpha": alpha, "pairs": hom.checked},
                      {"product_failures": len(hom.product_failures),
                       "bracket_failures": len(hom.bracket_failures)},
                      tolerance="exact", metadata=_meta(cfg, sampler="random_homogeneous")))
    return out


def _support(p: GradedPoly) -> set:
    return {g.site for g in p.generators()}


def _cone_margin(F, G, lattice) -> int | None:
    """min over support pairs of |dx| - |dt| in lattice steps (periodic)."""
    best = None
    for (t1, x1) in _support(F):
        for (t2, x2) in _support(G):
            dt = min(abs(t1 - t2), lattice.n_t - abs(t1 - t2))
            dx = min(abs(x1 - x2), lattice.n_x - abs(x1 - x2))
            m = dx - dt
            best = m if best is None else min(best, m)
    return best


def check_peierls(model, cfg: RunConfig) -> list:
    if cfg.F is None or cfg.G is None:
        raise UsageError("peierls needs --F and --G")
    lat = model.lattice
    try:
        F, G = parse_expr(cfg.F, lat), parse_expr(cfg.G, lat)
    except ExprError as exc:
        raise UsageError(f"cannot parse functional: {exc}") from None
    if model.kind == "yang-mills":
        lag = _theory(model, cfg).L_g
    else:
        lag = model.lagrangian.without_antifields()
    op = linearize(model, lag, Background.zero())
    pair = greens_functions(op, cfg.horizon)
    inputs = {"F": cfg.F, "G": cfg.G, "background": cfg.background, "horizon": pair.horizon}
    meta = _meta(cfg, cfl=str(lat.cfl), block_size=op.block_size, quadratic=op.quadratic,
                 leads=[int(v) for v in pair.leads])
    margin = _cone_margin(F, G, lat)
    caveats = list(pair.caveats)
    if not pair.usable:
        return [Report("peierls", False, inputs, {"usable": False},
                       residual=pair.residual, tolerance=cfg.tol,
                       caveats=caveats + ["wrap contamination: propagator reaches the seam"],
                       metadata=meta)]
    fg = peierls_bracket(F, G, pair, symbolic=op.quadratic)
    gf = peierls_bracket(G, F, pair, symbolic=op.quadratic)
    pf, pg = F.parity() or 0, G.parity() or 0
    anti = (fg + gf * (-1) ** (pf * pg)).max_abs()
    if margin is not None and margin > 0:
        caveats.append(f"supports are spacelike separated (cone margin {margin} steps); "
                       f"the bracket should vanish")
    ok = pair.residual <= cfg.tol and anti <= cfg.tol
    if margin is not None and margin > 0:
        ok = ok and fg.max_abs() <= cfg.tol
    return [Report("peierls", ok, inputs,
                   {"bracket": fg, "antisymmetry_defect": anti, "cone_margin": margin,
                    "greens_residual": pair.residual, "greens_residual_with_front":
                    pair.residual_all, "wrap": pair.wrap},
                   residual=max(pair.residual, anti), tolerance=cfg.tol, caveats=caveats,
                   metadata=meta)]


def run(cfg: RunConfig, model) -> list:
    cmd = cfg.command
    if cmd == "cme":
        return check_cme(model, cfg)
    if cmd == "nilpotency":
        return check_nilpotency(model, cfg)
    if cmd == "homology":
        return check_homology(model, cfg)
    if cmd == "gaugefix":
        return check_gaugefix(model, cfg)
    if cmd == "peierls":
        return check_peierls(model, cfg)
    out = check_cme(model, cfg) + check_nilpotency(model, cfg)
    if model.kind == "scalar":
        out += check_homology(model, cfg)
    else:
        cfg.check = True
        out += check_gaugefix(model, cfg)
    if cfg.F is not None and cfg.G is not None:
        out += check_peierls(model, cfg)
    return out


# argument parsing --------------------------------------------------------------

def _window(text: str) -> tuple:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed rational {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model file")
    common.add_argument("--output", choices=("text", "structured"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=1e-8, help="numerical tolerance")
    common.add_argument("-v", "--verbose", action="store_true", help="print full polynomials")

    p = argparse.ArgumentParser(prog="bvforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"bvforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("cme", parents=[common], help="classical master equation residual")
    sub.add_parser("nilpotency", parents=[common], help="s^2 on every generator")
    h = sub.add_parser("homology", parents=[common], help="Koszul-Tate homology")
    for q in (h,):
        q.add_argument("--af-window", type=_window, default=(0, 2))
        q.add_argument("--cap", type=int, default=1)
        q.add_argument("--degree", type=int)
    g = sub.add_parser("gaugefix", parents=[common], help="Lorenz gauge fixing")
    g.add_argument("--alpha", type=_fraction)
    g.add_argument("--check", action="store_true", help="run the invariant suite")
    g.add_argument("--samples", type=int, default=50, help="random pairs for --check")
    pe = sub.add_parser("peierls", parents=[common], help="Peierls bracket of two functionals")
    a = sub.add_parser("all", parents=[common], help="every applicable check")
    for q in (pe, a):
        q.add_argument("--background", default="zero")
        q.add_argument("--F")
        q.add_argument("--G")
        q.add_argument("--horizon", type=int)
        q.add_argument("--alpha", type=_fraction)
    a.add_argument("--af-window", type=_window, default=(0, 2))
    a.add_argument("--cap", type=int, default=1)
    a.add_argument("--samples", type=int, default=50)
    return p


def _threads() -> int | None:
    raw = os.environ.get("BVFORGE_THREADS")
    if raw is None or raw == "":
        return None
    if not raw.isdigit() or int(raw) < 1:
        raise UsageError(f"BVFORGE_THREADS must be a positive integer, got {raw!r}")
    return int(raw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)        # exits with 2 on usage errors
    try:
        cfg = RunConfig(
            command=args.command, model_path=args.model, output=args.output, seed=args.seed,
            tol=args.tol, af_window=getattr(args, "af_window", (0, 2)),
            cap=getattr(args, "cap", 1), degree=getattr(args, "degree", None),
            alpha=getattr(args, "alpha", None), check=getattr(args, "check", False),
            samples=getattr(args, "samples", 50), background=getattr(args, "background", "zero"),
            F=getattr(args, "F", None), G=getattr(args, "G", None),
            horizon=getattr(args, "horizon", None), threads=_threads(), verbose=args.verbose)
    except UsageError as exc:
        parser.error(str(exc))
    try:
        model = parse_model_file(cfg.model_path)
        reports = run(cfg, model)
    except UsageError as exc:
        parser.error(str(exc))
    except (ModelFileError, ModelError) as exc:
        print(f"bvforge: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    header = {"model": model_summary(model, cfg.model_path), "config": cfg.as_dict(),
              "versions": versions()}
    text = render(reports, cfg.output, header, cfg.verbose)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
