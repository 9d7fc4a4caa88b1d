"""Command-line entry point: ``cuspidal {catalog,convergence,hc,verify}``.

Exit codes: 0 success, 1 prediction or invariant failure, 2 inconclusive
numerics, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Optional, Sequence

from .integrate import IntegrationConfig, Prediction, Verdict, integrate_rank0, integrate_rank1, predicted_verdict
from .parabolics import ParabolicClass, Rank, dims, enumerate_classes, is_h_compatible, is_p_star, sigma_theta_dual
from .profiles import PowerNu, RadialProfile, SchwartzM
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
LIMIT_TOL = 0.02

log = logging.getLogger("cuspidal")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_profile(text: str, n: int) -> RadialProfile:
    key, sep, val = text.partition("=")
    if not sep:
        raise UsageError(f"profile must look like nu=<real> or m=<real>, got {text!r}")
    try:
        x = float(val)
    except ValueError:
        raise UsageError(f"bad profile parameter {val!r}") from None
    if key == "nu":
        return PowerNu(x, n)
    if key == "m":
        return SchwartzM(x, n)
    raise UsageError(f"unknown profile kind {key!r}")


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` with both ends included."""
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("grid needs step > 0 and a <= b")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(count)]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out-dir", default=None, help="write files here instead of stdout")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cuspidal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("catalog", help="list minimal parabolic classes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rank", type=int, choices=(0, 1), default=1)
    _common(p)

    p = sub.add_parser("convergence", help="numerical verdict for one cuspidal integral")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=None, help="omit for rank-zero classes")
    p.add_argument("--profile", required=True, help="nu=<real> or m=<real>")
    p.add_argument("--levels", type=int, default=None, help="number of doubling radii")
    _common(p)

    p = sub.add_parser("hc", help="transform series, decay and limit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--profile", default="m=10")
    p.add_argument("--s", dest="s_grid", default=None, help="a:b:step (defaults depend on parity of n)")
    p.add_argument("--N", type=int, default=2, help="decay weight exponent")
    _common(p)

    p = sub.add_parser("verify", help="run all invariant families")
    p.add_argument("--n-max", type=int, default=6)
    _common(p)
    return parser


def _config(args) -> IntegrationConfig:
    if getattr(args, "levels", None):
        if args.levels < 12:
            raise UsageError("--levels must be at least 12")
        return IntegrationConfig(levels=args.levels)
    return IntegrationConfig()


def cmd_catalog(args) -> tuple[Report, int]:
    rank = Rank.SIGMA_RANK1 if args.rank == 1 else Rank.SIGMA_RANK0
    rep = Report("catalog", {"n": args.n, "rank": rank.value}, seed=args.seed)
    for c in enumerate_classes(args.n, rank):
        d = dims(c)
        r1 = rank is Rank.SIGMA_RANK1
        rep.add("catalog", n=c.n, rank=rank.value, label=c.label(), k=c.k, l=c.l,
                h_compatible=is_h_compatible(c), p_star=is_p_star(c) if r1 else None,
                dim_n_h=d[0], dim_u=d[1], dual_label=sigma_theta_dual(c).label() if r1 else None)
    return rep, EXIT_OK


def cmd_convergence(args) -> tuple[Report, int]:
    cfg = _config(args)
    prof = parse_profile(args.profile, args.n)
    if args.l is None:
        c = ParabolicClass(args.n, Rank.SIGMA_RANK0, args.k)
        v = integrate_rank0(args.n, args.k, prof, cfg)
    else:
        c = ParabolicClass(args.n, Rank.SIGMA_RANK1, args.k, args.l)
        v = integrate_rank1(args.n, args.k, args.l, prof, cfg)
    pred = predicted_verdict(c, prof)
    consistent = not ((pred is Prediction.MUST_CONVERGE and v.status is Verdict.DIVERGENT)
                      or (pred is Prediction.MUST_DIVERGE and v.status is Verdict.CONVERGENT))
    rep = Report("convergence", {"n": args.n, "k": args.k, "l": args.l, "profile": prof.label},
                 seed=args.seed, tolerances=cfg.tolerances())
    rep.add("convergence", n=c.n, rank=c.rank.value, label=c.label(), k=c.k, l=c.l, profile=prof.label,
            verdict=v.status.value, predicted=pred.value, consistent=consistent, value=v.value,
            error_estimate=v.error_estimate, growth_exponent=v.growth_exponent, fit_r2=v.fit_r2)
    for R, val in v.schedule:
        rep.add("schedule", label=c.label(), profile=prof.label, radius=R, truncated_value=val)
    if v.status is Verdict.INCONCLUSIVE:
        return rep, EXIT_INCONCLUSIVE
    return rep, EXIT_OK if consistent else EXIT_FAIL


def cmd_hc(args) -> tuple[Report, int]:
    from .hc import HcError, cauchy_gaps, decay_check, default_s_grid, gaps_shrink, hc_series

    n, k = args.n, args.k
    cfg = _config(args)
    try:
        ParabolicClass(n, Rank.SIGMA_RANK1, k, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not is_h_compatible(ParabolicClass(n, Rank.SIGMA_RANK1, k, k)):
        raise UsageError(f"class P({k},{k}) is not h-compatible for n={n}")
    prof = parse_profile(args.profile, n)
    grid = parse_grid(args.s_grid) if args.s_grid else default_s_grid(n)
    if min(grid) >= 0 or max(grid) <= 0:
        raise UsageError("s grid must span both signs")
    rep = Report("hc", {"n": n, "k": k, "profile": prof.label, "s_grid": grid, "N": args.N},
                 seed=args.seed, tolerances={**cfg.tolerances(), "limit_rel_tol": LIMIT_TOL})
    try:
        series = hc_series(n, k, prof, grid, cfg)
        dec = decay_check(n, k, prof, N=args.N, cfg=cfg, series=series)
    except HcError as exc:
        log.error("%s", exc)
        return rep, EXIT_FAIL if exc.status is Verdict.DIVERGENT else EXIT_INCONCLUSIVE
    for (s, val, err), w in zip(series.points, dec.weighted):
        rep.add("hc_point", n=n, k=k, profile=prof.label, s=s, value=val, error_estimate=err, weighted=w)
    for side, ok in dec.sides.items():
        rep.add("hc_decay", n=n, k=k, profile=prof.label, N=args.N, side=side, bounded=ok,
                argmax_s=dec.argmax_s[side])
    ok = dec.bounded
    if n % 2:
        s_top, v_top, _ = series.points[-1]
        rel = abs(v_top - dec.limit) / abs(dec.limit)
        gaps = cauchy_gaps(series, 4.0)
        matches = rel <= LIMIT_TOL and dec.limit > 0
        rep.add("hc_limit", n=n, k=k, profile=prof.label, s=s_top, value=v_top, limit_rhs=dec.limit,
                limit_error=dec.limit_error, rel_diff=rel, gaps_decreasing=gaps_shrink(gaps),
                matches=matches)
        ok = ok and matches and gaps_shrink(gaps)
    return rep, EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> tuple[Report, int]:
    from .verify import run_families

    if args.n_max < 3:
        raise UsageError("--n-max must be at least 3")
    rep = Report("verify", {"n_max": args.n_max}, seed=args.seed,
                 tolerances={"closed_form_rel": 1e-8, "identity_rel": 1e-9, "orbit_hs": 1e-3})
    ok = True
    for name, passed, checks, detail in run_families(args.n_max, args.seed):
        rep.add("verify", family=name, passed=passed, checks=checks, detail=detail)
        if not passed:
            log.error("family %s failed: %s", name, detail)
            ok = False
    return rep, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"catalog": cmd_catalog, "convergence": cmd_convergence, "hc": cmd_hc, "verify": cmd_verify}


def _glue_grid(argv: list[str]) -> list[str]:
    # "--s -6:8:1" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--s" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--s={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_grid(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        rep, code = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"cuspidal {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.write(args.format, args.out_dir, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
