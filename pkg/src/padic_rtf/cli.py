"""Command-line entry point: ``padic-rtf <subcommand> ...``.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors or
invalid input.  Artifacts are JSON, written to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from . import __version__
from .errors import PadicRTFError, ParamsInconsistent
from .jsonio import dumps

ENV_P = "PADIC_RTF_P"
ENV_M = "PADIC_RTF_M"
ENV_TOL = "PADIC_RTF_TOL"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    p: int = 3
    m: int = 2
    tol: float = 1e-9
    mode: str = "symbol"
    out: Optional[str] = None
    seed: int = 20240601

    def __post_init__(self):
        from sympy import isprime

        if self.p < 3 or not isprime(self.p):
            raise UsageError(f"p must be an odd prime, got {self.p}")
        if not 1 <= self.m <= 8:
            raise UsageError(f"m must lie in [1, 8], got {self.m}")
        if not self.tol > 0:
            raise UsageError("tolerance must be positive")
        if self.mode not in ("oracle", "symbol", "both"):
            raise UsageError("mode must be oracle, symbol or both")


def _env(name: str, cast, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not valid")


def _window(text: str):
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("window must look like LO:HI")


def _modulus(text: str) -> int:
    try:
        if "^" in text:
            base, exp = text.split("^")
            return int(base) ** int(exp)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("modulus must be an integer or P^K")


def _primes(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError("primes must be a comma-separated list")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="odd prime (env PADIC_RTF_P)")
    common.add_argument("--m", type=int, default=None, help="precision / character level (env PADIC_RTF_M)")
    common.add_argument("--tol", type=float, default=None, help="tolerance (env PADIC_RTF_TOL)")
    common.add_argument("--mode", choices=("oracle", "symbol", "both"), default="symbol")
    common.add_argument("--out", default=None, help="write the JSON artifact here instead of stdout")
    common.add_argument("--seed", type=int, default=20240601)

    ap = _Parser(prog="padic-rtf", description="p-adic transfer operators, germs and orbital integrals")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("table", parents=[common], help="derive the rank-one table from root data")
    s.add_argument("--row", default=None)
    s.add_argument("--n", type=int, default=None)
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--markdown", action="store_true")

    s = sub.add_parser("gamma", parents=[common], help="gamma factor of a character")
    s.add_argument("--eta", default="triv", help="triv, ur, ram1, ram2 or a level-m index k")
    s.add_argument("--a", default="0", help="shift (rational)")
    s.add_argument("--sigma", type=int, choices=(1, -1), default=1)

    s = sub.add_parser("pushforward", parents=[common], help="pushforward of the unit lattice under a split form")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--M", type=int, default=7)
    s.add_argument("--twisted", choices=("T", "G"), default=None)

    s = sub.add_parser("germ", parents=[common], help="germ expansion of a pushforward")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--M", type=int, default=7)
    s.add_argument("--K", type=int, default=1)

    s = sub.add_parser("kuznetsov", parents=[common], help="orbital integrals of the Kuznetsov basic vector")
    s.add_argument("--group", choices=("pgl2", "sl2"), required=True)
    s.add_argument("--window", type=_window, default=None)

    s = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sum S(a, b; q)")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--modulus", "--pk", dest="modulus", type=_modulus, required=True, help="q as an integer or P^K")

    s = sub.add_parser("xside", parents=[common], help="X-side orbital integrals of the basic function")
    s.add_argument("--row", choices=("A1", "D2"), required=True)
    s.add_argument("--window", type=_window, default=(-3, 3))
    s.add_argument("--M", type=int, default=3)

    s = sub.add_parser("transfer", parents=[common], help="apply the transfer operator")
    which = s.add_mutually_exclusive_group(required=True)
    which.add_argument("--row", help="take the parameters from a derived table row")
    which.add_argument("--type", dest="root_type", choices=("T", "G"), help="give the parameters directly")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--s1", type=Fraction, default=None)
    s.add_argument("--s2", type=Fraction, default=None)
    s.add_argument("--s0", type=Fraction, default=None)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", "--in", dest="input", help="AsymptoticMeasure JSON file")
    src.add_argument("--basic", action="store_true", help="use the Kuznetsov basic vector at level m")
    s.add_argument("--window", type=_window, default=(-4, 4))

    s = sub.add_parser("check", parents=[common], help="run a verification suite")
    s.add_argument("--suite", required=True, choices=("table", "gamma", "germs", "reduction", "transfer-shape", "fl-smoke"))
    s.add_argument("--primes", type=_primes, default=None, help="comma-separated primes (default: --p)")
    return ap


def make_config(args) -> RunConfig:
    p = args.p if args.p is not None else _env(ENV_P, int, 3)
    m = args.m if args.m is not None else _env(ENV_M, int, 2)
    tol = args.tol if args.tol is not None else _env(ENV_TOL, float, 1e-9)
    return RunConfig(p=p, m=m, tol=tol, mode=args.mode, out=args.out, seed=args.seed)


def _emit(obj, cfg: RunConfig) -> None:
    text = dumps(obj)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_table(args, cfg) -> int:
    from .roots import PARAMETRIC, ROW_LABELS, check_row, full_table

    if args.row:
        if args.row not in ROW_LABELS:
            raise UsageError(f"unknown row {args.row}; choose from {', '.join(ROW_LABELS)}")
        ns = [args.n] if args.n else (list(PARAMETRIC[args.row]) if args.row in PARAMETRIC else [None])
        checks = [check_row(args.row, n if args.row in PARAMETRIC else None) for n in ns]
    else:
        checks = full_table()
    ok = all(c.ok for c in checks)
    if args.markdown:
        lines = ["| row | n | levi | eps | d1 | d-1 | s | L_X | ok |", "|---|---|---|---|---|---|---|---|---|"]
        for c in checks:
            r = c.row
            if r is None:
                lines.append(f"| {c.label} | {c.n or ''} | | | | | | | no |")
                continue
            s = f"{r.s1}, {r.s2}" if r.root_type == "T" else f"{r.s0}"
            levi = ",".join(str(i + 1) for i in r.levi) or "-"
            lines.append(f"| {r.label} | {c.n or ''} | {levi} | {r.eps} | {r.d1} | {r.dm1} | {s} | {r.L} | {'yes' if c.ok else 'no'} |")
        text = "\n".join(lines)
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    else:
        _emit({"ok": ok, "rows": [c.to_json() for c in checks]}, cfg)
    for c in checks:
        if not c.ok:
            print(f"mismatch {c.label} n={c.n}: {'; '.join(c.mismatches)}", file=sys.stderr)
    return 0 if ok else 1


def cmd_gamma(args, cfg) -> int:
    from .mellin import GammaFactorSpec, tate_gamma
    from .padic import QUADRATIC_NAMES, UnitCharacter, quadratic_by_name

    if args.eta in QUADRATIC_NAMES:
        eta = quadratic_by_name(cfg.p, args.eta)
    else:
        try:
            k = int(args.eta)
        except ValueError:
            raise UsageError(f"--eta must be one of {QUADRATIC_NAMES} or an integer index")
        eta = UnitCharacter.from_level(cfg.p, cfg.m, k)
    a = Fraction(args.a)
    G = tate_gamma(GammaFactorSpec(eta, a, args.sigma))
    out = {
        "p": cfg.p,
        "eta": args.eta,
        "a": str(a),
        "sigma": args.sigma,
        "lo": G.lo,
        "const": G.const,
        "num": G.numerator_poly(),
        "den": G.denominator_poly(),
    }
    _emit(out, cfg)
    return 0


def cmd_pushforward(args, cfg) -> int:
    from .quadratic import QuadSpace, pushforward, twisted_pushforward_G, twisted_pushforward_T

    try:
        if args.twisted == "T":
            f = twisted_pushforward_T(None, args.d, cfg.p, args.M)
        elif args.twisted == "G":
            f = twisted_pushforward_G(None, args.d, cfg.p, args.M)
        else:
            f = pushforward(QuadSpace(args.d, cfg.p), M=args.M)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(f, cfg)
    return 0


def cmd_germ(args, cfg) -> int:
    from .quadratic import QuadSpace, germ_extract, pushforward

    g = germ_extract(pushforward(QuadSpace(args.d, cfg.p), M=args.M), args.d, K=args.K)
    _emit(g, cfg)
    return 0 if g.residual < cfg.tol else 1


def cmd_kuznetsov(args, cfg) -> int:
    from .orbital import kuznetsov_basic

    if args.window is not None:
        kv = kuznetsov_basic(args.group, cfg.p, window=args.window)
    else:
        kv = kuznetsov_basic(args.group, cfg.p, m=cfg.m)
    _emit(kv, cfg)
    return 0


def cmd_kloosterman(args, cfg) -> int:
    from .orbital import kloosterman_sum

    try:
        val = kloosterman_sum(args.a, args.b, args.modulus)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit({"a": args.a, "b": args.b, "modulus": args.modulus, "value": val}, cfg)
    return 0


def cmd_xside(args, cfg) -> int:
    from .orbital import xside_basic

    _emit(xside_basic(args.row, cfg.p, window=args.window, M=args.M), cfg)
    return 0


def cmd_transfer(args, cfg) -> int:
    import numpy as np

    from .measures import AsymptoticMeasure
    from .mellin import measure_level
    from .orbital import kuznetsov_basic
    from .roots import row_by_label
    from .transfer import TransferParams, enlarged_space_check, shell_row, transfer

    if args.row:
        row = row_by_label(args.row, args.n)
        params = TransferParams.from_row(row, p=cfg.p)
        label = row.label
    else:
        try:
            params = TransferParams(args.root_type, s1=args.s1, s2=args.s2, s0=args.s0, p=cfg.p)
        except ParamsInconsistent as exc:
            raise UsageError(str(exc))
        label = None
    if args.basic:
        group = "pgl2" if params.root_type == "T" else "sl2"
        f = kuznetsov_basic(group, cfg.p, m=cfg.m).measure
    else:
        try:
            with open(args.input) as fh:
                data = json.load(fh)
            # a kuznetsov artifact wraps its measure
            f = AsymptoticMeasure.from_json(data.get("measure", data))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read {args.input}: {exc}")
    ok, msg = enlarged_space_check(f, params)
    if not ok:
        raise UsageError(f"input is not in the enlarged space: {msg}")
    m = max(cfg.m, measure_level(f))
    modes = ("symbol", "oracle") if cfg.mode == "both" else (cfg.mode,)
    outs = {md: transfer(f, params, mode=md, m=m, window=args.window) for md in modes}
    result = {"row": label, "params": {"s1": params.s1, "s2": params.s2, "s0": params.s0}, "outputs": outs}
    code = 0
    if cfg.mode == "both":
        lo, hi = args.window
        dev = max(
            float(np.max(np.abs(shell_row(outs["symbol"], n, m) - shell_row(outs["oracle"], n, m))))
            for n in range(lo, hi + 1)
        )
        result["max_deviation"] = dev
        code = 0 if dev < cfg.tol else 1
    _emit(result, cfg)
    return code


def cmd_check(args, cfg) -> int:
    from .suites import run_suite

    res = run_suite(args.suite, cfg, primes=args.primes)
    for line in res.lines:
        print(line.render())
    print(res.summary())
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(dumps(res) + "\n")
    return 0 if res.ok else 1


COMMANDS = {
    "table": cmd_table,
    "gamma": cmd_gamma,
    "pushforward": cmd_pushforward,
    "germ": cmd_germ,
    "kuznetsov": cmd_kuznetsov,
    "kloosterman": cmd_kloosterman,
    "xside": cmd_xside,
    "transfer": cmd_transfer,
    "check": cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = make_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        if str(exc):
            print(f"padic-rtf: {exc}", file=sys.stderr)
        return 2
    except PadicRTFError as exc:
        print(f"padic-rtf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
