"""Command-line driver.

Every flag can also be given through an environment variable with the prefix
``WRESIDUE_`` (``WRESIDUE_OPERATOR=B``, ``WRESIDUE_JSON=1``, ``WRESIDUE_MC_SAMPLES``,
``WRESIDUE_SEED``, ``WRESIDUE_STRICT_PAPER=1``, ...).  Flags on the command line win.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import oracle

ENV_PREFIX = "WRESIDUE_"
EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
CASES = ("I", "II", "III", "IV", "V", "all")
SUITE_NAMES = ("clifford", "moments", "halfplane", "parametrix", "theorems", "all")
ORDERS = (2, 1, 0, -2, -3, -4)
_TRUE = {"1", "true", "yes", "on"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def _env_flag(name: str) -> bool:
    return str(_env(name, "")).strip().lower() in _TRUE


def _env_int(name: str, default: int) -> int:
    raw = _env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=_env_flag("JSON"),
                        help="machine-readable output")
    common.add_argument("--strict-paper", action="store_true", default=_env_flag("STRICT_PAPER"),
                        help="treat disagreement with printed values as failure")

    op = _Parser(add_help=False)
    op.add_argument("--operator", type=str.upper, choices=("A", "B"), default=_env("OPERATOR", "A").upper())

    p = _Parser(prog="wresidue", description="Residue densities of perturbed Dirac operators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("interior", parents=[common, op], help="interior density of T^-2")
    b = sub.add_parser("boundary", parents=[common, op], help="boundary term, case by case")
    b.add_argument("--case", choices=CASES, default=_env("CASE", "all"))
    d = sub.add_parser("dump-symbol", parents=[common, op], help="render one symbol component")
    d.add_argument("--order", type=int, choices=ORDERS, default=_env_int("ORDER", -4))
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", choices=SUITE_NAMES, default=_env("SUITE", "all"))
    v.add_argument("--mc-samples", type=_positive, default=_env_int("MC_SAMPLES", 10 ** 6))
    v.add_argument("--seed", type=int, default=_env_int("SEED", oracle.DEFAULT_SEED))
    return p


def _emit(obj, text: str, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def cmd_interior(args) -> int:
    from .cosphere import interior_density
    res = interior_density(args.operator)
    lines = [f"operator {res.kind}",
             f"density       {res.total.render()}",
             f"perturbation  {res.perturbation.render()}",
             f"gravity       {res.gravity.render()}",
             f"matches_paper {str(res.matches_paper).lower()}"]
    for d in res.discrepancies:
        lines.append(f"discrepancy {d.term_id}: engine {d.engine_value} | printed {d.paper_value}")
    _emit(res.to_json(), "\n".join(lines), args.json)
    return EXIT_FAIL if args.strict_paper and res.discrepancies else EXIT_OK


def cmd_boundary(args) -> int:
    from .boundary import phi_total
    rep = phi_total(args.operator)
    data = rep.to_json()
    if args.case != "all":
        data["cases"] = [c for c in data["cases"] if c["id"] == args.case]
        data["discrepancies"] = [r for r in data["discrepancies"] if r["term_id"] == f"Phi{args.case}"]
    lines = [f"operator {rep.kind}"]
    for c in data["cases"]:
        lines.append(f"Phi_{c['id']}: {c['density']}" + ("" if c["match"] else f"  (printed {c['printed_density']})"))
        for label, blk in c.get("blocks", {}).items():
            lines.append(f"  {label} [coefficient {blk['coefficient']}]: {blk['value']}")
    if args.case == "all":
        lines.append(f"total: {data['total']}")
    _emit(data, "\n".join(lines), args.json)
    failed = args.case == "all" and not rep.vanishes
    if args.strict_paper and data["discrepancies"]:
        failed = True
    return EXIT_FAIL if failed else EXIT_OK


def cmd_dump_symbol(args) -> int:
    from . import fixtures
    from .geometry import InteriorContext
    from .symbols import build_square_symbol, parametrix
    ctx = InteriorContext()
    square = build_square_symbol(args.operator, ctx)
    records = []
    if args.order >= 0:
        records.append(("square", fixtures.render_record(f"sigma{args.order}[square]", square.at_base(), args.order)))
    else:
        par = parametrix(square, -args.order - 1).at_base()
        records.append(("generated", fixtures.render_record(f"sigma{args.order}[generated]", par, args.order)))
        if args.order == -3:
            printed = fixtures.sigma_minus3_printed(args.operator, ctx).at_base()
            records.append(("printed", fixtures.render_record("sigma-3[printed]", printed, -3)))
        if args.order == -4:
            records.append(("printed", fixtures.dump_records(args.operator, ctx)))
    data = {"operator": args.operator, "order": args.order, "records": {k: v for k, v in records}}
    _emit(data, "\n".join(v for _, v in records), args.json)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import VerifyConfig, run_verify
    cfg = VerifyConfig(mc_samples=args.mc_samples, seed=args.seed, strict_paper=args.strict_paper)
    report = run_verify(args.suite, cfg)
    data = report.to_json()
    data.update({"suite": args.suite, "mc_samples": args.mc_samples, "seed": args.seed})
    _emit(data, report.render(), args.json)
    return EXIT_OK if report.ok else EXIT_FAIL


def _check_env_defaults(args) -> None:
    # argparse does not apply ``choices`` to defaults, which may come from the environment
    allowed = {"operator": ("A", "B"), "case": CASES, "suite": SUITE_NAMES, "order": ORDERS}
    for name, options in allowed.items():
        if hasattr(args, name) and getattr(args, name) not in options:
            raise UsageError(f"invalid {name} {getattr(args, name)!r}; choose from {', '.join(map(str, options))}")


COMMANDS = {"interior": cmd_interior, "boundary": cmd_boundary,
            "dump-symbol": cmd_dump_symbol, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_env_defaults(args)
    except UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return EXIT_USAGE
    except SystemExit as exc:     # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
