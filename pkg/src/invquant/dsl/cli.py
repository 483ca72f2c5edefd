"""``invquant`` command line.

Exit status: 0 when the command succeeds (and every check passes), 1 when a
verification check fails or a computation is rejected by the library, 2 for
usage, parse and model errors.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

import sympy as sp

from ..core import DEFAULT_ORDER
from ..errors import InvQuantError, ModelError
from . import commands, render
from .model import Model, load
from .presets import find
from .suites import SUITES, run_suite

SEED_ENV = "INVQUANT_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"invquant: {SEED_ENV} must be an integer, got {raw!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", type=Path, help="model file (default: search the shipped presets)")
    common.add_argument("--format", choices=render.FORMATS, default="text")

    ap = argparse.ArgumentParser(prog="invquant", description="Star products, morphisms and quantized operators in curvilinear charts.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("christoffel", parents=[common], help="connection coefficients of a transform or metric")
    p.add_argument("target")

    p = sub.add_parser("star", parents=[common], help="order-by-order table of a star product")
    p.add_argument("target")
    p.add_argument("--order", type=int, default=2)

    p = sub.add_parser("morphism", parents=[common], help="the morphism from the Moyal product")
    p.add_argument("target")
    p.add_argument("--curved", action="store_true", help="include the Ricci shift")
    p.add_argument("--alpha", help="curvature parameter (with --curved)")
    p.add_argument("--order", type=int, default=2)

    p = sub.add_parser("quantize", parents=[common], help="operator of a hamiltonian")
    p.add_argument("target")
    p.add_argument("--with", dest="method", required=True,
                   help="weyl | s_order | covariant | curved(ALPHA) | minimal")
    p.add_argument("--alpha", help="curvature parameter for --with curved")
    p.add_argument("--transform", help="chart to quantize in (default: the hamiltonian's own)")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=None, help=f"sampling seed (default: ${SEED_ENV} or 0)")
    return ap


def _model(args, name: str) -> Model:
    if args.model is not None:
        return load(args.model.read_text(encoding="utf-8"))
    return find(name)


_CURVED = re.compile(r"^curved\((?P<alpha>[^()]+)\)$")


def _method(args) -> tuple[str, sp.Expr | None]:
    method, alpha = args.method.strip(), args.alpha
    m = _CURVED.match(method)
    if m:
        method, alpha = "curved", m.group("alpha")
    if method not in ("weyl", "s_order", "covariant", "curved", "minimal"):
        raise ModelError(f"unknown quantization method {args.method!r}")
    if alpha is not None and method != "curved":
        raise ModelError("--alpha applies to the curved method only")
    return method, (sp.Rational(alpha) if alpha is not None else None)


def run(args) -> tuple[dict, int]:
    if args.command == "verify":
        seed = _default_seed() if args.seed is None else args.seed
        report = run_suite(args.suite, seed)
        return render.report_doc(report), EXIT_OK if report.passed else EXIT_FAIL
    model = _model(args, args.target)
    if args.command == "christoffel":
        chart = model.chart(args.target)
        rows = commands.christoffel_table(chart.gamma)
        return render.christoffel_doc(rows, chart.coords, args.target), EXIT_OK
    if args.command == "star":
        prod = commands.star_product(model, args.target, args.order)
        return render.star_doc(prod, args.target), EXIT_OK
    if args.command == "morphism":
        alpha = sp.Rational(args.alpha) if args.alpha is not None else None
        if alpha is not None and not args.curved:
            raise ModelError("--alpha needs --curved")
        S = commands.morphism(model, args.target, args.curved, alpha, args.order)
        return render.morphism_doc(S, args.target), EXIT_OK
    if args.command == "quantize":
        method, alpha = _method(args)
        op = commands.quantize(model, args.target, method, alpha, args.transform, DEFAULT_ORDER)
        label = method if alpha is None else f"curved({alpha})"
        return render.operator_doc(op, args.target, label), EXIT_OK
    raise ModelError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        doc, status = run(args)
    except ModelError as exc:
        print(f"invquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvQuantError, ValueError, TypeError) as exc:
        # library rejections keep their class name for context
        print(f"invquant: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"invquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render.render(doc, args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
