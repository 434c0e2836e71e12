"""Command line: ``artifact cfrac``, ``artifact verify`` and ``artifact export``.

Exit codes: 0 pass, 1 residual failure, 2 bad input, 3 sampling exhausted,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys

from .cfrac import dual, expand, hom_constants
from .errors import ArtifactError, InvalidInputError, SamplingExhaustedError
from .suites import SUITES, RunConfig, run_suite, to_json
from .theta1 import DegenerationMode

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SAMPLING, EXIT_IO = 0, 1, 2, 3, 4

_COMPLEX = re.compile(r"^\s*[-+]?[0-9.eE+-]*[ij]?\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``"re+imi"`` style strings such as ``0.17+0.11i``, ``1i`` or ``-0.5``."""
    s = text.strip().replace(" ", "")
    if not s or not _COMPLEX.match(s):
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--tau", type=parse_complex, default=1j, help='e.g. "0+1i"')
    p.add_argument("--eta", type=parse_complex, default=0.17 + 0.11j, help='e.g. "0.17+0.11i"')
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cfrac", help="continued fraction of n/k, its dual and the shift constants")
    c.add_argument("n", type=int)
    c.add_argument("k", type=int)
    c.add_argument("--json", action="store_true")

    v = sub.add_parser("verify", help="run a residual suite and print a JSON report")
    _common(v)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=20)
    v.add_argument("--tol", type=float, default=1e-7)
    v.add_argument("--mode", choices=[m.value for m in DegenerationMode], default="elliptic")
    v.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")

    e = sub.add_parser("export", help="write the w-basis tables or an R tensor as JSON")
    e.add_argument("what", choices=["w-basis", "r-tensor"])
    _common(e)
    e.add_argument("--u", type=parse_complex, default=0.1 + 0j)
    e.add_argument("--v", type=parse_complex, default=0.3 + 0j)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text + "\n")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def cmd_cfrac(args) -> int:
    c = expand(args.n, args.k)
    cd = dual(c)
    h = hom_constants(c, 1.0)
    doc = {
        "n": c.n, "k": c.k, "terms": list(c.terms), "dual": list(cd.terms), "p": c.p, "p_dual": cd.p,
        "k_prime": c.kprime, "nu": list(h.nu), "lambda_over_eta": [int(x.real) for x in h.lam],
        "gamma": list(h.gamma), "mu_prime_over_eta": [int(x.real) for x in h.mu_prime],
    }
    if args.json:
        print(json.dumps(doc))
    else:
        print(f"terms={doc['terms']} dual={doc['dual']} p={c.p} p'={cd.p} k'={c.kprime}")
        print(f"nu={doc['nu']} lambda/eta={doc['lambda_over_eta']} "
              f"gamma={doc['gamma']} mu'/eta={doc['mu_prime_over_eta']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = RunConfig(n=args.n, k=args.k, tau=args.tau, eta=args.eta, seed=args.seed,
                    samples=args.samples, tol=args.tol, mode=args.mode)
    report = run_suite(cfg, args.suite)
    _emit(json.dumps(report, indent=1), args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_export(args) -> int:
    from .rmatrix import RMatrixSpec, r_entries
    from .theta1 import Lattice
    from .thetap import MultiThetaSpace, WBasis

    lat = Lattice(args.tau)
    if args.what == "w-basis":
        text = WBasis(MultiThetaSpace(expand(args.n, args.k), lat)).to_json()
    else:
        spec = RMatrixSpec(args.n, args.k, lat, args.eta)
        R = r_entries(spec, args.u, args.v)
        import numpy as np
        entries = [{"index": list(ix), "value": to_json(complex(R[ix]))} for ix in np.ndindex(R.shape)]
        text = json.dumps({"n": args.n, "k": args.k, "tau": to_json(args.tau), "eta": to_json(args.eta),
                           "u": to_json(args.u), "v": to_json(args.v),
                           "layout": "R[a,b,d,g]: x_a(u) x_b(v) -> x_g(v) x_d(u)", "entries": entries})
    _emit(text, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {"cfrac": cmd_cfrac, "verify": cmd_verify, "export": cmd_export}[args.command]
    try:
        return handler(args)
    except SamplingExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except (InvalidInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
