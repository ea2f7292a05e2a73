"""Command-line front end: ``fofana-kit <subcommand> ...``.

Exit codes: 0 on success, 2 when a check fails, 1 on usage or config errors.
Not-applicable and vacuous outcomes never produce exit 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile

import numpy as np

from . import __version__
from .exponents import ExponentPair, exponent_json, parse_exponent
from .grids import RadiusGrid
from .lattice import FunctionSpec, GridFunction, Lattice, make_lattice, sample
from .maximal import METHODS, MaximalConfig, maximal_function
from .norms import (
    amalgam_continuous,
    amalgam_discrete,
    default_radii,
    fofana_norm,
    generalized_fofana_norm,
    lebesgue_norm,
    morrey_norm,
)
from .report import FAIL, NOT_APPLICABLE, _clean
from .verify import PROFILES, SUITES, SuiteConfig, generate_corpus, run_suites
from .weights import WeightFunction, check_class, check_doubling, lemma_dyadic_lower_bound, nakai_constant

NORM_KINDS = ("lebesgue", "amalgam-continuous", "amalgam-discrete", "fofana", "gen-fofana", "morrey")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


# -- small helpers -------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_atomic(path: str, text: str):
    path = os.path.abspath(path)
    folder = os.path.dirname(path)
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_path(args, path: str | None) -> str | None:
    if path is None:
        return None
    if args.out_dir and not os.path.isabs(path):
        return os.path.join(args.out_dir, path)
    return path


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("FOFANA_KIT_THREADS")
        try:
            n = int(env) if env else 1
        except ValueError:
            raise UsageError(f"threads: FOFANA_KIT_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError(f"threads: must be >= 1, got {n}")
    return n


def _load_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: malformed JSON in {path} ({exc.msg} at line {exc.lineno})") from None
    except OSError as exc:
        raise UsageError(f"{what}: cannot read {path} ({exc.strerror})") from None


def load_input(path: str) -> tuple[GridFunction, dict]:
    """Read ``{"lattice": {...}, "function": {...}}`` or ``{"lattice": {...}, "values": [...]}``."""
    obj = _load_json(path, "input")
    if not isinstance(obj, dict) or "lattice" not in obj:
        raise UsageError("input: missing field 'lattice'")
    lattice = Lattice.from_json(obj["lattice"])
    if "function" in obj:
        spec = FunctionSpec.from_json(obj["function"])
        return sample(spec, lattice), {"lattice": lattice.to_json(), "function": spec.to_json()}
    if "values" in obj:
        try:
            values = np.asarray(obj["values"], dtype=float).reshape(lattice.shape)
        except (ValueError, TypeError):
            raise UsageError(f"values: expected {np.prod(lattice.shape)} numbers for lattice shape {lattice.shape}") from None
        return GridFunction(lattice, values), {"lattice": lattice.to_json(), "values": "inline"}
    raise UsageError("input: needs field 'function' or 'values'")


_SHORT_PHI = re.compile(r"^\s*(power|power-log)\s*\(([^)]*)\)\s*$")


def parse_phi(text: str, d: int = 1) -> WeightFunction:
    """JSON such as ``{"kind":"power","alpha":2}`` or the shorthand ``power(2)`` / ``power-log(2,1)``."""
    m = _SHORT_PHI.match(text)
    if m:
        try:
            args = [float(x) for x in m.group(2).split(",")]
        except ValueError:
            raise UsageError(f"phi: cannot parse arguments in {text!r}") from None
        if m.group(1) == "power" and len(args) == 1:
            return WeightFunction.power(args[0], d)
        if m.group(1) == "power-log" and len(args) == 2:
            return WeightFunction.power_log(args[0], args[1], d)
        raise UsageError(f"phi: wrong number of arguments in {text!r}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        raise UsageError(f"phi: not JSON or shorthand: {text!r}") from None
    if not isinstance(obj, dict):
        raise UsageError("phi: expected a JSON object")
    return WeightFunction.from_json(obj, d)


def _radii(text: str | None, lattice: Lattice) -> RadiusGrid:
    if text is None:
        return default_radii(lattice)
    return RadiusGrid.parse(text)


def _header(args, config: dict) -> dict:
    return {"version": __version__, "config": {"subcommand": args.command, **config}}


# -- subcommands ----------------------------------------------------------------------


def cmd_norm(args) -> int:
    f, source = load_input(args.input)
    lat = f.lattice
    config = {"input": source, "kind": args.kind}
    if args.kind == "lebesgue":
        q = parse_exponent(args.q)
        config["q"] = exponent_json(q)
        value, argmax_r, trace = lebesgue_norm(f, q), None, []
    elif args.kind in ("amalgam-continuous", "amalgam-discrete"):
        if args.r is None:
            raise UsageError("r: required for amalgam norms")
        qp = ExponentPair(args.q, args.p)
        config.update(qp.to_json(), r=args.r)
        if args.kind == "amalgam-discrete":
            try:
                lat.aligned_cells(args.r)
            except ValueError as exc:
                raise UsageError(f"r: {exc}") from None
            value = amalgam_discrete(f, args.r, qp)
        else:
            value = amalgam_continuous(f, args.r, qp)
        argmax_r, trace = None, []
    else:
        radii = _radii(args.radii, lat)
        config["radii"] = radii.spec
        if args.kind == "fofana":
            if args.alpha is None:
                raise UsageError("alpha: required for the Fofana norm")
            qp = ExponentPair(args.q, args.p)
            config.update(qp.to_json(), alpha=args.alpha)
            nv = fofana_norm(f, qp, args.alpha, radii)
        else:
            if args.phi is None:
                raise UsageError(f"phi: required for --kind {args.kind}")
            w = parse_phi(args.phi, lat.d)
            config["phi"] = w.to_json()
            if args.kind == "morrey":
                q = parse_exponent(args.q)
                config["q"] = exponent_json(q)
                nv = morrey_norm(f, q, w, radii)
            else:
                qp = ExponentPair(args.q, args.p)
                config.update(qp.to_json(), variant=args.variant)
                nv = generalized_fofana_norm(f, qp, w, radii, args.variant)
        value, argmax_r, trace = nv.value, nv.argmax_r, nv.trace
    print(f"{value:.17g}")
    out = _out_path(args, args.out)
    if out:
        report = _header(args, config)
        report.update(value=value, argmax_r=argmax_r, trace=[list(t) for t in trace])
        _write_atomic(out, _dumps(report))
    return 0


def cmd_maximal(args) -> int:
    f, source = load_input(args.input)
    radii = None if args.radii in (None, "all-aligned") else RadiusGrid.parse(args.radii)
    cfg = MaximalConfig(radii, args.method)
    cfg.cell_radii(f.lattice)
    mf = maximal_function(f, cfg)
    print(f"max Mf = {float(mf.values.max()):.17g}")
    out = _out_path(args, args.out)
    if out:
        report = _header(args, {"input": source, "method": cfg.method, "radii": args.radii or "all-aligned"})
        report.update(lattice=mf.lattice.to_json(), values=mf.values.tolist())
        _write_atomic(out, _dumps(report))
    return 0


def cmd_check_phi(args) -> int:
    w = parse_phi(args.phi, args.d)
    q, p = parse_exponent(args.q), parse_exponent(args.p)
    t_grid = RadiusGrid.parse(args.t_grid)
    cls = check_class(w, q, p, t_grid)
    report = _header(args, {"phi": w.to_json(), "q": exponent_json(q), "p": exponent_json(p), "d": args.d,
                            "t_grid": t_grid.spec})
    report["class"] = cls.to_json()
    report["doubling"] = check_doubling(w, t_grid)
    if q > 1 or args.experimental_q1:
        report["nakai"] = nakai_constant(w, q, p, allow_q1=args.experimental_q1).to_json()
        report["lemma"] = lemma_dyadic_lower_bound(w, q, p, allow_q1=args.experimental_q1).to_json()
    else:
        report["nakai"] = {"status": NOT_APPLICABLE, "reason": "q = 1 needs --experimental-q1"}
        report["lemma"] = {"status": NOT_APPLICABLE, "reason": "q = 1 needs --experimental-q1"}
    text = _dumps(report)
    out = _out_path(args, args.report)
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)
    return 0 if cls.passed else 2


def _lattice_from_args(args) -> Lattice:
    return make_lattice(args.d, args.h, args.L)


def _csv_text(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["suite", "case_id", "input_desc", "r", "lhs", "rhs", "ratio", "pass"])
    for rep in reports:
        for row in rep.rows:
            j = row.to_json()
            writer.writerow([rep.check_id, j["case_id"], j["input_desc"],
                             "" if j["r"] is None else repr(j["r"]) if isinstance(j["r"], float) else j["r"],
                             _csv_num(j["lhs"]), _csv_num(j["rhs"]), _csv_num(j["ratio"]),
                             "true" if j["pass"] else "false"])
    return buf.getvalue()


def _csv_num(x) -> str:
    if x is None:
        return ""
    return repr(x) if isinstance(x, float) else str(x)


def cmd_verify(args) -> int:
    lat = _lattice_from_args(args)
    w = parse_phi(args.phi, lat.d)
    cfg = SuiteConfig(lat, w, parse_exponent(args.q), parse_exponent(args.p), args.seed, args.profile,
                      _threads(args), args.experimental_q1)
    ExponentPair(cfg.q, cfg.p)
    reports = run_suites(args.suite, cfg)
    for rep in reports:
        print(rep.summary())
    doc = _header(args, {"suites": list(args.suite), **cfg.to_json()})
    doc["reports"] = [rep.to_json() for rep in reports]
    out = _out_path(args, args.report)
    if out:
        _write_atomic(out, _dumps(doc))
    out = _out_path(args, args.csv)
    if out:
        _write_atomic(out, _csv_text(reports))
    return 2 if any(rep.status == FAIL for rep in reports) else 0


def cmd_corpus(args) -> int:
    lat = _lattice_from_args(args)
    alphas = tuple(args.alpha) if args.alpha else (2.0,)
    corpus = generate_corpus(args.seed, lat, args.profile, alphas=alphas)
    doc = _header(args, {"lattice": lat.to_json(), "seed": args.seed, "profile": args.profile,
                         "alphas": list(alphas)})
    doc["corpus"] = corpus.to_json()
    text = _dumps(doc)
    out = _out_path(args, args.out)
    if out:
        _write_atomic(out, text)
        print(f"{len(corpus)} members")
    else:
        sys.stdout.write(text)
    return 0


# -- parser -----------------------------------------------------------------------------


def _add_global(p: argparse.ArgumentParser, default):
    p.add_argument("--threads", type=int, default=default, help="worker threads (env FOFANA_KIT_THREADS)")
    p.add_argument("--out-dir", default=default, help="directory for relative output paths")


def _add_lattice(p):
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--h", type=float, default=1 / 32)
    p.add_argument("--L", type=float, default=16.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fofana-kit", description="Grid-based amalgam, Fofana and Morrey norms.")
    parser.add_argument("--version", action="version", version=f"fofana-kit {__version__}")
    _add_global(parser, None)
    common = _Parser(add_help=False)
    _add_global(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", parents=[common], help="evaluate one norm")
    p.add_argument("--kind", required=True, choices=NORM_KINDS)
    p.add_argument("--input", required=True, help="f.json")
    p.add_argument("--q", default="2")
    p.add_argument("--p", default="inf")
    p.add_argument("--alpha", type=float)
    p.add_argument("--phi")
    p.add_argument("--r", type=float)
    p.add_argument("--radii", help="geometric:r_min:r_max:count or list:r1,r2,...")
    p.add_argument("--variant", default="continuous", choices=("continuous", "discrete"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("maximal", parents=[common], help="evaluate the maximal function")
    p.add_argument("--input", required=True)
    p.add_argument("--method", default="naive", choices=METHODS)
    p.add_argument("--radii", default="all-aligned", help="geometric:... | list:... | all-aligned")
    p.add_argument("--out")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("check-phi", parents=[common], help="class, doubling and integral conditions")
    p.add_argument("--phi", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--t-grid", default="geometric:1e-4:1e4:161")
    p.add_argument("--experimental-q1", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_check_phi)

    p = sub.add_parser("verify", parents=[common], help="run inequality suites")
    p.add_argument("--suite", nargs="+", default=["all"], choices=("all",) + SUITES)
    p.add_argument("--phi", default='{"kind":"power","alpha":2}')
    p.add_argument("--q", default="2")
    p.add_argument("--p", default="4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", default="standard", choices=PROFILES)
    p.add_argument("--experimental-q1", action="store_true")
    _add_lattice(p)
    p.add_argument("--report")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", parents=[common], help="emit the test-function corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", default="standard", choices=PROFILES)
    p.add_argument("--alpha", type=float, action="append")
    _add_lattice(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"fofana-kit: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fofana-kit: error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
