"""Command-line front end.

Exit codes: 0 all checks pass, 1 usage or domain error, 2 an identity failed.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import ehaction as EH
from . import fields as FL
from . import geometry as G
from . import jets as J
from .oracle import FDConfig, StencilError, validate_jets

log = logging.getLogger("levelset")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
CHUNK = 32  # fixed so output does not depend on --jobs

DIFFEO_TOL = 1e-6
EVOLUTION_TOL = 1e-5
EH_ABS_TOL = 1e-8
EH_REL_TOL = 1e-4
EH_FD_FLOOR = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# formatting -------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_, int, np.integer)):
        return str(int(v))
    v = float(v)
    return "%.17g" % v if math.isfinite(v) else "null"


def write_rows(stream, columns, rows, fmt):
    if fmt == "csv":
        stream.write(",".join(columns) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")
    else:
        for row in rows:
            body = ", ".join('"%s": %s' % (c, _json_value(v)) for c, v in zip(columns, row))
            stream.write("{" + body + "}\n")


class _Output:
    def __init__(self, path):
        self.path = path
        self.stream = None

    def __enter__(self):
        if self.path in (None, "-"):
            self.stream = sys.stdout
        else:
            self.stream = open(self.path, "w", encoding="utf-8", newline="\n")
        return self.stream

    def __exit__(self, *exc):
        if self.stream is not sys.stdout:
            self.stream.close()
        else:
            self.stream.flush()


# shared helpers ----------------------------------------------------------------------

def _parse_tols(items):
    tols = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"malformed --tol {item!r}, expected name=value")
        k, v = item.split("=", 1)
        try:
            tols[k.strip()] = float(v)
        except ValueError as exc:
            raise UsageError(f"malformed tolerance value {v!r}") from exc
    return tols


def _spec(args) -> FL.FieldSpec:
    if args.field is None:
        raise UsageError("--field is required")
    items = list(args.param or [])
    if args.field == "random_polynomial" and not any(i.split("=", 1)[0].strip() == "seed" for i in items):
        items.append(f"seed={args.seed}")
    return FL.FieldSpec.from_strings(args.field, args.dim, items)


def _points(args, spec):
    region = FL.Region.parse(args.region, spec.dim) if args.region else None
    return FL.sample_points(spec, args.count, args.seed, region=region, margin=args.margin)


def _chunked(fn, pts, jobs):
    chunks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return parts


# commands ------------------------------------------------------------------------------

def _check_chunk(spec, tols, evolution=True):
    def run(pts):
        rep = G.identity_residuals(spec, pts, tolerances=tols)
        relaxed = rep.tolerances.get("main", G.DEFAULT_TOL) > G.DEFAULT_TOL
        for fam in G.DIFFEO_FAMILIES:
            mean, scalar = G.diffeo_residuals(spec, pts, fam)
            key = fam.replace("^", "").replace("+", "p").replace("-", "m")
            base = G.RELAXED_TOL if relaxed else DIFFEO_TOL
            rep.add(f"diffeo_mean_{key}", mean, tols.get(f"diffeo_mean_{key}", base))
            rep.add(f"diffeo_scalar_{key}", scalar, tols.get(f"diffeo_scalar_{key}", base))
        if not evolution:
            return rep
        # evolution residuals are reported relative to 1 + |rate|: field-line
        # differences of large curvatures carry round-off proportional to them
        psi = FL.eval_field(spec, pts, order=3)
        h, r, _ = G.evolution_residuals(spec, pts)
        h = h / (1.0 + np.abs(G.mean_curvature_rate(psi)))
        r = r / (1.0 + np.abs(G.scalar_curvature_rate(psi)))
        base = G.RELAXED_TOL if relaxed else EVOLUTION_TOL
        rep.add("h_evolv", h, tols.get("h_evolv", base))
        rep.add("dR_phi1", r, tols.get("dR_phi1", base))
        return rep

    return run


def cmd_check(args) -> int:
    spec = _spec(args)
    tols = _parse_tols(args.tol)
    pts = _points(args, spec)
    # field lines cross the plate face, so the two-sided level differences
    # behind the evolution identities are undefined there
    on_face = bool(args.region) and args.region.strip().startswith("face")
    reports = _chunked(_check_chunk(spec, tols, evolution=not on_face), pts, args.jobs)
    names = list(reports[0].residuals) if reports else []
    unknown = set(tols) - set(names)
    if reports and unknown:
        raise UsageError(f"unknown identity name(s) in --tol: {', '.join(sorted(unknown))}")
    d = spec.dim
    columns = [f"x{i}" for i in range(d)]
    for n in names:
        columns += [n, f"{n}_pass"]
    columns.append("pass")
    rows = []
    failures = []
    for rep in reports:
        passed = rep.passed
        for k in range(len(rep.points)):
            row = list(rep.points[k])
            ok_all = True
            for n in names:
                ok = bool(passed[n][k])
                ok_all &= ok
                row += [rep.residuals[n][k], ok]
                if not ok:
                    failures.append((rep.points[k], n, rep.residuals[n][k], rep.tolerances[n]))
            row.append(ok_all)
            rows.append(row)
    with _Output(args.out) as out:
        write_rows(out, columns, rows, args.format)
    for point, name, res, tol in failures[:20]:
        print(f"FAIL {name} at {list(map(float, point))}: residual {res:.3e} > tol {tol:.3e}", file=sys.stderr)
    if failures:
        print(f"{len(failures)} identity failure(s)", file=sys.stderr)
        return EXIT_FAIL
    log.info("check %s d=%d: %d points, all identities pass", spec.name, d, len(pts))
    return EXIT_OK


def sample_columns(d):
    return [f"x{i}" for i in range(d)] + ["F", "V", "trW"] + [f"k{i + 1}" for i in range(d - 1)] + ["R_extrinsic", "R_formula"]


def cmd_sample(args) -> int:
    spec = _spec(args)
    pts = _points(args, spec)

    def run(chunk):
        geo = G.geometry_sample(FL.eval_field(spec, chunk, order=3))
        return np.column_stack([chunk, geo.F, geo.V, geo.trW, geo.principal_curvatures, geo.R_extrinsic, geo.R_formula])

    parts = _chunked(run, pts, args.jobs)
    rows = np.concatenate(parts) if parts else np.zeros((0, len(sample_columns(spec.dim))))
    with _Output(args.out) as out:
        write_rows(out, sample_columns(spec.dim), rows.tolist(), args.format)
    return EXIT_OK


def cmd_ehaction(args) -> int:
    try:
        family = EH.SphereFamily(args.dim, args.order)
    except EH.UnsupportedDimension as exc:
        raise UsageError(str(exc)) from exc
    phis = EH.phi_grid(args.phi_min, args.phi_max, args.samples)
    table = EH.eh_table(family, phis, jobs=args.jobs)
    with _Output(args.out) as out:
        write_rows(out, list(EH.EHActionTable.COLUMNS), table.rows, args.format)
    bad = []
    for phi, r, a, a2_fd, a2_int, res in table.rows:
        if args.dim == 3:
            ok = abs(a - 8 * math.pi) <= EH_ABS_TOL and abs(a2_fd) <= EH_ABS_TOL and abs(a2_int) <= EH_ABS_TOL
        else:
            ok = abs(res) <= max(EH_FD_FLOOR, EH_REL_TOL * abs(a2_fd)) and a2_int >= -EH_ABS_TOL
        if not ok:
            bad.append(phi)
    if bad:
        print(f"A'' check failed at phi = {bad}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _spec(args)
    pts = _points(args, spec)
    reports = _chunked(lambda c: validate_jets(spec, c, FDConfig()), pts, args.jobs)
    merged = reports[0]
    for rep in reports[1:]:
        for order in rep.worst_ratio:
            if rep.worst_ratio[order] > merged.worst_ratio[order]:
                merged.worst_ratio[order] = rep.worst_ratio[order]
                merged.estimate[order] = rep.estimate[order]
            merged.discrepancy[order] = max(merged.discrepancy[order], rep.discrepancy[order])
    merged.count = len(pts)
    with _Output(args.out) as out:
        out.write(merged.to_csv() if args.format == "csv" and args.out else merged.to_text())
    return EXIT_OK if merged.all_pass else EXIT_FAIL


def cmd_fields(args) -> int:
    with _Output(args.out) as out:
        for name, schema, exclusion in FL.list_fields():
            params = ", ".join(
                f"{k}={v['default'] if not isinstance(v['default'], tuple) else ','.join(map(str, v['default']))}"
                + (f" ({v['constraint']})" if "constraint" in v else "")
                for k, v in schema.items()
            )
            dims = ",".join(map(str, FL.CATALOG[name].dims))
            out.write(f"{name}\td={dims}\t{params or '-'}\texcluded: {exclusion}\n")
    return EXIT_OK


# parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levelset", description="Level-set curvature identity checks.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, count=100):
        sp.add_argument("--field", help="catalog field name (see `levelset fields`)")
        sp.add_argument("--param", action="append", metavar="K=V", help="field parameter; repeatable")
        sp.add_argument("--dim", type=int, default=3)
        sp.add_argument("--count", type=int, default=count)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--region", help="box:lo,hi | box:lo0,hi0,... | shell:rmin,rmax | surface | face")
        sp.add_argument("--margin", type=float, default=None, help="exclusion margin (default 5%% of region diameter)")
        output(sp)

    def output(sp):
        sp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("check", help="evaluate identity residuals at sampled points")
    common(sp)
    sp.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override; repeatable")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("sample", help="export geometry samples")
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("ehaction", help="Einstein-Hilbert action table for sphere families")
    sp.add_argument("--dim", type=int, default=4)
    sp.add_argument("--phi-min", type=float, default=0.5)
    sp.add_argument("--phi-max", type=float, default=4.0)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--order", type=int, default=16, help="quadrature order per angle")
    output(sp)
    sp.set_defaults(func=cmd_ehaction)

    sp = sub.add_parser("oracle", help="validate analytic jets against finite differences")
    common(sp, count=20)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("fields", help="list catalog fields")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_fields)
    return p


def _setup_logging():
    level = os.environ.get("LEVELSET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


DOMAIN_ERRORS = (
    FL.FieldError,
    FL.ExclusionError,
    FL.EmptyRegionError,
    G.CriticalPoint,
    EH.UnsupportedDimension,
    J.DomainError,
    J.DegenerateRootError,
    J.NoSignChangeError,
    StencilError,
    ValueError,
)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"levelset: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        print(f"levelset: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
