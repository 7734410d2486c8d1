"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 mathematical-domain failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import checks
from .errors import DomainError, InvalidParameter, ParseError, TorsionLabError, UsageError
from .fox import alexander_polynomial
from .knot import SCAN_COLUMNS, abelian_report, nonabelian_report, scan_torus, torus_rep
from .presentation import (
    EPS_REP,
    GroupPresentation,
    Representation,
    abelianization_exponents,
    load_presentation,
    torus_knot_presentation,
)
from .torsion import BasedChainComplex, sign_determined_torsion

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


def fmt(x: float) -> str:
    """Twelve significant digits, locale independent."""
    return f"{x:.12g}"


def _round(x):
    if isinstance(x, float):
        return float(fmt(x))
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True)


# -- job specification ------------------------------------------------------------

@dataclass
class JobSpec:
    """What to compute on: one presentation source and (usually) one representation."""

    presentation_text: Optional[str] = None  # DSL or JSON
    presentation_file: Optional[str] = None
    torus: Optional[tuple] = None  # (q,), (q, l) or (q, l, t)
    representation: Optional[dict] = None
    rank_tol: Optional[float] = None
    eps_rep: float = EPS_REP
    fmt: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def sources(self) -> int:
        return sum(x is not None for x in (self.presentation_text, self.presentation_file, self.torus))

    def load(self) -> tuple:
        """``(presentation, representation block or None)``."""
        if self.sources() != 1:
            raise UsageError("give exactly one presentation source (--torus, --file or --inline)")
        rep = self.representation
        if self.torus is not None:
            q = self.torus[0]
            p = torus_knot_presentation(q)
            if len(self.torus) == 3:
                if rep is not None:
                    raise UsageError("--torus q,l,t already fixes the representation")
                rep = {"torus": list(self.torus)}
            return p, rep
        if self.presentation_file is not None:
            try:
                with open(self.presentation_file, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise UsageError(f"cannot read {self.presentation_file}: {exc.strerror}") from None
        else:
            text = self.presentation_text
        p = load_presentation(text)
        if text.lstrip().startswith("{"):
            embedded = json.loads(text).get("representation")
            if embedded is not None:
                if rep is not None:
                    raise UsageError("representation given both in the presentation file and on the command line")
                rep = embedded
        return p, rep


def parse_torus(text: str) -> tuple:
    parts = [s.strip() for s in text.split(",")]
    try:
        if not 1 <= len(parts) <= 3:
            raise ValueError
        values = [int(parts[0])] + ([int(parts[1])] if len(parts) > 1 else [])
        if len(parts) == 3:
            values.append(float(parts[2]))
    except ValueError:
        raise UsageError(f"--torus expects q[,l[,t]], got {text!r}") from None
    torus_knot_presentation(values[0])  # validates q
    return tuple(values)


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"--grid expects a:b:n, got {text!r}") from None
    if n < 1:
        raise InvalidParameter("grid needs at least one point")
    grid = np.linspace(a, b, n)
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise InvalidParameter("grid points must lie strictly inside (0, 1)")
    return grid


def build_representation(p: GroupPresentation, block, eps_rep: float = EPS_REP):
    """``("nonabelian", rho)`` or ``("abelian", theta)`` from a representation block.

    Accepted blocks: a list of ``[w, x, y, z]`` generator images,
    ``{"quaternions": [...]}``, ``{"torus": [q, l, t]}`` or ``{"abelian_theta": theta}``.
    """
    if isinstance(block, list):
        block = {"quaternions": block}
    if not isinstance(block, dict) or len(block) != 1:
        raise UsageError("representation block must have exactly one of quaternions, torus, abelian_theta")
    (kind, value), = block.items()
    try:
        if kind == "abelian_theta":
            return "abelian", float(value)
        if kind == "torus":
            q, ell, t = value
            images = torus_rep(int(q), int(ell), float(t)).images
            return "nonabelian", Representation.create(p, images, eps_rep)
        if kind == "quaternions":
            images = [[float(c) for c in im] for im in value]
            if any(len(im) != 4 for im in images):
                raise UsageError("each quaternion needs four components [w, x, y, z]")
            return "nonabelian", Representation.create(p, images, eps_rep)
    except (TypeError, ValueError):
        raise UsageError(f"malformed {kind!r} representation block") from None
    raise UsageError(f"unknown representation kind {kind!r}")


def _read_json_arg(text: str):
    """JSON given inline or as a path to a file."""
    stripped = text.lstrip()
    if not stripped.startswith(("{", "[")):
        try:
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def job_from_args(args) -> JobSpec:
    job = JobSpec()
    if getattr(args, "job", None):
        data = _read_json_arg(args.job)
        if not isinstance(data, dict):
            raise UsageError("job file must hold a JSON object")
        pres = data.get("presentation")
        if isinstance(pres, dict):
            job.presentation_text = json.dumps(pres)
        elif pres is not None:
            job.presentation_text = str(pres)
        job.presentation_file = data.get("presentation_file")
        if data.get("torus") is not None:
            job.torus = parse_torus(",".join(str(v) for v in data["torus"]))
        job.representation = data.get("representation")
        job.rank_tol = data.get("rank_tol")
        job.eps_rep = float(data.get("eps_rep", EPS_REP))
        job.fmt = data.get("format")
        job.extra = {k: data[k] for k in ("grid", "fd_step") if k in data}
    # command-line flags fill in or override the job file
    if getattr(args, "torus", None):
        job.torus = parse_torus(args.torus)
    if getattr(args, "file", None):
        job.presentation_file = args.file
    if getattr(args, "inline", None):
        job.presentation_text = args.inline.replace("\\n", "\n").replace(";;", "\n")
    reps = []
    if getattr(args, "abelian_theta", None) is not None:
        reps.append({"abelian_theta": args.abelian_theta})
    if getattr(args, "rep_json", None):
        reps.append(_read_json_arg(args.rep_json))
    if len(reps) > 1 or (reps and job.representation is not None):
        raise UsageError("give exactly one representation")
    if reps:
        job.representation = reps[0]
    if getattr(args, "rank_tol", None) is not None:
        job.rank_tol = args.rank_tol
    if getattr(args, "eps_rep", None) is not None:
        job.eps_rep = args.eps_rep
    if getattr(args, "format", None):
        job.fmt = args.format
    return job


# -- subcommands -------------------------------------------------------------------

def cmd_torsion(args, out) -> int:
    job = job_from_args(args)
    p, block = job.load()
    if block is None:
        raise UsageError("torsion needs a representation (--torus q,l,t, --abelian-theta or --rep-json)")
    kind, rep = build_representation(p, block, job.eps_rep)
    if kind == "abelian":
        report = abelian_report(p, rep, tol=job.rank_tol)
    else:
        report = nonabelian_report(p, rep, tol=job.rank_tol)
    data = report.to_dict()
    if (job.fmt or "json") == "json":
        out.write(_dump_json(data) + "\n")
    else:
        for key, value in data.items():
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = fmt(value)
            elif isinstance(value, list):
                value = " ".join(str(v) for v in value)
            elif value is None:
                value = "-"
            out.write(f"{key}: {value}\n")
    return EXIT_OK


def cmd_alexander(args, out) -> int:
    job = job_from_args(args)
    if job.representation is not None:
        raise UsageError("alexander takes no representation")
    p, _ = job.load()
    delta = alexander_polynomial(p)
    if job.fmt == "json":
        out.write(_dump_json({
            "alexander": str(delta),
            "coefficients": [c for _, c in delta.coefficients],
            "exponents": list(abelianization_exponents(p)),
        }) + "\n")
    else:
        out.write(f"{delta}\n")
    return EXIT_OK


def cmd_scan(args, out) -> int:
    job = job_from_args(args)
    if job.torus is None or len(job.torus) != 2:
        raise UsageError("scan needs --torus q,l")
    grid_text = args.grid or job.extra.get("grid")
    if grid_text is None:
        raise UsageError("scan needs --grid a:b:n")
    grid = parse_grid(grid_text)
    h = args.fd_step if args.fd_step is not None else float(job.extra.get("fd_step", 1e-5))
    rows = scan_torus(job.torus[0], job.torus[1], grid, h, tol=job.rank_tol)
    if job.fmt == "json":
        out.write(_dump_json([{c: getattr(r, c) for c in SCAN_COLUMNS} for r in rows]) + "\n")
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for r in rows:
        writer.writerow([fmt(getattr(r, c)) for c in SCAN_COLUMNS])
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_check(args, out) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    if args.trials is not None and args.trials < 1:
        raise InvalidParameter("--trials must be positive")
    out.write(f"seed: {args.seed}\n")
    ok = True
    for name in names:
        result = checks.run_suite(name, seed=args.seed, trials=args.trials)
        out.write(result.summary() + "\n")
        ok = ok and result.passed
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_torsion_raw(args, out) -> int:
    if args.file == "-":
        text = sys.stdin.read()
    elif args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    elif args.inline:
        text = args.inline
    else:
        raise UsageError("torsion-raw needs --file or --inline")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("complex JSON must be an object")
    try:
        c = BasedChainComplex.from_dict(data, tol=args.rank_tol)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed complex: {exc}") from None
    rng = np.random.default_rng(args.seed) if args.seed is not None else None
    res = sign_determined_torsion(c, args.rank_tol, rng)
    result = {
        "torsion": res.value,
        "unsigned_torsion": res.tor,
        "sign_exponent": res.sign_exponent,
        "alpha": list(res.alpha),
        "beta": list(res.beta),
        "homology_dims": [h.shape[0] for h in c.homology_bases],
    }
    if args.format == "text":
        out.write(f"torsion: {fmt(res.value)}\n")
    else:
        out.write(_dump_json(result) + "\n")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_source(sp):
    g = sp.add_argument_group("presentation")
    g.add_argument("--torus", help="built-in (2,q) torus knot: q, q,l or q,l,t")
    g.add_argument("--file", help="presentation file (DSL or JSON)")
    g.add_argument("--inline", help="presentation DSL text (';;' or '\\n' separate lines)")
    g.add_argument("--job", help="job JSON (inline or path)")
    sp.add_argument("--rank-tol", type=float, help="relative rank tolerance (default 1e-9 or $TORSIONLAB_RANK_TOL)")
    sp.add_argument("--eps-rep", type=float, help="relator residual tolerance for representations")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="torsionlab", description="Twisted Reidemeister torsion of knot exteriors.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("torsion", help="sign-determined adjoint torsion of a knot and representation")
    _add_source(sp)
    sp.add_argument("--abelian-theta", type=float, help="use the abelian representation at this angle")
    sp.add_argument("--rep-json", help="representation block (inline JSON or path)")
    sp.add_argument("--format", choices=("json", "text"))
    sp.set_defaults(func=cmd_torsion)

    sp = sub.add_parser("alexander", help="normalized Alexander polynomial")
    _add_source(sp)
    sp.add_argument("--format", choices=("text", "json"))
    sp.set_defaults(func=cmd_alexander)

    sp = sub.add_parser("scan", help="torus-knot torsion along the t-family, as CSV")
    _add_source(sp)
    sp.add_argument("--grid", help="a:b:n, n points spaced evenly inside (0, 1)")
    sp.add_argument("--fd-step", type=float, help="central-difference step for dtheta/dt (default 1e-5)")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("check", help="run a seeded property suite")
    sp.add_argument("suite", choices=sorted(checks.SUITES) + ["all"])
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("torsion-raw", help="torsion of a based chain complex given as JSON")
    sp.add_argument("--file", help="complex JSON file, '-' for stdin")
    sp.add_argument("--inline", help="complex JSON text")
    sp.add_argument("--seed", type=int, help="randomize the auxiliary basis choices with this seed")
    sp.add_argument("--rank-tol", type=float)
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.set_defaults(func=cmd_torsion_raw)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_DOMAIN
    except TorsionLabError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
