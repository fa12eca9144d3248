"""Command-line entry point: ``pekeris {derive,energy,table,charpoly,export,report}``.

Exit codes: 0 success, 1 usage, 2 numerical or consistency failure,
3 internal invariant violation.  ``PEKERIS_WORKERS`` sets the worker count
for ``table`` and ``charpoly``; ``PEKERIS_CACHE_DIR`` moves the recurrence cache.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .assembly import PARA, ORTHO, export_pencil
from .charpoly import ConsistencyError, InconclusiveError, charpoly_exact, cross_check_roots
from .exact import MultiPoly
from .pipeline import PipelineConfig, hylleraas_operator, perimetric_operator
from .spectral import IterationError, NoRootError, ground_state, pencil_for
from .transfer import REC_VARS, DerivationMismatch, Recurrence, SeqOp, pekeris_recurrence

log = logging.getLogger("pekeris")

NUMERIC_FAILURES = (NoRootError, IterationError, ConsistencyError, InconclusiveError, DerivationMismatch)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- recurrence cache ---------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get("PEKERIS_CACHE_DIR", Path.home() / ".cache" / "pekeris"))


def load_recurrence(interaction: bool = True, use_cache: bool = True) -> Recurrence:
    """Derived recurrence, cached on disk per interaction flag and version."""
    path = cache_dir() / f"recurrence-{'on' if interaction else 'off'}-{__version__}.json"
    if use_cache and path.exists():
        try:
            return Recurrence(SeqOp.from_json(json.loads(path.read_text())["stencil"]).stencil)
        except (OSError, ValueError, KeyError):
            log.warning("ignoring unreadable cache file %s", path)
    rec = pekeris_recurrence(perimetric_operator(PipelineConfig(interaction)), check=interaction)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(recurrence_json(rec, interaction)))
        except OSError as exc:
            log.warning("cannot write cache %s: %s", path, exc)
    return rec


def recurrence_json(rec: SeqOp, interaction: bool) -> dict:
    return {
        "variables": list(REC_VARS),
        "interaction": interaction,
        "stencil": rec.to_json(),
        "summary": rec.degree_report(),
    }


def hydrogenic_kernel_ok(rec: SeqOp) -> bool:
    """Does ``delta_(0,0,0)`` solve the recurrence at eps = Z, for symbolic Z?"""
    z = MultiPoly.var("Z", REC_VARS)
    out = rec.apply({(0, 0, 0): 1})
    return all(not v.substitute({"eps": z}) for v in out.values())


# -- helpers -----------------------------------------------------------------

def parse_charges(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("empty charge list")
    return out


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def workers() -> int:
    try:
        return max(1, int(os.environ.get("PEKERIS_WORKERS", "1")))
    except ValueError:
        raise UsageError("PEKERIS_WORKERS must be an integer")


def emit(text: str, output: str | None) -> None:
    if output:
        try:
            Path(output).write_text(text if text.endswith("\n") else text + "\n")
        except OSError as exc:
            raise OSError(f"cannot write {output}: {exc}") from exc
    else:
        print(text)


def fmt(x: float) -> str:
    return f"{x:.10f}"


# -- commands ----------------------------------------------------------------

def cmd_derive(args) -> int:
    config = PipelineConfig(interaction=not args.no_interaction)
    if args.stage == "hylleraas":
        op = hylleraas_operator(config)
        payload, text = op.to_json(), op.render()
    elif args.stage == "perimetric":
        op = perimetric_operator(config)
        payload, text = op.to_json(), op.render()
    else:
        t0 = time.perf_counter()
        rec = pekeris_recurrence(perimetric_operator(config), check=False)
        seconds = time.perf_counter() - t0
        summary = rec.degree_report()
        payload = recurrence_json(rec, config.interaction)
        payload["summary"]["seconds"] = round(seconds, 4)
        lines = [
            f"# terms: {summary['terms']}",
            f"# degree in (l,m,n): {summary['lmnDegree']}, in Z: {summary['zDegree']}, in eps: {summary['epsDegree']}",
        ]
        if not config.interaction:
            ok = hydrogenic_kernel_ok(rec)
            payload["summary"]["hydrogenicKernel"] = ok
            lines.append(f"# delta_(0,0,0) at eps=Z: {'annihilated' if ok else 'NOT annihilated'}")
        text = "\n".join(lines) + "\n" + rec.render()
        emit(json.dumps(payload, indent=2) if args.format == "json" else text, args.output)
        if config.interaction:
            # raises DerivationMismatch, reported as exit 2
            from .transfer import validate

            validate(rec)
        elif not payload["summary"]["hydrogenicKernel"]:
            raise DerivationMismatch("hydrogenic kernel check failed", payload["summary"])
        return 0
    emit(json.dumps(payload, indent=2) if args.format == "json" else text, args.output)
    return 0


def _energy(Z, omega, state, tol, interaction, scan_step=None):
    rec = load_recurrence(interaction)
    return ground_state(Z, omega, state, tol=tol, interaction=interaction, scan_step=scan_step, recurrence=rec)


def cmd_energy(args) -> int:
    if not 1 <= args.charge <= 10:
        log.warning("charge %d is outside the tabulated range 1..10", args.charge)
    res = _energy(args.charge, args.omega, args.state, args.tol, not args.no_interaction, args.scan_step)
    if args.format == "json":
        payload = res.to_json(with_vector=args.vector)
        payload["iterations"] = res.iterations
        payload["seconds"] = round(res.seconds, 4)
        emit(json.dumps(payload, indent=2), args.output)
    else:
        lines = [
            f"Z        = {res.Z}",
            f"omega    = {res.omega} ({res.sym_class}, dim {res.dim})",
            f"epsilon  = {fmt(res.epsilon)}",
            f"energy   = {fmt(res.energy)}",
            f"residual = {res.residual:.3e}",
            f"seconds  = {res.seconds:.3f}",
        ]
        if args.vector:
            lines.append("# l m n coefficient")
            lines += [f"{t[0]} {t[1]} {t[2]} {c:.16e}" for t, c in zip(res.triples, res.vector)]
        emit("\n".join(lines), args.output)
    return 0


def _table_row(job):
    Z, omega, state, tol = job
    try:
        r = _energy(Z, omega, state, tol, True)
    except NUMERIC_FAILURES as exc:
        return {"Z": Z, "error": str(exc)}
    return {
        "Z": Z,
        "dim": r.dim,
        "epsilon": r.epsilon,
        "energy": r.energy,
        "residual": r.residual,
        "iterations": r.iterations,
        "seconds": round(r.seconds, 4),
    }


def energy_table(charges, omega, state, tol=1e-12) -> list[dict]:
    jobs = [(Z, omega, state, tol) for Z in charges]
    n = workers()
    if n > 1:
        load_recurrence(True)  # populate the disk cache before forking
        with ProcessPoolExecutor(n) as pool:
            return list(pool.map(_table_row, jobs))
    return [_table_row(j) for j in jobs]


def render_table(rows: list[dict]) -> str:
    head = f"{'Z':>3} {'dim':>6} {'epsilon':>15} {'E':>16} {'residual':>10} {'iter':>5} {'seconds':>8}"
    out = [head, "-" * len(head)]
    for r in rows:
        if "error" in r:
            out.append(f"{r['Z']:>3} FAILED: {r['error']}")
        else:
            out.append(
                f"{r['Z']:>3} {r['dim']:>6} {fmt(r['epsilon']):>15} {fmt(r['energy']):>16} "
                f"{r['residual']:>10.2e} {r['iterations']:>5} {r['seconds']:>8.3f}"
            )
    return "\n".join(out)


def cmd_table(args) -> int:
    charges = parse_charges(args.charges)
    if any(not 1 <= z <= 10 for z in charges):
        raise UsageError("charges must lie in 1..10")
    rows = energy_table(charges, args.omega, args.state, args.tol)
    if args.format == "json":
        emit(json.dumps({"omega": args.omega, "symClass": args.state, "rows": rows}, indent=2), args.output)
    else:
        emit(render_table(rows), args.output)
    return 2 if any("error" in r for r in rows) else 0


def cmd_charpoly(args) -> int:
    pencil = pencil_for(args.charge, args.omega, args.state, not args.no_interaction,
                        load_recurrence(not args.no_interaction))
    try:
        cp = charpoly_exact(pencil, strategy=args.strategy, workers=workers())
    except InconclusiveError as exc:
        print(json.dumps({"error": str(exc), "provenance": exc.provenance}, indent=2), file=sys.stderr)
        return 2
    payload = cp.to_json()
    payload["pencil"] = {"Z": args.charge, "omega": args.omega, "symClass": args.state, "dim": pencil.dim}
    status = 0
    if args.check_roots:
        try:
            payload["rootCheck"] = cross_check_roots(cp, pencil, args.root_tol)
        except ConsistencyError as exc:
            payload["rootCheck"] = exc.report
            status = 2
    if args.format == "json" or args.output:
        emit(json.dumps(payload, indent=2), args.output)
    else:
        lines = [f"degree {cp.degree}, max coefficient digits {cp.max_digits()}, primes {len(cp.primes)}"]
        if "rootCheck" in payload:
            rc = payload["rootCheck"]
            lines.append(f"largest root: exact {rc['exactRoot']}, numeric {rc['numericRoot']}, gap {rc['gap']}")
        lines += [f"eps^{k}: {c}" for k, c in enumerate(cp.coefficients)]
        emit("\n".join(lines), None)
    return status


def cmd_export(args) -> int:
    pencil = pencil_for(args.charge, args.omega, args.state, not args.no_interaction,
                        load_recurrence(not args.no_interaction))
    paths = export_pencil(pencil, args.out_dir, format=args.format)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2))
    return 0


def convergence_rows(Z: int, omegas: list[int], state: str) -> list[dict]:
    rows, prev = [], None
    for om in omegas:
        r = _energy(Z, om, state, 1e-12, True)
        rows.append({
            "omega": om,
            "dim": r.dim,
            "epsilon": r.epsilon,
            "energy": r.energy,
            "residual": r.residual,
            "delta": None if prev is None else abs(r.epsilon - prev),
        })
        prev = r.epsilon
    return rows


def render_report(Z: int, omegas: list[int], state: str, rows: list[dict]) -> str:
    rec = load_recurrence(True)
    s = rec.degree_report()
    lines = [
        f"# Two-electron ground state, Z = {Z} ({state})",
        "",
        "## Configuration",
        "",
        f"- package version: {__version__}",
        f"- recurrence: {s['terms']} shifts, degree {s['lmnDegree']} in (l,m,n), "
        f"{s['zDegree']} in Z, {s['epsDegree']} in eps",
        f"- truncation orders: {', '.join(map(str, omegas))}",
        "- basis ordering: graded lexicographic in (l+m+n, l, m)",
        "",
        "## Convergence",
        "",
        "| omega | dim | epsilon | E | residual | abs change in epsilon |",
        "|---:|---:|---:|---:|---:|---:|",
    ]
    for r in rows:
        d = "" if r["delta"] is None else f"{r['delta']:.3e}"
        lines.append(f"| {r['omega']} | {r['dim']} | {fmt(r['epsilon'])} | {fmt(r['energy'])} | {r['residual']:.2e} | {d} |")
    last = rows[-1]
    lines += [
        "",
        "## Final energy",
        "",
        f"At omega = {last['omega']}: epsilon = {fmt(last['epsilon'])}, E = {fmt(last['energy'])} hartree.",
        "",
    ]
    return "\n".join(lines)


def cmd_report(args) -> int:
    omegas = parse_int_list(args.omega_list)
    if not omegas:
        raise UsageError("empty omega list")
    rows = convergence_rows(args.charge, omegas, args.state)
    emit(render_report(args.charge, omegas, args.state, rows), args.out)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pekeris", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, charge=True):
        if charge:
            sp.add_argument("--charge", "-Z", type=int, default=2)
        sp.add_argument("--omega", "-w", type=int, default=12)
        sp.add_argument("--state", choices=(PARA, ORTHO), default=PARA)

    d = sub.add_parser("derive", help="print a derivation stage")
    d.add_argument("--stage", choices=("hylleraas", "perimetric", "recurrence"), default="recurrence")
    d.add_argument("--no-interaction", action="store_true")
    d.add_argument("--format", choices=("text", "json"), default="text")
    d.add_argument("--output", "-o")
    d.set_defaults(func=cmd_derive)

    e = sub.add_parser("energy", help="largest root for one configuration")
    common(e)
    e.add_argument("--tol", type=float, default=1e-12)
    e.add_argument("--scan-step", type=float)
    e.add_argument("--vector", action="store_true")
    e.add_argument("--no-interaction", action="store_true")
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.add_argument("--output", "-o")
    e.set_defaults(func=cmd_energy)

    t = sub.add_parser("table", help="energies for a list of charges")
    t.add_argument("--charges", default="1..10")
    common(t, charge=False)
    t.add_argument("--tol", type=float, default=1e-12)
    t.add_argument("--format", choices=("text", "json"), default="text")
    t.add_argument("--output", "-o")
    t.set_defaults(func=cmd_table)

    c = sub.add_parser("charpoly", help="exact det(A - eps B)")
    common(c)
    c.add_argument("--strategy", choices=("hadamard", "stable"), default="hadamard")
    c.add_argument("--check-roots", action="store_true")
    c.add_argument("--root-tol", type=float, default=1e-8)
    c.add_argument("--no-interaction", action="store_true")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--output", "-o")
    c.set_defaults(func=cmd_charpoly)

    x = sub.add_parser("export", help="write A and B as sparse integer matrices")
    common(x)
    x.add_argument("--format", choices=("matrixmarket", "json"), default="matrixmarket")
    x.add_argument("--out-dir", default=".")
    x.add_argument("--no-interaction", action="store_true")
    x.set_defaults(func=cmd_export)

    r = sub.add_parser("report", help="markdown convergence report")
    r.add_argument("--charge", "-Z", type=int, default=2)
    r.add_argument("--omega-list", default="6,8,10,12")
    r.add_argument("--state", choices=(PARA, ORTHO), default=PARA)
    r.add_argument("--out", "-o")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if getattr(args, "omega", 0) < 0:
            raise UsageError("omega must be non-negative")
        if getattr(args, "charge", 1) < 1:
            raise UsageError("charge must be a positive integer")
        return args.func(args)
    except UsageError as exc:
        print(f"pekeris: {exc}", file=sys.stderr)
        return 1
    except NUMERIC_FAILURES as exc:
        print(f"pekeris: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pekeris: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations and bugs
        print(f"pekeris: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
