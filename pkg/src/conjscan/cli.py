"""Command-line driver: ``conjscan <subcommand> --problem FILE [options]``.

Exit codes: 0 success, 1 usage/configuration/numerical error, 2 violated
mathematical identity (THEOREM_VIOLATION, SMALE_VIOLATION, CONVERSE_VIOLATION).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .assembly import Grid, assemble_operator
from .config import LoadedConfig, RunConfig, demo_names, load_config
from .crossing import certify_conjugate_instant
from .errors import IDENTITY_CODES, ConjscanError
from .inertia import kernel_dimension, mode_morse_indices, morse_index
from .matrix_lab import lab_batch
from .nonlinear import verify_bifurcation_theorem
from .problem import validate
from .scan import scan_conjugate_instants, verify_smale_identity

SCAN_COLUMNS = ("r0", "multiplicity", "signature", "regular", "gamma_min_eig", "gamma_max_eig",
                "forms_rel_disagreement")
LAB_COLUMNS = ("seed", "d", "n_crossings", "lhs", "rhs", "holds")
BIFURCATE_COLUMNS = ("s", "k", "r", "amplitude")

SUBCOMMANDS = ("validate", "morse", "scan", "certify", "verify-smale", "matrix-lab", "bifurcate")


def format_value(value) -> str:
    """CSV cell: reals to 12 significant digits, booleans as true/false."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(path: Path, columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    path.write_text(buf.getvalue())
    return buf.getvalue()


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def format_table(columns, rows) -> str:
    cells = [[format_value(r[c]) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConjscanError("USAGE", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="conjscan", description="Conjugate instants, Morse indices and bifurcation "
                                                  "checks for Dirichlet problems on shrinking domains.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    helps = {
        "validate": "check coefficients and nonlinearity",
        "morse": "Morse index (per angular mode) at one radius",
        "scan": "locate and certify conjugate instants",
        "certify": "certify a single conjugate instant (or all scanned ones)",
        "verify-smale": "scan and check the Morse-index identity",
        "matrix-lab": "jump formula on seeded random matrix paths",
        "bifurcate": "nonlinear branch radii versus conjugate instants (interval only)",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--problem", required=name != "matrix-lab",
                       help="problem config file or shipped demo name (%s)" % ", ".join(demo_names()))
        p.add_argument("--output", help="output directory (default: current directory)")
        if name == "matrix-lab":
            p.add_argument("--seed", type=int, help="first seed")
            p.add_argument("--paths", type=int, help="number of seeded paths")
            p.add_argument("--dims", help="comma-separated path dimensions, cycled over seeds")
            continue
        p.add_argument("--n", type=int, help="grid nodes")
        if name == "validate":
            continue
        if name == "morse":
            p.add_argument("--r", type=float, default=1.0, help="radius (default 1)")
            continue
        p.add_argument("--samples", type=int, help="radius samples for the scan")
        p.add_argument("--refine-tol", type=float, help="bisection width for crossings")
        p.add_argument("--kernel-tol", type=float, help="relative kernel window")
        p.add_argument("--r-min", type=float, help="lower end of the scanned radii")
        if name == "certify":
            p.add_argument("--r0", type=float, help="radius to certify (default: every scanned one)")
        if name == "bifurcate":
            p.add_argument("--s-schedule", help="comma-separated initial slopes")
    return parser


def _load(args) -> tuple[LoadedConfig | None, RunConfig]:
    loaded = load_config(args.problem) if args.problem else None
    run = loaded.run if loaded else RunConfig()
    overrides = {k: getattr(args, k, None)
                 for k in ("n", "samples", "refine_tol", "kernel_tol", "r_min", "seed", "paths", "output")}
    if getattr(args, "dims", None):
        overrides["dims"] = tuple(int(v) for v in args.dims.replace(",", " ").split())
    if getattr(args, "s_schedule", None):
        overrides["s_schedule"] = tuple(float(v) for v in args.s_schedule.replace(",", " ").split())
    return loaded, run.updated(**overrides)


def _problem(loaded):
    if loaded is None or loaded.problem is None:
        raise ConjscanError("INVALID_CONFIG", "config defines no problem")
    report = validate(loaded.problem)
    report.raise_if_failed()
    return loaded.problem


def _scan_report(problem, run: RunConfig):
    grid = Grid(run.n)
    crossings = scan_conjugate_instants(problem, grid, run.samples, run.refine_tol, run.r_min)
    return verify_smale_identity(problem, grid, crossings, r_samples=run.samples,
                                 refine_tol=run.refine_tol, r_min=run.r_min, kernel_tol=run.kernel_tol)


def _emit_scan(report, out: Path) -> int:
    rows = [c.to_row() for c in report.crossings]
    write_csv(out / "scan.csv", SCAN_COLUMNS, rows)
    write_json(out / "summary.json", report.to_dict())
    print(format_table(SCAN_COLUMNS, rows) if rows else "no conjugate instants in (r_min, 1)")
    print(f"morse index at r=1: {report.smale_lhs}   sum of multiplicities: {report.smale_rhs}   "
          f"identity {'holds' if report.smale_holds else 'FAILS'}")
    print(f"distinct bifurcation instants: at least {report.bifurcation_lower_bound}")
    if report.issues:
        print("issues: " + ", ".join(report.issues))
    return 2 if IDENTITY_CODES & set(report.issues) else 0


def cmd_validate(args, loaded, run) -> int:
    if loaded is None or loaded.problem is None:
        raise ConjscanError("INVALID_CONFIG", "config defines no problem")
    report = validate(loaded.problem)
    print(report.format())
    return 0 if report.passed else 1


def cmd_morse(args, loaded, run) -> int:
    problem = _problem(loaded)
    grid = Grid(run.n)
    per_mode = mode_morse_indices(problem, args.r, grid)
    total = morse_index(problem, args.r, grid)
    if problem.kind == "interval":
        print(f"morse index at r={args.r:.12g}: {total}")
    else:
        rows = [{"nu": nu, "count": c, "weight": problem.mode(nu).multiplicity_weight} for nu, c in per_mode.items()]
        print(format_table(("nu", "count", "weight"), rows))
        print(f"morse index at r={args.r:.12g}: {total}")
    write_json(Path(run.output) / "morse.json",
               {"problem_digest": problem.digest(), "r": args.r, "n_nodes": run.n, "morse_index": total,
                "per_mode": {str(k): v for k, v in per_mode.items()}})
    return 0


def cmd_scan(args, loaded, run) -> int:
    return _emit_scan(_scan_report(_problem(loaded), run), Path(run.output))


def cmd_certify(args, loaded, run) -> int:
    if args.r0 is None:
        return cmd_scan(args, loaded, run)
    problem = _problem(loaded)
    grid = Grid(run.n)
    mode = None
    if problem.kind == "radial":
        mode = [problem.mode(nu) for nu in mode_morse_indices(problem, 1.0, grid)
                if kernel_dimension(assemble_operator(problem, problem.mode(nu), args.r0, grid), run.kernel_tol)]
        if not mode:
            raise ConjscanError("NO_CROSSING", "no kernel at this radius", r0=args.r0)
    report = certify_conjugate_instant(problem, mode, args.r0, grid, kernel_tol=run.kernel_tol)
    row = report.to_row()
    write_csv(Path(run.output) / "scan.csv", SCAN_COLUMNS, [row])
    write_json(Path(run.output) / "certify.json", report.to_dict())
    print(format_table(SCAN_COLUMNS, [row]))
    if report.issues:
        print("issues: " + ", ".join(report.issues))
    return 2 if IDENTITY_CODES & set(report.issues) else 0


def cmd_verify_smale(args, loaded, run) -> int:
    return cmd_scan(args, loaded, run)


def cmd_matrix_lab(args, loaded, run) -> int:
    rows = lab_batch(range(run.seed, run.seed + run.paths), run.dims)
    for r in rows:
        r["n_crossings"] = r.pop("crossings")
    write_csv(Path(run.output) / "matrix_lab.csv", LAB_COLUMNS, rows)
    failed = [r for r in rows if r["holds"] is False]
    skipped = [r for r in rows if r["holds"] is None]
    print(f"{len(rows)} paths: {len(rows) - len(failed) - len(skipped)} hold, {len(failed)} fail, "
          f"{len(skipped)} skipped (degenerate crossing)")
    return 2 if failed else 0


def cmd_bifurcate(args, loaded, run) -> int:
    problem = _problem(loaded)
    scan = scan_conjugate_instants(problem, Grid(run.n), run.samples, run.refine_tol, run.r_min)
    report = verify_bifurcation_theorem(problem, scan, run.s_schedule, r_min=run.r_min)
    rows = [{"s": p.s, "k": p.k, "r": p.r, "amplitude": p.amplitude} for p in report.points]
    out = Path(run.output)
    write_csv(out / "bifurcate.csv", BIFURCATE_COLUMNS, rows)
    write_json(out / "bifurcate.json", report.to_dict())
    print(format_table(BIFURCATE_COLUMNS, rows) if rows else "no branch radii in (r_min, 1]")
    print("conjugate instants: " + ", ".join(f"{r:.10g}" for r in report.conjugate_instants))
    print("limit radii:        " + ", ".join(f"{r:.10g}" for r in report.limits))
    if report.issues:
        print("issues: " + ", ".join(report.issues))
    return 2 if IDENTITY_CODES & set(report.issues) else 0


COMMANDS = {
    "validate": cmd_validate,
    "morse": cmd_morse,
    "scan": cmd_scan,
    "certify": cmd_certify,
    "verify-smale": cmd_verify_smale,
    "matrix-lab": cmd_matrix_lab,
    "bifurcate": cmd_bifurcate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        loaded, run_cfg = _load(args)
        Path(run_cfg.output).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, loaded, run_cfg)
    except ConjscanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if exc.code in IDENTITY_CODES else 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
