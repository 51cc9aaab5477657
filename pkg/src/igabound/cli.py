"""Command-line front end.

    igabound solve        [--config FILE] [--set key=value ...] [--out DIR]
    igabound converge     ...
    igabound domain-study ...
    igabound three-body   ...
    igabound reference

Exit codes: 0 success, 2 invalid configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .assembly import assemble, dump_coordinate
from .config import ConfigError, RunConfig, defaults_for, format_value, parse_config, render, KEYS
from .eigensolve import classify_bound, solve_smallest
from .errors import IgaBoundError, InvalidArgument, MatrixNotSPD, NoConvergence
from .studies import (REFERENCE_LEDGER, convergence_study, domain_study, parity_of,
                      required_half_width, sample_state, three_body_study, uniform_space,
                      write_convergence_csv, write_csv, write_domain_csv, write_spectrum_csv,
                      write_state_csv)

log = logging.getLogger("igabound")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
COMMANDS = ("solve", "converge", "domain-study", "three-body", "reference")


class Run:
    """Collects outputs in a staging directory and publishes them on success."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        self.stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
        self.notes: list[str] = []
        self.timings: dict[str, float] = {}

    def path(self, name: str) -> Path:
        return self.stage / name

    def timed(self, label):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[label] = time.perf_counter() - self.t0
        return _Timer()

    def publish(self):
        for f in sorted(self.stage.iterdir()):
            shutil.move(str(f), str(self.out_dir / f.name))
        self.stage.rmdir()

    def discard(self):
        shutil.rmtree(self.stage, ignore_errors=True)


def _write_manifest(run: Run, cfg: RunConfig, command: str):
    lines = [f"# igabound {__version__} run manifest", f"# command: {command}"]
    lines += [f"# timing.{k}: {v:.3f} s" for k, v in run.timings.items()]
    lines += [f"# {n}" for n in run.notes]
    lines += render(cfg)
    run.path("manifest.cfg").write_text("\n".join(lines) + "\n")


def cmd_solve(cfg: RunConfig, run: Run):
    spec = cfg.problem_spec()
    space = uniform_space(spec, cfg.degree, cfg.elements, cfg.stretch)
    with run.timed("assemble"):
        system = assemble(space, spec, cfg.quad_points, threads=cfg.threads,
                          deterministic=cfg.deterministic)
    with run.timed("solve"):
        sol = solve_smallest(system, min(cfg.k, system.n), tol=cfg.tol, path=cfg.solver_path)
    sol = classify_bound(sol, space, cfg.bound_threshold)
    if space.axes[-1].is_symmetric(tol=1e-12 * spec.half_width):
        sol = replace(sol, parity=tuple(parity_of(sol.vectors[:, j], system).label for j in range(sol.k)))
    write_spectrum_csv(run.path("spectrum.csv"), sol)
    for j in range(sol.k):
        s = sample_state(sol.vectors[:, j], space, cfg.sample_window, cfg.sample_resolution)
        write_state_csv(run.path(f"state_{j}.csv"), s)
    if cfg.dump_matrices:
        dump_coordinate(system.K, run.path("K.coo"))
        dump_coordinate(system.M, run.path("M.coo"))
    run.notes.append(f"solver.path_used: {sol.path}")
    run.notes.append(f"n_interior: {system.n}")
    run.notes.append("residuals: " + ",".join(f"{r:.3e}" for r in sol.residuals))
    run.notes.append(f"bound_states: {sol.n_bound}")
    print(f"{sol.n_bound} bound state(s); lowest energies:")
    for j, lam in enumerate(sol.values):
        print(f"  {j}: {lam:.12g}{'  bound' if sol.bound_flags[j] else ''}")


def cmd_converge(cfg: RunConfig, run: Run):
    spec = cfg.problem_spec()
    ref = None if cfg.converge_reference == "self" else cfg.converge_reference
    with run.timed("study"):
        st = convergence_study(spec, cfg.converge_degrees, cfg.converge_elements, reference=ref,
                               quad_points=cfg.quad_points, path=cfg.solver_path)
    write_convergence_csv(run.path("convergence.csv"), st)
    write_csv(run.path("convergence_fits.csv"), ["degree", "slope", "intercept", "r2", "n_points"],
              [(p, f.slope, f.intercept, f.r2, f.n_points) for p, f in st.fits.items()])
    run.notes.append(f"reference: {st.reference[0]:.17g}")
    for p, f in st.fits.items():
        print(f"p={p}: slope {f.slope:.3f} (expected {2 * p}), R^2 {f.r2:.5f}, {f.n_points} points")


def cmd_domain(cfg: RunConfig, run: Run):
    spec = cfg.problem_spec()
    if spec.dim != 1:
        raise ConfigError("domain-study runs two-body problems only", key="kind")
    ref = None if cfg.domain_reference == "self" else cfg.domain_reference
    states = tuple(range(cfg.domain_states))
    with run.timed("study"):
        st = domain_study(spec.shape, spec.beta, cfg.domain_half_widths, h=cfg.domain_h,
                          degree=cfg.degree, reference=ref, states=states,
                          reference_half_width=cfg.domain_reference_half_width)
    write_domain_csv(run.path("domain.csv"), st)
    rows = []
    for s, f in st.fits.items():
        xt = required_half_width(f, cfg.domain_target_error)
        rows.append((s + 1, f.slope, f.intercept, f.r2, f.n_points, xt))
        print(f"state {s + 1}: log10 e = {f.slope:.3f} x_eps + {f.intercept:.3f} "
              f"(R^2 {f.r2:.5f}); e = {cfg.domain_target_error:g} needs x_eps = {xt:.2f}")
    write_csv(run.path("domain_fits.csv"),
              ["state", "slope", "intercept", "r2", "n_points", "x_eps_for_target"], rows)


def cmd_three_body(cfg: RunConfig, run: Run):
    spec = cfg.problem_spec()
    if spec.dim != 2:
        raise ConfigError("three-body command needs kind = three-body", key="kind")
    with run.timed("study"):
        st = three_body_study(spec, cfg.elements, cfg.degree, cfg.stretch, k=cfg.k,
                              path=cfg.solver_path, tol=cfg.tol, threads=cfg.threads,
                              deterministic=cfg.deterministic, bound_threshold=cfg.bound_threshold)
    iga = REFERENCE_LEDGER["three-body/iga"].values
    bo = REFERENCE_LEDGER["three-body/bo"].values
    for i, r in enumerate(st.runs):
        write_spectrum_csv(run.path(f"spectrum_kappa{i}.csv"), r.solution)
        run.notes.append(f"kappa_candidate_{i}: {r.kappa[0]!r},{r.kappa[1]!r} "
                         f"max_error_iga={r.max_error_iga:.3e} max_error_bo={r.max_error_bo:.3e}")
    best = st.best_run
    run.notes.append(f"matched_kappa: {best.kappa[0]!r},{best.kappa[1]!r}")
    run.notes.append("residuals: " + ",".join(f"{x:.3e}" for x in best.solution.residuals))
    sol = best.solution
    write_spectrum_csv(run.path("spectrum.csv"), sol)
    m = min(sol.k, len(iga))
    write_csv(run.path("comparison.csv"),
              ["j", "lambda", "parity", "lambda_iga_ref", "lambda_bo_ref", "error_iga", "error_bo"],
              [(j, float(sol.values[j]), sol.parity[j], iga[j], bo[j],
                abs(float(sol.values[j]) - iga[j]), abs(float(sol.values[j]) - bo[j])) for j in range(m)])
    for j in range(sol.k):
        s = sample_state(sol.vectors[:, j], best.system.space, cfg.sample_window, cfg.sample_resolution)
        write_state_csv(run.path(f"state_{j}.csv"), s)
    print(f"matched kappa = ({best.kappa[0]:.6g}, {best.kappa[1]:.6g}); max |error| vs IGA column "
          f"{best.max_error_iga:.3e}")
    for j in range(sol.k):
        ref = f"  ref {iga[j]:.10f}" if j < len(iga) else ""
        print(f"  {j}: {sol.values[j]:.10f}  {sol.parity[j]:<5}{ref}")


def cmd_reference(cfg, run=None):
    for key, entry in REFERENCE_LEDGER.items():
        print(f"{key}: {', '.join(f'{v:.11g}' for v in entry.values)}")
        print(f"    {entry.citation}")


HANDLERS = {"solve": cmd_solve, "converge": cmd_converge, "domain-study": cmd_domain,
            "three-body": cmd_three_body}


def _bool_arg(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return "true"
    if t in ("0", "false", "no", "off"):
        return "false"
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _key_help(command: str) -> str:
    cfg = defaults_for(command)
    lines = ["config keys (defaults):"]
    for k in KEYS:
        lines.append(f"  {k.name} = {format_value(getattr(cfg, k.field))}    # {k.help}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        help="override a configuration key (repeatable)")
    common.add_argument("--out", metavar="DIR", help="output directory (output.dir)")
    common.add_argument("--threads", metavar="N", type=int, help="assembly threads (run.threads)")
    common.add_argument("--deterministic", metavar="BOOL", type=_bool_arg,
                        help="fixed-order parallel summation (run.deterministic)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="igabound", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    descr = {
        "solve": "lowest eigenpairs of one problem",
        "converge": "eigenvalue error against mesh size per degree",
        "domain-study": "eigenvalue error against truncation half-width",
        "three-body": "three-body spectrum with parity labels",
        "reference": "print the reference energies",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=descr[name], description=descr[name],
                       epilog=_key_help(name), formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "reference":
        cmd_reference(None)
        return EXIT_OK

    overrides = list(args.set)
    if args.out is not None:
        overrides.append(f"output.dir={args.out}")
    if args.threads is not None:
        overrides.append(f"run.threads={args.threads}")
    if args.deterministic is not None:
        overrides.append(f"run.deterministic={args.deterministic}")
    try:
        cfg = parse_config(args.config, overrides, command=args.command)
    except ConfigError as exc:
        print(f"igabound: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    run = Run(Path(cfg.out_dir))
    try:
        HANDLERS[args.command](cfg, run)
        _write_manifest(run, cfg, args.command)
    except (NoConvergence, MatrixNotSPD) as exc:
        run.discard()
        print(f"igabound: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InvalidArgument, IgaBoundError) as exc:
        run.discard()
        print(f"igabound: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BaseException:
        run.discard()
        raise
    run.publish()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
