"""Command-line surface.

Subcommands: validate, simulate, classify, example, invlaplace.
Exit codes: 0 ok/admissible, 1 usage or schema error, 2 inadmissible
(or golden-example regression), 3 solver failure.  The default output
directory comes from the MEMKERNEL_OUT environment variable (falling
back to the working directory).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config
from .evolution_solver import (
    SolverBlowUpError,
    TimeGrid,
    closed_form_lambdas,
    convex_semigroup_mixture,
    laplace_domain_solve,
    trajectory_cptp_scan,
    volterra_solve,
)
from .kernel_families import (
    BiExponential,
    Exponential,
    Hypoexponential,
    Scaled,
    Sinusoidal,
    integral_bound_check,
    kernel_eigenvalues_laplace,
    kernel_time_domain,
    polynomial_admissibility_check,
    triangle_check,
)
from .laplace_tools import RationalFunction, cm_check, gaver_stehfest, partial_fraction_decompose
from .markovianity import blp_condition_check, blp_measure, cp_divisibility_check, local_rates_from_f
from .output import RunReport, trajectory_csv, trajectory_json, write_text_atomic
from .specfile import LoadedSpec, SpecFileError, load_spec_file

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INADMISSIBLE = 2
EXIT_SOLVER = 3

ROUTES = ("closed", "volterra", "laplace")


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("MEMKERNEL_OUT", "."))


def _parse_grid(text: str) -> TimeGrid:
    try:
        t_max, n_steps = text.split(":")
        return TimeGrid(t_max=float(t_max), n_steps=int(n_steps))
    except (ValueError, TypeError):
        raise SpecFileError(f"--grid expects t_max:n_steps, got {text!r}") from None


def _load(args) -> LoadedSpec:
    loaded = load_spec_file(args.spec)
    if args.grid:
        loaded = LoadedSpec(kernel=loaded.kernel, grid=_parse_grid(args.grid),
                            outputs=loaded.outputs, raw=loaded.raw)
    return loaded


def _positive_roots(waiting):
    if isinstance(waiting, Exponential):
        return (waiting.rate,)
    if isinstance(waiting, BiExponential):
        return (waiting.rate1, waiting.rate2)
    if isinstance(waiting, Hypoexponential):
        return waiting.roots
    return None


def _admissibility_verdicts(loaded: LoadedSpec) -> dict:
    kernel, grid = loaded.kernel, loaded.grid
    verdicts = {
        "triangle": triangle_check(kernel.aniso),
        "integral_bound": integral_bound_check(kernel, grid),
    }
    roots = _positive_roots(kernel.waiting)
    if roots is not None:
        verdicts["polynomial"] = polynomial_admissibility_check(roots, kernel.aniso)
    w_coeffs = getattr(kernel.waiting, "w_coefficients", None)
    if w_coeffs is not None:
        fhat_over_s = RationalFunction([1.0], np.convolve(w_coeffs, [1.0, 0.0]))
    else:
        laplace = kernel.waiting.laplace
        fhat_over_s = lambda s: laplace(s) / s
    verdicts["transform_cm"] = cm_check(fhat_over_s)
    return verdicts


def _verdicts_dict(verdicts: dict) -> dict:
    return {name: v.to_dict() for name, v in verdicts.items()}


def _is_admissible(verdicts: dict) -> bool:
    return all(v.passed for v in verdicts.values())


def _report_skeleton(command: str, loaded: LoadedSpec | None) -> RunReport:
    return RunReport(command=command,
                     spec_echo=loaded.raw if loaded else {},
                     tool_version=__version__)


def _finish_report(report: RunReport, out_dir: Path, name: str, t0: float) -> Path:
    report.wall_time_s = time.perf_counter() - t0
    path = out_dir / name
    write_text_atomic(path, report.to_json())
    return path


def cmd_validate(args) -> int:
    t0 = time.perf_counter()
    loaded = _load(args)
    verdicts = _admissibility_verdicts(loaded)
    report = _report_skeleton("validate", loaded)
    report.verdicts = _verdicts_dict(verdicts)
    admissible = _is_admissible(verdicts)
    path = _finish_report(report, _out_dir(args), "validate_report.json", t0)
    for name, v in verdicts.items():
        status = "pass" if v.passed else "FAIL"
        print(f"{name:16s} {status}")
    print(f"{'admissible' if admissible else 'inadmissible'}; report: {path}")
    return EXIT_OK if admissible else EXIT_INADMISSIBLE


def _route_trajectory(route: str, loaded: LoadedSpec):
    kernel, grid = loaded.kernel, loaded.grid
    if route == "closed":
        return closed_form_lambdas(kernel, grid)
    if route == "volterra":
        traj = volterra_solve(kernel_time_domain(kernel), grid)
    elif route == "laplace":
        method = "talbot" if kernel.waiting.oscillatory else "stehfest"
        traj = laplace_domain_solve(kernel_eigenvalues_laplace(kernel), grid,
                                    method=method)
        if method == "talbot":
            traj.notes = traj.notes + (
                "oscillatory transform: Talbot inversion, degraded accuracy",)
    else:
        raise ValueError(f"unknown route {route!r}")
    traj.cumulative = np.asarray(kernel.waiting.F(grid.times()), dtype=float)
    return traj


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    loaded = _load(args)
    out_dir = _out_dir(args)
    verdicts = _admissibility_verdicts(loaded)
    admissible = _is_admissible(verdicts)
    report = _report_skeleton("simulate", loaded)
    report.verdicts = _verdicts_dict(verdicts)
    if not admissible and not args.force:
        _finish_report(report, out_dir, "simulate_report.json", t0)
        print("spec is inadmissible; rerun with --force to simulate anyway",
              file=sys.stderr)
        return EXIT_INADMISSIBLE

    routes = ROUTES if args.route == "all" else (args.route,)
    rates = local_rates_from_f(loaded.kernel, loaded.grid) \
        if "rates" in loaded.outputs else None
    trajectories = {}
    for route in routes:
        try:
            traj = _route_trajectory(route, loaded)
        except SolverBlowUpError as exc:
            report.notes.append(f"route {route}: {exc}")
            _finish_report(report, out_dir, "simulate_report.json", t0)
            print(f"solver blow-up on route {route}: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        trajectories[route] = traj
        suffix = "json" if args.format == "json" else "csv"
        text = (trajectory_json if args.format == "json" else trajectory_csv)(
            traj, rates)
        path = write_text_atomic(out_dir / f"trajectory_{route}.{suffix}", text)
        report.trajectory_files.append(str(path))
        scan = trajectory_cptp_scan(traj)
        report.verdicts[f"cptp_scan_{route}"] = scan.to_dict()
        for note in traj.notes:
            report.notes.append(f"route {route}: {note}")

    if len(trajectories) > 1:
        discrepancy = {}
        names = list(trajectories)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                diff = float(np.nanmax(np.abs(
                    trajectories[a].lambdas - trajectories[b].lambdas)))
                discrepancy[f"{a}_vs_{b}"] = diff
        report.classification = {"route_discrepancy": discrepancy}
        worst = max(discrepancy.values())
        print(f"cross-route max discrepancy: {worst:.3e}")

    path = _finish_report(report, out_dir, "simulate_report.json", t0)
    print(f"wrote {len(trajectories)} trajectory file(s); report: {path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    loaded = _load(args)
    out_dir = _out_dir(args)
    verdicts = _admissibility_verdicts(loaded)
    admissible = _is_admissible(verdicts)
    report = _report_skeleton("classify", loaded)
    report.verdicts = _verdicts_dict(verdicts)
    report.seed = args.seed
    if not admissible and not args.force:
        _finish_report(report, out_dir, "classify_report.json", t0)
        print("spec is inadmissible; rerun with --force to classify anyway",
              file=sys.stderr)
        return EXIT_INADMISSIBLE

    traj = closed_form_lambdas(loaded.kernel, loaded.grid)
    scan = trajectory_cptp_scan(traj)
    divisible = cp_divisibility_check(loaded.kernel, loaded.grid)
    blp = blp_condition_check(traj)
    measure = blp_measure(traj, n_probes=args.probes, seed=args.seed)
    report.verdicts["cptp_scan"] = scan.to_dict()
    report.verdicts["cp_divisibility"] = divisible.to_dict()
    report.verdicts["blp_condition"] = blp.to_dict()
    report.classification = {
        "cptp": scan.passed,
        "cp_divisible": divisible.passed,
        "cp_divisible_until": divisible.first_violation,
        "blp_markovian": blp.passed,
        "blp_measure": measure.measure,
    }
    path = _finish_report(report, out_dir, "classify_report.json", t0)
    print(f"CPTP:          {'yes' if scan.passed else 'no'}"
          + ("" if scan.passed else f" (first violation t = {scan.first_violation:.6g})"))
    print(f"CP-divisible:  {'yes' if divisible.passed else 'no'}"
          + ("" if divisible.passed or divisible.first_violation is None
             else f" (breaks at t = {divisible.first_violation:.6g})"))
    print(f"BLP-Markovian: {'yes' if blp.passed else 'no'}"
          f" (measure {measure.measure:.6g})")
    print(f"report: {path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# golden examples
# --------------------------------------------------------------------------


def _volterra_tolerance(grid: TimeGrid) -> float:
    return max(1e-4, 200.0 * grid.h ** 2)


def _example_spec_doc(n: int) -> dict:
    if n == 1:
        return {"family": "exponential", "params": {"rate": 1.0},
                "a": [1.0, 1.0, 1.0]}
    if n == 2:
        return {"family": "exponential", "params": {"rate": 2.0},
                "a": [1.0, 1.0, 0.5]}
    if n == 3:
        return {"family": "biexponential", "params": {"rate1": 1.0, "rate2": 2.0},
                "a": [1.0, 1.0, 1.0]}
    if n == 4:
        return {"family": "sinusoidal", "params": {"omega": 1.0},
                "a": [1.0, 1.0, "inf"]}
    raise SpecFileError("example number must be 1..4")


def _run_example(n: int, grid: TimeGrid | None, out_dir: Path, report: RunReport):
    from .specfile import parse_spec_dict

    doc = _example_spec_doc(n)
    loaded = parse_spec_dict(doc)
    if grid is not None:
        loaded = LoadedSpec(kernel=loaded.kernel, grid=grid,
                            outputs=loaded.outputs, raw=doc)
    kernel, grid = loaded.kernel, loaded.grid
    times = grid.times()
    closed = closed_form_lambdas(kernel, grid)
    volterra = volterra_solve(kernel_time_domain(kernel), grid)
    volterra.cumulative = closed.cumulative
    rates = local_rates_from_f(kernel, grid)
    vol_tol = _volterra_tolerance(grid)

    failures: list[str] = []

    def check(name: str, err: float, tol: float):
        report.verdicts[f"golden_{name}"] = {
            "passed": bool(err <= tol), "error": float(err), "tolerance": tol}
        if err > tol:
            failures.append(f"{name}: error {err:.3e} > {tol:.1e}")

    check("cross_route", float(np.max(np.abs(volterra.lambdas - closed.lambdas))),
          vol_tol)

    if n == 1:
        z = a = 1.0
        lam_ref = 1.0 - (1.0 / (z * a)) * (1.0 - np.exp(-z * times))
        for k in (1, 2, 3):
            check(f"lambda{k}", float(np.max(np.abs(closed.lambdas[k] - lam_ref))), 1e-6)
        check("p0_asymptote",
              abs(closed.probs[0][-1] - (1.0 - 3.0 / (4.0 * z * a))), 1e-6)
    elif n == 2:
        c = 1.0
        decay = np.exp(-2.0 * c * times)
        check("lambda1", float(np.max(np.abs(closed.lambdas[1] - 0.5 * (1 + decay)))), 1e-6)
        check("lambda3", float(np.max(np.abs(closed.lambdas[3] - decay))), 1e-6)
        mixture = convex_semigroup_mixture(c, grid)
        check("semigroup_mixture",
              float(np.max(np.abs(closed.lambdas - mixture.lambdas))), 1e-6)
        check("gamma12", float(np.nanmax(np.abs(rates.gamma[:2] - c / 2))), 1e-6)
        check("gamma3", float(np.nanmax(np.abs(
            rates.gamma[2] + 0.5 * c * np.tanh(c * times)))), 1e-6)
    elif n == 3:
        c1, c2 = 1.0, 2.0
        F_ref = ((1 - np.exp(-c1 * times)) / c1
                 - (1 - np.exp(-c2 * times)) / c2) / (c2 - c1)
        check("cumulative", float(np.max(np.abs(closed.cumulative - F_ref))), 1e-6)
        scan = trajectory_cptp_scan(closed)
        report.verdicts["golden_cptp"] = scan.to_dict()
        if not scan.passed:
            failures.append("trajectory is not CPTP")
    elif n == 4:
        omega = 1.0
        cosw = np.cos(omega * times)
        check("lambda1", float(np.max(np.abs(closed.lambdas[1] - cosw))), 1e-6)
        check("lambda3", float(np.max(np.abs(closed.lambdas[3] - 1.0))), 1e-6)
        check("p3", float(np.max(np.abs(closed.probs[3] - 0.5 * (1 - cosw)))), 1e-6)
        check("p0", float(np.max(np.abs(closed.probs[0] - 0.5 * (1 + cosw)))), 1e-6)
        if not rates.singular_times:
            failures.append("expected singular local rates, none recorded")
        finite = np.isfinite(rates.gamma[2]) & (np.abs(np.tan(omega * times)) < 10.0)
        gamma3_ref = 0.5 * omega * np.tan(omega * times)
        check("gamma3_regular", float(np.max(np.abs(
            (rates.gamma[2] - gamma3_ref)[finite]))), 1e-6)

    path = write_text_atomic(out_dir / f"example{n}_trajectory.csv",
                             trajectory_csv(closed, rates))
    report.trajectory_files.append(str(path))
    path = write_text_atomic(out_dir / f"example{n}_volterra.csv",
                             trajectory_csv(volterra))
    report.trajectory_files.append(str(path))
    return failures


def cmd_example(args) -> int:
    t0 = time.perf_counter()
    out_dir = _out_dir(args)
    grid = _parse_grid(args.grid) if args.grid else None
    report = RunReport(command=f"example {args.number}", spec_echo=_example_spec_doc(args.number),
                       tool_version=__version__)
    failures = _run_example(args.number, grid, out_dir, report)
    if failures:
        report.notes.extend(failures)
    path = _finish_report(report, out_dir, f"example{args.number}_report.json", t0)
    if failures:
        for f in failures:
            print(f"golden mismatch: {f}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    print(f"example {args.number} reproduced; report: {path}")
    return EXIT_OK


def cmd_invlaplace(args) -> int:
    try:
        num = [float(x) for x in args.num.replace(",", " ").split()]
        den = [float(x) for x in args.den.replace(",", " ").split()]
        times = [float(x) for x in args.times.replace(",", " ").split()]
    except ValueError:
        print("malformed polynomial coefficients or times", file=sys.stderr)
        return EXIT_USAGE
    if not num or not den or not times:
        print("need --num, --den and --times", file=sys.stderr)
        return EXIT_USAGE
    try:
        expansion = partial_fraction_decompose(num, den)
    except (ValueError, ArithmeticError) as exc:
        print(f"cannot decompose: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("partial fractions (pole, multiplicity, residues):")
    for p, m, cs in zip(expansion.poles, expansion.multiplicities,
                        expansion.residues):
        cs_text = ", ".join(f"{c.real:+.12g}{c.imag:+.12g}j" for c in cs)
        print(f"  pole {p.real:+.12g}{p.imag:+.12g}j  x{m}  [{cs_text}]")
    print(f"recombination error: {expansion.recombination_error:.3e}")
    fn = expansion.time_function()
    rf = RationalFunction(num, den)
    print(f"{'t':>12s} {'exact':>22s} {'stehfest':>22s}")
    for t in times:
        exact = float(fn(t))
        approx = gaver_stehfest(rf, t) if t > 0 else float("nan")
        print(f"{t:12.6g} {exact:22.15g} {approx:22.15g}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memkernel",
        description="Construct, certify, solve and classify memory kernels "
                    "for random-unitary qubit evolution.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, spec=True):
        if spec:
            p.add_argument("spec", help="kernel-spec JSON file")
        p.add_argument("--grid", help="override grid as t_max:n_steps")
        p.add_argument("--out", help="output directory (default $MEMKERNEL_OUT or .)")

    p = sub.add_parser("validate", help="admissibility checks only")
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="produce trajectory files")
    add_common(p)
    p.add_argument("--route", choices=ROUTES + ("all",), default="closed")
    p.add_argument("--force", action="store_true",
                   help="simulate even when inadmissible")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="CPTP / CP-divisibility / BLP classification")
    add_common(p)
    p.add_argument("--probes", type=int, default=512)
    p.add_argument("--seed", type=int, default=config.DEFAULT_PROBE_SEED)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("example", help="regenerate a built-in worked example")
    p.add_argument("number", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--grid", help="override grid as t_max:n_steps")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("invlaplace", help="invert a rational Laplace transform")
    p.add_argument("--num", required=True,
                   help="numerator coefficients, highest degree first")
    p.add_argument("--den", required=True,
                   help="denominator coefficients, highest degree first")
    p.add_argument("--times", required=True, help="comma-separated times")
    p.set_defaults(func=cmd_invlaplace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SpecFileError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverBlowUpError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
