"""Command line entry point.

Exit status: 0 success, 1 usage/IO/precondition error, 2 validation failure,
3 finite-speed bound violated.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bc_algebra import Local, classify_locality, validate_pair
from .charges import activation_times, bc_residual, default_activation_threshold
from .free_wave import SphereRule, admissibility_problems
from .scenario import Scenario, ScenarioError, load_scenario, serialize_scenario
from .wavefield import (build_grid, default_snapshot_times, propagation_experiment, simulate,
                        snapshot)

log = logging.getLogger("pointwave")

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_VIOLATED = 0, 1, 2, 3


def fmt(x: float) -> str:
    return format(float(x) + 0.0, ".12g")


def _fmt_complex(z) -> str:
    z = complex(z)
    return f"{fmt(z.real)}{'+' if z.imag + 0.0 >= 0 else '-'}{fmt(abs(z.imag))}j"


def _matrix_lines(M) -> list:
    return ["  [" + ", ".join(_fmt_complex(z) for z in row) + "]" for row in np.asarray(M)]


def write_charges_csv(path: Path, times, values) -> None:
    n = values.shape[1]
    header = ["t"] + [f"{part}_zeta_{k + 1}" for k in range(n) for part in ("re", "im")]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for t, row in zip(times, values):
            cells = [fmt(t)]
            for z in row:
                cells += [fmt(z.real), fmt(z.imag)]
            fh.write(",".join(cells) + "\n")


def write_snapshot_csv(path: Path, points, values) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,z,re_phi,im_phi\n")
        for p, v in zip(points, values):
            fh.write(f"{fmt(p[0])},{fmt(p[1])},{fmt(p[2])},{fmt(v.real)},{fmt(v.imag)}\n")


def _sign(s: Scenario) -> float:
    return -1.0 if s.direction == "backward" else 1.0


def cmd_validate(s: Scenario, out: Path) -> int:
    config = s.config
    report = validate_pair(config)
    problems = admissibility_problems(s.initial_data, config)
    lines = [f"scenario: {s.name}", f"points: {config.n}", str(report)]
    lines += [f"FAIL initial data: {p}" for p in problems] or ["PASS initial data admissible"]
    ok = report.ok and not problems
    lines.append("valid" if ok else "invalid")
    text = "\n".join(lines) + "\n"
    (out / "validation.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_classify(s: Scenario, out: Path) -> int:
    ext = classify_locality(s.config)
    lines = [f"scenario: {s.name}", f"verdict: {ext.kind}",
             f"A invertible: {'yes' if ext.a_invertible else 'no'}"]
    v = ext.verdict
    if ext.kind == "Invalid":
        lines.append(f"reason: {v.reason} ({v.message})")
    if ext.hermitian_H is not None:
        lines.append("H = A^-1 B:")
        lines += _matrix_lines(ext.hermitian_H)
    if isinstance(v, Local):
        lines.append("diagonalizing transform M:")
        lines += _matrix_lines(v.transform)
        lines.append("diag(M A): " + ", ".join(_fmt_complex(z) for z in v.diag_A))
        lines.append("diag(M B): " + ", ".join(_fmt_complex(z) for z in v.diag_B))
        lines.append("local couplings diag(M B)/diag(M A): "
                     + ", ".join(_fmt_complex(z) for z in v.parameters()))
    text = "\n".join(lines) + "\n"
    (out / "classification.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_INVALID if ext.kind == "Invalid" else EXIT_OK


def cmd_simulate(s: Scenario, out: Path) -> int:
    if cmd_validate(s, out) != EXIT_OK:
        return EXIT_INVALID
    config, data = s.config, s.initial_data
    sim = simulate(config, data, s.T, s.h, s.quadrature)
    sign = _sign(s)
    write_charges_csv(out / "charges.csv", sign * sim.history.times, sim.history.values)

    delta = s.activation_threshold or default_activation_threshold(sim.forcing)
    tau = activation_times(sim.history, delta)
    times = s.snapshot_times if s.snapshot_times is not None else default_snapshot_times(tau, s.T)
    grid = build_grid(config, data, s.grid, s.T)
    keep = ~grid.excluded
    for t in times:
        snap = snapshot(config, data, sim.history, t, grid, s.quadrature)
        write_snapshot_csv(out / f"snapshot_t{sign * t + 0.0:.4f}.csv", snap.points[keep], snap.values[keep])

    residual = bc_residual(config, sim.history, sim.forcing)
    summary = {
        "scenario": s.name,
        "direction": s.direction,
        "T": s.T,
        "h": s.h,
        "bc_residual": residual,
        "activation_threshold": delta,
        "activation_times": [None if not np.isfinite(a) else sign * a for a in tau],
        "snapshot_times": [sign * t + 0.0 for t in times],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"bc residual: {fmt(residual)}")
    return EXIT_OK


def cmd_propagation(s: Scenario, out: Path) -> int:
    if cmd_validate(s, out) != EXIT_OK:
        return EXIT_INVALID
    report = propagation_experiment(
        s.config, s.initial_data, s.T, s.h, s.grid, s.snapshot_times, s.quadrature, s.name,
        support_threshold=s.support_threshold, activation_threshold=s.activation_threshold)
    doc = report.to_dict()
    doc["direction"] = s.direction
    doc["classification"] = classify_locality(s.config).kind
    (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"verdict: {report.verdict}")
    if report.violation:
        v = report.violation
        print(f"first violation at t={fmt(v['t'])}: diameter {fmt(v['diameter'])} > bound {fmt(v['bound'])}")
    return EXIT_OK if report.respected else EXIT_VIOLATED


COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "propagation-test": cmd_propagation,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pointwave",
                                 description="Wave equation with point interactions in R^3")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--scenario", required=True, help="scenario YAML file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--step", type=float, default=None, help="override the integration step h")
    ap.add_argument("--quad-order", type=int, default=None,
                    help="polar Gauss-Legendre order (azimuth uses twice as many nodes)")
    ap.add_argument("--workers", type=int, default=None, help="threads for field evaluation")
    ap.add_argument("--seed", type=int, default=None, help="accepted for uniformity; unused")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run_command(command: str, scenario: Scenario, output_dir) -> int:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.echo.yaml").write_text(serialize_scenario(scenario), encoding="utf-8")
    return COMMANDS[command](scenario, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers:
        import numba
        numba.set_num_threads(min(args.workers, numba.config.NUMBA_NUM_THREADS))
    try:
        scenario = load_scenario(args.scenario)
        if args.step is not None:
            scenario = replace(scenario, h=args.step)
        if args.quad_order is not None:
            scenario = replace(scenario, quadrature=SphereRule(args.quad_order, 2 * args.quad_order))
        return run_command(args.command, scenario, args.out)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
