"""Batch front door: parse channel or graph files, run named computations
over grids, and emit CSV curves plus a JSON report.

Exit codes: 0 success, 1 usage or parse failure, 2 numerical
non-convergence (partial results are still written, with flags).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import divergence, exponents, hypotest, theta
from .core import (
    CQChannel,
    ClassicalChannel,
    as_cq_channel,
    load_channel,
)
from .errors import GridMismatch, NoConvergence, ParseError, RelboundError, ValidationError
from .exponents import BoundCurve, read_curve_csv, write_curve_csv

COMMANDS = ("divergence", "exponent", "radius", "theta", "umbrella",
            "spumbrella", "hypotest", "report")


@dataclass
class JobSpec:
    command: str
    input_path: str
    output_path: str
    R_grid: np.ndarray | None = None
    rho_grid: np.ndarray | None = None
    s_grid: np.ndarray | None = None
    seed: int = 0
    tol: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        for name, grid in (("R", self.R_grid), ("rho", self.rho_grid), ("s", self.s_grid)):
            if grid is not None:
                grid = np.asarray(grid, dtype=float)
                if grid.size == 0:
                    raise ParseError(f"empty {name} grid")
                if np.any(np.diff(grid) <= 0):
                    raise ParseError(f"{name} grid must be strictly increasing")
        if self.command in ("exponent", "umbrella", "spumbrella") and self.R_grid is None:
            raise ParseError(f"command {self.command!r} requires an R grid")
        if self.command in ("radius", "theta") and self.rho_grid is None:
            raise ParseError(f"command {self.command!r} requires a rho grid")


def parse_grid(text: str, name: str) -> np.ndarray:
    """Parse 'a:b:steps' into an inclusive linear grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParseError(f"--{name} expects a:b:steps, got {text!r}")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"--{name}: could not parse {text!r}")
    if steps < 1:
        raise ParseError(f"--{name}: steps must be >= 1")
    if steps == 1:
        return np.array([a])
    return np.linspace(a, b, steps)


def parse_inputs(path):
    """Channel JSON or theta edge-list, decided by content."""
    if not os.path.exists(path):
        raise ParseError(f"{path}: no such file")
    with open(path) as fh:
        head = fh.read(1)
    if head == "{":
        return load_channel(path)
    return theta.read_graph(path)


def _json_safe(obj):
    if isinstance(obj, float) and np.isinf(obj):
        return "inf"
    if isinstance(obj, (np.floating, np.integer)):
        return _json_safe(float(obj))
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    return repr(obj)


def _write_json(payload: dict, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(_json_safe(payload), fh, indent=2)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _value(name: str, value, optimizer: dict) -> dict:
    return {"name": name, "value": _json_safe(value), "optimizer": _json_safe(optimizer)}


def _require_channel(obj, command: str):
    if isinstance(obj, (ClassicalChannel, CQChannel)):
        return obj
    raise ParseError(f"command {command!r} needs a channel file, got a graph")


# ---------------------------------------------------------------------------
# per-command runners; each returns (values, curves, flags)
# ---------------------------------------------------------------------------

def _run_divergence(channel, job: JobSpec):
    cq = as_cq_channel(channel)
    s_grid = job.s_grid if job.s_grid is not None else np.linspace(0.05, 0.95, 19)
    values, curves = [], []
    for x in range(cq.num_inputs):
        for y in range(x + 1, cq.num_inputs):
            A, B = cq.states[x], cq.states[y]
            d_c, s_star = divergence.chernoff_distance(A, B)
            values.append(_value(f"chernoff[{x},{y}]", d_c, {"s_star": s_star, "pair": [x, y]}))
            values.append(_value(f"bhattacharyya[{x},{y}]",
                                 divergence.bhattacharyya_distance(A, B), {"pair": [x, y]}))
            values.append(_value(f"fidelity[{x},{y}]",
                                 divergence.fidelity_distance(A, B), {"pair": [x, y]}))
            if np.isfinite(d_c):
                profile = divergence.mu_profile(A, B, s_grid)
                pts = [(float(s), float(m)) for s, m in zip(profile.s_grid, profile.mu)]
                curves.append(BoundCurve(points=pts, bound_name=f"mu[{x},{y}]",
                                         params={"pair": [x, y]}))
    return values, curves, {}


def _run_exponent(channel, job: JobSpec):
    values, curves = [], []
    curves.append(exponents.esp_curve(channel, job.R_grid))
    curves.append(exponents.er_curve(channel, job.R_grid))
    curves.append(exponents.eex_curve(channel, job.R_grid))
    R_mid = float(job.R_grid[len(job.R_grid) // 2])
    rep = exponents._esp_report(channel, R_mid)
    if np.isfinite(rep.value):
        values.append(_value("esp_sample", rep.value,
                             {"R": R_mid, "rho_star": rep.optimizer_rho_or_s,
                              "P": rep.optimizer_P}))
    e0_rep = exponents.e0_max(channel, 1.0)
    values.append(_value("e0_at_rho1", e0_rep.value,
                         {"rho": 1.0, "P": e0_rep.optimizer_P}))
    return values, curves, {}


def _run_radius(channel, job: JobSpec):
    values, curves = [], []
    pts = []
    for rho in job.rho_grid:
        cert = exponents.radius_certificate(channel, float(rho))
        rep = exponents.e0_max(as_cq_channel(channel), float(rho))
        values.append(_value(f"r_rho[{rho:g}]", cert.r_rho,
                             {"rho": float(rho), "P": rep.optimizer_P,
                              "residual": cert.max_residual}))
        pts.append((float(rho), float(cert.r_rho)))
    curves.append(BoundCurve(points=pts, bound_name="r_rho",
                             params={"axis": "rho"}))
    return values, curves, {}


def _run_theta(obj, job: JobSpec):
    values, curves = [], []
    if isinstance(obj, theta.ConfusabilityGraph):
        val, rep = theta.lovasz_theta(obj)
        values.append(_value("lovasz_theta", val,
                             {"vectors": rep.vectors, "handle": rep.handle}))
        return values, curves, {}
    channel = obj
    pts = []
    for rho in job.rho_grid:
        val, rep = theta.theta_rho(channel, float(rho))
        pts.append((float(rho), float(val)))
    curves.append(BoundCurve(points=pts, bound_name="theta_rho", params={"axis": "rho"}))
    G = theta.confusability_graph(channel)
    val, rep = theta.lovasz_theta(G)
    values.append(_value("lovasz_theta", val,
                         {"vectors": rep.vectors, "handle": rep.handle}))
    crossover = theta.hadamard_psd_crossover(theta.representation_affinity(channel))
    flags = {"hadamard_psd_crossover": crossover}
    return values, curves, flags


def _run_umbrella(channel, job: JobSpec):
    rho_grid = job.rho_grid if job.rho_grid is not None else None
    curve = theta.umbrella_curve(channel, job.R_grid, rho_grid=rho_grid)
    return [], [curve], {"coefficient": curve.params["coefficient"]}


def _run_spumbrella(channel, job: JobSpec):
    rho_grid = job.rho_grid if job.rho_grid is not None else None
    curve = theta.sp_umbrella_curve(channel, job.R_grid, rho_grid=rho_grid)
    return [], [curve], {}


def _run_hypotest(channel, job: JobSpec):
    cq = as_cq_channel(channel)
    values, curves = [], []
    lam_min = hypotest.smallest_nonzero_eigenvalue(cq)
    values.append(_value("lambda_min_nonzero", lam_min, {}))
    worst = None
    for x in range(cq.num_inputs):
        for y in range(x + 1, cq.num_inputs):
            d_c, s_star = divergence.chernoff_distance(cq.states[x], cq.states[y])
            values.append(_value(f"chernoff[{x},{y}]", d_c,
                                 {"s_star": s_star, "pair": [x, y]}))
            if np.isfinite(d_c):
                thr = hypotest.sgb_thresholds(cq.states[x], cq.states[y], 0.5)
                values.append(_value(f"sgb[{x},{y}]",
                                     {"bound_A": thr.bound_A, "bound_B": thr.bound_B},
                                     {"s": 0.5, "pair": [x, y]}))
                if worst is None or d_c < worst[0]:
                    worst = (d_c, x, y)
    if worst is not None:
        _, x, y = worst
        r_grid = job.R_grid if job.R_grid is not None else np.linspace(0.01, 1.0, 25)
        pts = [(float(r), hypotest.hoeffding_exponent(cq.states[x], cq.states[y], float(r)))
               for r in r_grid]
        curves.append(BoundCurve(points=pts, bound_name=f"hoeffding[{x},{y}]",
                                 params={"pair": [x, y], "axis": "r"}))
    return values, curves, {}


def _run_report(channel, job: JobSpec):
    values = []
    flags = {}
    cq = as_cq_channel(channel)
    rinf = exponents.r_infinity(cq)
    values.append(_value("r_infinity", rinf.value, {"P": rinf.optimizer_P}))
    if isinstance(channel, ClassicalChannel):
        values.append(_value("r_infinity_classical",
                             exponents.r_infinity_classical(channel), {}))
        cut = exponents.cutoff_rate_report(channel)
        values.append(_value("cutoff_rate", cut.value, {"P": cut.optimizer_P}))
    G = theta.confusability_graph(channel)
    val, rep = theta.lovasz_theta(G)
    values.append(_value("theta", val, {"vectors": rep.vectors, "handle": rep.handle}))
    zr = exponents.zero_rate(cq)
    values.append(_value("zero_rate", zr.value,
                         {"P": zr.optimizer_P, "certificate": zr.certificate}))
    flags["pure"] = cq.is_pure
    flags["confusability_edges"] = sorted(G.edges)
    return values, [], flags


_RUNNERS = {
    "divergence": _run_divergence,
    "exponent": _run_exponent,
    "radius": _run_radius,
    "theta": _run_theta,
    "umbrella": _run_umbrella,
    "spumbrella": _run_spumbrella,
    "hypotest": _run_hypotest,
    "report": _run_report,
}


def run(job: JobSpec) -> int:
    """Execute a job; write CSV curves and a JSON report next to output_path."""
    obj = parse_inputs(job.input_path)
    if job.command != "theta":
        obj = _require_channel(obj, job.command)
    np.random.seed(job.seed)  # multi-start schedules are deterministic anyway
    status = 0
    flags: dict = {}
    values: list = []
    curves: list = []
    try:
        values, curves, flags = _RUNNERS[job.command](obj, job)
    except NoConvergence as exc:
        status = 2
        flags["no_convergence"] = str(exc)
    curve_files = {}
    for curve in curves:
        safe = curve.bound_name.replace("[", "_").replace("]", "").replace(",", "_")
        path = f"{job.output_path}.{safe}.csv"
        write_curve_csv(curve, path)
        curve_files[curve.bound_name] = path
    report = {
        "command": job.command,
        "input": job.input_path,
        "seed": job.seed,
        "settings": {
            "tol": job.tol,
            "R_grid": job.R_grid,
            "rho_grid": job.rho_grid,
            "s_grid": job.s_grid,
        },
        "values": values,
        "curves": curve_files,
        "flags": flags,
        "status": status,
    }
    _write_json(report, f"{job.output_path}.json")
    return status


def compare(curve_paths) -> tuple[list, dict]:
    """Merge curves sharing an R grid and summarize which bound dominates."""
    curves = [read_curve_csv(p) for p in curve_paths]
    if not curves:
        raise GridMismatch("no curves to compare")
    base = curves[0].rates()
    for c in curves[1:]:
        other = c.rates()
        if other.shape != base.shape or np.max(np.abs(other - base)) > 0:
            raise GridMismatch("curves do not share an R grid")
    names = [c.bound_name for c in curves]
    rows = []
    winners = []
    for i, R in enumerate(base):
        vals = [c.values()[i] for c in curves]
        finite = np.array(vals)
        best = float(np.min(finite))
        holders = [n for n, v in zip(names, vals) if v == best or
                   (np.isinf(v) and np.isinf(best))]
        winner = holders[0] if len(holders) == 1 else "tie"
        winners.append(winner)
        rows.append([float(R)] + [float(v) for v in vals])
    counts: dict = {}
    for w in winners:
        counts[w] = counts.get(w, 0) + 1
    summary = {"names": names, "winners": winners, "counts": counts}
    return rows, summary


def _write_compare(rows, summary, names, out_base: str) -> None:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["R"] + [f"E_{n}" for n in names])
    for row in rows:
        writer.writerow([repr(row[0])] + ["inf" if np.isinf(v) else repr(v) for v in row[1:]])
    directory = os.path.dirname(os.path.abspath(out_base)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, f"{out_base}.csv")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    _write_json({"summary": summary}, f"{out_base}.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relbound",
        description="Lower-bound exponent curves and zero-error capacity bounds "
                    "for classical and classical-quantum channels (rates in nats).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--R", default=None, help="rate grid a:b:steps (nats)")
        p.add_argument("--rho", default=None, help="tilt grid a:b:steps")
        p.add_argument("--s", default=None, help="s grid a:b:steps")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
    cmp_parser = sub.add_parser("compare")
    cmp_parser.add_argument("curves", nargs="+")
    cmp_parser.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "compare":
            rows, summary = compare(args.curves)
            _write_compare(rows, summary, summary["names"], args.out)
            return 0
        job = JobSpec(
            command=args.command,
            input_path=args.input,
            output_path=args.out,
            R_grid=parse_grid(args.R, "R") if args.R else None,
            rho_grid=parse_grid(args.rho, "rho") if args.rho else None,
            s_grid=parse_grid(args.s, "s") if args.s else None,
            seed=args.seed,
            tol=args.tol,
        )
        return run(job)
    except (ParseError, ValidationError, GridMismatch) as exc:
        print(f"relbound: {exc}", file=sys.stderr)
        return 1
    except NoConvergence as exc:
        print(f"relbound: {exc}", file=sys.stderr)
        return 2
    except RelboundError as exc:
        print(f"relbound: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
