"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 design infeasible, 4 verification
failed, 5 analysis negative (network uncontrollable or unobservable).
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import files
from .analysis import lemma4_battery
from .design import design, lifted
from .errors import DimensionError, InfeasibleDesign, Uncontrollable
from .files import InputError
from .network import assemble, cyclic_structure, lift_gains
from .region import DESIGN_MARGIN, PENDULUM_BOUNDS, sample_region, spectrum_in_region
from .sim import SimConfig, decay_estimate, simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_UNVERIFIED = 4
EXIT_NEGATIVE = 5

DEFAULT_RES = (200, 200)


def _seed():
    raw = os.environ.get("TOOL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"TOOL_SEED must be an integer, got {raw!r}") from None


def _floats(text, count, flag):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{flag}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count:
        raise InputError(f"{flag}: expected {count} values, got {len(vals)}")
    return vals


def _resolution(text):
    parts = text.lower().split("x")
    try:
        res = tuple(int(p) for p in parts)
    except ValueError:
        res = ()
    if len(res) != 2 or min(res) < 2:
        raise InputError(f"--res: expected NxM with N, M >= 2, got {text!r}")
    return res


def _region_settings(spec, args):
    d = spec.design
    if getattr(args, "bounds", None):
        bounds = tuple(_floats(args.bounds, 4, "--bounds"))
    elif "bounds" in d:
        bounds = tuple(float(v) for v in d["bounds"])
    else:
        bounds = PENDULUM_BOUNDS
    if getattr(args, "res", None):
        res = _resolution(args.res)
    elif "resolution" in d:
        res = tuple(int(v) for v in d["resolution"])
    else:
        res = DEFAULT_RES
    if getattr(args, "margin", None) is not None:
        margin = args.margin
    else:
        margin = float(d.get("margin", DESIGN_MARGIN))
    if not (bounds[0] < bounds[1] and bounds[2] < bounds[3]):
        raise InputError(f"bounds must satisfy re0 < re1 and im0 < im1, got {bounds}")
    return bounds, res, margin


def _write_all(outputs):
    """Write every ``(path, text)`` pair; called only after all work succeeded."""
    for path, text in outputs:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _emit(msg=""):
    print(msg, flush=True)


# -- region -----------------------------------------------------------------

def run_region(spec, bounds, res, prefix, plot_margin=0.0):
    sample = sample_region(spec.agent, bounds, res, plot_margin)
    report = spectrum_in_region(spec.agent, spec.structure.A, plot_margin)
    outputs = [
        (f"{prefix}.region.csv", files.region_csv(sample)),
        (f"{prefix}.region.svg", files.region_svg(sample, report.eigenvalues,
                                                  f"{spec.name}: stability region and sigma(A)")),
    ]
    return sample, report, outputs


def cmd_region(args):
    spec = files.load_system(args.system)
    bounds, res, _ = _region_settings(spec, args)
    margin = 0.0 if args.margin is None else args.margin
    sample, report, outputs = run_region(spec, bounds, res, args.out, margin)
    _write_all(outputs)
    _emit(f"inside points: {int(sample.membership.sum())} of {sample.membership.size}")
    for lam, ok in zip(report.eigenvalues, report.inside):
        _emit(f"  sigma(A) {files.fmt(lam.real)} {files.fmt(lam.imag)}i  "
              f"{'inside' if ok else 'outside'}")
    _emit(f"network stable open-loop: {'yes' if report.all_inside else 'no'}")
    return EXIT_OK


# -- design -----------------------------------------------------------------

def _override_targets(spec, args, key, flag_value):
    if flag_value:
        return files.parse_targets(flag_value)
    if key in spec.design:
        return [files.parse_complex(t) for t in spec.design[key]]
    return None


def run_design(spec, args, prefix, sample=None):
    """Returns ``(exit_code, result_or_None, outputs)``."""
    bounds, res, margin = _region_settings(spec, args)
    if sample is None:
        sample = sample_region(spec.agent, bounds, res)
    targets = getattr(args, "targets", None)
    obs_targets = getattr(args, "observer_targets", None) or targets
    ct = _override_targets(spec, args, "controller_targets", targets)
    ot = _override_targets(spec, args, "observer_targets", obs_targets)
    try:
        result = design(spec.agent, spec.structure, sample, ct, ot, margin, seed=_seed())
    except Uncontrollable as exc:
        c = exc.certificate
        vec = " ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in c.vector)
        _emit(f"design infeasible: {exc}\n  PBH certificate ({c.kind}): "
              f"lambda={c.eigenvalue:.6g}, vector=[{vec}]")
        return EXIT_INFEASIBLE, None, []
    except InfeasibleDesign as exc:
        _emit(f"design infeasible: {exc}")
        return EXIT_INFEASIBLE, None, []
    outputs = [(f"{prefix}.design.json", files.dumps(result.to_dict()))]
    _emit(f"K = {np.array2string(result.K, precision=6)}")
    _emit(f"L^T = {np.array2string(result.L.T, precision=6)}")
    _emit(f"sigma(A-BK) inside region: {result.controller_inside}")
    _emit(f"sigma(A-LC) inside region: {result.observer_inside}")
    _emit(f"closed-loop spectral abscissa: {files.fmt(result.closed_loop_abscissa)}")
    _emit(f"verified: {result.verified}")
    if not result.consistent:
        _emit("warning: region test and closed-loop Hurwitz test disagree")
    return (EXIT_OK if result.verified else EXIT_UNVERIFIED), result, outputs


def cmd_design(args):
    spec = files.load_system(args.system)
    code, _, outputs = run_design(spec, args, args.out)
    _write_all(outputs)
    return code


# -- check ------------------------------------------------------------------

def run_check(spec, prefix=None):
    report = lemma4_battery(spec.agent, spec.structure)
    _emit(report.summary())
    outputs = [] if prefix is None else [(f"{prefix}.check.json", files.dumps(report.to_dict()))]
    ok = report.lifted_controllable and report.lifted_observable
    return (EXIT_OK if ok else EXIT_NEGATIVE), report, outputs


def cmd_check(args):
    spec = files.load_system(args.system)
    code, _, outputs = run_check(spec, args.out)
    _write_all(outputs)
    return code


# -- simulate ---------------------------------------------------------------

def sim_config(spec, args, n):
    s = spec.sim
    mode = args.mode or s.get("mode", "output-feedback")
    t_final = args.t_final if args.t_final is not None else float(s.get("t_final", 10.0))
    dt = args.dt if args.dt is not None else float(s.get("dt", 1e-3))
    record = args.record_every if args.record_every is not None else int(s.get("record_every", 1))
    seed = int(s["seed"]) if "seed" in s and "TOOL_SEED" not in os.environ else _seed()
    if "x0" in s:
        x0 = np.asarray(s["x0"], dtype=float)
    else:
        x0 = np.random.default_rng(seed).standard_normal(n)
    xhat0 = np.asarray(s["xhat0"], dtype=float) if "xhat0" in s else np.zeros(n)
    if x0.shape != (n,) or xhat0.shape != (n,):
        raise InputError(f"sim.x0 / sim.xhat0 must have length {n}")
    try:
        return SimConfig(t_final, dt, x0, xhat0, mode, record)
    except ValueError as exc:
        raise InputError(f"simulation settings: {exc}") from None


def run_simulate(spec, K, L, cfg, prefix):
    sys_ = assemble(spec.agent, spec.structure)
    gains = None
    if K is not None:
        gains = lift_gains(K, L, spec.agent)
    traj = simulate(sys_, gains, cfg)
    outputs = [
        (f"{prefix}.traj.csv", files.trajectory_csv(traj)),
        (f"{prefix}.norms.svg", files.norms_svg(traj, f"{spec.name}: {cfg.mode}")),
    ]
    nx, ne = traj.norms("state"), traj.norms("error")
    _emit(f"mode: {cfg.mode}; samples: {len(traj.times)}; final time {files.fmt(traj.times[-1])}")
    if traj.diverged:
        _emit("diverged: yes (trajectory truncated)")
    _emit(f"||x|| final/peak: {_ratio(nx)}")
    if cfg.mode != "open-loop":
        _emit(f"||x - xhat|| final/peak: {_ratio(ne)}")
    if len(traj.times) >= 10:
        rate = decay_estimate(traj, "state")
        _emit(f"decay rate ||x||: {'undefined' if np.isnan(rate) else files.fmt(rate)} 1/s")
        if cfg.mode != "open-loop":
            rate_e = decay_estimate(traj, "error")
            _emit(f"decay rate ||x - xhat||: "
                  f"{'undefined' if np.isnan(rate_e) else files.fmt(rate_e)} 1/s")
    return traj, outputs


def _ratio(norms):
    peak = float(np.max(norms))
    return "undefined (zero trajectory)" if peak == 0 else files.fmt(norms[-1] / peak)


def cmd_simulate(args):
    spec = files.load_system(args.system)
    n = spec.agent.n * spec.structure.N
    cfg = sim_config(spec, args, n)
    K = L = None
    if args.design:
        K, L, _ = files.load_design(args.design, spec.structure)
    elif cfg.mode != "open-loop":
        raise InputError(f"--mode {cfg.mode} needs --design")
    _, outputs = run_simulate(spec, K, L, cfg, args.out)
    _write_all(outputs)
    return EXIT_OK


# -- demo -------------------------------------------------------------------

def pendulum_spec(k=None):
    spec = files.load_builtin("pendulum")
    if k is not None:
        s = spec.structure
        spec.structure = cyclic_structure(s.N, k, s.B, s.C)
    return spec


def cmd_demo_pendulum(args):
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InputError(f"{out}: output directory not writable ({exc.strerror})") from None

    spec = pendulum_spec(args.k)
    prefix = str(out / "pendulum")
    bounds, res, margin = _region_settings(spec, args)

    _emit("== region")
    sample, report, outputs = run_region(spec, bounds, res, prefix)
    _emit(f"inside points: {int(sample.membership.sum())} of {sample.membership.size}")
    _emit(f"sigma(A) inside region: {report.inside.tolist()}")
    _emit(f"network stable open-loop: {'yes' if report.all_inside else 'no'}")

    _emit("== check")
    code, _, more = run_check(spec, prefix)
    outputs += more
    if code != EXIT_OK:
        _write_all(outputs)
        return code

    _emit("== design")
    code, result, more = run_design(spec, args, prefix, sample if margin == 0.0 else None)
    outputs += more
    if code != EXIT_OK:
        _write_all(outputs)
        return code

    _emit("== simulate")
    n = spec.agent.n * spec.structure.N
    args.mode = args.mode or "output-feedback"
    cfg = sim_config(spec, args, n)
    _, more = run_simulate(spec, result.K, result.L, cfg, prefix)
    outputs += more
    _write_all(outputs)
    _emit(f"wrote {len(outputs)} files to {out}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="gfvnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def region_flags(sp):
        sp.add_argument("--bounds", help="re0,re1,im0,im1")
        sp.add_argument("--res", help="grid resolution NxM (real x imaginary)")
        sp.add_argument("--margin", type=float, default=None)

    def sim_flags(sp):
        sp.add_argument("--mode", choices=["open-loop", "observer-only", "output-feedback"])
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-final", type=float, dest="t_final")
        sp.add_argument("--record-every", type=int, dest="record_every",
                        help="keep every k-th integration step")

    def design_flags(sp):
        sp.add_argument("--targets", help='controller targets, e.g. "1.3±9i;1.3±9.7i"')
        sp.add_argument("--observer-targets", dest="observer_targets",
                        help="observer targets (default: same as --targets or automatic)")

    sp = sub.add_parser("region", help="sample the stability region")
    sp.add_argument("system")
    sp.add_argument("--out", required=True, help="output prefix")
    region_flags(sp)
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("design", help="design and verify K and L")
    sp.add_argument("system")
    sp.add_argument("--out", required=True, help="output prefix")
    region_flags(sp)
    design_flags(sp)
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("check", help="controllability/observability battery")
    sp.add_argument("system")
    sp.add_argument("--out", help="optional output prefix for the JSON report")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("simulate", help="simulate open loop, observer, or output feedback")
    sp.add_argument("system")
    sp.add_argument("--design", help="design JSON from the design command")
    sp.add_argument("--out", required=True, help="output prefix")
    sim_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("demo-pendulum", help="reproduce the pendulum network study")
    sp.add_argument("out_dir")
    sp.add_argument("--k", type=float, default=None, help="cycle gain (default 10)")
    region_flags(sp)
    design_flags(sp)
    sim_flags(sp)
    sp.set_defaults(func=cmd_demo_pendulum)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
