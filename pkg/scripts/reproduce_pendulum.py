"""Pendulum network study: region, design, and closed-loop simulation over a sweep of gains.

For each cycle gain k the script samples the stability region, designs K and L
from automatically chosen targets, and reports the closed-loop abscissa and
the simulated decay of ||x|| and ||x - xhat||.
"""

import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from gfvnet import files  # noqa: E402
from gfvnet.cli import pendulum_spec  # noqa: E402
from gfvnet.design import design  # noqa: E402
from gfvnet.errors import InfeasibleDesign  # noqa: E402
from gfvnet.network import assemble, lift_gains  # noqa: E402
from gfvnet.region import sample_region, spectrum_in_region  # noqa: E402
from gfvnet.sim import SimConfig, decay_estimate, simulate  # noqa: E402


@dataclass
class Config:
    gains: tuple = (10.0, 5.0, 2.0)
    bounds: tuple = (-3.0, 3.0, -15.0, 15.0)
    resolution: tuple = (300, 300)
    margin: float = 1e-6
    t_final: float = 600.0
    dt: float = 1e-3
    record_every: int = 100
    seed: int = 0
    out_dir: str = ""


def run(cfg):
    rows = []
    for k in cfg.gains:
        spec = pendulum_spec(k)
        t0 = time.perf_counter()
        sample = sample_region(spec.agent, cfg.bounds, cfg.resolution)
        open_loop = spectrum_in_region(spec.agent, spec.structure.A)
        try:
            res = design(spec.agent, spec.structure, sample, margin=cfg.margin, seed=cfg.seed)
        except InfeasibleDesign as exc:
            print(f"k={k:g}: design infeasible ({exc})")
            continue
        lifted = assemble(spec.agent, spec.structure)
        n = lifted.order
        x0 = np.random.default_rng(cfg.seed).standard_normal(n)
        traj = simulate(lifted, lift_gains(res.K, res.L, spec.agent),
                        SimConfig(cfg.t_final, cfg.dt, x0, None, "output-feedback",
                                  cfg.record_every))
        nx, ne = traj.norms("state"), traj.norms("error")
        rows.append(dict(
            k=k,
            open_loop_stable=open_loop.all_inside,
            verified=res.verified,
            abscissa=res.closed_loop_abscissa,
            x_ratio=nx[-1] / nx.max(),
            err_ratio=ne[-1] / ne.max(),
            x_rate=decay_estimate(traj),
            err_rate=decay_estimate(traj, "error"),
            seconds=time.perf_counter() - t0,
        ))
        if cfg.out_dir:
            out = Path(cfg.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"pendulum_k{k:g}.design.json").write_text(files.dumps(res.to_dict()))
            (out / f"pendulum_k{k:g}.norms.svg").write_text(files.norms_svg(traj, f"k = {k:g}"))
    return rows


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    rows = run(cfg)
    head = f"{'k':>6} {'open-loop':>9} {'verified':>8} {'abscissa':>10} " \
           f"{'|x| ratio':>10} {'|e| ratio':>10} {'x rate':>9} {'e rate':>9} {'sec':>5}"
    print(head)
    for r in rows:
        print(f"{r['k']:>6g} {str(r['open_loop_stable']):>9} {str(r['verified']):>8} "
              f"{r['abscissa']:>10.4g} {r['x_ratio']:>10.3g} {r['err_ratio']:>10.3g} "
              f"{r['x_rate']:>9.4g} {r['err_rate']:>9.4g} {r['seconds']:>5.1f}")


if __name__ == "__main__":
    main()
