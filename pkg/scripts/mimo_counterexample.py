"""Controllable structure, minimal agents, uncontrollable network: the shipped two-agent fixture.

Prints the lifted Kalman rank, a PBH certificate for the lifted pair, the
integer left eigenvector that annihilates the lifted input matrix, and the
full necessary-condition report.
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from gfvnet.analysis import kalman_rank, lemma4_battery, pbh_controllable  # noqa: E402
from gfvnet.files import load_builtin, load_system  # noqa: E402
from gfvnet.network import assemble  # noqa: E402


@dataclass
class Config:
    system: str = ""  # path to a system JSON; empty uses the shipped fixture


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    spec = load_system(cfg.system) if cfg.system else load_builtin("mimo_counterexample")
    lifted = assemble(spec.agent, spec.structure)
    print(f"lifted order {lifted.order}, Kalman rank {kalman_rank(lifted.calA, lifted.calB)}")
    print(f"structure (A, B) PBH: "
          f"{'passes' if pbh_controllable(spec.structure.A, spec.structure.B) is None else 'fails'}")
    cert = pbh_controllable(lifted.calA, lifted.calB)
    if cert is not None:
        v = np.real_if_close(cert.vector)
        scale = v[np.argmax(np.abs(v))]
        ints = v / scale
        # rescale so the smallest nonzero entry has magnitude one
        small = np.min(np.abs(ints[np.abs(ints) > 1e-9]))
        print(f"lifted PBH fails at lambda = {cert.eigenvalue:.12g}")
        print(f"left vector (normalized): {np.round(ints / small, 9)}")
        print(f"residuals |zA - lam z|, |zB|: {cert.residuals[0]:.2e}, {cert.residuals[1]:.2e}")
    print()
    print(lemma4_battery(spec.agent, spec.structure).summary())


if __name__ == "__main__":
    main()
