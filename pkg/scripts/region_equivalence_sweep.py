"""Random sweep: does sigma(A) inside the stability region match a Hurwitz network matrix?

Draws random minimal agents and structures, compares the region test with a
direct eigenvalue test of the lifted matrix, and tallies agreement. Instances
whose abscissa lies within the tolerance of zero are counted separately.
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from gfvnet import matrixkit as mk  # noqa: E402
from gfvnet.agents import AgentModel, minimality  # noqa: E402
from gfvnet.network import network_matrix  # noqa: E402
from gfvnet.region import region_abscissa  # noqa: E402


@dataclass
class Config:
    trials: int = 2000
    n_max: int = 4
    N_max: int = 5
    m_max: int = 2
    tol: float = 1e-8
    seed: int = 1


def random_agent(rng, cfg):
    while True:
        n = int(rng.integers(1, cfg.n_max + 1))
        m = int(rng.integers(1, min(cfg.m_max, n) + 1))
        a = AgentModel(rng.standard_normal((n, n)) - rng.uniform(0, 2) * np.eye(n),
                       rng.standard_normal((n, m)), rng.standard_normal((m, n)))
        if minimality(a).minimal:
            return a


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    rng = np.random.default_rng(cfg.seed)
    agree = disagree = marginal = stable = 0
    for _ in range(cfg.trials):
        agent = random_agent(rng, cfg)
        N = int(rng.integers(1, cfg.N_max + 1))
        A = rng.standard_normal((N, N)) * rng.uniform(0.1, 1.0)
        r_ab = float(np.max(region_abscissa(agent, mk.eigenvalues(A))))
        l_ab = mk.spectral_abscissa(network_matrix(agent, A))
        if min(abs(r_ab), abs(l_ab)) <= cfg.tol:
            marginal += 1
            continue
        same = (r_ab < 0) == (l_ab < 0)
        agree += same
        disagree += not same
        stable += l_ab < 0
    print(f"trials {cfg.trials}: agree {agree}, disagree {disagree}, "
          f"marginal {marginal}, stable networks {stable}")


if __name__ == "__main__":
    main()
