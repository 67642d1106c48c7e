"""How close can a double-precision gain get to its target spectrum?

For random controllable pairs this compares the matched spectrum error of
place_poles with the error of the exactly computed single-input gain after a
single rounding to double. When both exceed the tolerance the miss is set by
the eigenvalue conditioning of A - BK, not by the placement algorithm.
"""

import sys
import warnings
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from _common import parse_config  # noqa: E402

from gfvnet import matrixkit as mk  # noqa: E402
from gfvnet.analysis import kalman_rank  # noqa: E402
from gfvnet.design import PlacementWarning, exact_siso_gain, place_poles  # noqa: E402


@dataclass
class Config:
    trials: int = 600
    N_max: int = 10
    M_max: int = 3
    tol: float = 1e-6
    seed: int = 11


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    rng = np.random.default_rng(cfg.seed)
    stats = defaultdict(lambda: [0, 0, 0])  # (M, N) -> [count, ours miss, exact miss]
    for _ in range(cfg.trials):
        N = int(rng.integers(1, cfg.N_max + 1))
        M = int(rng.integers(1, min(cfg.M_max, N) + 1))
        while True:
            A = rng.standard_normal((N, N)) / np.sqrt(N)
            B = rng.standard_normal((N, M))
            if kalman_rank(A, B) == N:
                break
        t = []
        while len(t) < N - 1:
            z = complex(rng.uniform(-3, -0.5), rng.uniform(0.2, 3))
            t += [z, z.conjugate()]
        if len(t) < N:
            t.append(complex(rng.uniform(-3, -0.5)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PlacementWarning)
            K = place_poles(A, B, t)
        s = stats[(M, N)]
        s[0] += 1
        s[1] += mk.matched_distance(mk.eigenvalues(A - B @ K), t) > cfg.tol
        if M == 1:
            Kx = exact_siso_gain(A, B, t)
            s[2] += mk.matched_distance(mk.eigenvalues(A - B @ Kx), t) > cfg.tol
    print(f"{'M':>2} {'N':>3} {'count':>6} {'miss':>5} {'exact miss':>10}")
    for (M, N) in sorted(stats):
        c, ours, ex = stats[(M, N)]
        print(f"{M:>2} {N:>3} {c:>6} {ours:>5} {ex if M == 1 else '-':>10}")


if __name__ == "__main__":
    main()
