import numpy as np
import pytest
from hypothesis import settings

from gfvnet.agents import AgentModel, RationalTF, minimality, realize_siso
from gfvnet.analysis import kalman_rank
from gfvnet.files import load_builtin
from gfvnet.network import NetworkStructure, cyclic_structure

PENDULUM_NUM = [0.95, 1.899, 1.048, 2.1]
PENDULUM_DEN = [1.0, 4.0, -7.0, -10.0, 0.0]

_ACCEPTANCE = []

settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")


def record_acceptance(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    _ACCEPTANCE.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pendulum_agent():
    return realize_siso(RationalTF(PENDULUM_NUM, PENDULUM_DEN))


@pytest.fixture(scope="session")
def pendulum_structure():
    return cyclic_structure(4, 10.0, np.eye(4)[:, :1], np.eye(4)[2:3, :])


@pytest.fixture(scope="session")
def integrator():
    return AgentModel([[0.0]], [[1.0]], [[1.0]])


@pytest.fixture(scope="session")
def mimo_counterexample():
    return load_builtin("mimo_counterexample")


# -- random instance generators ---------------------------------------------

def random_minimal_agent(rng, n_max=4, m_max=2, shift=0.0):
    while True:
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, min(m_max, n) + 1))
        agent = AgentModel(rng.standard_normal((n, n)) - shift * np.eye(n),
                           rng.standard_normal((n, m)),
                           rng.standard_normal((m, n)))
        rep = minimality(agent)
        if rep.minimal and rep.rank_Bh == m and rep.rank_Ch == m:
            return agent


def random_orthogonal(rng, N):
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    return Q * np.sign(np.diag(R))


def uncontrollable_pair(rng, N_max=5, M_max=2):
    """``(A, B)`` with a known unreachable block, hidden by an orthogonal similarity."""
    N = int(rng.integers(2, N_max + 1))
    r = int(rng.integers(1, N))  # reachable dimension
    M = int(rng.integers(1, M_max + 1))
    Ablk = rng.standard_normal((N, N))
    Ablk[r:, :r] = 0.0
    Bblk = np.zeros((N, M))
    Bblk[:r] = rng.standard_normal((r, M))
    T = random_orthogonal(rng, N)
    return T @ Ablk @ T.T, T @ Bblk


def random_targets(rng, N, re=(-3.0, -0.5), im=(0.2, 3.0)):
    out = []
    while len(out) < N - 1:
        z = complex(rng.uniform(*re), rng.uniform(*im))
        out.extend([z, z.conjugate()])
    if len(out) < N:
        out.append(complex(rng.uniform(*re), 0.0))
    return np.array(out)


def controllable_pair(rng, N, M):
    while True:
        A = rng.standard_normal((N, N)) / np.sqrt(N)
        B = rng.standard_normal((N, M))
        if kalman_rank(A, B) == N:
            return A, B


def random_structure(rng, N, M, A=None):
    if A is None:
        A = rng.standard_normal((N, N))
    return NetworkStructure(A, rng.standard_normal((N, M)), rng.standard_normal((M, N)))

