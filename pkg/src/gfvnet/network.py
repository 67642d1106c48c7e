"""Interconnection structures and the Kronecker-lifted network system."""

from dataclasses import dataclass

import numpy as np

from . import matrixkit as mk
from .agents import AgentModel
from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class NetworkStructure:
    """Interconnection ``A`` (N x N), actuation ``B`` (N x M), sensing ``C`` (M x N)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = mk.as_matrix(self.A, "A")
        B = mk.as_matrix(self.B, "B")
        C = mk.as_matrix(self.C, "C")
        N = A.shape[0]
        if A.shape != (N, N):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != N:
            # a flat list for B means a single column
            if B.shape == (1, N):
                B = B.T
            else:
                raise DimensionError(f"B needs {N} rows, got {B.shape}")
        if C.shape[1] != N:
            raise DimensionError(f"C needs {N} columns, got {C.shape}")
        for name, arr in (("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def N(self):
        return self.A.shape[0]

    @property
    def M(self):
        return self.B.shape[1]

    @property
    def M_out(self):
        return self.C.shape[0]


def cycle_matrix(N):
    """Single-cycle permutation: agent i listens to agent i-1, agent 1 to agent N."""
    if N < 2:
        raise ValueError("a cycle needs N >= 2")
    return np.roll(np.eye(N), 1, axis=0)


def cyclic_structure(N, k, B=None, C=None):
    """Cyclic interconnection ``k * P``; defaults to actuating and sensing agent 1."""
    A = k * cycle_matrix(N)
    if B is None:
        B = np.eye(N)[:, :1]
    if C is None:
        C = np.eye(N)[:1, :]
    return NetworkStructure(A, B, C)


def path_structure(N, k=1.0, B=None, C=None):
    """Directed path: agent i listens to agent i-1 with gain ``k``."""
    A = k * np.eye(N, k=-1)
    return NetworkStructure(A, np.eye(N)[:, :1] if B is None else B,
                            np.eye(N)[:1, :] if C is None else C)


def complete_laplacian_structure(N, k=1.0, B=None, C=None):
    """Negative Laplacian of the complete graph scaled by ``k`` (consensus coupling)."""
    L = N * np.eye(N) - np.ones((N, N))
    return NetworkStructure(-k * L, np.eye(N)[:, :1] if B is None else B,
                            np.eye(N)[:1, :] if C is None else C)


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    calA: np.ndarray
    calB: np.ndarray
    calC: np.ndarray
    agent: AgentModel
    structure: NetworkStructure

    @property
    def order(self):
        return self.calA.shape[0]


def assemble(agent, structure):
    """Stack N copies of ``agent`` through ``structure``.

    ``calA = I_N (x) Ah + A (x) Bh Ch``, ``calB = B (x) Bh``, ``calC = C (x) Ch``.
    """
    if structure.M != structure.M_out:
        raise DimensionError(
            f"B has {structure.M} channels but C has {structure.M_out}; "
            "input and output channel counts must agree"
        )
    N = structure.N
    calA = mk.kron(np.eye(N), agent.Ah) + mk.kron(structure.A, agent.BC)
    calB = mk.kron(structure.B, agent.Bh)
    calC = mk.kron(structure.C, agent.Ch)
    return LiftedSystem(calA, calB, calC, agent, structure)


def network_matrix(agent, A):
    """``I_N (x) Ah + A (x) Bh Ch`` for an arbitrary interconnection ``A``."""
    A = np.asarray(A)
    return mk.kron(np.eye(A.shape[0]), agent.Ah) + mk.kron(A, agent.BC)


@dataclass(frozen=True, eq=False)
class LiftedGains:
    K: np.ndarray
    L: np.ndarray
    calK: np.ndarray
    calL: np.ndarray


def lift_gains(K, L, agent):
    """Distributive gains to network gains: ``calK = K (x) Ch``, ``calL = L (x) Bh``."""
    K = mk.as_matrix(K, "K")
    L = mk.as_matrix(L, "L")
    if K.shape != L.T.shape:
        raise DimensionError(f"K is {K.shape} but L is {L.shape}; expected M x N and N x M")
    return LiftedGains(K, L, mk.kron(K, agent.Ch), mk.kron(L, agent.Bh))
