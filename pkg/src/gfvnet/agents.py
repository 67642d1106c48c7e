"""Single-agent models: state-space triples, SISO transfer functions, minimality."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import matrixkit as mk
from .errors import DimensionError

COPRIME_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class AgentModel:
    """Agent dynamics ``x' = Ah x + Bh u, y = Ch x`` with n states and m channels."""

    Ah: np.ndarray
    Bh: np.ndarray
    Ch: np.ndarray

    def __post_init__(self):
        Ah = mk.as_matrix(self.Ah, "Ah")
        Bh = mk.as_matrix(self.Bh, "Bh")
        Ch = mk.as_matrix(self.Ch, "Ch")
        n = Ah.shape[0]
        if Ah.shape != (n, n):
            raise DimensionError(f"Ah must be square, got {Ah.shape}")
        if Bh.shape[0] != n:
            raise DimensionError(f"Bh needs {n} rows, got {Bh.shape}")
        m = Bh.shape[1]
        if Ch.shape != (m, n):
            raise DimensionError(f"Ch must be {m}x{n} to match Bh, got {Ch.shape}")
        for name, arr in (("Ah", Ah), ("Bh", Bh), ("Ch", Ch)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.Ah.shape[0]

    @property
    def m(self):
        return self.Bh.shape[1]

    @property
    def BC(self):
        """Loop matrix ``Bh @ Ch`` that multiplies the interconnection."""
        return self.Bh @ self.Ch

    def transfer(self, s):
        """Evaluate ``Ch (sI - Ah)^-1 Bh`` at a complex frequency."""
        return self.Ch @ np.linalg.solve(s * np.eye(self.n) - self.Ah, self.Bh)


@dataclass(frozen=True, eq=False)
class RationalTF:
    """Strictly proper SISO transfer function ``num(s) / den(s)``."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = mk.poly_trim(np.asarray(self.num, dtype=float))
        den = mk.poly_trim(np.asarray(self.den, dtype=float))
        if not np.all(np.isfinite(num)) or not np.all(np.isfinite(den)):
            raise ValueError("transfer function coefficients must be finite")
        if len(den) == 1 and den[0] == 0:
            raise ValueError("zero denominator")
        if len(num) >= len(den) and np.any(num != 0):
            raise ValueError(
                f"transfer function must be strictly proper "
                f"(deg num {len(num) - 1} >= deg den {len(den) - 1})"
            )
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def degree(self):
        return len(self.den) - 1

    def normalized(self):
        """Same transfer function with a monic denominator."""
        lead = self.den[0]
        return RationalTF(self.num / lead, self.den / lead)

    def __call__(self, s):
        return mk.poly_eval(self.num, s) / mk.poly_eval(self.den, s)


def realize_siso(tf):
    """Controllable-canonical realization of a strictly proper SISO transfer function.

    For ``den = s^n + a1 s^(n-1) + ... + an`` the state matrix has ones on the
    superdiagonal and ``[-an, ..., -a1]`` as its last row; ``Bh = e_n`` and
    ``Ch`` holds the numerator coefficients lowest degree first.
    """
    tf = tf.normalized()
    n = tf.degree
    if n < 1:
        raise ValueError("realization needs a denominator of degree >= 1")
    _warn_if_not_coprime(tf)
    Ah = np.zeros((n, n))
    Ah[:-1, 1:] = np.eye(n - 1)
    Ah[-1, :] = -tf.den[1:][::-1]
    Bh = np.zeros((n, 1))
    Bh[-1, 0] = 1.0
    num = np.zeros(n)
    num[n - len(tf.num):] = tf.num
    Ch = num[::-1].reshape(1, n)
    return AgentModel(Ah, Bh, Ch)


def _warn_if_not_coprime(tf, tol=COPRIME_TOL):
    if len(tf.num) < 2 or not np.any(tf.num):
        return
    zeros = mk.poly_roots(tf.num)
    poles = mk.poly_roots(tf.den)
    gap = np.min(np.abs(zeros[:, None] - poles[None, :]))
    if gap < tol * max(1.0, np.max(np.abs(poles))):
        warnings.warn(
            f"numerator and denominator share a root (gap {gap:.3g}); "
            "the realization is not minimal",
            stacklevel=3,
        )


@dataclass(frozen=True)
class MinimalityReport:
    controllable: bool
    observable: bool
    rank_Bh: int
    rank_Ch: int

    @property
    def minimal(self):
        return self.controllable and self.observable


def ctrb(A, B):
    """Kalman controllability matrix ``[B, AB, ..., A^(q-1) B]``."""
    A = np.asarray(A)
    B = np.asarray(B)
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def obsv(A, C):
    """Kalman observability matrix; the transpose-dual of :func:`ctrb`."""
    return ctrb(np.asarray(A).T, np.asarray(C).T).T


def minimality(agent, tol=mk.RANK_TOL):
    n = agent.n
    return MinimalityReport(
        controllable=mk.krylov_basis(agent.Ah, agent.Bh, tol).shape[1] == n,
        observable=mk.krylov_basis(agent.Ah.T, agent.Ch.T, tol).shape[1] == n,
        rank_Bh=mk.numerical_rank(agent.Bh, tol),
        rank_Ch=mk.numerical_rank(agent.Ch, tol),
    )


def closed_agent_matrix(agent, lam):
    """``Ah + lam * Bh Ch``; its eigenvalues are the roots of ``det(sI - Ah - lam Bh Ch)``."""
    if np.imag(lam) == 0:
        return agent.Ah + float(np.real(lam)) * agent.BC
    return agent.Ah + complex(lam) * agent.BC
