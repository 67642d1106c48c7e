"""Controllability and observability diagnostics for structures and lifted networks."""

from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .agents import closed_agent_matrix, minimality
from .errors import DimensionError
from .network import assemble

CLUSTER_TOL = 1e-6

VERDICT_OK = "consistent-necessary-passed"
VERDICT_NECESSARY_FAILED = "necessary-failed"
VERDICT_LIFTED_FAILS = "necessity-passed-but-lifted-fails"


@dataclass(frozen=True, eq=False)
class PBHCertificate:
    """Witness that a pair fails the PBH rank test.

    For controllability ``vector`` is a row ``v`` with ``v A = lam v`` and
    ``v B = 0``; for observability it is a column ``w`` with ``A w = lam w``
    and ``C w = 0``. ``residuals`` holds the two defect norms for the unit
    vector.
    """

    eigenvalue: complex
    vector: np.ndarray
    residuals: tuple
    kind: str = "controllability"

    def to_dict(self):
        return {
            "kind": self.kind,
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "vector": [[z.real, z.imag] for z in self.vector],
            "residuals": list(self.residuals),
        }


def kalman_rank(A, B, tol=mk.RANK_TOL):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
        raise DimensionError(f"incompatible shapes A {A.shape}, B {B.shape}")
    return mk.krylov_basis(A, B, tol).shape[1]


def _cluster(eig, tol=CLUSTER_TOL):
    """Group nearby eigenvalues and return cluster means.

    A defective eigenvalue of multiplicity k comes back from LAPACK spread over
    a circle of radius ~eps^(1/k); the mean of the cluster is accurate to ~eps.
    """
    scale = max(1.0, float(np.max(np.abs(eig)))) if eig.size else 1.0
    remaining = list(eig)
    centers = []
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        keep = []
        for z in remaining:
            if abs(z - seed) <= tol * scale:
                group.append(z)
            else:
                keep.append(z)
        remaining = keep
        centers.append(complex(np.mean(group)))
    return centers


def pbh_controllable(A, B, tol=mk.RANK_TOL):
    """PBH test; returns ``None`` when the pair passes, else a certificate.

    The pair passes iff ``[A - lam I, B]`` has full row rank at every
    eigenvalue of ``A``. On failure the certificate uses the eigenvalue whose
    rank defect is most pronounced.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    N = A.shape[0]
    if A.shape != (N, N) or B.shape[0] != N:
        raise DimensionError(f"incompatible shapes A {A.shape}, B {B.shape}")
    worst = None
    for lam in _cluster(mk.eigenvalues(A)):
        P = np.hstack([A - lam * np.eye(N), B]).astype(complex)
        U, sv, _ = np.linalg.svd(P)
        smallest = sv[N - 1] if sv.size >= N else 0.0
        ratio = smallest / sv[0] if sv[0] > 0 else 0.0
        if ratio <= tol and (worst is None or ratio < worst[0]):
            worst = (ratio, lam, U[:, N - 1].conj())
    if worst is None:
        return None
    _, lam, v = worst
    if abs(lam.imag) <= tol * max(1.0, abs(lam)):
        # real eigenvalue: a real null vector exists, prefer it
        lam = complex(lam.real)
        v = _realify(v)
    res = (float(np.linalg.norm(v @ A - lam * v)), float(np.linalg.norm(v @ B)))
    return PBHCertificate(lam, v, res, "controllability")


def _realify(v):
    """Rotate a complex vector by a unit phase so it is (as nearly as possible) real."""
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    if np.linalg.norm(v.imag) < 1e-8 * np.linalg.norm(v):
        v = v.real.astype(complex)
    return v / np.linalg.norm(v)


def pbh_observable(A, C, tol=mk.RANK_TOL):
    """Dual PBH test on ``(A.T, C.T)``; the certificate holds a right vector ``w``."""
    cert = pbh_controllable(np.asarray(A).T, np.asarray(C).T, tol)
    if cert is None:
        return None
    return PBHCertificate(cert.eigenvalue, cert.vector, cert.residuals, "observability")


@dataclass(frozen=True, eq=False)
class Lemma3Report:
    """Result of lifting a structure-level PBH witness to the network."""

    direction: str
    structure_certificate: PBHCertificate | None
    lifted_witness: PBHCertificate | None
    agent_eigenvalue: complex | None
    lifted_passes: bool
    note: str

    @property
    def structure_passes(self):
        return self.structure_certificate is None


def lemma3_check(agent, structure, tol=mk.RANK_TOL, direction="controllability"):
    """Check that a structure obstruction propagates to the lifted network.

    If ``(A, B)`` fails PBH with left vector ``v`` at ``lam``, pick a left
    eigenvector ``eta`` of ``Ah + lam Bh Ch`` with eigenvalue ``mu``; then
    ``z = v (x) eta`` is a left eigenvector of the lifted state matrix that
    annihilates the lifted input matrix. Observability is handled by
    transposition.
    """
    lifted = assemble(agent, structure)
    if direction == "controllability":
        A, B = structure.A, structure.B
        calA, calB = lifted.calA, lifted.calB
        Ah, BC = agent.Ah, agent.BC
    elif direction == "observability":
        A, B = structure.A.T, structure.C.T
        calA, calB = lifted.calA.T, lifted.calC.T
        Ah, BC = agent.Ah.T, agent.BC.T
    else:
        raise ValueError(f"unknown direction {direction!r}")

    lifted_cert = pbh_controllable(calA, calB, tol)
    structure_cert = pbh_controllable(A, B, tol)
    kind = direction
    if structure_cert is not None and direction == "observability":
        structure_cert = PBHCertificate(structure_cert.eigenvalue, structure_cert.vector,
                                        structure_cert.residuals, kind)

    if structure_cert is None:
        if lifted_cert is None:
            note = "no structure obstruction; lifted pair passes"
        elif agent.m > 1:
            note = ("no structure obstruction, yet the lifted pair fails: a purely MIMO "
                    "mechanism (directional cancellation in the agent channels)")
        else:
            note = "no structure obstruction; lifted pair fails through the agent itself"
        return Lemma3Report(direction, None, None, None, lifted_cert is None, note)

    lam = structure_cert.eigenvalue
    mus, vecs = np.linalg.eig((Ah + lam * BC).T)
    order = np.lexsort((mus.imag, mus.real))
    mu = complex(mus[order[0]])
    eta = vecs[:, order[0]]
    z = np.kron(structure_cert.vector, eta)
    z = z / np.linalg.norm(z)
    res = (float(np.linalg.norm(z @ calA - mu * z)), float(np.linalg.norm(z @ calB)))
    witness = PBHCertificate(mu, z, res, kind)
    note = (f"structure {direction} fails at lambda={lam:.6g}; lifted witness v(x)eta "
            f"at mu={mu:.6g}")
    return Lemma3Report(direction, structure_cert, witness, mu, lifted_cert is None, note)


@dataclass(eq=False)
class BranchReport:
    """One side (controllability or observability) of the necessary-condition battery."""

    direction: str
    applicable: bool
    skip_reason: str | None
    agent_condition: bool
    structure_modes: list = field(default_factory=list)
    agent_roots: list = field(default_factory=list)
    structure_passes: bool = True
    lifted_rank: int = 0
    lifted_passes: bool = True
    verdict: str = VERDICT_OK

    @property
    def necessary_passed(self):
        agent_ok = self.agent_condition or not self.applicable
        return agent_ok and self.structure_passes

    def to_dict(self):
        return {
            "direction": self.direction,
            "lemma4_applicable": self.applicable,
            "skip_reason": self.skip_reason,
            "agent_condition": self.agent_condition,
            "structure_passes": self.structure_passes,
            "violating_structure_modes": [[z.real, z.imag] for z in self.structure_modes],
            "p_lambda_roots": [[[r.real, r.imag] for r in roots] for roots in self.agent_roots],
            "lifted_rank": self.lifted_rank,
            "lifted_passes": self.lifted_passes,
            "necessary_passed": self.necessary_passed,
            "verdict": self.verdict,
        }


@dataclass(eq=False)
class NecessityReport:
    agent_minimal: bool
    rank_conditions: bool
    structure_controllable: bool
    structure_observable: bool
    lifted_controllable: bool
    lifted_observable: bool
    verdict: str
    controllability: BranchReport
    observability: BranchReport
    lemma3: list
    notes: list

    def to_dict(self):
        return {
            "agent_minimal": self.agent_minimal,
            "rank_conditions": self.rank_conditions,
            "structure_controllable": self.structure_controllable,
            "structure_observable": self.structure_observable,
            "lifted_controllable": self.lifted_controllable,
            "lifted_observable": self.lifted_observable,
            "verdict": self.verdict,
            "branches": [self.controllability.to_dict(), self.observability.to_dict()],
            "lemma3": [
                {
                    "direction": r.direction,
                    "structure_passes": r.structure_passes,
                    "lifted_passes": r.lifted_passes,
                    "structure_certificate": (r.structure_certificate.to_dict()
                                              if r.structure_certificate else None),
                    "lifted_witness": r.lifted_witness.to_dict() if r.lifted_witness else None,
                    "note": r.note,
                }
                for r in self.lemma3
            ],
            "notes": list(self.notes),
        }

    def summary(self):
        yn = {True: "yes", False: "no"}
        lines = [
            f"agent minimal:            {yn[self.agent_minimal]}",
            f"rank(Bh) = rank(Ch) = m:  {yn[self.rank_conditions]}",
            f"structure controllable:   {yn[self.structure_controllable]}",
            f"structure observable:     {yn[self.structure_observable]}",
            f"network controllable:     {yn[self.lifted_controllable]} "
            f"(Kalman rank {self.controllability.lifted_rank})",
            f"network observable:       {yn[self.lifted_observable]} "
            f"(Kalman rank {self.observability.lifted_rank})",
        ]
        for br in (self.controllability, self.observability):
            status = "applied" if br.applicable else f"skipped ({br.skip_reason})"
            lines.append(f"{br.direction} branch: {status}; verdict {br.verdict}")
        for r in self.lemma3:
            lines.append(f"structure check [{r.direction}]: {r.note}")
        lines.extend(self.notes)
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _branch(direction, agent, structure, lifted, mini, rank_ok, tol):
    if direction == "controllability":
        A, B = structure.A, structure.B
        S = structure.B
        lifted_rank = kalman_rank(lifted.calA, lifted.calB, tol)
    else:
        A, B = structure.A.T, structure.C.T
        S = structure.C
        lifted_rank = kalman_rank(lifted.calA.T, lifted.calC.T, tol)
    N = structure.N
    skip = None
    if mk.numerical_rank(S, tol) >= N:
        skip = f"rank({'B' if direction == 'controllability' else 'C'}) = N"
    elif not rank_ok:
        skip = "rank(Bh) = rank(Ch) = m fails"

    # every structure mode failing PBH
    modes = []
    for lam in _cluster(mk.eigenvalues(A)):
        P = np.hstack([A - lam * np.eye(N), B]).astype(complex)
        if mk.numerical_rank(P, tol) < N:
            modes.append(complex(lam))
    # p(lam, .) is monic of degree n, so its roots always exist: every such mode violates
    roots = [mk.eigenvalues(closed_agent_matrix(agent, lam)) for lam in modes]

    br = BranchReport(
        direction=direction,
        applicable=skip is None,
        skip_reason=skip,
        agent_condition=mini.minimal,
        structure_modes=modes,
        agent_roots=roots,
        structure_passes=not modes,
        lifted_rank=lifted_rank,
        lifted_passes=lifted_rank == lifted.order,
    )
    if not br.necessary_passed:
        br.verdict = VERDICT_NECESSARY_FAILED
    elif br.lifted_passes:
        br.verdict = VERDICT_OK
    else:
        br.verdict = VERDICT_LIFTED_FAILS
    return br


def lemma4_battery(agent, structure, tol=mk.RANK_TOL):
    """Run the necessary-condition battery for network controllability and observability.

    The determinant condition on the coprime factors is evaluated through
    ``det(sI - Ah - lam Bh Ch)``, which agrees with it up to a nonzero constant
    for a minimal agent. That polynomial is monic of degree n, so it has roots
    for every ``lam``; any uncontrollable (unobservable) structure mode is
    therefore reported as a violation, and the condition coincides with the
    structure PBH test.
    """
    lifted = assemble(agent, structure)
    mini = minimality(agent, tol)
    rank_ok = mini.rank_Bh == agent.m and mini.rank_Ch == agent.m
    c = _branch("controllability", agent, structure, lifted, mini, rank_ok, tol)
    o = _branch("observability", agent, structure, lifted, mini, rank_ok, tol)
    if not (c.necessary_passed and o.necessary_passed):
        verdict = VERDICT_NECESSARY_FAILED
    elif c.lifted_passes and o.lifted_passes:
        verdict = VERDICT_OK
    else:
        verdict = VERDICT_LIFTED_FAILS
    notes = [
        "determinant condition evaluated via p(lam,s) = det(sI - Ah - lam Bh Ch); it has roots "
        "for every lam when n >= 1, so it holds iff the structure pair has no PBH-failing mode",
    ]
    l3 = [lemma3_check(agent, structure, tol, "controllability"),
          lemma3_check(agent, structure, tol, "observability")]
    return NecessityReport(
        agent_minimal=mini.minimal,
        rank_conditions=rank_ok,
        structure_controllable=c.structure_passes,
        structure_observable=o.structure_passes,
        lifted_controllable=c.lifted_passes,
        lifted_observable=o.lifted_passes,
        verdict=verdict,
        controllability=c,
        observability=o,
        lemma3=l3,
        notes=notes,
    )
