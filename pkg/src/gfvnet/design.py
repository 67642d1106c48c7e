"""Distributive controller and observer design.

Both gains act at the structure level: ``K`` (M x N) and ``L`` (N x M) are
chosen so that ``A - BK`` and ``A - LC`` have their spectra inside the agent's
stability region, and are then lifted as ``K (x) Ch`` and ``L (x) Bh``.
"""

import warnings
from dataclasses import dataclass
from fractions import Fraction as F

import numpy as np
from scipy import linalg, ndimage

from . import matrixkit as mk
from .agents import ctrb
from .analysis import pbh_controllable, pbh_observable
from .errors import DimensionError, InfeasibleDesign, Uncontrollable
from .network import lift_gains, network_matrix
from .region import DESIGN_MARGIN, in_region, spectrum_in_region

VERIFY_MARGIN = 1e-9
PLACEMENT_TOL = 1e-6
_SYLVESTER_DRAWS = 8


class PlacementWarning(RuntimeWarning):
    """The returned gain misses the targets by more than the placement tolerance."""


@dataclass(frozen=True, eq=False)
class TargetSet:
    """Conjugate-closed multiset of desired structure-level eigenvalues."""

    targets: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=complex).ravel()
        if not mk.is_conjugate_closed(t):
            raise InfeasibleDesign("targets are not closed under complex conjugation")
        object.__setattr__(self, "targets", t)

    def __len__(self):
        return self.targets.size


def _boundary_distance(sample):
    """Euclidean distance (plane units) from each inside grid point to the nearest
    outside grid point; the viewport edge counts as outside."""
    padded = np.pad(sample.membership, 1, constant_values=False)
    d_re = sample.re[1] - sample.re[0]
    d_im = sample.im[1] - sample.im[0]
    dist = ndimage.distance_transform_edt(padded, sampling=(d_im, d_re))
    return dist[1:-1, 1:-1]


def auto_targets(sample, N, agent=None, margin=DESIGN_MARGIN):
    """Pick ``N`` conjugate-closed targets deep inside the sampled region.

    Candidates are grid points in the upper half-plane (each used together with
    its conjugate) and points on the real axis. They are ranked by distance to
    the region boundary, ties broken toward the origin (smaller gains), and
    picked greedily under a minimum mutual separation that starts at the best
    score and is halved until ``N`` points fit. Real points are only used for
    an odd remainder. When ``agent`` is given every
    pick is re-checked with :func:`in_region` at ``margin``.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if not sample.membership.any():
        raise InfeasibleDesign("the sampled stability region is empty")
    score = _boundary_distance(sample)
    pts = sample.points()

    cands = []  # (score, lam, slots)
    upper = sample.membership & (sample.im[:, None] > 0)
    for i, j in zip(*np.nonzero(upper)):
        cands.append((float(score[i, j]), complex(pts[i, j]), 2))
    row = sample.real_axis_row()
    for j in np.nonzero(sample.membership[row])[0]:
        lam = complex(sample.re[j])
        s = float(score[row, j]) - abs(sample.im[row])
        if s > 0 and (agent is None or in_region(agent, lam, margin)):
            cands.append((s, lam, 1))
    cands.sort(key=lambda c: (-c[0], abs(c[1]), c[1].real, c[1].imag))
    if agent is not None:
        cands = [c for c in cands if c[2] == 1 or in_region(agent, c[1], margin)]
    if N % 2 == 1 and not any(c[2] == 1 for c in cands):
        raise InfeasibleDesign(
            f"N={N} is odd but the region has no point on the real axis; "
            "a conjugate-closed target set is impossible"
        )
    if not cands:
        raise InfeasibleDesign("no admissible target candidates in the sampled region")

    sep = cands[0][0]
    while True:
        chosen = _greedy(cands, N, sep)
        if chosen is not None:
            return TargetSet(np.array(chosen))
        if sep == 0.0:
            raise InfeasibleDesign(f"cannot fit {N} conjugate-closed targets in the region")
        sep = sep / 2 if sep > 1e-12 else 0.0


def _greedy(cands, N, sep):
    # real points only fill the odd remainder; everything else comes in conjugate pairs
    chosen = []
    left = N
    for _, lam, slots in cands:
        if left == 0:
            break
        if slots > left or (slots == 1 and left % 2 == 0):
            continue
        if any(abs(lam - c) < sep or abs(lam.conjugate() - c) < sep for c in chosen):
            continue
        chosen.extend([lam, lam.conjugate()] if slots == 2 else [lam])
        left -= slots
    return chosen if left == 0 else None


def _real_block_diag(targets):
    """Real matrix with the given conjugate-closed spectrum (2x2 rotation blocks for pairs)."""
    t = np.asarray(targets, dtype=complex)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(t))))
    reals = [z.real for z in t if abs(z.imag) <= tol]
    uppers = sorted((z for z in t if z.imag > tol), key=lambda z: (z.real, z.imag))
    blocks = [np.array([[r]]) for r in sorted(reals)]
    blocks += [np.array([[z.real, z.imag], [-z.imag, z.real]]) for z in uppers]
    return linalg.block_diag(*blocks)


def _ackermann(A, b, targets):
    N = A.shape[0]
    coeffs = mk.poly_from_roots(targets).real
    phi = np.zeros_like(A)
    for c in coeffs:
        phi = phi @ A + c * np.eye(N)
    e_last = np.zeros(N)
    e_last[-1] = 1.0
    w = np.linalg.solve(ctrb(A, b).T, e_last)
    return (w @ phi).reshape(1, N)


def _sylvester(A, B, Lam, rng, draws=_SYLVESTER_DRAWS):
    """Parametric placement: solve ``A X - X Lam = B G`` and set ``K = G X^-1``.

    Then ``A - B K = X Lam X^-1``. Later draws also apply a random pre-feedback
    to move ``A`` away from the target spectrum. Returns the candidate with the
    best-conditioned ``X``.
    """
    N, M = B.shape
    best = None
    for k in range(draws):
        F = np.zeros((M, N)) if k == 0 else rng.standard_normal((M, N))
        G = rng.standard_normal((M, N))
        Af = A - B @ F
        try:
            X = linalg.solve_sylvester(Af, -Lam, B @ G)
            cond = np.linalg.cond(X)
            if not np.isfinite(cond) or (best is not None and cond >= best[0]):
                continue
            best = (cond, F + np.linalg.solve(X.T, G.T).T)
        except (linalg.LinAlgError, ValueError):
            continue
    return None if best is None else best[1]


def place_poles(A, B, targets, seed=0):
    """Real state-feedback ``K`` with ``sigma(A - B K)`` equal to ``targets``.

    Single-input pairs use characteristic-polynomial matching (Ackermann);
    multi-input pairs use the Sylvester parametric method with a seeded
    parameter draw. Whichever candidate reproduces the targets best is kept.
    """
    A = mk.as_matrix(A, "A")
    B = mk.as_matrix(B, "B")
    N = A.shape[0]
    if A.shape != (N, N) or B.shape[0] != N:
        raise DimensionError(f"incompatible shapes A {A.shape}, B {B.shape}")
    if not isinstance(targets, TargetSet):
        targets = TargetSet(targets)
    if len(targets) != N:
        raise DimensionError(f"need {N} targets, got {len(targets)}")
    cert = pbh_controllable(A, B)
    if cert is not None:
        raise Uncontrollable(
            f"(A, B) is uncontrollable: PBH fails at eigenvalue {cert.eigenvalue:.6g}",
            cert,
        )

    rng = np.random.default_rng(seed)
    candidates = []
    if B.shape[1] == 1:
        candidates.append(_ackermann(A, B, targets.targets))
    K = _sylvester(A, B, _real_block_diag(targets.targets), rng)
    if K is not None:
        candidates.append(K)
    if not candidates:
        raise InfeasibleDesign("pole placement failed for every parameter draw")
    errs = [mk.matched_distance(mk.eigenvalues(A - B @ K), targets.targets) for K in candidates]
    best = int(np.argmin(errs))
    if errs[best] > PLACEMENT_TOL * max(1.0, float(np.max(np.abs(targets.targets)))):
        # usually the closed-loop eigenvalues are too ill-conditioned to be
        # reproduced in double precision even by the exact gain
        warnings.warn(
            f"pole placement residual {errs[best]:.3g} exceeds tolerance "
            "(ill-conditioned closed-loop spectrum, or repeated targets beyond the input count)",
            PlacementWarning,
            stacklevel=2,
        )
    return np.real_if_close(candidates[best]).astype(float)


def exact_siso_gain(A, b, targets):
    """Single-input placement gain computed in exact rational arithmetic, rounded once.

    Slow, for diagnostics: it separates algorithmic error from the floor set by
    the eigenvalue conditioning of ``A - b K`` itself. Targets must be
    conjugate-closed.
    """
    A = mk.as_matrix(A, "A")
    N = A.shape[0]
    Aq = [[F(float(x)) for x in row] for row in A]
    poly = [F(1)]
    t = list(np.asarray(targets, dtype=complex))
    while t:
        r = t.pop(0)
        if abs(r.imag) > 0:
            j = min(range(len(t)), key=lambda k: abs(t[k] - r.conjugate()))
            t.pop(j)
            re, im = F(r.real), F(r.imag)
            fac = [F(1), -2 * re, re * re + im * im]
        else:
            fac = [F(1), -F(r.real)]
        out = [F(0)] * (len(poly) + len(fac) - 1)
        for i, p in enumerate(poly):
            for j, q in enumerate(fac):
                out[i + j] += p * q
        poly = out

    def matmul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(N)) for j in range(len(Y[0]))]
                for i in range(len(X))]

    eye = [[F(int(i == j)) for j in range(N)] for i in range(N)]
    phi = [[F(0)] * N for _ in range(N)]
    for c in poly:
        phi = matmul(phi, Aq)
        phi = [[phi[i][j] + c * eye[i][j] for j in range(N)] for i in range(N)]
    cols = [[F(float(x)) for x in np.ravel(b)]]
    for _ in range(N - 1):
        cols.append([sum(Aq[i][k] * cols[-1][k] for k in range(N)) for i in range(N)])
    # solve w Ctrb = e_N  <=>  Ctrb^T w^T = e_N
    M = [[cols[i][j] for j in range(N)] + [F(int(i == N - 1))] for i in range(N)]
    for c in range(N):
        p = next(r for r in range(c, N) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        for r in range(N):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    w = [M[i][N] / M[i][i] for i in range(N)]
    K = [sum(w[k] * phi[k][j] for k in range(N)) for j in range(N)]
    return np.array([[float(x) for x in K]])


def observer_gain(A, C, targets, seed=0):
    """Output injection ``L`` with ``sigma(A - L C)`` equal to ``targets`` (placement on the dual)."""
    A = mk.as_matrix(A, "A")
    C = mk.as_matrix(C, "C")
    cert = pbh_observable(A, C)
    if cert is not None:
        raise Uncontrollable(
            f"(A, C) is unobservable: PBH fails at eigenvalue {cert.eigenvalue:.6g}",
            cert,
        )
    return place_poles(A.T, C.T, targets, seed).T


def separation_matrix(agent, structure, K, L):
    """Closed loop of plant plus observer-based feedback in ``(x, x - xhat)`` coordinates."""
    K = mk.as_matrix(K, "K")
    L = mk.as_matrix(L, "L")
    A, B, C = structure.A, structure.B, structure.C
    if K.shape != (structure.M, structure.N) or L.shape != (structure.N, structure.M_out):
        raise DimensionError(f"K {K.shape} / L {L.shape} do not match the structure")
    BK = B @ K
    top_left = network_matrix(agent, A - BK)
    top_right = mk.kron(BK, agent.BC)
    bottom_right = network_matrix(agent, A - L @ C)
    zero = np.zeros_like(top_left)
    return np.block([[top_left, top_right], [zero, bottom_right]])


@dataclass(frozen=True, eq=False)
class DesignResult:
    K: np.ndarray
    L: np.ndarray
    sigma_AmBK: np.ndarray
    sigma_AmLC: np.ndarray
    controller_inside: bool
    observer_inside: bool
    closed_loop_hurwitz: bool
    closed_loop: np.ndarray
    closed_loop_abscissa: float
    margin: float
    controller_targets: np.ndarray | None = None
    observer_targets: np.ndarray | None = None

    @property
    def verified(self):
        return self.controller_inside and self.observer_inside and self.closed_loop_hurwitz

    @property
    def consistent(self):
        """Region containment of both spectra should imply a Hurwitz closed loop."""
        return not (self.controller_inside and self.observer_inside) or self.closed_loop_hurwitz

    def to_dict(self):
        def cplx(v):
            return None if v is None else [[z.real, z.imag] for z in np.asarray(v, dtype=complex)]

        return {
            "version": 1,
            "K": self.K.tolist(),
            "L": self.L.tolist(),
            "controller_targets": cplx(self.controller_targets),
            "observer_targets": cplx(self.observer_targets),
            "sigma_A_minus_BK": cplx(self.sigma_AmBK),
            "sigma_A_minus_LC": cplx(self.sigma_AmLC),
            "controller_inside": self.controller_inside,
            "observer_inside": self.observer_inside,
            "closed_loop_hurwitz": self.closed_loop_hurwitz,
            "closed_loop_abscissa": self.closed_loop_abscissa,
            "margin": self.margin,
            "verified": self.verified,
        }


def _sorted_spectrum(M):
    eig = mk.eigenvalues(M)
    return eig[np.lexsort((eig.imag, eig.real))]


def verify_design(agent, structure, K, L, margin=DESIGN_MARGIN, targets=(None, None)):
    """Check both structure spectra against the region and the full closed loop for Hurwitz-ness."""
    K = mk.as_matrix(K, "K")
    L = mk.as_matrix(L, "L")
    AmBK = structure.A - structure.B @ K
    AmLC = structure.A - L @ structure.C
    ctrl = spectrum_in_region(agent, AmBK, margin)
    obs = spectrum_in_region(agent, AmLC, margin)
    S = separation_matrix(agent, structure, K, L)
    abscissa = mk.spectral_abscissa(S)
    return DesignResult(
        K=K,
        L=L,
        sigma_AmBK=_sorted_spectrum(AmBK),
        sigma_AmLC=_sorted_spectrum(AmLC),
        controller_inside=ctrl.all_inside,
        observer_inside=obs.all_inside,
        closed_loop_hurwitz=abscissa < -VERIFY_MARGIN,
        closed_loop=S,
        closed_loop_abscissa=abscissa,
        margin=float(margin),
        controller_targets=targets[0],
        observer_targets=targets[1],
    )


def design(agent, structure, sample, controller_targets=None, observer_targets=None,
           margin=DESIGN_MARGIN, seed=0):
    """Full pipeline: targets, controller gain, observer gain, verification.

    Controller and observer targets are chosen independently; either may be
    supplied explicitly.
    """
    N = structure.N
    if controller_targets is None:
        controller_targets = auto_targets(sample, N, agent, margin)
    if observer_targets is None:
        observer_targets = auto_targets(sample, N, agent, margin)
    ct = controller_targets if isinstance(controller_targets, TargetSet) else TargetSet(controller_targets)
    ot = observer_targets if isinstance(observer_targets, TargetSet) else TargetSet(observer_targets)
    K = place_poles(structure.A, structure.B, ct, seed)
    L = observer_gain(structure.A, structure.C, ot, seed)
    return verify_design(agent, structure, K, L, margin, (ct.targets, ot.targets))


def lifted(agent, result):
    """Network-level gains for a design result."""
    return lift_gains(result.K, result.L, agent)
