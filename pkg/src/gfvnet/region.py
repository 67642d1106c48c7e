"""Stability region of an agent in the interconnection-eigenvalue plane.

A complex number ``lam`` belongs to the region when ``Ah + lam * Bh Ch`` is
Hurwitz. A network whose interconnection matrix has all of its eigenvalues in
the region is exponentially stable, and conversely.
"""

from dataclasses import dataclass

import numpy as np

from . import matrixkit as mk
from .agents import closed_agent_matrix

DESIGN_MARGIN = 1e-6
PENDULUM_BOUNDS = (-3.0, 3.0, -15.0, 15.0)


def in_region(agent, lam, margin=0.0):
    if margin < 0:
        raise ValueError("margin must be non-negative")
    return mk.is_hurwitz(closed_agent_matrix(agent, lam), margin)


def region_abscissa(agent, lams):
    """Spectral abscissa of ``Ah + lam Bh Ch`` for every ``lam`` in an array.

    Batched through one stacked eigenvalue call; the result has the shape of ``lams``.
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.ravel()
    stack = agent.Ah[None, :, :] + flat[:, None, None] * agent.BC[None, :, :]
    ab = np.empty(flat.shape)
    # chunked to bound the temporary stack size
    step = 20000
    for lo in range(0, flat.size, step):
        ab[lo:lo + step] = np.linalg.eigvals(stack[lo:lo + step]).real.max(axis=1)
    return ab.reshape(lams.shape)


@dataclass(frozen=True, eq=False)
class RegionSample:
    """Region membership on a rectangular grid.

    ``membership[i, j]`` refers to the point ``re[j] + 1j * im[i]``; rows run
    along the imaginary axis, so the array prints like the complex plane
    flipped vertically.
    """

    bounds: tuple
    resolution: tuple
    re: np.ndarray
    im: np.ndarray
    membership: np.ndarray
    abscissa: np.ndarray
    margin_used: float

    def points(self):
        return self.re[None, :] + 1j * self.im[:, None]

    def inside_points(self):
        return self.points()[self.membership]

    def real_axis_row(self):
        """Index of the grid row nearest ``Im = 0``."""
        return int(np.argmin(np.abs(self.im)))


def _check_bounds(bounds):
    re0, re1, im0, im1 = (float(b) for b in bounds)
    if not (re0 < re1 and im0 < im1):
        raise ValueError(f"bounds must satisfy re0 < re1 and im0 < im1, got {bounds}")
    return re0, re1, im0, im1


def sample_region(agent, bounds, resolution, margin=0.0):
    """Evaluate region membership on a ``resolution = (n_re, n_im)`` grid over ``bounds``."""
    re0, re1, im0, im1 = _check_bounds(bounds)
    n_re, n_im = (int(r) for r in resolution)
    if n_re < 2 or n_im < 2:
        raise ValueError("resolution must be at least 2 per axis")
    re = np.linspace(re0, re1, n_re)
    im = np.linspace(im0, im1, n_im)
    ab = region_abscissa(agent, re[None, :] + 1j * im[:, None])
    return RegionSample(
        bounds=(re0, re1, im0, im1),
        resolution=(n_re, n_im),
        re=re,
        im=im,
        membership=ab < -margin,
        abscissa=ab,
        margin_used=float(margin),
    )


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray
    inside: np.ndarray

    @property
    def all_inside(self):
        return bool(np.all(self.inside))


def spectrum_in_region(agent, M, margin=0.0):
    """Test every eigenvalue of the structure-level matrix ``M`` for region membership."""
    eig = mk.eigenvalues(M)
    inside = np.array([in_region(agent, lam, margin) for lam in eig], dtype=bool)
    return SpectrumReport(eig, inside)
