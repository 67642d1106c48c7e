"""Fixed-step simulation of the network, its observer, and observer-based feedback."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

MODES = ("open-loop", "observer-only", "output-feedback")
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class SimConfig:
    t_final: float = 10.0
    dt: float = 1e-3
    x0: np.ndarray | None = None
    xhat0: np.ndarray | None = None
    mode: str = "output-feedback"
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final >= self.dt:
            raise ValueError("t_final must be at least dt")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    estimates: np.ndarray
    errors: np.ndarray
    inputs: np.ndarray
    diverged: bool
    mode: str

    def norms(self, signal="state"):
        data = {"state": self.states, "error": self.errors, "estimate": self.estimates}[signal]
        return np.linalg.norm(data, axis=1)


def rk4_step(f, z, h):
    """One classical four-stage Runge-Kutta step of ``z' = f(z)``."""
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(F, h):
    """Matrix that advances ``z' = F z`` by one RK4 step.

    For a linear right-hand side the four stages collapse to the degree-4
    Taylor polynomial of ``exp(hF)``; this is the same step, not an
    approximation of it.
    """
    hF = h * np.asarray(F)
    I = np.eye(hF.shape[0])
    return I + hF @ (I + hF @ (I / 2 + hF @ (I / 6 + hF / 24)))


def closed_loop_generator(lifted, gains, mode):
    """Generator of the joint ``(x, xhat)`` dynamics for a simulation mode."""
    calA, calB, calC = lifted.calA, lifted.calB, lifted.calC
    n = calA.shape[0]
    Z = np.zeros((n, n))
    if mode == "open-loop":
        return np.block([[calA, Z], [Z, Z]])
    LC = gains.calL @ calC
    if mode == "observer-only":
        return np.block([[calA, Z], [LC, calA - LC]])
    BK = calB @ gains.calK
    return np.block([[calA, -BK], [LC, calA - BK - LC]])


def simulate_linear(F, z0, dt, t_final, record_every=1):
    """Integrate ``z' = F z`` with fixed-step RK4.

    Returns ``(times, samples, diverged)``. Every ``record_every``-th step is
    kept, plus the last one; integration stops early once a recorded state is
    non-finite or exceeds the divergence limit.
    """
    Phi = rk4_propagator(F, dt)
    n_steps = int(round(t_final / dt))
    stride = max(1, min(int(record_every), n_steps))
    # recorded samples are reached by whole strides of the one-step propagator
    Phi_stride = np.linalg.matrix_power(Phi, stride)
    z = np.array(z0, dtype=float)
    times = [0.0]
    samples = [z.copy()]
    diverged = False
    k = 0
    while k < n_steps:
        step = min(stride, n_steps - k)
        z = (Phi_stride if step == stride else np.linalg.matrix_power(Phi, step)) @ z
        k += step
        if not np.all(np.isfinite(z)):
            diverged = True
            break
        times.append(k * dt)
        samples.append(z.copy())
        if np.max(np.abs(z)) > DIVERGENCE_LIMIT:
            diverged = True
            break
    return np.array(times), np.array(samples), diverged


def simulate(lifted, gains, cfg):
    """Simulate plant and observer; ``u = -calK xhat`` in output-feedback mode.

    In open-loop mode the observer is not run and the estimate columns stay
    at zero.
    """
    n = lifted.order
    x0 = np.zeros(n) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    xhat0 = np.zeros(n) if cfg.xhat0 is None else np.asarray(cfg.xhat0, dtype=float)
    if x0.shape != (n,) or xhat0.shape != (n,):
        raise DimensionError(f"initial conditions must have length {n}")
    if gains is not None and (gains.calK.shape != lifted.calB.T.shape
                              or gains.calL.shape != lifted.calC.T.shape):
        raise DimensionError("lifted gains do not match the lifted system")
    if gains is None and cfg.mode != "open-loop":
        raise ValueError(f"mode {cfg.mode!r} needs gains")
    if cfg.mode == "open-loop":
        xhat0 = np.zeros(n)

    F = closed_loop_generator(lifted, gains, cfg.mode)
    times, z, diverged = simulate_linear(F, np.concatenate([x0, xhat0]), cfg.dt,
                                         cfg.t_final, cfg.record_every)
    x, xhat = z[:, :n], z[:, n:]
    if cfg.mode == "output-feedback":
        u = -(xhat @ gains.calK.T)
    else:
        u = np.zeros((len(times), lifted.calB.shape[1]))
    return Trajectory(times, x, xhat, x - xhat, u, diverged, cfg.mode)


def fit_decay(times, values):
    """Exponential rate (per second) fitted to a positive norm series.

    Only the trailing half of the series is used. When that part oscillates
    the fit runs through its local maxima, which trace the envelope;
    otherwise through every sample. Returns ``nan`` if the series is zero.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 10:
        raise ValueError("need at least 10 samples to fit a decay rate")
    tail = times >= times[0] + 0.5 * (times[-1] - times[0])
    t, v = times[tail], values[tail]
    if not np.any(v > 0):
        return math.nan
    peaks = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    if peaks.size >= 3:
        t, v = t[peaks], v[peaks]
    keep = v > 0
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(t[keep], np.log(v[keep]), 1)
    return float(slope)


def decay_estimate(traj, signal="state"):
    """Decay rate of ``||x||`` (or ``||x - xhat||`` with ``signal='error'``)."""
    return fit_decay(traj.times, traj.norms(signal))
