"""Two-dimensional Ricci flow on a conformal factor and its conjugate heat equation.

With g = e^{2 phi} g_b the flow dg/dt = -2 Ric = -R g becomes the scalar
equation dphi/dt = -R/2 = e^{-2 phi} (Lap_b phi - R_b / 2), integrated
with classical RK4 under a parabolic step limit.
"""
import bisect
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .surface import (
    ConformalSurface,
    ScalarField,
    curvature_moment,
    dirichlet_energy,
    hessian,
    read_snapshot,
    scalar_curvature,
    values_on,
    volume,
    write_snapshot,
)

EXTINCTION_THRESHOLD = 1e-3
RICHARDSON_THRESHOLDS = (1e-2, 1e-3)


class Termination(str, enum.Enum):
    REACHED_T_END = "ReachedTEnd"
    EXTINCTION = "Extinction"
    STEP_UNDERFLOW = "StepUnderflow"


class StepUnderflow(RuntimeError):
    pass


class PositivityLoss(RuntimeError):
    pass


@dataclass(frozen=True)
class StepControl:
    safety_factor: float = 0.1
    dt_max: float = 1e-2
    dt_min: float = 1e-12
    t_end: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.safety_factor < 1.0:
            raise ValueError("safety_factor must lie in (0, 1)")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")


@dataclass(frozen=True)
class StepStat:
    t: float
    dt: float
    min_R: float
    max_R: float


def ricci_rate(base, phi):
    """dphi/dt = -R/2 for the conformal metric e^{2 phi} g_b."""
    return np.exp(-2.0 * phi) * (base.laplacian(phi) - 0.5 * base.base_curvature)


def stable_dt(base, phi, ctrl):
    return min(ctrl.dt_max, ctrl.safety_factor * base.spacing ** 2 * float(np.exp(2.0 * phi).min()))


def _rk4(rate, y, dt):
    k1 = rate(y)
    k2 = rate(y + 0.5 * dt * k1)
    k3 = rate(y + 0.5 * dt * k2)
    k4 = rate(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1


def flow_step(s, ctrl, dt_cap=None):
    """One RK4 step; ``dt_cap`` lets callers land exactly on output times."""
    dt = stable_dt(s.base, s.phi, ctrl)
    if dt < ctrl.dt_min:
        raise StepUnderflow(f"dt={dt:.3e} below dt_min={ctrl.dt_min:.3e} at t={s.time_stamp:g}")
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    phi, _ = _rk4(lambda p: ricci_rate(s.base, p), s.phi, dt)
    return ConformalSurface(s.base, phi, s.time_stamp + dt)


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    snapshots: tuple
    step_stats: tuple = ()
    terminated_reason: Termination = Termination.REACHED_T_END
    extinction_time: float = math.nan
    # crossing times of min e^{2 phi} below each threshold
    crossings: dict = field(default_factory=dict)

    def __post_init__(self):
        times = [s.time_stamp for s in self.snapshots]
        if not times:
            raise ValueError("a trajectory needs at least one snapshot")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def times(self):
        return np.array([s.time_stamp for s in self.snapshots])

    @property
    def base(self):
        return self.snapshots[0].base

    def surface_at(self, t):
        """Metric at time ``t`` by linear interpolation of phi between snapshots."""
        times = [s.time_stamp for s in self.snapshots]
        if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
            raise ValueError(f"t={t} outside the trajectory range [{times[0]}, {times[-1]}]")
        k = bisect.bisect_left(times, t)
        if k < len(times) and abs(times[k] - t) <= 1e-12:
            return self.snapshots[k]
        if k > 0 and abs(times[k - 1] - t) <= 1e-12:
            return self.snapshots[k - 1]
        a, b = self.snapshots[k - 1], self.snapshots[k]
        theta = (t - a.time_stamp) / (b.time_stamp - a.time_stamp)
        return ConformalSurface(a.base, (1.0 - theta) * a.phi + theta * b.phi, t)

    def phi_at(self, t):
        return self.surface_at(t).phi


def run_flow(s0, ctrl, snapshot_every, extinction_threshold=EXTINCTION_THRESHOLD,
             crossing_thresholds=RICHARDSON_THRESHOLDS):
    """Integrate from ``s0`` until ``t_end``, extinction, or step underflow.

    Snapshots are stored at multiples of ``snapshot_every`` (steps are
    shortened to land on them) and at the final time. Extinction means
    min e^{2 phi} < ``extinction_threshold`` or vol < threshold * vol0.
    """
    if snapshot_every <= 0:
        raise ValueError("snapshot_every must be positive")
    base = s0.base
    vol0 = volume(s0)
    thresholds = sorted(set(crossing_thresholds) | {extinction_threshold}, reverse=True)
    crossings = {}
    snapshots = [s0]
    stats = []
    s = s0
    k_next = math.floor(s0.time_stamp / snapshot_every + 1e-9) + 1
    reason = Termination.REACHED_T_END
    t_ext = math.nan
    prev_min = float(np.exp(2.0 * s.phi).min())
    while s.time_stamp < ctrl.t_end - 1e-14:
        t_snap = k_next * snapshot_every
        cap = min(t_snap, ctrl.t_end) - s.time_stamp
        try:
            new = flow_step(s, ctrl, dt_cap=cap)
        except StepUnderflow:
            reason = Termination.STEP_UNDERFLOW
            break
        landed = abs(new.time_stamp - t_snap) <= 1e-12 * max(1.0, t_snap)
        if landed:
            new = ConformalSurface(base, new.phi, t_snap)
            k_next += 1
        R = s.curvature
        stats.append(StepStat(s.time_stamp, new.time_stamp - s.time_stamp, float(R.min()), float(R.max())))
        s = new
        cur_min = float(np.exp(2.0 * s.phi).min())
        for thr in thresholds:
            if thr not in crossings and cur_min < thr:
                frac = (prev_min - thr) / (prev_min - cur_min)
                t_prev = stats[-1].t
                crossings[thr] = t_prev + frac * stats[-1].dt
        prev_min = cur_min
        extinct = cur_min < extinction_threshold or volume(s) < extinction_threshold * vol0
        if landed or extinct or s.time_stamp >= ctrl.t_end - 1e-14:
            if s.time_stamp > snapshots[-1].time_stamp:
                snapshots.append(s)
        if extinct:
            reason = Termination.EXTINCTION
            t_ext = crossings.get(extinction_threshold, s.time_stamp)
            break
    if snapshots[-1] is not s and s.time_stamp > snapshots[-1].time_stamp:
        snapshots.append(s)
    return FlowTrajectory(tuple(snapshots), tuple(stats), reason, t_ext, dict(crossings))


def richardson_extinction(traj, thresholds=RICHARDSON_THRESHOLDS):
    """Extinction time extrapolated linearly in the threshold to zero."""
    e1, e2 = thresholds
    if e1 not in traj.crossings or e2 not in traj.crossings:
        raise ValueError("trajectory did not cross both thresholds")
    t1, t2 = traj.crossings[e1], traj.crossings[e2]
    return (e1 * t2 - e2 * t1) / (e1 - e2)


def volume_law_defects(traj):
    """|vol(t) - (vol0 - 4 pi chi t)| per snapshot."""
    s0 = traj.snapshots[0]
    vol0 = volume(s0)
    chi = s0.base.euler_characteristic
    return np.array([abs(volume(s) - (vol0 - 4.0 * np.pi * chi * (s.time_stamp - s0.time_stamp)))
                     for s in traj.snapshots])


# -- trajectory directories ---------------------------------------------

def snapshot_name(t):
    return f"t_{int(round(t * 1e6))}.rf2d"


def write_trajectory(traj, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    used = set()
    for s in traj.snapshots:
        us = int(round(s.time_stamp * 1e6))
        while us in used:
            us += 1
        used.add(us)
        write_snapshot(directory / f"t_{us}.rf2d", s)
        c = scalar_curvature(s)
        lines.append(f"{s.time_stamp!r},{volume(s)!r},{c.min_R!r},{c.max_R!r}")
    (directory / "manifest.txt").write_text("\n".join(lines) + "\n")
    (directory / "termination.txt").write_text(
        f"{traj.terminated_reason.value},{traj.extinction_time!r}\n")


def read_trajectory(directory):
    directory = Path(directory)
    snaps = sorted((read_snapshot(p) for p in directory.glob("t_*.rf2d")), key=lambda s: s.time_stamp)
    reason, t_ext = Termination.REACHED_T_END, math.nan
    term = directory / "termination.txt"
    if term.exists():
        r, t = term.read_text().strip().split(",")
        reason, t_ext = Termination(r), float(t)
    return FlowTrajectory(tuple(snaps), (), reason, t_ext)


def read_manifest(directory):
    rows = []
    for line in (Path(directory) / "manifest.txt").read_text().splitlines():
        if line.strip():
            rows.append(tuple(float(x) for x in line.split(",")))
    return rows


# -- backward conjugate heat equation -------------------------------------

@dataclass(frozen=True, eq=False)
class ConjugateHeatState:
    v: ScalarField
    f: ScalarField
    time: float

    @property
    def surface(self):
        return self.v.surface

    @property
    def mass(self):
        return float(np.dot(self.v.values, self.surface.vol_element))


def _state(s, v):
    if np.any(v <= 0.0):
        raise PositivityLoss(f"conjugate heat solution lost positivity at t={s.time_stamp:g}")
    return ConjugateHeatState(ScalarField(v, s), ScalarField(-np.log(v), s), s.time_stamp)


def solve_conjugate_backward(traj, t1, f_at_t1, safety_factor=0.1, mass_tol=1e-6):
    """Solve dv/dt = -Lap v + R v backward from ``t1`` to the first snapshot.

    Integrates in reversed time tau = t1 - t. The unknown is the base
    density m = v e^{2 phi}, for which the equation reads
    dm/dtau = Lap_b(m e^{-2 phi}); this keeps the integral of v dvol fixed
    along any interpolated metric path. Returns states at ``t1`` and at
    every earlier snapshot time, in increasing time order.
    """
    s1 = traj.surface_at(t1)
    f1 = values_on(s1, f_at_t1)
    v1 = np.exp(-f1)
    mass = float(np.dot(v1, s1.vol_element))
    if abs(mass - 1.0) > mass_tol:
        raise ValueError(f"e^(-f(t1)) must integrate to 1, got {mass:.9f}")
    base = traj.base
    times = [t1] + [t for t in reversed(traj.times.tolist()) if t < t1 - 1e-12]
    states = [_state(s1, v1)]
    m = v1 * s1.conformal_weight
    for t_hi, t_lo in zip(times, times[1:]):
        phi_hi = traj.phi_at(t_hi)
        phi_lo = traj.phi_at(t_lo)
        span = t_hi - t_lo
        dt_lim = safety_factor * base.spacing ** 2 * float(min(np.exp(2 * phi_hi).min(), np.exp(2 * phi_lo).min()))
        nsub = max(1, math.ceil(span / dt_lim - 1e-9))
        h = span / nsub

        def rate(mm, theta):
            phi = (1.0 - theta) * phi_hi + theta * phi_lo
            return base.laplacian(mm * np.exp(-2.0 * phi))

        for j in range(nsub):
            a = j / nsub
            b = (j + 0.5) / nsub
            c = (j + 1) / nsub
            k1 = rate(m, a)
            k2 = rate(m + 0.5 * h * k1, b)
            k3 = rate(m + 0.5 * h * k2, b)
            k4 = rate(m + h * k3, c)
            m = m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if np.any(m <= 0.0):
                raise PositivityLoss(f"positivity lost near t={t_hi - c * span:g}; reduce the step")
        s = traj.surface_at(t_lo)
        states.append(_state(s, m / s.conformal_weight))
    return states[::-1]


@dataclass(frozen=True)
class IntervalReport:
    t_start: float
    t_end: float
    energy_start: float
    energy_end: float
    rate: float
    lower_bound: float
    margin: float
    tolerance: float

    @property
    def passed(self):
        return self.margin >= -self.tolerance


def conjugate_energy(state):
    """Integral of |grad u|^2 + R u^2 / 4 for u = e^{-f/2}."""
    s = state.surface
    u = np.sqrt(state.v.values)
    return dirichlet_energy(s, u) + 0.25 * curvature_moment(s, u)


def soliton_defect(state):
    """Integral of |Ric + Hess f|^2 e^{-f} dvol; Ric = (R/2) g in two dimensions."""
    s = state.surface
    H = hessian(s, state.f)
    ric = 0.5 * s.curvature_density  # (R/2) e^{2 phi}, the coordinate components of Ric
    T = H.copy()
    T[:, 0, 0] += ric
    T[:, 1, 1] += ric
    norm2 = np.exp(-4.0 * s.phi) * np.einsum("nij,nij->n", T, T)
    return float(np.dot(norm2 * state.v.values, s.vol_element))


def f_energy_rate_check(traj, states, tol_scale=1e-3):
    """Compare dE/dt with (1/2) int |Ric + Hess f|^2 e^{-f} on each interval.

    The bound is averaged over the interval by the trapezoid rule; the
    tolerance is ``tol_scale * (1 + |E|)``.
    """
    energies = [conjugate_energy(st) for st in states]
    bounds = [0.5 * soliton_defect(st) for st in states]
    out = []
    for k in range(len(states) - 1):
        a, b = states[k], states[k + 1]
        dt = b.time - a.time
        rate = (energies[k + 1] - energies[k]) / dt
        lower = 0.5 * (bounds[k] + bounds[k + 1])
        tol = tol_scale * (1.0 + max(abs(energies[k]), abs(energies[k + 1])))
        out.append(IntervalReport(a.time, b.time, energies[k], energies[k + 1], rate, lower, rate - lower, tol))
    return out
