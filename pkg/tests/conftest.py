import time

import numpy as np
import pytest

from ricci2d import ConformalSurface, StepControl, run_flow, sphere, torus
from ricci2d.battery import random_metric_phi
from ricci2d.flow import FlowTrajectory

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    """Record one PASS/FAIL line per criterion and fail the test on FAIL."""
    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


@pytest.fixture(scope="session")
def torus_base():
    return torus(96)


@pytest.fixture(scope="session")
def sphere_base():
    return sphere(5)


@pytest.fixture(scope="session")
def small_torus():
    return torus(32)


@pytest.fixture(scope="session")
def small_sphere():
    return sphere(3)


@pytest.fixture(scope="session")
def sphere_extinction_run(sphere_base):
    """Unit round sphere flowed to extinction; (trajectory, wall seconds)."""
    start = time.perf_counter()
    traj = run_flow(ConformalSurface.flat(sphere_base), StepControl(t_end=1.0), snapshot_every=0.05)
    return traj, time.perf_counter() - start


@pytest.fixture(scope="session")
def sphere_trajectory(sphere_extinction_run):
    """The same run restricted to t <= 0.4, where every check is posed."""
    traj, _ = sphere_extinction_run
    return FlowTrajectory(tuple(s for s in traj.snapshots if s.time_stamp <= 0.4 + 1e-12))


@pytest.fixture(scope="session")
def perturbed_torus_trajectory(torus_base):
    phi0 = 0.05 * np.sin(torus_base.x) * np.sin(torus_base.y)
    return run_flow(ConformalSurface(torus_base, phi0), StepControl(t_end=0.2), snapshot_every=1e-3)


@pytest.fixture(scope="session")
def random_torus_trajectories(torus_base):
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(5):
        phi0 = random_metric_phi(torus_base, rng, amplitude=0.3)
        out.append(run_flow(ConformalSurface(torus_base, phi0), StepControl(t_end=0.3), snapshot_every=0.03))
    return out
