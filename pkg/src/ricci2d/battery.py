"""Test functions standing in for "all u with int u^2 dvol = 1"."""
from dataclasses import dataclass

import numpy as np

from .surface import TORUS, ScalarField, values_on


def l2_normalize(s, u):
    u = values_on(s, u)
    norm2 = float(np.dot(u * u, s.vol_element))
    if norm2 <= 0.0:
        raise ValueError("cannot normalize the zero field")
    return u / np.sqrt(norm2)


@dataclass(frozen=True, eq=False)
class TestFunctionBattery:
    """Labelled fields, each with unit L^2(g) norm on ``surface``."""

    __test__ = False  # not a pytest class

    members: tuple
    surface: object

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def labels(self):
        return [label for label, _ in self.members]

    def on(self, s):
        """The same node functions renormalized for another metric on the same base."""
        if s.base is not self.surface.base:
            raise ValueError("battery and surface live on different bases")
        return TestFunctionBattery(
            tuple((label, ScalarField(l2_normalize(s, u.values), s)) for label, u in self.members), s)

    def extended(self, extra):
        """Append (label, values) pairs, normalizing them on this battery's surface."""
        s = self.surface
        more = tuple((label, ScalarField(l2_normalize(s, u), s)) for label, u in extra)
        return TestFunctionBattery(self.members + more, s)


def base_distance(base, node):
    """Base geodesic distance from ``node`` to every node (flat periodic or great circle)."""
    if base.kind == TORUS:
        L = 2.0 * np.pi
        dx = np.abs(base.x - base.x[node])
        dy = np.abs(base.y - base.y[node])
        dx = np.minimum(dx, L - dx)
        dy = np.minimum(dy, L - dy)
        return np.hypot(dx, dy)
    d = base.verts @ base.verts[node]
    return np.arccos(np.clip(d, -1.0, 1.0))


def _eigen_like(base):
    if base.kind == TORUS:
        x, y = base.x, base.y
        return [
            ("cos_x", np.cos(x)), ("sin_x", np.sin(x)), ("cos_y", np.cos(y)), ("sin_y", np.sin(y)),
            ("cos_x+y", np.cos(x + y)), ("sin_x_sin_y", np.sin(x) * np.sin(y)),
            ("cos_2x", np.cos(2 * x)), ("1+0.5cos_x", 1.0 + 0.5 * np.cos(x)),
        ]
    X, Y, Z = base.verts.T
    return [
        ("x", X), ("y", Y), ("z", Z), ("xy", X * Y), ("3z2-1", 3 * Z ** 2 - 1),
        ("1+0.5z", 1.0 + 0.5 * Z), ("z|z|", Z * np.abs(Z)),
    ]


def _random_smooth(base, rng, count):
    out = []
    for k in range(count):
        if base.kind == TORUS:
            u = np.full(base.node_count, rng.normal())
            for a in range(-3, 4):
                for b in range(0, 4):
                    if b == 0 and a <= 0:
                        continue
                    amp = rng.normal() / (1.0 + a * a + b * b)
                    ph = rng.uniform(0, 2 * np.pi)
                    u = u + amp * np.cos(a * base.x + b * base.y + ph)
        else:
            X, Y, Z = base.verts.T
            monos = [np.ones_like(X), X, Y, Z, X * Y, Y * Z, Z * X, X * X - Y * Y,
                     3 * Z * Z - 1, X * Y * Z, X ** 3, Y ** 3, Z ** 3]
            u = sum(rng.normal() * m for m in monos)
        out.append((f"random_{k}", u))
    return out


def bump_centers(base):
    if base.kind == TORUS:
        n = base.resolution
        return [0, (n // 3) * n + (2 * n) // 3]
    z = base.verts[:, 2]
    return [int(np.argmax(z)), int(np.argmin(np.abs(z - 0.3) + np.abs(base.verts[:, 0] - 0.5)))]


def bump_widths(base, count=6):
    """Log grid of bump variances from a few cells up to order one."""
    return np.geomspace(4.0 * base.spacing ** 2, 1.0, count)


def make_battery(s, seed=0, ground_state=None, n_random=4, extra=()):
    """Constants, low eigenfunctions, bumps exp(-d^2 / 2w), random smooth fields.

    ``ground_state`` (node values) is appended as the "ground_state"
    member when supplied.
    """
    base = s.base
    rng = np.random.default_rng(seed)
    members = [("const", np.ones(base.node_count))]
    members += _eigen_like(base)
    for c, center in enumerate(bump_centers(base)):
        d = base_distance(base, center)
        for w in bump_widths(base):
            members.append((f"bump{c}_w{w:.4g}", np.exp(-d * d / (2.0 * w))))
    members += _random_smooth(base, rng, n_random)
    if ground_state is not None:
        members.append(("ground_state", np.asarray(ground_state, dtype=float)))
    members += list(extra)
    return TestFunctionBattery(tuple((label, ScalarField(l2_normalize(s, u), s)) for label, u in members), s)


def random_metric_phi(base, rng, amplitude=0.3):
    """Smooth random conformal factor with max |phi| = ``amplitude``."""
    (_, u), = _random_smooth(base, rng, 1)
    u = u - u.mean()
    return amplitude * u / np.abs(u).max()
