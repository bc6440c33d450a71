"""Conformal metrics g = exp(2 phi) g_base on the flat torus and round sphere.

Everything here works in base coordinates. The torus base is the periodic
N x N grid on [0, 2pi)^2 with spectral (FFT) differentiation; the sphere
base is a unit icosphere with the cotangent Laplacian and lumped
spherical-triangle node areas. The Laplacian uses the analyst's sign
convention (nonpositive spectrum).
"""
import functools
import struct
import threading
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import splu
from scipy import sparse

from . import mesh

TORUS = "torus"
SPHERE = "sphere"

SNAPSHOT_MAGIC = b"RF2D"
SNAPSHOT_VERSION = 1
_KIND_CODES = {TORUS: 0, SPHERE: 1}

# Gauss-Bonnet tolerances: the torus identity is exact up to rounding.
EPS_GB_TORUS = 1e-8
EPS_GB_SPHERE = 1e-3 * 4.0 * np.pi


class UnsupportedOperation(NotImplementedError):
    pass


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class BaseSurface:
    """Common interface of the two base surfaces.

    Attributes set by subclasses: ``kind``, ``resolution``, ``node_count``,
    ``euler_characteristic``, ``base_curvature``, ``weights`` (node areas),
    ``spacing`` (mesh spacing h used for step control), ``faces`` and
    ``face_positions`` (a triangulation used for level-set geometry).
    """

    kind: str

    def __repr__(self):
        return f"{type(self).__name__}(resolution={self.resolution}, nodes={self.node_count})"

    @property
    def area(self):
        return float(self.weights.sum())

    @property
    def eps_gb(self):
        return EPS_GB_TORUS if self.kind == TORUS else EPS_GB_SPHERE

    def stiffness(self, u):
        """``L u`` with ``u @ L @ u`` the base Dirichlet energy."""
        return -self.weights * self.laplacian(u)

    @cached_property
    def face_areas(self):
        """Base areas of the triangles in ``faces``; they lump onto ``weights``."""
        raise NotImplementedError

    @cached_property
    def face_gradients(self):
        p = self.face_positions
        return mesh.p1_gradient_operators_from_positions(p[:, 0], p[:, 1], p[:, 2])


class TorusBase(BaseSurface):
    kind = TORUS
    euler_characteristic = 0
    base_curvature = 0.0

    def __init__(self, n):
        if n < 4:
            raise ValueError("torus resolution must be at least 4")
        self.resolution = n
        self.node_count = n * n
        self.spacing = 2.0 * np.pi / n
        self.weights = _readonly(np.full(n * n, self.spacing ** 2))
        grid = np.arange(n) * self.spacing
        x, y = np.meshgrid(grid, grid, indexing="ij")
        self.x = _readonly(x.ravel())
        self.y = _readonly(y.ravel())
        k = np.fft.fftfreq(n, d=1.0 / n)
        ky = np.fft.rfftfreq(n, d=1.0 / n)
        kx = k[:, None] * np.ones_like(ky)[None, :]
        kyy = np.ones_like(k)[:, None] * ky[None, :]
        self._lap = -(kx ** 2 + kyy ** 2)
        # Nyquist modes carry no first derivative
        kx1 = kx.copy()
        ky1 = kyy.copy()
        if n % 2 == 0:
            kx1[np.abs(kx) == n // 2] = 0.0
            ky1[:, np.abs(ky) == n // 2] = 0.0
        self._dx = 1j * kx1
        self._dy = 1j * ky1
        self._dxx = -(kx ** 2)
        self._dyy = -(kyy ** 2)
        self._dxy = -(kx1 * ky1)
        self.faces, self.face_positions = mesh.torus_triangles(n)

    def _apply(self, mult, u):
        n = self.resolution
        u = np.asarray(u, dtype=float).reshape(n, n)
        return np.fft.irfft2(mult * np.fft.rfft2(u), s=(n, n)).ravel()

    def laplacian(self, u):
        return self._apply(self._lap, u)

    def gradient(self, u):
        """Node values of (du/dx, du/dy)."""
        return self._apply(self._dx, u), self._apply(self._dy, u)

    def second_derivatives(self, u):
        return self._apply(self._dxx, u), self._apply(self._dxy, u), self._apply(self._dyy, u)

    def shifted_solve(self, rhs, c):
        """Solve (I - c Laplacian) x = rhs."""
        return self._apply(1.0 / (1.0 - c * self._lap), rhs)

    def grad_norm_density(self, u):
        ux, uy = self.gradient(u)
        return np.hypot(ux, uy)

    @cached_property
    def face_areas(self):
        return np.full(len(self.faces), 0.5 * self.spacing ** 2)

    @cached_property
    def distance_graph(self):
        """Edges of the 32-neighbour stencil: (i, j, base length)."""
        n, h = self.resolution, self.spacing
        offsets = [(a, b) for a in range(0, 4) for b in range(-3, 4)
                   if (a > 0 or b > 0) and np.gcd(a, b) == 1]
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        i, j = i.ravel(), j.ravel()
        src, dst, length = [], [], []
        for a, b in offsets:
            src.append(i * n + j)
            dst.append(((i + a) % n) * n + (j + b) % n)
            length.append(np.full(n * n, h * np.hypot(a, b)))
        return np.concatenate(src), np.concatenate(dst), np.concatenate(length)


class SphereBase(BaseSurface):
    kind = SPHERE
    euler_characteristic = 2
    base_curvature = 2.0

    def __init__(self, level):
        if level < 0:
            raise ValueError("subdivision level must be nonnegative")
        self.resolution = level
        verts, faces = mesh.icosphere(level)
        self.verts = _readonly(verts)
        self.faces = faces
        self.face_positions = verts[faces]
        self.node_count = len(verts)
        self._tri_areas = mesh.spherical_triangle_areas(verts, faces)
        self.weights = _readonly(mesh.lumped_areas(faces, self._tri_areas, len(verts)))
        self.L = mesh.cotangent_stiffness(verts, faces)
        e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        arcs = np.arccos(np.clip(np.einsum("ij,ij->i", verts[e[:, 0]], verts[e[:, 1]]), -1.0, 1.0))
        self.spacing = float(arcs.min())
        self._solvers = {}
        self._solver_lock = threading.Lock()

    @property
    def latitude(self):
        return np.arcsin(np.clip(self.verts[:, 2], -1.0, 1.0))

    @property
    def longitude(self):
        return np.arctan2(self.verts[:, 1], self.verts[:, 0])

    def laplacian(self, u):
        return -(self.L @ np.asarray(u, dtype=float)) / self.weights

    def stiffness(self, u):
        return self.L @ np.asarray(u, dtype=float)

    def shifted_solve(self, rhs, c):
        """Solve (I - c Laplacian) x = rhs; factorizations are cached per c."""
        key = float(c)
        with self._solver_lock:
            lu = self._solvers.get(key)
            if lu is None:
                if len(self._solvers) >= 32:
                    self._solvers.pop(next(iter(self._solvers)))
                lu = splu((sparse.diags(self.weights) + key * self.L).tocsc())
                self._solvers[key] = lu
        return lu.solve(self.weights * np.asarray(rhs, dtype=float))

    def face_gradient_vectors(self, u):
        u = np.asarray(u, dtype=float)
        return np.einsum("fk,fkd->fd", u[self.faces], self.face_gradients)

    def grad_norm_density(self, u):
        """Node values of |grad u| by area-weighted averaging of face gradients."""
        g = np.linalg.norm(self.face_gradient_vectors(u), axis=1)
        acc = np.zeros(self.node_count)
        for k in range(3):
            np.add.at(acc, self.faces[:, k], g * self._tri_areas / 3.0)
        return acc / self.weights

    @cached_property
    def face_areas(self):
        return self._tri_areas

    @cached_property
    def flat_face_areas(self):
        return mesh.flat_triangle_areas(self.verts, self.faces)

    @cached_property
    def distance_graph(self):
        """Edges joining vertices up to three rings apart, with arc lengths."""
        i, j = mesh.vertex_rings(self.faces, self.node_count, 3)
        d = np.einsum("ij,ij->i", self.verts[i], self.verts[j])
        return i, j, np.arccos(np.clip(d, -1.0, 1.0))


@functools.lru_cache(maxsize=None)
def torus(n=96):
    return TorusBase(n)


@functools.lru_cache(maxsize=None)
def sphere(level=5):
    return SphereBase(level)


def base_for(kind, resolution):
    if kind == TORUS:
        return torus(int(resolution))
    if kind == SPHERE:
        return sphere(int(resolution))
    raise ValueError(f"unknown surface kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ConformalSurface:
    base: BaseSurface
    phi: np.ndarray
    time_stamp: float = 0.0

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.base.node_count,):
            raise ValueError(f"phi has shape {phi.shape}, expected ({self.base.node_count},)")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi must be finite")
        if self.time_stamp < 0:
            raise ValueError("time_stamp must be nonnegative")
        object.__setattr__(self, "phi", _readonly(phi))

    @classmethod
    def flat(cls, base, c=0.0, time_stamp=0.0):
        return cls(base, np.full(base.node_count, float(c)), time_stamp)

    @property
    def node_count(self):
        return self.base.node_count

    @cached_property
    def conformal_weight(self):
        return np.exp(2.0 * self.phi)

    @cached_property
    def vol_element(self):
        """Per-node metric area e^{2 phi} w_b."""
        return self.conformal_weight * self.base.weights

    @cached_property
    def curvature_density(self):
        """R e^{2 phi} = R_b - 2 Lap_b phi, the curvature without the metric factor."""
        return self.base.base_curvature - 2.0 * self.base.laplacian(self.phi)

    @cached_property
    def curvature(self):
        return _readonly(self.curvature_density / self.conformal_weight)

    def shifted(self, c):
        return ConformalSurface(self.base, self.phi + c, self.time_stamp)

    def field(self, values):
        return ScalarField(values, self)

    def __repr__(self):
        return f"ConformalSurface({self.base!r}, t={self.time_stamp:g})"


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    surface: ConformalSurface

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.surface.node_count,):
            raise ValueError("field length does not match the surface")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class CurvatureSummary:
    R: ScalarField
    min_R: float
    max_R: float
    min_R_minus: float


def same_surface(a, b):
    if a is b:
        return True
    return (a.base is b.base and a.time_stamp == b.time_stamp
            and np.array_equal(a.phi, b.phi))


def values_on(s, u):
    """Node values of ``u``; rejects a ScalarField living on another surface."""
    if isinstance(u, ScalarField):
        if not same_surface(u.surface, s):
            raise ValueError("field lives on a different surface")
        return u.values
    u = np.asarray(u, dtype=float)
    if u.shape != (s.node_count,):
        raise ValueError("field length does not match the surface")
    return u


def scalar_curvature(s):
    R = s.curvature
    return CurvatureSummary(
        R=ScalarField(R, s),
        min_R=float(R.min()),
        max_R=float(R.max()),
        min_R_minus=float(min(0.0, R.min())),
    )


def volume(s):
    return float(s.vol_element.sum())


def integrate(s, f):
    return float(np.dot(values_on(s, f), s.vol_element))


def dirichlet_energy(s, u):
    """Integral of |grad u|^2; conformally invariant in 2D, so phi plays no role."""
    u = values_on(s, u)
    return float(np.dot(u, s.base.stiffness(u)))


def curvature_moment(s, u):
    """Integral of R u^2 dvol, computed without dividing by e^{2 phi}."""
    u = values_on(s, u)
    return float(np.dot(s.curvature_density * s.base.weights, u * u))


def grad_norm_l1(s, u):
    """Integral of |grad u|_g dvol_g = integral of e^{phi} |grad u|_b dvol_b."""
    u = values_on(s, u)
    base = s.base
    if base.kind == TORUS:
        return float(np.dot(np.exp(s.phi) * base.grad_norm_density(u), base.weights))
    g = np.linalg.norm(base.face_gradient_vectors(u), axis=1)
    ephi = np.exp(s.phi)[base.faces].mean(axis=1)
    return float(np.dot(g * ephi, base.flat_face_areas))


def hessian(s, f):
    """Covariant Hessian of ``f`` in base coordinates, shape (n, 2, 2). Torus only."""
    if s.base.kind != TORUS:
        raise UnsupportedOperation("Hessians are only available on the torus base")
    f = values_on(s, f)
    base = s.base
    fxx, fxy, fyy = base.second_derivatives(f)
    fx, fy = base.gradient(f)
    px, py = base.gradient(s.phi)
    dot = px * fx + py * fy
    H = np.empty((s.node_count, 2, 2))
    H[:, 0, 0] = fxx - 2.0 * px * fx + dot
    H[:, 1, 1] = fyy - 2.0 * py * fy + dot
    H[:, 0, 1] = H[:, 1, 0] = fxy - (px * fy + py * fx)
    return H


# -- snapshot files -----------------------------------------------------

_HEADER = struct.Struct("<4sIBId")


def snapshot_bytes(s):
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, _KIND_CODES[s.base.kind],
                          s.base.resolution, float(s.time_stamp))
    return header + np.ascontiguousarray(s.phi, dtype="<f8").tobytes()


def write_snapshot(path, s):
    Path(path).write_bytes(snapshot_bytes(s))


def parse_snapshot(data):
    if len(data) < _HEADER.size:
        raise ValueError("truncated snapshot")
    magic, version, kind, resolution, t = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError("not an RF2D snapshot")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    kinds = {v: k for k, v in _KIND_CODES.items()}
    if kind not in kinds:
        raise ValueError(f"unknown surface kind byte {kind}")
    base = base_for(kinds[kind], resolution)
    payload = data[_HEADER.size:]
    if len(payload) != 8 * base.node_count:
        raise ValueError("snapshot payload does not match node count")
    phi = np.frombuffer(payload, dtype="<f8").astype(float)
    return ConformalSurface(base, phi, t)


def read_snapshot(path):
    return parse_snapshot(Path(path).read_bytes())
