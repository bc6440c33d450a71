"""Geodesic-ball volume ratios vol(B(x, r)) / r^2 under a curvature gate R <= 1/r^2."""
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .surface import ScalarField

N_CENTERS = 32
N_RADII = 12


def edge_graph(s):
    """Sparse symmetric graph with edge lengths base_len * e^{(phi_i + phi_j) / 2}."""
    i, j, length = s.base.distance_graph
    w = length * np.exp(0.5 * (s.phi[i] + s.phi[j]))
    n = s.base.node_count
    return sparse.csr_matrix((w, (i, j)), shape=(n, n))


def distance_fields(s, centers, graph=None):
    """Shortest-path distances from each center, shape (len(centers), n)."""
    graph = edge_graph(s) if graph is None else graph
    return np.atleast_2d(dijkstra(graph, directed=False, indices=np.asarray(centers, dtype=int)))


def geodesic_distances(s, x):
    if not 0 <= x < s.base.node_count:
        raise IndexError(f"node {x} out of range")
    return ScalarField(distance_fields(s, [x])[0], s)


def _ball_weights(s, dist, r):
    # fraction of each node's cell inside the ball, linear across a cell width
    cell = np.sqrt(s.vol_element)
    return np.clip((r - dist) / cell + 0.5, 0.0, 1.0)


def ball_volume(s, x, r, dist=None):
    """Metric area of B(x, r), counting boundary cells fractionally."""
    if r <= 0:
        raise ValueError("radius must be positive")
    d = geodesic_distances(s, x).values if dist is None else dist
    if r >= d.max():
        return float(s.vol_element.sum())
    return float(np.dot(_ball_weights(s, d, r), s.vol_element))


def farthest_point_centers(s, count=N_CENTERS, start=0, graph=None):
    """Greedy farthest-point sample; returns (centers, their distance fields)."""
    graph = edge_graph(s) if graph is None else graph
    centers = [start]
    fields = [distance_fields(s, [start], graph)[0]]
    nearest = fields[0].copy()
    while len(centers) < min(count, s.base.node_count):
        nxt = int(np.argmax(nearest))
        centers.append(nxt)
        fields.append(distance_fields(s, [nxt], graph)[0])
        nearest = np.minimum(nearest, fields[-1])
    return np.array(centers), np.array(fields)


def default_radii(s, diameter, count=N_RADII, r_max=None):
    """Log grid from four metric cells to half the diameter (or ``r_max``)."""
    h = s.base.spacing * float(np.exp(np.mean(s.phi)))
    top = 0.5 * diameter if r_max is None else min(r_max, 0.5 * diameter)
    return np.geomspace(4.0 * h, top, count)


@dataclass(frozen=True)
class NoncollapseScan:
    t: float
    centers: np.ndarray
    radii: np.ndarray
    sup_R: np.ndarray       # (centers, radii)
    volumes: np.ndarray     # (centers, radii)
    eligible: np.ndarray    # bool (centers, radii)

    @property
    def ratios(self):
        return self.volumes / self.radii[None, :] ** 2

    @property
    def kappa(self):
        """Smallest eligible ratio, or nan when nothing passes the gate."""
        if not self.eligible.any():
            return float("nan")
        return float(self.ratios[self.eligible].min())

    @property
    def witness(self):
        if not self.eligible.any():
            return None
        masked = np.where(self.eligible, self.ratios, np.inf)
        c, k = np.unravel_index(np.argmin(masked), masked.shape)
        return int(self.centers[c]), float(self.radii[k])

    def rows(self):
        """(t, x_index, r, sup_R, eligible, vol, ratio) per scanned pair."""
        out = []
        for c, x in enumerate(self.centers):
            for k, r in enumerate(self.radii):
                out.append((self.t, int(x), float(r), float(self.sup_R[c, k]),
                            int(self.eligible[c, k]), float(self.volumes[c, k]),
                            float(self.ratios[c, k])))
        return out


def kappa_scan(s, centers=None, radii=None, r_max=None):
    """Volume ratios over centers x radii; a pair is eligible when sup R in the ball is <= 1/r^2.

    Defaults: 32 farthest-point centers and 12 log-spaced radii.
    """
    graph = edge_graph(s)
    if centers is None:
        centers, dist = farthest_point_centers(s, graph=graph)
    else:
        centers = np.atleast_1d(np.asarray(centers, dtype=int))
        dist = distance_fields(s, centers, graph)
    if radii is None:
        radii = default_radii(s, float(dist.max()), r_max=r_max)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    R = s.curvature
    vol_el = s.vol_element
    total = float(vol_el.sum())
    sup_R = np.empty((len(centers), len(radii)))
    vols = np.empty_like(sup_R)
    for c, d in enumerate(dist):
        order = np.argsort(d, kind="stable")
        running_max = np.maximum.accumulate(R[order])
        dmax = d.max()
        for k, r in enumerate(radii):
            inside = max(1, int(np.searchsorted(d[order], r, side="left")))
            sup_R[c, k] = running_max[inside - 1]
            vols[c, k] = total if r >= dmax else float(np.dot(_ball_weights(s, d, r), vol_el))
    eligible = sup_R <= 1.0 / radii[None, :] ** 2
    return NoncollapseScan(s.time_stamp, np.asarray(centers), radii, sup_R, vols, eligible)
