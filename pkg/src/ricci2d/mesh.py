"""Mesh construction for the two base surfaces.

The round sphere is an icosahedron refined by midpoint subdivision and
projected onto the unit sphere. The torus is the periodic square grid on
[0, 2pi)^2; its triangulation (two triangles per cell) is only used for
level-set geometry.
"""
import numpy as np
from scipy import sparse


def icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return verts, faces


def icosphere(level):
    """Unit icosphere with ``10 * 4**level + 2`` vertices."""
    verts, faces = icosahedron()
    for _ in range(level):
        edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        edges.sort(axis=1)
        uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        mid = verts[uniq[:, 0]] + verts[uniq[:, 1]]
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
        nf = len(faces)
        m = len(verts) + inverse
        m01, m12, m20 = m[:nf], m[nf:2 * nf], m[2 * nf:]
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        faces = np.concatenate([
            np.stack([a, m01, m20], axis=1),
            np.stack([b, m12, m01], axis=1),
            np.stack([c, m20, m12], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ])
        verts = np.concatenate([verts, mid])
    return verts, faces


def spherical_triangle_areas(verts, faces):
    """Exact areas of the geodesic triangles spanned by unit vectors."""
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def flat_triangle_areas(verts, faces):
    e1 = verts[faces[:, 1]] - verts[faces[:, 0]]
    e2 = verts[faces[:, 2]] - verts[faces[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def cotangent_stiffness(verts, faces):
    """Symmetric positive semidefinite cotangent stiffness matrix.

    ``u @ L @ u`` is the Dirichlet energy of the piecewise-linear
    interpolant of ``u``; constants lie in the kernel.
    """
    n = len(verts)
    rows, cols, vals = [], [], []
    for k in range(3):
        i = faces[:, (k + 1) % 3]
        j = faces[:, (k + 2) % 3]
        # angle at corner k is opposite edge (i, j)
        u = verts[i] - verts[faces[:, k]]
        v = verts[j] - verts[faces[:, k]]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        rows += [i, j]
        cols += [j, i]
        vals += [-0.5 * cot, -0.5 * cot]
    off = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sparse.diags(diag)).tocsr()


def lumped_areas(faces, tri_areas, n):
    """Barycentric lumping: each vertex receives a third of its triangles."""
    w = np.zeros(n)
    for k in range(3):
        np.add.at(w, faces[:, k], tri_areas / 3.0)
    return w


def p1_gradient_operators_from_positions(p0, p1, p2):
    """Per-triangle gradients of the three barycentric hat functions.

    ``p0, p1, p2`` are the corner positions (2D or 3D). Returns an array of
    shape (n_faces, 3, 3); the gradient of the linear interpolant of ``u``
    on face ``f`` is ``sum_k u[faces[f, k]] * G[f, k]``.
    """
    if p0.shape[1] == 2:
        p0, p1, p2 = (np.column_stack([p, np.zeros(len(p))]) for p in (p0, p1, p2))
    nrm = np.cross(p1 - p0, p2 - p0)
    area2 = np.linalg.norm(nrm, axis=1, keepdims=True)
    nhat = nrm / area2
    grads = np.stack([
        np.cross(nhat, p2 - p1),
        np.cross(nhat, p0 - p2),
        np.cross(nhat, p1 - p0),
    ], axis=1) / area2[:, None, :]
    return grads


def vertex_rings(faces, n, depth):
    """Pairs (i, j), i != j, with j within ``depth`` edges of i."""
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    adj = sparse.coo_matrix(
        (np.ones(2 * len(edges)), (np.r_[edges[:, 0], edges[:, 1]], np.r_[edges[:, 1], edges[:, 0]])),
        shape=(n, n),
    ).tocsr()
    adj.data[:] = 1.0
    reach = sparse.identity(n, format="csr")
    for _ in range(depth):
        reach = reach + reach @ adj
        reach.data[:] = 1.0
    reach = sparse.triu(reach, k=1).tocoo()
    return reach.row, reach.col


def torus_triangles(n):
    """Two triangles per periodic grid cell, node index ``i * n + j``.

    Also returns per-face vertex coordinates unwrapped into the plane so
    that edge vectors are correct across the periodic seam.
    """
    h = 2.0 * np.pi / n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    ip, jp = (i + 1) % n, (j + 1) % n
    a = i * n + j
    b = ip * n + j
    c = ip * n + jp
    d = i * n + jp
    faces = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    x0, y0 = i * h, j * h
    pa = np.stack([x0, y0], axis=1)
    pb = np.stack([x0 + h, y0], axis=1)
    pc = np.stack([x0 + h, y0 + h], axis=1)
    pd = np.stack([x0, y0 + h], axis=1)
    pos = np.concatenate([np.stack([pa, pb, pc], axis=1), np.stack([pa, pc, pd], axis=1)])
    return faces, pos
