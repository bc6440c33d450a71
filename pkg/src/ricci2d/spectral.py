"""Ground state of the Schrodinger-type operator -Lap + R/4.

In node values the problem is the generalized symmetric eigenproblem

    (L + diag(w * (R_b - 2 Lap_b phi) / 4)) u = lambda diag(e^{2 phi} w) u

with L the base stiffness matrix; the metric factors cancel in the
potential term, so no curvature division enters. It is solved matrix-free
by locally optimal block preconditioned conjugate gradients with a
shifted base Laplacian as preconditioner.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .surface import ScalarField, curvature_moment, dirichlet_energy, values_on

MAX_ITERATIONS = 5000


class ConvergenceError(RuntimeError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SpectralResult:
    lambda0: float
    eigenfunction: ScalarField
    residual: float
    iterations: int
    lambda1: float = float("nan")
    second_eigenfunction: ScalarField = None


def rayleigh_quotient(s, u):
    u = values_on(s, u)
    mass = float(np.dot(u * u, s.vol_element))
    if mass <= 0.0:
        raise ValueError("Rayleigh quotient of the zero field")
    return (dirichlet_energy(s, u) + 0.25 * curvature_moment(s, u)) / mass


class _Operator:
    def __init__(self, s):
        self.base = s.base
        self.potential = 0.25 * s.curvature_density * s.base.weights
        self.mass = s.vol_element
        shift = float(np.mean(s.conformal_weight))
        self.shift = shift

    def A(self, X):
        return np.column_stack([self.base.stiffness(x) for x in X.T]) + self.potential[:, None] * X

    def B(self, X):
        return self.mass[:, None] * X

    def precondition(self, R):
        # (L + shift W)^{-1} = shift^{-1} (W + L / shift)^{-1}
        w = self.base.weights
        c = 1.0 / self.shift
        return np.column_stack([self.base.shifted_solve(r / w, c) / self.shift for r in R.T])


def _b_orthonormal_basis(S, BS, cutoff=1e-13):
    G = S.T @ BS
    G = 0.5 * (G + G.T)
    vals, vecs = linalg.eigh(G)
    keep = vals > cutoff * vals.max()
    return vecs[:, keep] / np.sqrt(vals[keep])


def _start_block(s, k):
    base = s.base
    cols = [np.ones(base.node_count)]
    if base.kind == "torus":
        extra = [np.cos(base.x), np.cos(base.y), np.sin(base.x), np.sin(base.y)]
    else:
        extra = [base.verts[:, 2], base.verts[:, 0], base.verts[:, 1]]
    cols += extra[: k - 1]
    return np.column_stack(cols)


def lambda0(s, tol=1e-8, block_size=2, max_iterations=MAX_ITERATIONS, start=None):
    """Smallest eigenvalue and positive ground state of -Lap_g + R/4.

    ``tol`` bounds the residual ``||A u - lambda B u||_{B^{-1}}`` of the
    B-normalized ground state. The second Ritz pair is returned as well;
    it is only converged loosely.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = _Operator(s)
    X = _start_block(s, block_size) if start is None else np.column_stack([start])
    k = X.shape[1]
    P = None
    best = None
    residual = np.inf
    for it in range(max_iterations + 1):
        BX = op.B(X)
        Q = _b_orthonormal_basis(X, BX)
        X = X @ Q
        AX = op.A(X)
        BX = op.B(X)
        H = X.T @ AX
        theta, V = linalg.eigh(0.5 * (H + H.T))
        X, AX, BX = X @ V, AX @ V, BX @ V
        R = AX - BX * theta
        res = np.sqrt(np.einsum("ij,ij->j", R, R / op.mass[:, None]))
        residual = float(res[0])
        best = (theta, X, residual, it)
        if residual <= tol:
            break
        if it == max_iterations:
            raise ConvergenceError(
                f"lambda0 did not converge in {max_iterations} iterations "
                f"(residual {residual:.3e})", _result(s, *best))
        W = op.precondition(R)
        blocks = [X, W] if P is None else [X, W, P]
        S = np.column_stack(blocks)
        # normalize columns so tiny corrections are not lost to the cutoff
        norms = np.sqrt(np.einsum("ij,ij->j", S, op.B(S)))
        S = S[:, norms > 0] / norms[norms > 0]
        BS = op.B(S)
        Qs = _b_orthonormal_basis(S, BS, cutoff=1e-14)
        Z = S @ Qs
        AZ = op.A(Z)
        Hz = Z.T @ AZ
        mu, Vz = linalg.eigh(0.5 * (Hz + Hz.T))
        Xn = Z @ Vz[:, :k]
        # conjugate direction: new iterate minus its component in the old block
        coef = X.T @ op.B(Xn)
        P = Xn - X @ coef
        X = Xn
    return _result(s, *best)


def _result(s, theta, X, residual, iterations):
    u = _normalize_ground_state(s, X[:, 0])
    lam = rayleigh_quotient(s, u)
    second = None
    lam1 = float("nan")
    if X.shape[1] > 1:
        v = X[:, 1] / np.sqrt(np.dot(X[:, 1] ** 2, s.vol_element))
        second = ScalarField(v, s)
        lam1 = float(theta[1])
    return SpectralResult(lam, ScalarField(u, s), residual, iterations, lam1, second)


def _normalize_ground_state(s, u):
    if u.mean() < 0:
        u = -u
    return u / np.sqrt(np.dot(u * u, s.vol_element))


def positive_ground_state(result, floor=1e-12):
    """Ground state clamped below at ``floor * max|u|``, ready for logarithms."""
    u = result.eigenfunction.values
    return np.maximum(u, floor * np.abs(u).max())
