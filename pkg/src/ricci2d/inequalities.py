"""Explicit log-Sobolev constants and numerical checks of the inequalities they enter.

Conventions: ``min_r_minus`` is min over M of min(R, 0), a nonpositive
number, so ``-min_r_minus / 4 >= 0``. Entropy integrands x ln x are
extended by continuity to 0 at x = 0.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .battery import TestFunctionBattery, l2_normalize
from .surface import (
    TORUS,
    ScalarField,
    curvature_moment,
    dirichlet_energy,
    grad_norm_l1,
    scalar_curvature,
    values_on,
    volume,
)

SIGMA_GRID = tuple(2.0 ** k for k in range(-8, 5))
NORMALIZATION_TOL = 1e-10
# eigenvalues below this are treated as zero (flat metrics give ~1e-30)
LAMBDA0_FLOOR = 1e-10


class PreconditionError(ValueError):
    """Inputs fall outside the hypotheses of the inequality being checked."""


@dataclass(frozen=True)
class LogSobolevConstants:
    c_ni: float
    vol: float
    min_r_minus: float
    lambda0: float
    a1: float
    a2: float = 1.0
    delta0: float = None
    b0: float = None

    @classmethod
    def from_values(cls, c_ni, vol, min_r_minus, lambda0):
        if c_ni <= 0 or vol <= 0:
            raise ValueError("c_ni and vol must be positive")
        if min_r_minus > 0:
            raise ValueError("min_r_minus must be nonpositive")
        core = c_ni + vol ** -0.5 - min_r_minus / 4.0
        delta0 = b0 = None
        if lambda0 > LAMBDA0_FLOOR:
            delta0 = 1.0 / (lambda0 + core)
            b0 = math.log(1.0 + core / lambda0) - 1.0
        return cls(c_ni, vol, min_r_minus, lambda0, core, 1.0, delta0, b0)

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("c_ni", "vol", "min_r_minus", "lambda0", "a1", "a2", "delta0", "b0")}


def entropy(s, u):
    """Integral of u^2 ln u^2 dvol."""
    x = values_on(s, u) ** 2
    xlogx = np.where(x > 0.0, x * np.log(np.where(x > 0.0, x, 1.0)), 0.0)
    return float(np.dot(xlogx, s.vol_element))


def quadratic_form(s, u):
    """Integral of |grad u|^2 + R u^2 / 4."""
    return dirichlet_energy(s, u) + 0.25 * curvature_moment(s, u)


def l2_norm_sq(s, u):
    u = values_on(s, u)
    return float(np.dot(u * u, s.vol_element))


def lp_norm(s, u, p):
    u = np.abs(values_on(s, u))
    return float(np.dot(u ** p, s.vol_element)) ** (1.0 / p)


def _require_normalized(s, u):
    n2 = l2_norm_sq(s, u)
    if abs(n2 - 1.0) > NORMALIZATION_TOL:
        raise PreconditionError(f"u must satisfy int u^2 dvol = 1 (got {n2:.12g})")


# -- Neumann isoperimetric constant -------------------------------------

def level_set_profile(s, u, levels, block=1 << 20):
    """Metric area of {u < c} and metric length of {u = c} for each level c.

    ``u`` is read as its piecewise-linear interpolant on ``base.faces``;
    the conformal weights e^{2 phi} (area) and e^{phi} (length) are
    interpolated linearly as well.
    """
    base = s.base
    u = values_on(s, u)
    F = base.faces
    vals = u[F]
    order = np.argsort(vals, axis=1, kind="stable")
    sv = np.take_along_axis(vals, order, axis=1)
    pos = np.take_along_axis(base.face_positions, order[:, :, None], axis=1)
    ep = np.take_along_axis(np.exp(s.phi)[F], order, axis=1)
    face_vol = np.exp(2.0 * s.phi)[F].mean(axis=1) * base.face_areas
    levels = np.asarray(levels, dtype=float)
    by_level = np.argsort(levels, kind="stable")
    c = levels[by_level]
    # faces entirely below a level contribute their whole area
    by_top = np.argsort(sv[:, 2], kind="stable")
    below = np.concatenate([[0.0], np.cumsum(face_vol[by_top])])
    area = below[np.searchsorted(sv[by_top, 2], c, side="right")]
    length = np.zeros(len(c))
    # (face, level) pairs with a < c <= d, levels of a face being contiguous
    lo = np.searchsorted(c, sv[:, 0], side="right")
    counts = np.searchsorted(c, sv[:, 2], side="right") - lo
    face = np.repeat(np.arange(len(F)), counts)
    level = lo[face] + np.arange(len(face)) - np.repeat(np.cumsum(counts) - counts, counts)
    for k0 in range(0, len(face), block):
        f, lv = face[k0:k0 + block], level[k0:k0 + block]
        part_area, part_len = _straddling(sv[f], pos[f], ep[f], face_vol[f], c[lv])
        area += np.bincount(lv, weights=part_area, minlength=len(c))
        length += np.bincount(lv, weights=part_len, minlength=len(c))
    out_area = np.empty_like(area)
    out_len = np.empty_like(length)
    out_area[by_level] = area
    out_len[by_level] = length
    return out_area, out_len


def _straddling(sv, pos, ep, face_vol, c):
    """Partial-face area and cut length for face/level pairs with a < c <= d."""
    a, b, d = sv[:, 0], sv[:, 1], sv[:, 2]
    pa, pb, pd = pos[:, 0], pos[:, 1], pos[:, 2]
    ea, eb, ed = ep[:, 0], ep[:, 1], ep[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = c <= b
        # faces with d == c are already counted whole
        frac = np.where(lower, (c - a) ** 2 / ((b - a) * (d - a)), 1.0 - (d - c) ** 2 / ((d - a) * (d - b)))
        frac = np.where(c < d, frac, 0.0)
        tp = (c - a) / (d - a)
        tq = np.where(lower, (c - a) / (b - a), (c - b) / (d - b))
        P = pa + tp[:, None] * (pd - pa)
        Q = np.where(lower[:, None], pa + tq[:, None] * (pb - pa), pb + tq[:, None] * (pd - pb))
        wP = ea + tp * (ed - ea)
        wQ = np.where(lower, ea + tq * (eb - ea), eb + tq * (ed - eb))
        seg = np.linalg.norm(P - Q, axis=1) * 0.5 * (wP + wQ)
    return face_vol * np.nan_to_num(frac), np.nan_to_num(seg)


def _quantile_levels(s, u, count, lo=0.005, hi=0.995):
    """Levels strictly between consecutive distinct node values, spread by volume quantile."""
    u = values_on(s, u)
    distinct, inverse = np.unique(u, return_inverse=True)
    cum = np.cumsum(np.bincount(inverse, weights=s.vol_element))
    cum /= cum[-1]
    if len(distinct) < 2:
        return np.empty(0), cum, distinct
    idx = np.searchsorted(cum, np.linspace(lo, hi, count))
    idx = np.unique(np.clip(idx, 0, len(distinct) - 2))
    return 0.5 * (distinct[idx] + distinct[idx + 1]), cum, distinct


def cut_ratio(s, u, levels=400):
    """Best min(vol, vol^c)^{1/2} / length over sublevel sets of ``u``."""
    u = values_on(s, u)
    if np.ptp(u) <= 1e-9 * (1.0 + np.abs(u).max()):
        return 0.0
    total = float(s.vol_element.sum())
    lv, cum, su = _quantile_levels(s, u, levels)
    if len(lv) == 0:
        return 0.0
    area, length = level_set_profile(s, u, lv)
    ratio = np.where(length > 0, np.sqrt(np.minimum(area, total - area)) / np.where(length > 0, length, 1.0), 0.0)
    k = int(np.argmax(ratio))
    # refine around the best quantile
    q = np.interp(lv[k], su, cum)
    step = 1.0 / levels
    fine, _, _ = _quantile_levels(s, u, levels // 4, max(1e-4, q - 2 * step), min(1 - 1e-4, q + 2 * step))
    if len(fine):
        a2, l2 = level_set_profile(s, u, fine)
        r2 = np.where(l2 > 0, np.sqrt(np.minimum(a2, total - a2)) / np.where(l2 > 0, l2, 1.0), 0.0)
        return float(max(ratio.max(), r2.max()))
    return float(ratio.max())


def isoperimetric_test_fields(s, ground_state=None):
    base = s.base
    if base.kind == TORUS:
        x, y = base.x, base.y
        fields = [np.cos(x), np.sin(x), np.cos(y), np.sin(y), np.cos(x + y), np.cos(x - y)]
    else:
        fields = [base.verts[:, 0], base.verts[:, 1], base.verts[:, 2]]
    if ground_state is None:
        ground_state = spectral.lambda0(s).eigenfunction.values
    fields.append(np.asarray(ground_state, dtype=float))
    return fields


def neumann_isoperimetric_estimate(s, ground_state=None, extra_fields=(), levels=400):
    """Lower estimate of C_{N,I} from level-set cuts of a fixed family of functions.

    The family is the base coordinate functions (which are also the first
    base eigenfunctions), the ground state of -Lap + R/4, and any
    ``extra_fields``. This never certifies the supremum.
    """
    fields = isoperimetric_test_fields(s, ground_state) + [values_on(s, f) for f in extra_fields]
    return max(cut_ratio(s, f, levels) for f in fields)


def constants_for(s, c_ni_override=None, spectral_result=None):
    if spectral_result is None:
        spectral_result = spectral.lambda0(s)
    if c_ni_override is None:
        c_ni = neumann_isoperimetric_estimate(s, spectral_result.eigenfunction.values)
    else:
        c_ni = float(c_ni_override)
    curv = scalar_curvature(s)
    return LogSobolevConstants.from_values(c_ni, volume(s), curv.min_R_minus, spectral_result.lambda0)


# -- static inequalities -----------------------------------------------

def poincare_check(s, u, c_ni):
    """C_{N,I} ||grad u||_1 - ||u - mean(u)||_2, nonnegative when the inequality holds."""
    u = values_on(s, u)
    mean = float(np.dot(u, s.vol_element)) / volume(s)
    return c_ni * grad_norm_l1(s, u) - math.sqrt(l2_norm_sq(s, u - mean))


@dataclass(frozen=True)
class EntropyCheck:
    jensen: float        # ln int u^2 - int |u| ln |u|
    l1_sobolev: float    # (C ||grad u||_1 + vol^{-1/2} ||u||_1)^2 - int u^2
    unsquared_form: float  # ln(C ||grad u||_1 + vol^{-1/2}) - int |u| ln |u|


def jensen_entropy_check(s, u, c_ni, tol=1e-8):
    """Deficits of the Jensen step, the squared L^1-Sobolev bound, and the unsquared bound.

    ``u`` must satisfy int |u| dvol = 1.
    """
    u = values_on(s, u)
    au = np.abs(u)
    l1 = float(np.dot(au, s.vol_element))
    if abs(l1 - 1.0) > tol:
        raise PreconditionError(f"u must satisfy int |u| dvol = 1 (got {l1:.12g})")
    ulogu = np.where(au > 0, au * np.log(np.where(au > 0, au, 1.0)), 0.0)
    ent1 = float(np.dot(ulogu, s.vol_element))
    m2 = l2_norm_sq(s, u)
    g1 = grad_norm_l1(s, u)
    vol = volume(s)
    bound = c_ni * g1 + vol ** -0.5 * l1
    return EntropyCheck(
        jensen=math.log(m2) - ent1,
        l1_sobolev=bound ** 2 - m2,
        unsquared_form=math.log(c_ni * g1 + vol ** -0.5) - ent1,
    )


def l1_normalize(s, u):
    u = values_on(s, u)
    return u / float(np.dot(np.abs(u), s.vol_element))


# -- logarithmic Sobolev inequalities along the flow ---------------------

def logsobolev_rhs(consts, energy, sigma, t):
    return sigma * energy - math.log(sigma) + 4.0 * (t + sigma) * consts.a1 + consts.a2


def logsobolev_deficit(s, consts, u, sigma, t):
    """Entropy minus the right side of the time-t log-Sobolev inequality (<= 0 expected)."""
    if sigma <= 0:
        raise PreconditionError("sigma must be positive")
    if t < 0:
        raise PreconditionError("t must be nonnegative")
    _require_normalized(s, u)
    return entropy(s, u) - logsobolev_rhs(consts, quadratic_form(s, u), sigma, t)


def optimal_sigma_bound(consts, energy, t):
    """ln[e^{1 + A1 t + A2} (energy + A1 / 4)]."""
    return 1.0 + consts.a1 * t + consts.a2 + math.log(energy + consts.a1 / 4.0)


def sigma_candidates(consts, energy, grid=SIGMA_GRID):
    """The sigma grid plus 1/(energy + A1) and the exact minimizer 1/(energy + 4 A1)."""
    out = list(grid)
    for denom in (energy + consts.a1, energy + 4.0 * consts.a1):
        if denom > 0:
            out.append(1.0 / denom)
    return out


def logsobolev_rhs_b(consts, energy, sigma):
    return sigma * energy - math.log(sigma) + consts.b0


def logsobolev_deficit_B(s, consts, u, sigma, t):
    """Entropy minus the right side of the large-time inequality (lambda0(g0) > 0)."""
    if consts.b0 is None:
        raise PreconditionError("requires lambda0(g0) > 0")
    if sigma <= 0:
        raise PreconditionError("sigma must be positive")
    if t + sigma < consts.delta0 / 4.0:
        raise PreconditionError(f"t + sigma = {t + sigma:g} below delta0/4 = {consts.delta0 / 4.0:g}")
    _require_normalized(s, u)
    return entropy(s, u) - logsobolev_rhs_b(consts, quadratic_form(s, u), sigma)


def optimal_sigma_bound_b(consts, energy):
    """ln[e^{B0 + 1} energy]."""
    return consts.b0 + 1.0 + math.log(energy)


# -- adversarial search ----------------------------------------------------

@dataclass(frozen=True)
class AdversarialResult:
    u: ScalarField
    label: str
    objective: float
    deficit: float
    iterations: int


def _objective(s, u, sigma):
    return entropy(s, u) - sigma * quadratic_form(s, u)


def _ascent(s, u, sigma, step=1e-2, max_iter=2000, rtol=1e-5, min_step=1e-7, window=25,
            smoothing=0.1):
    """Preconditioned conjugate-gradient ascent on the unit L^2(g) sphere.

    Gradients are smoothed by the fixed operator (I - 2 sigma smoothing Lap_b)^{-1},
    which tames the stiff energy term, and combined Polak-Ribiere style
    with the previous direction. The step length starts at ``step``, is
    halved whenever the objective would decrease and doubled after a
    success; the run stops at a critical point (no step above
    ``min_step`` helps) or when ``window`` iterations together gain less
    than ``rtol`` relative.
    """
    base = s.base
    pot = 0.25 * s.curvature_density * base.weights
    vol_el = s.vol_element
    shift = 2.0 * sigma * smoothing
    u = l2_normalize(s, u)
    G = _objective(s, u, sigma)
    eta = step
    it = 0
    G_window = G
    d_prev = g_prev = pg_prev = None
    for it in range(1, max_iter + 1):
        u2 = u * u
        logu2 = np.log(np.where(u2 > 0, u2, 1.0))
        # L^2(base) gradient of the objective, projected tangent to the constraint
        n = u * vol_el
        nn = float(np.dot(n, n))
        g = (2.0 * u * (logu2 + 1.0)) * vol_el - 2.0 * sigma * (base.stiffness(u) + pot * u)
        g = g - float(np.dot(g, n)) / nn * n
        pg = base.shifted_solve(g / base.weights, shift)
        gpg = float(np.dot(pg, g))
        if gpg <= 1e-14 * max(1.0, abs(G)):
            break  # critical point
        d = pg
        if d_prev is not None:
            beta = max(0.0, (gpg - float(np.dot(pg, g_prev))) / pg_prev)
            d = pg + beta * (d_prev - float(np.dot(d_prev, n)) / nn * n)
            if float(np.dot(d, g)) <= 0.0:
                d = pg  # restart on a non-ascent direction
        improved = False
        while eta >= min_step:
            cand = u + eta * d
            n2 = float(np.dot(cand * cand, vol_el))
            if not np.isfinite(n2) or n2 <= 0:
                raise FloatingPointError("adversarial ascent diverged")
            cand = cand / math.sqrt(n2)
            Gc = _objective(s, cand, sigma)
            if not np.isfinite(Gc):
                raise FloatingPointError("adversarial ascent diverged")
            if Gc > G:
                u, G = cand, Gc
                eta = min(2.0 * eta, 1e3)
                improved = True
                break
            eta *= 0.5
            d = pg  # back off to the plain gradient before shrinking further
        if not improved:
            break
        d_prev, g_prev, pg_prev = d, g, gpg
        if it % window == 0:
            if G - G_window <= rtol * max(1.0, abs(G)):
                break
            G_window = G
    return u, G, it


def adversarial_logsobolev_max(s, consts, sigma, t, starts, n_starts=8, max_iter=2000):
    """Maximize the deficit over u by multistart ascent; returns the best result.

    Starts are the ``n_starts`` battery members with the largest initial
    objective.
    """
    if sigma <= 0:
        raise PreconditionError("sigma must be positive")
    if isinstance(starts, TestFunctionBattery):
        starts = starts.on(s) if starts.surface is not s else starts
        pool = [(label, f.values) for label, f in starts]
    else:
        pool = [(label, values_on(s, f)) for label, f in starts]
    ranked = sorted(pool, key=lambda lf: -_objective(s, l2_normalize(s, lf[1]), sigma))[:n_starts]
    offset = -math.log(sigma) + 4.0 * (t + sigma) * consts.a1 + consts.a2
    best = None
    for label, u0 in ranked:
        u, G, its = _ascent(s, u0, sigma, max_iter=max_iter)
        if best is None or G > best.objective:
            best = AdversarialResult(ScalarField(u, s), label, G, G - offset, its)
    return best


# -- Sobolev constants along the flow -------------------------------------

def cbar(p, T, consts, variant="A"):
    """The constant feeding the Sobolev step; ``variant="B"`` uses B0 instead of T, A1, A2."""
    if p <= 2:
        raise PreconditionError("p must exceed 2")
    if T < 0:
        raise PreconditionError("T must be nonnegative")
    expo = p / (2.0 * (p - 2.0)) - 3.0 / 16.0 * consts.min_r_minus / 4.0
    if variant == "A":
        expo += 2.0 * (T + 1.0) * consts.a1 + 0.5 * consts.a2
    elif variant == "B":
        if consts.b0 is None:
            raise PreconditionError("B variant requires lambda0 > 0")
        expo += 0.5 * consts.b0
    else:
        raise ValueError("variant must be 'A' or 'B'")
    return 2.0 ** (2.0 / (p - 2.0)) * math.exp(expo)


@dataclass(frozen=True)
class SobolevCheckParams:
    p: float
    mu: float
    cbar: float
    measured_A: float
    measured_B: float

    def __post_init__(self):
        if self.p <= 2:
            raise ValueError("p must exceed 2")


@dataclass(frozen=True)
class SobolevTrack:
    p: float
    times: tuple
    per_time: tuple            # SobolevCheckParams at each time
    uniform_A: float           # one slope for the whole trajectory
    uniform_B: tuple           # intercepts needed at each time with uniform_A
    growth_A: float            # max over t of A(t) / A(t0)
    growth_B: float            # max over t of B(t) / B(t0), B with the uniform slope
    unbounded: bool
    absorbed_A: tuple = ()     # A + B / lambda0(g0), where lambda0(g0) > 0
    absorbed_worst: float = None  # max over t, u of ||u||_p^2 - absorbed_A x


def _growth(values):
    v = np.asarray(values, dtype=float)
    if v[0] > 0:
        return float(v.max() / v[0])
    return math.inf if v.max() > 0 else 1.0


def _monotone_blowup(values, factor=10.0):
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) >= 0) and v[0] > 0 and v[-1] > factor * v[0])


def sobolev_ratio_track(traj, p, battery, times=None, lambda0_g0=None, T=None, consts=None):
    """Empirical constants (A, B) with ||u||_p^2 <= A x + B, x = int |grad u|^2 + R u^2 / 4.

    At each time A(t) is the largest ratio ||u||_p^2 / x among members
    with x at or above the median, and B(t) the smallest intercept that
    then encloses every member. Uniform boundedness is judged with one
    slope for the whole run: ``uniform_A = max_t A(t)``.
    """
    if p <= 2:
        raise PreconditionError("p must exceed 2")
    mu = 2.0 * p / (p - 2.0)
    snaps = traj.snapshots if times is None else [traj.surface_at(t) for t in times]
    c = cbar(p, T if T is not None else float(traj.times[-1]), consts) if consts is not None else math.nan
    pts = []
    per_time = []
    for s in snaps:
        bat = battery.on(s)
        xy = np.array([(quadratic_form(s, u), lp_norm(s, u, p) ** 2) for _, u in bat])
        pts.append(xy)
        x, y = xy[:, 0], xy[:, 1]
        hi = (x >= np.median(x)) & (x > 0)
        A = float(np.max(y[hi] / x[hi])) if np.any(hi) else 0.0
        B = max(0.0, float(np.max(y - A * x)))
        per_time.append(SobolevCheckParams(p, mu, c, A, B))
    uniform_A = max(pt.measured_A for pt in per_time)
    uniform_B = tuple(max(0.0, float(np.max(xy[:, 1] - uniform_A * xy[:, 0]))) for xy in pts)
    A_seq = [pt.measured_A for pt in per_time]
    unbounded = _monotone_blowup(A_seq) or _monotone_blowup(uniform_B)
    absorbed, worst = (), None
    if lambda0_g0 is not None and lambda0_g0 > 0:
        absorbed = tuple(pt.measured_A + pt.measured_B / lambda0_g0 for pt in per_time)
        worst = max(float(np.max(xy[:, 1] - a * xy[:, 0])) for xy, a in zip(pts, absorbed))
    return SobolevTrack(p, tuple(s.time_stamp for s in snaps), tuple(per_time), uniform_A, uniform_B,
                        _growth(A_seq), _growth(uniform_B), unbounded, absorbed, worst)
