"""Exact worst-case reweighting of a loss vector inside a divergence ball.

Given per-sample values ``z`` (losses) and a budget ``rho_m``, the inner
problem is

    maximize    sum_m z_m * p_m
    subject to  (1/M) sum_m phi(M * p_m) <= rho_m,   p a pmf,

whose solution is the adversarial pmf used by the robust subgradient
method.  The structure is the same for both supported generators:

* If the budget is large enough that the uniform distribution on the set
  of maximal ``z`` entries is feasible, that distribution is optimal and
  the divergence constraint is slack (``alpha = 0``).
* Otherwise the constraint binds and the solution is recovered from a 1-D
  dual root-find: a bisection over the softmax temperature for KL, and a
  nested bisection over the constraint multiplier ``alpha`` with an inner
  active-set search for chi-squared.

Both tight-case solvers are exact up to bisection tolerance, with effort
O(M log(1/eps)) for KL and O((M + log(1/eps)) log M) for chi-squared.

A brute-force simplex-search oracle (`oracle_inner`) is included for
validating the solvers on small supports; it is sampling based and returns
a lower bound on the true optimum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from phidro.divergence import DivergenceKind, phi_divergence, phi_value, uniform_pmf

__all__ = [
    "SolutionCase",
    "InnerSolution",
    "SortedObjective",
    "SolverError",
    "solve_inner",
    "solve_kl_tight",
    "solve_chi2_tight",
    "find_optimal_lambda",
    "oracle_inner",
]

#: Relative tie tolerance for membership in the argmax set, with an
#: absolute floor so an all-zero maximum still forms a set.
TIE_TOL_REL = 1e-12
TIE_TOL_ABS = 1e-300
#: Bracket scale multiplier for the chi-squared alpha search.
BRACKET_K = 16.0
#: Hard iteration cap for every bisection loop.
MAX_BISECT_ITERS = 500
#: Maximum bracket doublings before declaring a numerical failure.
MAX_DOUBLINGS = 200
#: Early-exit tolerance on the divergence residual during bisection.
RESIDUAL_TOL = 1e-10
#: Relative width tolerance for the alpha interval.
ALPHA_WIDTH_TOL = 1e-12


class SolverError(RuntimeError):
    """A bisection failed to bracket or converge (numerical failure)."""


class SolutionCase(enum.Enum):
    #: Budget large enough that the constraint is slack at the optimum.
    DEGENERATE = "degenerate"
    #: Constraint binds with equality; duals are strictly positive.
    TIGHT = "tight"


@dataclass(frozen=True)
class InnerSolution:
    """Primal-dual solution of the inner maximization.

    ``alpha`` is the multiplier of the divergence constraint and ``lam``
    the multiplier of the normalization constraint, both in the original
    (unshifted) coordinates.  `oracle_inner` fills the duals with NaN
    since it only searches the primal.
    """

    pmf: np.ndarray
    alpha: float
    lam: float
    objective: float
    case: SolutionCase


@dataclass(frozen=True)
class SortedObjective:
    """Sorted, shifted view of a value vector used by the chi2 solver.

    ``v[k]`` is the k-th smallest value minus the minimum (so ``v[0] = 0``
    and ``v`` is nondecreasing), ``perm[k]`` is the original index of
    sorted position k, and ``s`` holds suffix sums with ``s[i]`` the sum
    of ``v[i:]`` (length M+1, ``s[M] = 0``).
    """

    v: np.ndarray
    s: np.ndarray
    perm: np.ndarray
    z_min: float

    @classmethod
    def from_values(cls, z: np.ndarray) -> "SortedObjective":
        perm = np.argsort(z, kind="stable")
        zs = z[perm]
        z_min = float(zs[0])
        v = zs - z_min
        m = v.size
        s = np.zeros(m + 1)
        s[:m] = np.cumsum(v[::-1])[::-1]
        return cls(v=v, s=s, perm=perm, z_min=z_min)


def _as_values(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("value vector must be a nonempty 1-D array")
    if not np.all(np.isfinite(z)):
        raise ValueError("value vector must be finite")
    return z


def _argmax_candidate(z: np.ndarray) -> tuple[np.ndarray, float]:
    """Uniform pmf on the (tie-tolerant) argmax set, and max(z)."""
    z_max = float(np.max(z))
    tol = max(TIE_TOL_REL * abs(z_max), TIE_TOL_ABS)
    mask = z >= z_max - tol
    pmf = np.where(mask, 1.0 / int(np.count_nonzero(mask)), 0.0)
    return pmf, z_max


def solve_inner(z, rho_m: float, kind: DivergenceKind) -> InnerSolution:
    """Maximize ``z . p`` over pmfs within divergence budget ``rho_m``.

    Dispatches between the zero-budget, slack-constraint, and tight cases;
    see the module docstring.  The returned objective is the true maximum
    up to bisection tolerance.
    """
    z = _as_values(z)
    if not (rho_m >= 0.0):
        raise ValueError(f"rho_m must be nonnegative, got {rho_m}")

    if rho_m == 0.0:
        pmf = uniform_pmf(z.size)
        return InnerSolution(
            pmf=pmf,
            alpha=0.0,
            lam=float(np.max(z)),
            objective=float(np.dot(z, pmf)),
            case=SolutionCase.DEGENERATE,
        )

    candidate, z_max = _argmax_candidate(z)
    if phi_divergence(candidate, kind) <= rho_m:
        return InnerSolution(
            pmf=candidate,
            alpha=0.0,
            lam=z_max,
            objective=z_max,
            case=SolutionCase.DEGENERATE,
        )

    if kind is DivergenceKind.KL:
        return solve_kl_tight(z, rho_m)
    if kind is DivergenceKind.CHI2:
        return solve_chi2_tight(z, rho_m)
    raise ValueError(f"unknown divergence kind: {kind!r}")


def solve_kl_tight(z, rho_m: float) -> InnerSolution:
    """Tight-case KL solution by bisection on the softmax temperature.

    The optimal pmf is ``softmax(beta * z)`` where ``beta`` solves

        g(beta) = beta * kappa'(beta) - kappa(beta) = rho_m,

    with ``kappa(beta) = ln((1/M) sum_j exp(beta z_j))``.  In this (log)
    form g(0) = 0, g'(beta) = beta * kappa''(beta) >= 0, and
    g(beta) -> ln(M / #argmax) as beta -> inf, which exceeds ``rho_m``
    exactly when the slack case does not apply, so a root exists and is
    unique.  g(beta) also equals the divergence of softmax(beta*z) from
    uniform, so the residual is a direct feasibility certificate.

    The search runs on temperature scaled by the value spread, which makes
    the initial bracket problem-size free; no quantity here can overflow
    because exponents are kept nonpositive by max-shifting.
    """
    z = _as_values(z)
    m = z.size
    z_max = float(np.max(z))
    spread = z_max - float(np.min(z))
    if not spread > 0.0:
        raise ValueError("tight KL solver requires a non-constant value vector")
    zn = (z - z_max) / spread  # in [-1, 0], exactly 0 at the max

    def g(beta_n: float) -> float:
        # beta*kappa'(beta) - kappa(beta), written shift-invariantly so
        # only the scaled temperature beta_n = beta * spread appears.
        w = np.exp(beta_n * zn)
        sw = float(np.sum(w))
        return beta_n * float(np.dot(zn, w)) / sw - np.log(sw / m)

    lo, hi = 0.0, 1.0
    doublings = 0
    while g(hi) < rho_m:
        hi *= 2.0
        lo = hi / 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise SolverError(
                "failed to bracket the KL temperature root "
                f"(rho_m={rho_m}, spread={spread})"
            )

    for _ in range(MAX_BISECT_ITERS):
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        r = g(mid) - rho_m
        if abs(r) <= RESIDUAL_TOL:
            lo = hi = mid
            break
        if r < 0.0:
            lo = mid
        else:
            hi = mid

    # Low end of the bracket: divergence <= rho_m, so feasibility is
    # guaranteed.  lo can only still be 0 when the root is below the width
    # tolerance (vanishing budget); any point of the interval is then
    # equivalent, and the midpoint keeps alpha finite.
    beta_n = lo if lo > 0.0 else 0.5 * (lo + hi)
    w = np.exp(beta_n * zn)
    sw = float(np.sum(w))
    pmf = w / sw
    alpha = spread / beta_n
    # lam = alpha * kappa(beta); with alpha*beta = 1 this is
    # z_max + alpha * ln(mean exp(beta (z - z_max))).
    lam = z_max + alpha * np.log(sw / m)
    return InnerSolution(
        pmf=pmf,
        alpha=alpha,
        lam=float(lam),
        objective=float(np.dot(z, pmf)),
        case=SolutionCase.TIGHT,
    )


def find_optimal_lambda(alpha: float, so: SortedObjective) -> tuple[float, int]:
    """Normalization multiplier and active-set boundary for fixed ``alpha``.

    Returns the unique pair ``(lam, I)`` with ``0 <= I <= M-1`` such that

        s[I] - 2*M*alpha = (lam - 2*alpha) * (M - I)

    and the bracketing condition ``v[I] >= lam - 2*alpha > v[I-1]`` holds
    (indices in sorted 0-based positions; the lower bound is vacuous at
    I = 0).  Sorted positions ``I, ..., M-1`` then carry positive mass.

    If ``s[0] <= 2*M*alpha`` every position is active and
    ``(lam, I) = (s[0]/M, 0)``.  Otherwise define

        G(I) = s[I] - 2*M*alpha - v[I-1] * (M - I),

    which is nonincreasing in I because consecutive differences telescope
    to ``(v[I-1] - v[I]) * (M - I) <= 0``; the answer is the largest I
    with G(I) >= 0, found by binary search in O(log M).
    """
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    v, s = so.v, so.s
    m = v.size
    two_m_alpha = 2.0 * m * alpha
    if s[0] <= two_m_alpha:
        return float(s[0] / m), 0

    def g_at(i: int) -> float:
        return float(s[i] - two_m_alpha - v[i - 1] * (m - i))

    lo, hi = 1, m - 1  # G(1) = s[0] - 2*M*alpha > 0 here since v[0] = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if g_at(mid) >= 0.0:
            lo = mid
        else:
            hi = mid - 1
    i_star = lo
    lam = (float(s[i_star]) - 2.0 * alpha * i_star) / (m - i_star)
    return lam, i_star


def solve_chi2_tight(z, rho_m: float) -> InnerSolution:
    """Tight-case chi-squared solution by nested bisection.

    For fixed multiplier ``alpha`` the inner stationarity conditions give,
    in sorted shifted coordinates ``v``, the pmf

        p[j] = 1/M + (v[j] - lam) / (2*alpha*M)   for active positions,
        p[j] = 0                                  below the active set,

    with ``(lam, I)`` from `find_optimal_lambda`.  The outer bisection
    finds the ``alpha`` at which the divergence of that pmf equals
    ``rho_m``.  The divergence evaluates in O(1) from suffix sums:

        D(alpha) = [Q(I) - 2*lam*s[I] + lam^2*(M-I)] / (4*alpha^2*M) + I/M,

    where Q(I) is the suffix sum of squares and the trailing I/M term is
    the contribution of the zeroed-out positions (phi(0) = 1 each).  That
    term must be included for the root to coincide with feasibility of
    the returned pmf; dropping it inflates the divergence of the result
    by I/M whenever the active set is proper.  D is nonincreasing in
    ``alpha`` (it is the negated derivative of the convex dual), so
    bisection applies: D > rho_m raises the lower end, else the upper.

    The initial upper bracket is ``K * sqrt(sum (v - mean v)^2 / (4 M
    rho_m))``, doubled as needed.
    """
    z = _as_values(z)
    if not rho_m > 0.0:
        raise ValueError("tight solver requires rho_m > 0")
    so = SortedObjective.from_values(z)
    v, s = so.v, so.s
    m = v.size
    if not v[-1] > 0.0:
        raise ValueError("tight chi2 solver requires a non-constant value vector")
    q = np.zeros(m + 1)
    q[:m] = np.cumsum((v * v)[::-1])[::-1]

    def divergence_at(alpha: float) -> tuple[float, float, int]:
        lam, i = find_optimal_lambda(alpha, so)
        active_sq = float(q[i]) - 2.0 * lam * float(s[i]) + lam * lam * (m - i)
        d = active_sq / (4.0 * alpha * alpha * m) + i / m
        return d, lam, i

    v_bar = float(np.mean(v))
    alpha_inf = BRACKET_K * np.sqrt(float(np.sum((v - v_bar) ** 2)) / (4.0 * m * rho_m))
    lo, hi = 0.0, float(alpha_inf)
    doublings = 0
    while divergence_at(hi)[0] > rho_m:
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise SolverError(
                f"failed to bracket the chi2 multiplier (rho_m={rho_m}, "
                f"alpha reached {hi})"
            )

    width_tol = ALPHA_WIDTH_TOL * max(1.0, alpha_inf)
    alpha_star = hi
    for _ in range(MAX_BISECT_ITERS):
        if hi - lo <= width_tol:
            alpha_star = hi  # feasible side: divergence <= rho_m
            break
        mid = 0.5 * (lo + hi)
        d, _, _ = divergence_at(mid)
        residual = d - rho_m
        if abs(residual) <= RESIDUAL_TOL:
            alpha_star = mid
            break
        if residual > 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise SolverError(
            f"chi2 bisection failed to converge: interval ({lo}, {hi}), "
            f"width tolerance {width_tol}"
        )

    _, lam_v, i_star = divergence_at(alpha_star)
    p_sorted = np.zeros(m)
    active = slice(i_star, m)
    p_sorted[active] = 1.0 / m + (v[active] - lam_v) / (2.0 * alpha_star * m)
    p_sorted = np.maximum(p_sorted, 0.0)
    pmf = np.zeros(m)
    pmf[so.perm] = p_sorted
    return InnerSolution(
        pmf=pmf,
        alpha=float(alpha_star),
        lam=float(lam_v + so.z_min),
        objective=float(np.dot(z, pmf)),
        case=SolutionCase.TIGHT,
    )


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

_ORACLE_MAX_SUPPORT = 8
#: Dirichlet concentrations mixed over during random sampling; small values
#: explore the simplex boundary, large ones the interior.
_ORACLE_CONCENTRATIONS = (1.0, 0.3, 3.0, 0.05)


def _divergence_rows(p: np.ndarray, kind: DivergenceKind) -> np.ndarray:
    m = p.shape[1]
    return np.sum(phi_value(kind, m * p), axis=1) / m


def _phi_scalar(kind: DivergenceKind, t: float) -> float:
    # scalar fast path for the ascent inner loop
    if kind is DivergenceKind.KL:
        return t * math.log(t) - t + 1.0 if t > 0.0 else 1.0
    d = t - 1.0
    return d * d


def _pair_ascent(p, z, rho_m: float, kind: DivergenceKind, tol: float):
    """Greedy mass transfers between coordinate pairs while feasible.

    Moving mass t from position i to j changes the objective linearly by
    t*(z[j] - z[i]) and the divergence convexly, so along each pair the
    feasible step set is an interval and the best step is its upper end,
    found by bisection when the full transfer is infeasible.  Only moves
    whose best-case gain exceeds ``tol`` are attempted.
    """
    m = p.size
    p = [float(x) for x in p]
    zl = [float(x) for x in z]
    order = sorted(range(m), key=zl.__getitem__)
    base_div = sum(_phi_scalar(kind, m * x) for x in p) / m

    def delta(i: int, j: int, t: float, base_i: float, base_j: float) -> float:
        return (
            _phi_scalar(kind, m * (p[i] - t))
            + _phi_scalar(kind, m * (p[j] + t))
            - base_i
            - base_j
        ) / m

    for _ in range(500):
        moved = False
        for j in reversed(order):
            for i in order:
                gap = zl[j] - zl[i]
                if gap <= 0.0 or p[i] <= 0.0 or p[i] * gap <= tol:
                    continue
                base_i = _phi_scalar(kind, m * p[i])
                base_j = _phi_scalar(kind, m * p[j])
                full = p[i]
                if base_div + delta(i, j, full, base_i, base_j) <= rho_m:
                    t = full
                else:
                    t_lo, t_hi = 0.0, full
                    for _ in range(45):
                        t_mid = 0.5 * (t_lo + t_hi)
                        if base_div + delta(i, j, t_mid, base_i, base_j) <= rho_m:
                            t_lo = t_mid
                        else:
                            t_hi = t_mid
                    t = t_lo
                if t * gap <= tol:
                    continue
                base_div += delta(i, j, t, base_i, base_j)
                p[i] -= t
                p[j] += t
                moved = True
        if not moved:
            break
    return np.array(p)


def _triple_polish(p, z, rho_m: float, kind: DivergenceKind, tol: float):
    """Escape boundary stalls of the pair ascent with 3-coordinate moves.

    When the iterate sits on the ball boundary ordered like ``z``, every
    profitable single transfer is infeasible, yet a combined move can
    still help by pairing a gain transfer with one that pays back the
    divergence.  Two shapes cover the useful directions: a donor that
    feeds a higher value while routing relief mass to a lower one, and a
    receiver fed both by a gain donor and by a heavier high-value donor.
    Each candidate fixes the relief amount ``u``, finds the largest
    feasible gain step ``t`` by bisection, and the best move of a pass
    is refined over ``u`` by golden-section before being applied.
    """
    m = p.size
    p = [float(x) for x in p]
    zl = [float(x) for x in z]
    div = sum(_phi_scalar(kind, m * x) for x in p) / m
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    u_fracs = (0.999, 0.5, 0.2, 0.05, 0.01, 2e-3, 3e-4, 3e-5)

    def gain_for(move, u: float):
        # returns the objective gain of the move at relief amount u with
        # the gain step t maximized subject to feasibility, and t itself
        family, i, j, k = move
        if family == 0:
            # u flows i -> k (relief), t flows i -> j (gain)
            deltas = ((i, lambda t: -u - t), (j, lambda t: t), (k, lambda t: u))
            t_cap = p[i] - u
            u_cost = zl[k] - zl[i]
        else:
            # u flows k -> j (relief), t flows i -> j (gain)
            deltas = ((i, lambda t: -t), (j, lambda t: u + t), (k, lambda t: -u))
            t_cap = p[i]
            u_cost = zl[j] - zl[k]
        base = sum(_phi_scalar(kind, m * p[c]) for c, _ in deltas)

        def excess(t: float) -> float:
            new = sum(_phi_scalar(kind, m * (p[c] + d(t))) for c, d in deltas)
            return div + (new - base) / m - rho_m

        if t_cap < 0.0 or excess(0.0) > 1e-15:
            return -math.inf, 0.0
        t_hi = t_cap
        if excess(t_hi) <= 0.0:
            t = t_hi
        else:
            t_lo = 0.0
            for _ in range(45):
                t_mid = 0.5 * (t_lo + t_hi)
                if excess(t_mid) <= 0.0:
                    t_lo = t_mid
                else:
                    t_hi = t_mid
            t = t_lo
        return t * (zl[j] - zl[i]) + u * u_cost, t

    def u_limit(move) -> float:
        family, i, _, k = move
        return p[i] if family == 0 else p[k]

    for _ in range(200):
        best = None
        best_gain = tol
        for i in range(m):
            if p[i] <= 1e-14:
                continue
            for j in range(m):
                if zl[j] <= zl[i]:
                    continue
                for k in range(m):
                    if k == i or k == j:
                        continue
                    moves = []
                    if zl[k] < zl[i]:
                        moves.append((0, i, j, k))
                    if zl[k] > zl[j] and p[k] > 1e-14:
                        moves.append((1, i, j, k))
                    for move in moves:
                        cap = u_limit(move)
                        for frac in u_fracs:
                            g, _ = gain_for(move, frac * cap)
                            if g > best_gain:
                                best_gain = g
                                best = (move, frac * cap)
        if best is None:
            break
        move, u = best
        lo, hi = 0.0, u_limit(move)
        x1 = hi - golden * (hi - lo)
        x2 = lo + golden * (hi - lo)
        g1, _ = gain_for(move, x1)
        g2, _ = gain_for(move, x2)
        for _ in range(40):
            if g1 < g2:
                lo, x1, g1 = x1, x2, g2
                x2 = lo + golden * (hi - lo)
                g2, _ = gain_for(move, x2)
            else:
                hi, x2, g2 = x2, x1, g1
                x1 = hi - golden * (hi - lo)
                g1, _ = gain_for(move, x1)
        if g1 > best_gain:
            u = x1
        elif g2 > best_gain:
            u = x2
        g, t = gain_for(move, u)
        if g <= tol:
            break
        family, i, j, k = move
        if family == 0:
            p[i] -= u + t
            p[j] += t
            p[k] += u
        else:
            p[i] -= t
            p[j] += u + t
            p[k] -= u
        div = sum(_phi_scalar(kind, m * x) for x in p) / m
    return np.array(p)


def oracle_inner(
    z,
    rho_m: float,
    kind: DivergenceKind,
    budget: int = 100_000,
    rng=None,
) -> InnerSolution:
    """Brute-force inner maximization for validation on small supports.

    Samples pmfs from a mixture of Dirichlet distributions, keeps the
    feasible ones, and polishes the best candidates (plus the always
    feasible uniform pmf) by coordinate-pair ascent.  The result is a
    feasible pmf whose objective is a lower bound on the true optimum;
    at ``budget >= 1e5`` it is within about 1e-5 for supports up to 6.

    The duals are not searched and are reported as NaN; ``case`` is set
    from the achieved divergence.  Supports larger than 8 are refused.
    """
    z = _as_values(z)
    m = z.size
    if m > _ORACLE_MAX_SUPPORT:
        raise ValueError(f"oracle supports at most {_ORACLE_MAX_SUPPORT} points, got {m}")
    if not (rho_m >= 0.0):
        raise ValueError(f"rho_m must be nonnegative, got {rho_m}")
    rng = np.random.default_rng(rng)

    if float(np.max(z)) == float(np.min(z)):
        # every pmf gives the same objective; report the canonical one
        return InnerSolution(
            pmf=uniform_pmf(m),
            alpha=0.0,
            lam=float("nan"),
            objective=float(z[0]),
            case=SolutionCase.DEGENERATE,
        )

    take = 3 if budget >= 50_000 else 1
    candidates = [uniform_pmf(m)]
    if m > 1 and budget > 0:
        per = max(budget // len(_ORACLE_CONCENTRATIONS), 1)
        for conc in _ORACLE_CONCENTRATIONS:
            draws = rng.dirichlet(np.full(m, conc), size=per)
            feasible = draws[_divergence_rows(draws, kind) <= rho_m]
            if feasible.size == 0:
                continue
            objs = feasible @ z
            top = np.argsort(objs)[-take:]
            candidates.extend(feasible[top])

    # Pair ascent alone can stall on the ball boundary where no single
    # transfer improves but a combined move does.  Pulling the iterate
    # back toward uniform keeps it feasible (the ball is convex and
    # contains uniform) and gives the next ascent room to leave the
    # stall point, so each start is polished through a few such rounds.
    shrinks = (0.3, 0.1, 0.03, 0.01) if budget >= 50_000 else (0.2, 0.05)
    uni = uniform_pmf(m)
    tol = 1e-7 * max(1.0, float(np.max(np.abs(z))))
    best_p, best_obj = None, -np.inf
    for start in candidates:
        p = _pair_ascent(start, z, rho_m, kind, tol)
        obj = float(np.dot(z, p))
        if obj > best_obj:
            best_p, best_obj = p, obj
        for s in shrinks:
            p = _pair_ascent((1.0 - s) * p + s * uni, z, rho_m, kind, tol)
            obj = float(np.dot(z, p))
            if obj > best_obj:
                best_p, best_obj = p, obj

    if budget >= 50_000:
        for _ in range(6):
            p = _triple_polish(best_p, z, rho_m, kind, 0.01 * tol)
            p = _pair_ascent(p, z, rho_m, kind, tol)
            obj = float(np.dot(z, p))
            if obj <= best_obj + 0.01 * tol:
                break
            best_p, best_obj = p, obj

    div = phi_divergence(best_p, kind)
    tight = abs(div - rho_m) <= 1e-6
    return InnerSolution(
        pmf=best_p,
        alpha=float("nan") if tight else 0.0,
        lam=float("nan"),
        objective=best_obj,
        case=SolutionCase.TIGHT if tight else SolutionCase.DEGENERATE,
    )
