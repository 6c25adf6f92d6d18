"""Generating-function side: fixed points, time change, the G zero structure
and the rank functional R.

Conventions: ``psi`` is the degree p.g.f., ``psi_hat`` its size-biased
derivative psi'/psi'(1).  At exploration time ``t`` the still-sleeping graph
has degree p.g.f. ``psi_t`` (binomial thinning with retention
rho = lambda(t) e^{2t} / lambda(0)) and ``psi_hat_t`` is its size-biased
derivative.  All real arithmetic is double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as npoly

from .degrees import DegreeDistribution

BISECT_TOL = 1e-12
SCAN_POINTS = 10_001
GRID_POINTS = 100_001


class Poly:
    """Real polynomial in power basis (``coef[k]`` multiplies alpha**k)."""

    __slots__ = ("coef",)

    def __init__(self, coef) -> None:
        c = np.atleast_1d(np.asarray(coef, dtype=float))
        self.coef = c if c.size else np.zeros(1)

    def __call__(self, alpha):
        return npoly.polyval(alpha, self.coef)

    def deriv(self, order: int = 1) -> Poly:
        return Poly(npoly.polyder(self.coef, order)) if order else self

    def normalized_derivative(self) -> Poly:
        d = self.deriv()
        return Poly(d.coef / d(1.0))

    def is_probability(self, tol: float = 1e-12) -> bool:
        return bool((self.coef >= -tol).all() and abs(self.coef.sum() - 1) <= tol)

    def __repr__(self) -> str:
        return f"Poly({np.array2string(self.coef, precision=6)})"


class Pgf(Poly):
    """Probability generating function of a finite-support degree law."""

    def __init__(self, coef) -> None:
        super().__init__(coef)
        if (self.coef < 0).any() or abs(self.coef.sum() - 1.0) > 1e-12:
            raise ValueError("p.g.f. coefficients must be nonnegative and sum to 1")

    @classmethod
    def of(cls, dist: DegreeDistribution | dict | Pgf) -> Pgf:
        if isinstance(dist, Pgf):
            return dist
        if isinstance(dist, dict):
            dist = DegreeDistribution.from_dict(dist)
        return cls(dist.probs)

    @property
    def mean(self) -> float:
        return float(self.deriv()(1.0))

    def size_biased(self) -> Poly:
        return self.normalized_derivative()


def _pgf(psi) -> Pgf:
    return psi if isinstance(psi, Pgf) else Pgf.of(psi)


def pgf_eval(psi: Poly, alpha: float, derivative_order: int = 0) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if derivative_order not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    return float(psi.deriv(derivative_order)(alpha))


def _bisect(f, lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    """Root of f on [lo, hi] given a sign change (or a zero at an end)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- criticality, fixed point, time change ---------------------------------------


def criticality_value(psi) -> float:
    p = _pgf(psi).coef
    k = np.arange(p.size)
    return float((k * (k - 2) * p).sum())


def criticality(psi) -> str:
    p = _pgf(psi).coef
    if p.size > 2 and abs(p[2] - 1.0) <= 1e-15:
        return "critical-p2"
    return "supercritical" if criticality_value(psi) > 1e-15 else "subcritical"


def fixed_point_xi(psi, tol: float = BISECT_TOL) -> float:
    """Fixed point of psi_hat in (0, 1); 0 when p_1 = 0."""
    psi = _pgf(psi)
    if criticality(psi) != "supercritical":
        raise ValueError("fixed point in (0,1) needs a supercritical law")
    h = psi.size_biased()
    if h(0.0) <= 0.0:
        return 0.0
    f = lambda a: h(a) - a
    lo, hi = 0.0, 1.0 - tol
    while f(hi) >= 0:  # f < 0 just left of 1 when psi_hat'(1) > 1
        hi = 1.0 - (1.0 - hi) * 2
    while True:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol and hi - lo <= tol:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            return mid


def giant_fraction(psi) -> float:
    """1 - psi(xi): asymptotic share of vertices awakened while exploring the giant."""
    psi = _pgf(psi)
    return 1.0 - float(psi(fixed_point_xi(psi)))


def window_end(psi, eps: float = 0.05) -> float:
    """Upper end 1 - sigma(-ln xi) - eps of the exploration window."""
    return giant_fraction(psi) - eps


def sigma_lambda(psi, t: float) -> tuple[float, float]:
    if t < 0:
        raise ValueError("t must be >= 0")
    p = _pgf(psi).coef
    k = np.arange(p.size)
    w = p * np.exp(-k * t)
    return float(w.sum()), float((k * w).sum())


def t_of_s(psi, s: float, tol: float = BISECT_TOL) -> float:
    """Time t_s with sigma(t_s) = 1 - s."""
    psi = _pgf(psi)
    p0 = psi.coef[0]
    if not 0.0 <= s < 1.0 - p0:
        raise ValueError(f"s={s} outside [0, 1 - p0)")
    if s == 0.0:
        return 0.0
    f = lambda t: sigma_lambda(psi, t)[0] - (1.0 - s)
    hi = 1.0
    while f(hi) >= 0:
        hi *= 2.0
    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or hi - lo < 1e-15:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid


def retention(psi, t: float) -> float:
    """rho(t) = lambda(t) e^{2t} / lambda(0)."""
    _, lam = sigma_lambda(psi, t)
    return lam * math.exp(2 * t) / _pgf(psi).mean


def _thinning(p: np.ndarray, t: float, rho: float) -> np.ndarray:
    """c[k] = sum_m C(m,k) rho^k (1-rho)^(m-k) e^{-mt} p_m."""
    K = p.size - 1
    c = np.zeros(K + 1)
    for m in range(K + 1):
        if p[m] == 0:
            continue
        w = p[m] * math.exp(-m * t)
        for k in range(m + 1):
            c[k] += w * math.comb(m, k) * rho**k * (1 - rho) ** (m - k)
    return c


def current_degree_law(psi, t: float) -> np.ndarray:
    """Limit of (current-degree-k sleeping vertices)/n at time t."""
    psi = _pgf(psi)
    return _thinning(psi.coef, t, retention(psi, t))


def deformed_pgfs(psi, t: float) -> tuple[Poly, Poly]:
    """(psi_t, psi_hat_t).  Coefficients are probabilities while rho(t) <= 1."""
    psi = _pgf(psi)
    sig, _ = sigma_lambda(psi, t)
    psi_t = Poly(current_degree_law(psi, t) / sig)
    return psi_t, psi_t.normalized_derivative()


def q_law(psi, s: float) -> np.ndarray:
    """Law of the current degree of the next awakened vertex at stage s.

    Evaluated from the explicit sum over original degrees, independently of
    :func:`deformed_pgfs` (it equals the coefficients of psi_hat_{t_s}).
    """
    psi = _pgf(psi)
    t = t_of_s(psi, s)
    p = psi.coef
    _, lam = sigma_lambda(psi, t)
    rho = retention(psi, t)
    K = p.size - 1
    q = np.zeros(max(K, 1))
    for k in range(K):
        q[k] = sum(
            l * math.comb(l - 1, k) * rho**k * (1 - rho) ** (l - 1 - k) * math.exp(-l * t) * p[l]
            for l in range(k + 1, K + 1)
        ) / lam
    return q


# -- G zeros and kappa --------------------------------------------------------------


def G_eval(psi_hat: Poly, alpha):
    """G(alpha) = alpha + psi_hat(1 - psi_hat(alpha)) - 1."""
    return alpha + psi_hat(1.0 - psi_hat(alpha)) - 1.0


def G_prime(psi_hat: Poly, alpha):
    d = psi_hat.deriv()
    return 1.0 - d(1.0 - psi_hat(alpha)) * d(alpha)


def alpha0(psi_hat: Poly, tol: float = BISECT_TOL) -> float:
    """Unique zero of alpha + psi_hat(alpha) - 1 (increasing in alpha)."""
    return _bisect(lambda a: a + psi_hat(a) - 1.0, 0.0, 1.0, tol)


@dataclass(frozen=True)
class GZeros:
    alpha_low: float
    alpha_0: float
    alpha_high: float
    zeros: tuple[float, ...]
    degenerate: bool = False
    identically_zero: bool = False

    @property
    def count(self) -> int:
        return len(self.zeros)


def _scan_zeros(f, tol: float, points: int = SCAN_POINTS) -> list[float]:
    grid = np.linspace(0.0, 1.0, points)
    v = f(grid)
    scale = max(1.0, float(np.abs(v).max()))
    zero = np.abs(v) <= 1e-14 * scale
    out = [float(a) for a in grid[zero]]
    s = np.sign(np.where(zero, 0.0, v))
    for i in range(points - 1):
        if s[i] * s[i + 1] < 0:
            out.append(_bisect(f, float(grid[i]), float(grid[i + 1]), tol))
    return sorted(out)


def _merge(zs: list[float], eps: float) -> list[float]:
    out: list[float] = []
    for z in sorted(zs):
        if out and z - out[-1] <= eps:
            continue
        out.append(z)
    return out


def G_zeros(psi_hat: Poly, tol: float = BISECT_TOL, strict: bool = True) -> GZeros:
    """Zeros of G in [0, 1]: sign-change scan on a 10^4 grid refined by bisection.

    alpha_0 is always a zero.  A triple (low, alpha_0, high) is returned; with a
    single zero all three coincide.  ``degenerate`` marks |G'(alpha_0)| <= 1e-6.
    """
    f = lambda a: G_eval(psi_hat, a)
    a0 = alpha0(psi_hat, tol)
    grid = np.linspace(0.0, 1.0, SCAN_POINTS)
    if np.abs(f(grid)).max() <= 1e-14:
        return GZeros(0.0, a0, 1.0, (a0,), True, True)
    # alpha_0 comes from a better-conditioned equation; it replaces its scanned twin
    zs = sorted([z for z in _scan_zeros(f, tol) if abs(z - a0) > 1e-9] + [a0])
    zs = _merge(zs, 1e-9)
    if strict and len(zs) > 3:
        raise ValueError(f"G has {len(zs)} zeros; more than 3 violates the log-concave structure")
    degenerate = abs(float(G_prime(psi_hat, a0))) <= 1e-6
    return GZeros(zs[0], a0, zs[-1], tuple(zs), degenerate)


def kappa(psi_hat: Poly) -> float:
    """-ln(beta + psi_hat(beta)) where psi_hat'(beta) = 1.  May be negative."""
    d = psi_hat.deriv()
    if d(1.0) <= 1.0:
        raise ValueError("kappa needs psi_hat'(1) > 1 (supercritical law)")
    beta = _bisect(lambda b: d(b) - 1.0, 0.0, 1.0)
    return -math.log(beta + float(psi_hat(beta)))


def G_prime_at_alpha0(psi, t: float) -> float:
    _, h = deformed_pgfs(psi, t)
    return float(G_prime(h, alpha0(h)))


def alpha_star(psi, t: float) -> float:
    """Largest zero of G_t."""
    _, h = deformed_pgfs(psi, t)
    return G_zeros(h).alpha_high


# -- the rank functional -------------------------------------------------------------


def R_eval(phi: Poly, alpha):
    """R_phi(alpha) = 2 - phi(1 - phi'(alpha)/phi'(1)) - phi(alpha) - phi'(alpha)(1 - alpha)."""
    d = phi.deriv()
    d1 = d(1.0)
    return 2.0 - phi(1.0 - d(alpha) / d1) - phi(alpha) - d(alpha) * (1.0 - alpha)


@dataclass(frozen=True)
class RMin:
    alpha: float
    value: float
    grid_value: float
    candidates: tuple[float, ...]
    refined: bool = False


def R_minimize(psi, tol: float = 1e-9) -> RMin:
    """Minimum of R_psi on [0,1] over {0, 1, zeros of G_0}, checked on a 10^5 grid."""
    psi = _pgf(psi)
    h = psi.size_biased()
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    rgrid = R_eval(psi, grid)
    gi = int(np.argmin(rgrid))
    if np.abs(G_eval(h, grid[::10])).max() <= 1e-14:
        cands = [0.0, 1.0]
    else:
        cands = _merge([0.0, 1.0] + _scan_zeros(lambda a: G_eval(h, a), BISECT_TOL), 1e-12)
    vals = [float(R_eval(psi, a)) for a in cands]
    k = int(np.argmin(vals))
    alpha, value = cands[k], vals[k]
    refined = False
    if float(rgrid[gi]) < value - tol:
        # a minimiser was missed by the candidate set; polish the grid minimum
        from scipy.optimize import minimize_scalar

        lo, hi = grid[max(gi - 1, 0)], grid[min(gi + 1, grid.size - 1)]
        res = minimize_scalar(lambda a: float(R_eval(psi, a)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        alpha, value, refined = float(res.x), float(res.fun), True
    return RMin(alpha, value, float(rgrid[gi]), tuple(cands), refined)


def R_prime(psi, alpha):
    """Exact derivative of R_psi."""
    psi = _pgf(psi)
    d1, d2 = psi.deriv(), psi.deriv(2)
    m = d1(1.0)
    return d1(1.0 - d1(alpha) / m) * d2(alpha) / m - d2(alpha) * (1.0 - alpha)


def er_rank_formula(lam: float, alpha):
    """Closed form of R for the Poisson(lam) law."""
    e = np.exp(lam * (alpha - 1.0))
    return 2.0 - np.exp(-lam * e) - e * (lam + 1.0 - lam * alpha)


def closed_form_p1p2(p1: float) -> float:
    """min R for laws supported on {1, 2}."""
    return (2.0 - p1) ** 2 / (4.0 - 3.0 * p1)


def log_concavity_check(psi, points: int = 10_000) -> bool:
    """psi'' psi'''' - psi'''^2 <= 0 on an interior grid (coefficients formed exactly)."""
    psi = _pgf(psi)
    c = [Fraction(float(x)) for x in psi.coef]
    if all(x == 0 for x in c[2:]):
        return False

    def der(a, k):
        for _ in range(k):
            a = [i * a[i] for i in range(1, len(a))] or [Fraction(0)]
        return a

    def mul(a, b):
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out

    d2, d3, d4 = der(c, 2), der(c, 3), der(c, 4)
    p24, p33 = mul(d2, d4), mul(d3, d3)
    n = max(len(p24), len(p33))
    q = np.array([float((p24[i] if i < len(p24) else 0) - (p33[i] if i < len(p33) else 0))
                  for i in range(n)])
    scale = np.array([float(abs(p24[i]) if i < len(p24) else 0) + float(p33[i] if i < len(p33) else 0)
                      for i in range(n)])
    a = np.linspace(0.0, 1.0, points + 2)[1:-1]
    return bool((npoly.polyval(a, q) <= 1e-12 * npoly.polyval(a, scale)).all())


# -- integral identity ----------------------------------------------------------------


def h_eval(psi_hat_t: Poly, alpha):
    return alpha + 1.0 - psi_hat_t(alpha)


def _integrand(psi: Pgf, s: float) -> float:
    t = t_of_s(psi, s)
    _, h = deformed_pgfs(psi, t)
    try:
        a = G_zeros(h).alpha_high
    except ValueError as exc:
        raise ValueError(f"root finding failed at s={s}, t={t}: {exc}") from exc
    return float(h_eval(h, a))


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 40) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left, right = simpson(fa, flm, fm, a, m), simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if b <= a:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    diff: float
    split_at: float | None


def integral_identity_check(psi, S: float, quad_tol: float = 1e-8) -> IdentityCheck:
    """Compare the integral of h_{t_s}(alpha*(t_s)) over [0, S] with the R difference."""
    psi = _pgf(psi)
    f = lambda s: _integrand(psi, s)
    split = None
    try:
        k = kappa(psi.size_biased())
    except ValueError:
        k = -1.0
    if k > 0:
        s_k = 1.0 - sigma_lambda(psi, k)[0]
        if 0.0 < s_k < S:
            split = s_k
    if split is None:
        lhs = adaptive_simpson(f, 0.0, S, quad_tol)
    else:
        lhs = adaptive_simpson(f, 0.0, split, quad_tol / 2) + adaptive_simpson(f, split, S, quad_tol / 2)

    def sr(s):
        t = t_of_s(psi, s)
        pt, ht = deformed_pgfs(psi, t)
        return sigma_lambda(psi, t)[0] * float(R_eval(pt, G_zeros(ht).alpha_high))

    rhs = sr(0.0) - sr(S)
    return IdentityCheck(lhs, rhs, lhs - rhs, split)


# -- leftover graph and type fixed points ------------------------------------------------


def leftover_limit(psi, alpha):
    """psi(xi + psi_hat(xi)(alpha - 1)) / psi(xi): degree p.g.f. left after the giant."""
    psi = _pgf(psi)
    xi = fixed_point_xi(psi)
    h = psi.size_biased()
    return psi(xi + h(xi) * (alpha - 1.0)) / psi(xi)


@dataclass(frozen=True)
class Residuals:
    y: float
    u: float
    v: float
    z_slack: float


def fixed_point_residuals(psi_hat_t: Poly, zeta) -> Residuals:
    """Deviations of type proportions (x, y, z, u, v) from the type fixed-point equations.

    ``z_slack`` is z - psi_hat(y) and should be >= 0 up to noise.
    """
    x, y, z, u, v = (float(c) for c in zeta)
    g = lambda a: float(psi_hat_t(min(max(a, 0.0), 1.0)))
    gu, gv, g0 = g(x + y + u), g(x + y + v), g(x + y)
    return Residuals(
        y=y - (1.0 - gu - gv + g0),
        u=u - (gu - g0),
        v=v - (gv - g0),
        z_slack=z - g(y),
    )


# -- profile ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoryProfile:
    criticality: str
    criticality_value: float
    supercritical: bool
    xi: float | None
    giant_fraction: float | None
    kappa: float | None
    kappa_regime: str
    alpha_star_low: float
    alpha_0: float
    alpha_star_high: float
    g_zero_count: int
    alpha_min: float
    r_min: float
    log_concave: bool

    def to_dict(self) -> dict:
        return asdict(self)


def profile(psi) -> TheoryProfile:
    psi = _pgf(psi)
    crit = criticality(psi)
    sup = crit == "supercritical"
    xi = fixed_point_xi(psi) if sup else None
    h = psi.size_biased()
    try:
        k = kappa(h)
        regime = "three zeros for t < kappa" if k > 0 else "one zero for all t >= 0 (kappa < 0)"
    except ValueError:
        k, regime = None, "undefined (not supercritical)"
    gz = G_zeros(h, strict=False)
    rm = R_minimize(psi)
    return TheoryProfile(
        criticality=crit,
        criticality_value=criticality_value(psi),
        supercritical=sup,
        xi=xi,
        giant_fraction=None if xi is None else 1.0 - float(psi(xi)),
        kappa=k,
        kappa_regime=regime,
        alpha_star_low=gz.alpha_low,
        alpha_0=gz.alpha_0,
        alpha_star_high=gz.alpha_high,
        g_zero_count=gz.count,
        alpha_min=rm.alpha,
        r_min=rm.value,
        log_concave=log_concavity_check(psi),
    )
