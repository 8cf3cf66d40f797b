"""Checkable thresholds and conditions for existence and multiplicity.

Covers the coercivity / anti-coercivity parameter thresholds, the mountain
pass level bound on the unit sphere, the three-critical-point sufficient
conditions phrased through suprema of ``F``, and the sup-norm radii induced by
level sets of the modular.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .constants import Budget, best_c_m, lemma1a_pair
from .energy import ProblemSpec, energy
from .nonlinearity import Nonlinearity, Region, check_growth, limsup_ratio, sup_F_on
from .sequence_space import ExponentProfile

READINGS = ("literal", "alt", "derived")
_EXACT = 1e-12


class ExponentCaseError(ValueError):
    """The exponents fall outside the case a threshold formula covers."""


def size_exponent(q_minus: float, reading: str = "literal") -> float:
    """Exponent of ``(T+1)`` in the upper energy estimate.

    ``literal`` reads the printed ``2/(2 - q- + 1)`` literally, ``alt`` takes
    ``2/(2(q- + 1))``, ``derived`` is ``(1 - q-)/2`` from the power-mean
    comparison with ``m = q- + 1``.
    """
    if reading == "literal":
        denom = 3.0 - q_minus
        if denom == 0:
            raise ExponentCaseError("the literal exponent 2/(3 - q-) is undefined at q- = 3")
        return 2.0 / denom
    if reading == "alt":
        return 2.0 / (2.0 * (q_minus + 1.0))
    if reading == "derived":
        return (1.0 - q_minus) / 2.0
    raise ValueError(f"unknown exponent reading {reading!r}; choose from {READINGS}")


def exponent_gaps(p: ExponentProfile, nl: Nonlinearity) -> dict:
    return {
        "p_minus": p.p_minus,
        "p_plus": p.p_plus,
        "q_minus": nl.q_minus,
        "q_plus": nl.q_plus,
        "coercive_gap": p.p_minus - (nl.q_plus + 1.0),
        "anticoercive_gap": p.p_plus - (nl.q_minus + 1.0),
    }


@dataclass
class LambdaStar:
    """A parameter threshold; ``all_lambda`` means every ``λ > 0`` qualifies."""

    kind: str
    value: float | None
    all_lambda: bool
    regime: str
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _coeff(nl: Nonlinearity, hyp: str, key: str) -> np.ndarray:
    if hyp not in nl.hypotheses:
        raise ValueError(f"hypothesis {hyp} coefficients are required")
    return nl.hypotheses[hyp][key]


def lambda_star_coercive(T: int, p: ExponentProfile, nl: Nonlinearity, constants=None,
                         budget: Budget = Budget()) -> LambdaStar:
    """Largest λ for which the coercive lower bound keeps a positive leading term.

    ``constants`` may supply ``C1`` and ``c_m_best`` (for ``m = q+ + 1``);
    otherwise they are computed.
    """
    gap = p.p_minus - (nl.q_plus + 1.0)
    inputs = {"p_minus": p.p_minus, "p_plus": p.p_plus, "q_minus": nl.q_minus, "q_plus": nl.q_plus}
    if gap > _EXACT:
        return LambdaStar("coercive", None, True, "coercive for all lambda > 0", inputs)
    if gap < -_EXACT:
        raise ExponentCaseError(f"p- < q+ + 1 (gap {gap}); no coercivity threshold applies")
    a_plus = float(np.max(_coeff(nl, "H1", "a")))
    m = nl.q_plus + 1.0
    if constants is not None and getattr(constants, "m", m) == m:
        C1, c_m = constants.C1, constants.c_m_best
    else:
        C1 = lemma1a_pair(T, p)[0]
        c_m = best_c_m(T, m, budget).value
    value = C1 * (nl.q_minus + 1.0) / (p.p_plus * a_plus * c_m)
    inputs.update(C1=C1, c_m=c_m, m=m, a_plus=a_plus)
    return LambdaStar("coercive", value, False, "coercive for 0 < lambda < lambda*", inputs)


def lambda_star_anticoercive(T: int, p: ExponentProfile, nl: Nonlinearity, reading: str = "literal") -> LambdaStar:
    """λ beyond which the upper energy estimate has a negative leading term."""
    gap = p.p_plus - (nl.q_minus + 1.0)
    inputs = {"p_minus": p.p_minus, "p_plus": p.p_plus, "q_minus": nl.q_minus,
              "q_plus": nl.q_plus, "reading": reading}
    if gap < -_EXACT:
        return LambdaStar("anticoercive", None, True, "anti-coercive for all lambda > 0", inputs)
    if gap > _EXACT:
        raise ExponentCaseError(f"p+ > q- + 1 (gap {gap}); no anti-coercivity threshold applies")
    a1_minus = float(np.min(_coeff(nl, "H2", "a1")))
    if not a1_minus > 0:
        raise ValueError("H2 needs a1(k) > 0")
    e = size_exponent(nl.q_minus, reading)
    value = ((T + 1) / p.p_minus) * (nl.q_plus + 1.0) * 2.0 ** (nl.q_minus + 1.0) / (a1_minus * (T + 1) ** e)
    inputs.update(a1_minus=a1_minus, size_exponent=e)
    return LambdaStar("anticoercive", value, False, "anti-coercive for lambda > lambda*", inputs)


def lambda_star_mpa(T: int, p: ExponentProfile, nl: Nonlinearity, M: float, reading: str = "literal") -> LambdaStar:
    """λ from which the unit-sphere energy bound drops to ``M`` or below.

    ``M`` is taken with its sign as given.
    """
    c_minus = float(np.min(_coeff(nl, "H3", "c")))
    if not c_minus > 0:
        raise ValueError(f"H3 needs c(k) > 0, got min {c_minus}")
    e = size_exponent(nl.q_minus, reading)
    head = -M + (T + 1) / p.p_minus
    inputs = {"M": M, "c_minus": c_minus, "p_minus": p.p_minus, "q_minus": nl.q_minus,
              "q_plus": nl.q_plus, "size_exponent": e, "reading": reading,
              "coercive_gap": p.p_minus - (nl.q_plus + 1.0)}
    if head <= 0:
        return LambdaStar("mountain_pass", None, True, "bound holds for all lambda > 0", inputs)
    value = head * (nl.q_plus + 1.0) * 2.0 ** (nl.q_minus + 1.0) / (c_minus * (T + 1) ** e)
    return LambdaStar("mountain_pass", value, False, "J_lambda <= M on ||u|| = 1 for lambda >= lambda*", inputs)


@dataclass
class SphereCheck:
    passed: bool
    lam: float
    M: float
    max_energy: float
    n_samples: int
    witness: list | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def unit_sphere_samples(T: int, n: int, seed: int = 0x5EED) -> np.ndarray:
    """``n`` interior vectors with unit H-norm."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, T))
    V = np.zeros((n, T + 2))
    V[:, 1:-1] = X
    h = np.linalg.norm(np.diff(V, axis=1), axis=1)
    return X / h[:, None]


def verify_mpa_bound(T: int, p: ExponentProfile, nl: Nonlinearity, lam: float, M: float,
                     n: int = 1000, seed: int = 0x5EED, band: float = 1e-8) -> SphereCheck:
    """Sample ``||u|| = 1`` and test ``J_λ(u) <= M + band``."""
    spec = ProblemSpec(T, p, nl, lam)
    X = unit_sphere_samples(T, n, seed)
    E = np.array([energy(spec, x) for x in X])
    i = int(np.argmax(E))
    ok = bool(E[i] <= M + band)
    return SphereCheck(ok, lam, M, float(E[i]), n, None if ok else X[i].tolist())


def rprime_lower_bound(r: float, T: int, p: ExponentProfile) -> float:
    """Lower bound on ``inf{||u||_∞ : μ(u) >= r}``."""
    if not r > 0:
        raise ValueError("r must be positive")
    return 0.5 * (r * p.p_minus / (T + 1)) ** (1.0 / p.p_plus)


def sprime_upper_bound(s: float, T: int, p: ExponentProfile) -> float:
    """Upper bound on ``sup{||u||_∞ : μ(u) <= s}``."""
    if not s > 0:
        raise ValueError("s must be positive")
    return (T + 1) / 2.0 * (s * p.p_plus) ** (1.0 / p.p_minus)


def _max_modular_on_box(rho: float, pk: np.ndarray, T: int, signs: np.ndarray) -> float:
    # a convex function on a box peaks at a vertex
    V = np.zeros((signs.shape[0], T + 2))
    V[:, 1:-1] = rho * signs
    return float(np.max(np.sum(np.abs(np.diff(V, axis=1)) ** pk / pk, axis=1)))


def _chain_min(rho: float, exps: np.ndarray) -> float:
    """``min Σ |d_i|^{p_i}/p_i`` subject to ``Σ d_i = rho``."""
    if rho == 0:
        return 0.0
    inv = 1.0 / (exps - 1.0)

    def total(log_nu):
        return np.sum(np.exp(log_nu * inv)) - rho

    lo, hi = -1.0, 1.0
    while total(lo) > 0:
        lo *= 2
    while total(hi) < 0:
        hi *= 2
    log_nu = optimize.brentq(total, lo, hi, xtol=1e-15, rtol=1e-15)
    d = np.exp(log_nu * inv)
    return float(np.sum(d**exps / exps))


def _min_modular_at_height(rho: float, pk: np.ndarray, T: int) -> float:
    return min(_chain_min(rho, pk[:k]) + _chain_min(rho, pk[k:]) for k in range(1, T + 1))


def _invert_increasing(fn, target: float) -> float:
    hi = 1.0
    while fn(hi) < target:
        hi *= 2.0
    return optimize.brentq(lambda x: fn(x) - target, 0.0, hi, xtol=1e-15, rtol=1e-15)


@dataclass
class Radii:
    r: float
    s: float
    r_prime: float
    s_prime: float
    r_prime_lower_bound: float
    s_prime_upper_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_rprime_sprime(r: float, s: float, T: int, p: ExponentProfile, max_T: int = 20) -> Radii:
    """Sup-norm radii of the modular level sets ``{μ >= r}`` and ``{μ <= s}``.

    ``r'`` inverts the vertex maximum of μ over sup-norm boxes; ``s'`` inverts
    the minimum of μ with one node pinned at height ρ, which splits into two
    convex chain problems solved by a Lagrange multiplier.
    """
    if not 0 < r < s:
        raise ValueError(f"need 0 < r < s, got r={r}, s={s}")
    if T > max_T:
        raise ValueError(f"vertex enumeration is limited to T <= {max_T}")
    pk = np.asarray(p.for_differences(T))
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=T)))
    rp = _invert_increasing(lambda rho: _max_modular_on_box(rho, pk, T, signs), r)
    sp = _invert_increasing(lambda rho: _min_modular_at_height(rho, pk, T), s)
    return Radii(r, s, rp, sp, rprime_lower_bound(r, T, p), sprime_upper_bound(s, T, p))


@dataclass
class Condition:
    name: str
    holds: bool
    values: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, **self.values}


def check_three_point_conditions(T: int, p: ExponentProfile, nl: Nonlinearity, r_prime: float,
                                 s_prime: float, tol: float = 1e-12) -> dict:
    """Evaluate the three sufficient conditions for three critical points.

    * ``tail_growth``: ``limsup F(k,t)/|t|^{p-} <= 0`` for every k;
    * ``global_sup_gap``: ``Σ sup_{|t|<=s'} F < Σ sup_ℝ F``;
    * ``annulus_bound``: ``sup_{r'<=|t|<=s'} F(k,·) <= -Σ_{h≠k} sup_{|t|<=s'} F(h,·)``.
    """
    if not 0 < r_prime < s_prime:
        raise ValueError(f"need 0 < r' < s', got {r_prime}, {s_prime}")
    ks = range(1, T + 1)
    ball = [sup_F_on(nl, k, Region.ball(s_prime)) for k in ks]
    ring = [sup_F_on(nl, k, Region.annulus(r_prime, s_prime)) for k in ks]
    full = [sup_F_on(nl, k, Region.reals()) for k in ks]

    tails = [limsup_ratio(nl, k, p.p_minus) for k in ks]
    tail = Condition("tail_growth", all(v.nonpositive for v in tails), {
        "exponent": p.p_minus,
        "per_node": [{"k": k, "limsup": v.limsup, "nonpositive": v.nonpositive, "witness": v.witness}
                     for k, v in zip(ks, tails)],
    })

    left, right = sum(ball), sum(full)
    gap = Condition("global_sup_gap", bool(math.isfinite(left) and left < right),
                    {"sum_sup_ball": left, "sum_sup_reals": right})

    rows = []
    for i, k in enumerate(ks):
        bound = -(left - ball[i])
        rows.append({"k": k, "sup_annulus": ring[i], "bound": bound, "holds": bool(ring[i] <= bound + tol)})
    ann = Condition("annulus_bound", all(r["holds"] for r in rows), {"per_node": rows})

    return {
        "r_prime": r_prime,
        "s_prime": s_prime,
        "sup_ball": ball,
        "sup_annulus": ring,
        "sup_reals": full,
        "conditions": {c.name: c for c in (tail, gap, ann)},
    }


def radius_condition(c: float, r_prime: float, s_prime: float, T: int, p: ExponentProfile) -> dict:
    """Whether ``r'`` and ``s'`` straddle the level-``c`` bounds."""
    lo, hi = rprime_lower_bound(c, T, p), sprime_upper_bound(c, T, p)
    return {"c": c, "rprime_bound": lo, "sprime_bound": hi,
            "holds": bool(r_prime < lo and s_prime > hi)}


@dataclass
class BoxComparison:
    sigma: float
    box_inf: float
    formula: float
    agree: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _grid_max(node, lo: float, hi: float, n: int = 4001) -> float:
    """Max of ``F`` on ``[lo, hi]`` by a dense grid polished around grid peaks."""
    t = np.linspace(lo, hi, n)
    v = node.F(t)
    peaks = [i for i in range(n) if (i == 0 or v[i] >= v[i - 1]) and (i == n - 1 or v[i] >= v[i + 1])]
    best = float(np.max(v))
    for i in peaks:
        a, b = t[max(i - 1, 0)], t[min(i + 1, n - 1)]
        res = optimize.minimize_scalar(lambda x: -float(node.F(x)), bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best


def min_on_ball_vs_global(T: int, p: ExponentProfile, nl: Nonlinearity, sigma: float,
                          agree_tol: float = 1e-10) -> BoxComparison:
    """``inf_{||u||_∞ <= σ} J`` two ways: per-node grid search and exact suprema.

    J depends on each ``u(k)`` separately, so the box infimum is a sum of
    one-dimensional minima, and ``p`` plays no role.
    """
    if nl.T != T:
        raise ValueError(f"nonlinearity defines {nl.T} nodes, expected T={T}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    box = -sum(_grid_max(nl.node(k), -sigma, sigma) for k in range(1, nl.T + 1))
    formula = -sum(sup_F_on(nl, k, Region.ball(sigma)) for k in range(1, nl.T + 1))
    return BoxComparison(sigma, box, formula, bool(abs(box - formula) <= agree_tol))


def _cauchy_radius(node) -> float:
    c = node.polynomial()
    if c.size <= 1:
        return 1.0
    return float(1.0 + np.max(np.abs(c[:-1] / c[-1])))


def global_inf_vs_sup(nl: Nonlinearity, agree_tol: float = 1e-10) -> BoxComparison:
    """``inf_H J`` against ``-Σ sup_ℝ F`` for polynomial nodes.

    Every zero of a polynomial ``f`` lies within its Cauchy radius, so a finite
    supremum of ``F`` is attained there. Unbounded nodes are confirmed by
    finding ``F > 1e12`` along a geometric scan.
    """
    box, radius = 0.0, 0.0
    for k in range(1, nl.T + 1):
        node = nl.node(k)
        if not node.is_polynomial:
            raise ValueError("global comparison needs polynomial nodes")
        ts = np.concatenate((np.geomspace(1.0, 1e12, 400), -np.geomspace(1.0, 1e12, 400)))
        with np.errstate(over="ignore", invalid="ignore"):
            if np.nanmax(node.F(ts)) > 1e12:
                box = -math.inf
                continue
        R = _cauchy_radius(node)
        radius = max(radius, R)
        box -= _grid_max(node, -R, R)
    formula = -sum(sup_F_on(nl, k, Region.reals()) for k in range(1, nl.T + 1))
    agree = (box == formula) if math.isinf(formula) or math.isinf(box) else abs(box - formula) <= agree_tol
    return BoxComparison(radius, box, formula, bool(agree))


def criteria_report(spec: ProblemSpec, r_prime: float | None = None, s_prime: float | None = None,
                    c: float | None = None, M: float | None = None, reading: str = "literal",
                    budget: Budget = Budget()) -> dict:
    """Everything checkable for one problem, each item with its inputs."""
    T, p, nl = spec.T, spec.p, spec.nl
    out: dict = {"T": T, "p": p.p.tolist(), "p_minus": p.p_minus, "p_plus": p.p_plus,
                 "exponent_reading": reading}
    if nl.q is not None:
        out["gaps"] = exponent_gaps(p, nl)
        thresholds = {}
        for name, fn in (
            ("coercive", lambda: lambda_star_coercive(T, p, nl, budget=budget)),
            ("anticoercive", lambda: lambda_star_anticoercive(T, p, nl, reading)),
            ("mountain_pass", lambda: lambda_star_mpa(T, p, nl, 0.0 if M is None else M, reading)),
        ):
            try:
                thresholds[name] = fn().to_dict()
            except ValueError as exc:
                thresholds[name] = {"kind": name, "unavailable": str(exc)}
        out["lambda_star"] = thresholds
        out["growth"] = {
            h: {"holds_on_grid": (v := check_growth(nl, h)).holds, "verdict": v.describe(), "reason": v.reason}
            for h in sorted(nl.hypotheses)
        }
    if r_prime is not None and s_prime is not None:
        res = check_three_point_conditions(T, p, nl, r_prime, s_prime)
        res["conditions"] = {k: v.to_dict() for k, v in res["conditions"].items()}
        res["all_hold"] = all(v["holds"] for v in res["conditions"].values())
        out["three_point"] = res
        out["box_infimum"] = min_on_ball_vs_global(T, p, nl, s_prime).to_dict()
        if c is not None:
            out["radius_condition"] = radius_condition(c, r_prime, s_prime, T, p)
    elif c is not None:
        out["radius_bounds"] = {"c": c, "rprime_bound": rprime_lower_bound(c, T, p),
                                "sprime_bound": sprime_upper_bound(c, T, p)}
    return out
