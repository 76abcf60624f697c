"""The golden-ratio integrality-gap family and its sqrt(phi) lower bound.

The family places |A| = round(r_B k) first-stage facilities, a twin set B at
distance 2l from each, and |C| = round(r_C k) second-stage facilities, with
one unit-mass client spread over every (i1, i2) in A x C and extra mass a on
the twins; all remaining distances come from the graph metric closure.  The
fractional solution has cost 1 up to O(1/k) while every integral solution
costs at least sqrt(phi) - o(1), witnessed by the vertices of a tiny polytope
over the opening fractions (x_A, x_C, x_B).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import sympy as sp

from .instances import (
    BiPointSolution,
    MetricInstance,
    OpenSet,
    connection_cost,
    connection_cost_float,
)

mpmath.mp.dps = 50

_PHI = sp.Rational(1, 2) + sp.sqrt(5) / 2
_SQRT_PHI = sp.sqrt(_PHI)
_OMEGA = _PHI - _SQRT_PHI
_ELL = 1 / _PHI
_R_B = _OMEGA * _SQRT_PHI
_R_C = (1 - _OMEGA) * _SQRT_PHI
_B = (1 - _R_B) / _R_C


def _to_fraction(expr, max_den=10 ** 9) -> Fraction:
    return Fraction(str(sp.N(expr, 30))).limit_denominator(max_den)


@dataclass
class GoldenConstants:
    """Exact symbolic constants plus, when k is given, the rational stand-ins
    t_B/k, t_C/k and the exact b derived from them."""

    phi: object
    omega: object
    ell: object
    r_B: object
    r_C: object
    b: object
    a: object
    k: int = None
    t_B: int = None
    t_C: int = None
    ell_q: Fraction = None
    b_q: Fraction = None
    a_q: Fraction = None

    def floats(self) -> dict:
        return {n: float(sp.N(getattr(self, n), 30))
                for n in ("phi", "omega", "ell", "r_B", "r_C", "b", "a")}


def golden_constants(k: int = None) -> GoldenConstants:
    c = GoldenConstants(phi=_PHI, omega=_OMEGA, ell=_ELL, r_B=_R_B, r_C=_R_C,
                        b=_B, a=1 - _B)
    if k is not None:
        t_B = int(sp.floor(_R_B * k + sp.Rational(1, 2)))
        t_C = int(sp.floor(_R_C * k + sp.Rational(1, 2)))
        if t_B < 1 or t_C < 1:
            raise ValueError(f"k={k} too small for the construction")
        b_q = Fraction(k - t_B, t_C)  # (1 - t_B/k) / (t_C/k)
        c.k, c.t_B, c.t_C = k, t_B, t_C
        c.ell_q = _to_fraction(_ELL)
        c.b_q = b_q
        c.a_q = 1 - b_q
    return c


def analytic_costs(c: GoldenConstants) -> tuple:
    """Exact (D1, D2) of the rational construction, from the layout alone:
    unit client mass at 2-l from A, twin mass a at 2l, everything at l or 0
    from the second-stage set."""
    ell, a = c.ell_q, c.a_q
    D1 = (2 - ell) + 2 * a * ell
    D2 = ell
    return D1, D2


def gap_summary(k: int) -> dict:
    """Validity and unit-cost report computed from counts and the analytic
    cost formulas; exact rationals throughout."""
    c = golden_constants(k)
    D1, D2 = analytic_costs(c)
    n_f1, n_f2 = c.t_B, c.t_B + c.t_C
    mass = c.a_q * n_f1 + c.b_q * n_f2
    cost = c.a_q * D1 + c.b_q * D2
    return {
        "k": k,
        "t_B": c.t_B,
        "t_C": c.t_C,
        "a": str(c.a_q),
        "b": str(c.b_q),
        "checks": {
            "a_plus_b_equals_1": c.a_q + c.b_q == 1,
            "F1_at_most_k": n_f1 <= k,
            "F2_at_least_k": n_f2 >= k,
            "mass_equals_k": mass == k,
        },
        "D1": float(D1),
        "D2": float(D2),
        "cost": float(cost),
        "cost_exact": str(cost),
        "cost_dev": float(abs(cost - 1)),
    }


def build_golden(k: int, max_points: int = 600) -> BiPointSolution:
    """Explicit instance with exact rational distances via metric closure.

    Only sensible at desk scale: the client count grows like 0.37 k^2, so
    large k should use the analytic summary instead.
    """
    c = golden_constants(k)
    t_B, t_C, ell = c.t_B, c.t_C, c.ell_q
    n = 3 * t_B + t_C + t_B * t_C
    if n > max_points:
        raise ValueError(
            f"k={k} needs {n} points (> {max_points}); use gap_summary")

    A = list(range(t_B))
    C = list(range(t_B, t_B + t_C))
    beta = {i: t_B + t_C + i for i in A}  # twin of each first-stage facility
    B = [beta[i] for i in A]
    next_id = 2 * t_B + t_C
    clients = []
    demands = {}
    edges = []

    u_pair = Fraction(1, t_B * t_C)
    for i1, i2 in itertools.product(A, C):
        j = next_id
        next_id += 1
        clients.append(j)
        demands[j] = u_pair
        edges.append((j, i1, 2 - ell))
        edges.append((j, i2, ell))
    for i in A:
        edges.append((i, beta[i], 2 * ell))
        j = next_id
        next_id += 1
        clients.append(j)
        demands[j] = c.a_q / t_B
        edges.append((j, beta[i], Fraction(0)))

    assert next_id == n
    INFTY = Fraction(10 ** 9)
    dist = [[INFTY] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = Fraction(0)
    for u, v, w in edges:
        w = Fraction(w)
        if w < dist[u][v]:
            dist[u][v] = dist[v][u] = w
    for mid in range(n):
        dm = dist[mid]
        for u in range(n):
            du = dist[u]
            dum = du[mid]
            if dum == INFTY:
                continue
            for v in range(n):
                alt = dum + dm[v]
                if alt < du[v]:
                    du[v] = dist[v][u] = alt

    inst = MetricInstance(n_points=n, dist=dist, clients=clients,
                          facilities=A + B + C, k=k, demands=demands)
    return BiPointSolution(instance=inst, F1=A, F2=B + C,
                           a=c.a_q, b=c.b_q)


# --- the opening-fraction polytope ------------------------------------------


@dataclass
class ProfileVertex:
    x_A: object
    x_B: object
    x_C: object
    value: object  # f at the vertex

    def as_tuple_paper_order(self):
        return (self.x_A, self.x_C, self.x_B)


def _f_expr(x_A, x_B, x_C, c: GoldenConstants):
    ell, a = c.ell, c.a
    slack = 1 - x_B - x_A
    if isinstance(slack, sp.Expr):
        pos = sp.Max(slack, 0)
    else:
        pos = max(slack, 0)
    return ell + 2 * (1 - x_C) * (1 - ell * x_A) + 2 * a * ell * (1 - x_B) \
        + 2 * a * pos


def extreme_points(c: GoldenConstants = None, surplus=0) -> list:
    """Vertices of {x in [0,1]^3 : x_A r_B + x_B r_B + x_C r_C = 1 + surplus}
    with the objective f evaluated at each; exact when surplus is symbolic
    or zero."""
    if c is None:
        c = golden_constants()
    coeff = {"x_A": c.r_B, "x_B": c.r_B, "x_C": c.r_C}
    rhs = 1 + sp.nsimplify(surplus) if surplus else sp.Integer(1)
    names = ["x_A", "x_B", "x_C"]
    verts = []
    seen = set()
    for fixed in itertools.combinations(names, 2):
        free = [n for n in names if n not in fixed][0]
        for vals in itertools.product((sp.Integer(0), sp.Integer(1)),
                                      repeat=2):
            point = dict(zip(fixed, vals))
            rem = rhs - sum(coeff[n] * point[n] for n in fixed)
            point[free] = rem / coeff[free]
            if any(sp.N(point[n], 30) < -sp.Float("1e-25")
                   or sp.N(point[n], 30) > 1 + sp.Float("1e-25")
                   for n in names):
                continue
            key = tuple(str(sp.N(point[n], 25)) for n in names)
            if key in seen:
                continue
            seen.add(key)
            val = _f_expr(point["x_A"], point["x_B"], point["x_C"], c)
            verts.append(ProfileVertex(x_A=point["x_A"], x_B=point["x_B"],
                                       x_C=point["x_C"], value=val))
    verts.sort(key=lambda v: float(sp.N(v.value, 30)))
    return verts


def gap_lower_bound(c: GoldenConstants = None, surplus=0):
    """Minimum of f over the (possibly relaxed) polytope: the cost any
    solution opening k + surplus-many extra facilities must still pay."""
    verts = extreme_points(c, surplus=surplus)
    return verts[0].value if verts else None


# Exact arithmetic in Q[s] / (s^4 - s^2 - 1), s = sqrt(phi): every constant
# of the construction lives in this field (phi = s^2, l = s^2 - 1, 1/s =
# s^3 - s), so the vertex identities reduce to coefficient comparisons.


class FieldElt(tuple):
    """Element a0 + a1 s + a2 s^2 + a3 s^3 with rational coefficients."""

    def __new__(cls, coeffs):
        return super().__new__(cls, [Fraction(x) for x in coeffs])

    def __add__(self, o):
        o = _lift_field(o)
        return FieldElt([a + b for a, b in zip(self, o)])

    __radd__ = __add__

    def __sub__(self, o):
        o = _lift_field(o)
        return FieldElt([a - b for a, b in zip(self, o)])

    def __rsub__(self, o):
        return _lift_field(o) - self

    def __neg__(self):
        return FieldElt([-a for a in self])

    def __mul__(self, o):
        o = _lift_field(o)
        raw = [Fraction(0)] * 7
        for i, a in enumerate(self):
            for j, b in enumerate(o):
                raw[i + j] += a * b
        # reduce with s^4 = s^2 + 1
        for d in range(6, 3, -1):
            raw[d - 2] += raw[d]
            raw[d - 4] += raw[d]
            raw[d] = Fraction(0)
        return FieldElt(raw[:4])

    __rmul__ = __mul__

    def inv(self):
        # solve self * x = 1 by Gaussian elimination on the 4x4 system
        cols = [self * FieldElt([1 if i == j else 0 for i in range(4)])
                for j in range(4)]
        A = [[cols[j][i] for j in range(4)] + [Fraction(1 if i == 0 else 0)]
             for i in range(4)]
        for p in range(4):
            piv = next(r for r in range(p, 4) if A[r][p] != 0)
            A[p], A[piv] = A[piv], A[p]
            inv = 1 / A[p][p]
            A[p] = [v * inv for v in A[p]]
            for r in range(4):
                if r != p and A[r][p] != 0:
                    f = A[r][p]
                    A[r] = [v - f * w for v, w in zip(A[r], A[p])]
        return FieldElt([A[i][4] for i in range(4)])

    def __truediv__(self, o):
        return self * _lift_field(o).inv()

    def __rtruediv__(self, o):
        return _lift_field(o) * self.inv()

    def is_zero(self) -> bool:
        return all(a == 0 for a in self)

    def to_float(self) -> float:
        s = float(mpmath.sqrt(mpmath.phi))
        return float(sum(float(a) * s ** i for i, a in enumerate(self)))


def _lift_field(v):
    if isinstance(v, FieldElt):
        return v
    return FieldElt([Fraction(v), 0, 0, 0])


F_S = FieldElt([0, 1, 0, 0])  # sqrt(phi)
F_PHI = F_S * F_S
F_ELL = F_PHI - 1  # 1/phi = phi - 1
F_OMEGA = F_PHI - F_S
F_RB = F_OMEGA * F_S
F_RC = (1 - F_OMEGA) * F_S
F_B = (1 - F_RB) / F_RC
F_A = 1 - F_B
F_INV_S = F_S * F_S * F_S - F_S  # 1/s since s(s^3 - s) = s^4 - s^2 = 1


def _field_vertices() -> list:
    """Exact polytope vertices and objective values in the number field."""
    coeff = {"x_A": F_RB, "x_B": F_RB, "x_C": F_RC}
    names = ["x_A", "x_B", "x_C"]
    verts = []
    seen = set()
    for fixed in itertools.combinations(names, 2):
        free = [n for n in names if n not in fixed][0]
        for vals in itertools.product((0, 1), repeat=2):
            point = dict(zip(fixed, vals))
            rem = 1 - sum(coeff[n] * point[n] for n in fixed)
            point[free] = rem / coeff[free]
            fv = {n: _lift_field(point[n]).to_float() for n in names}
            if any(fv[n] < -1e-12 or fv[n] > 1 + 1e-12 for n in names):
                continue
            key = tuple(round(fv[n], 12) for n in names)
            if key in seen:
                continue
            seen.add(key)
            x_A, x_B, x_C = (_lift_field(point[n]) for n in names)
            slack = 1 - x_B - x_A
            pos = slack if slack.to_float() > 1e-12 else _lift_field(0)
            val = F_ELL + 2 * (1 - x_C) * (1 - F_ELL * x_A) \
                + 2 * F_A * F_ELL * (1 - x_B) + 2 * F_A * pos
            verts.append((point, val))
    verts.sort(key=lambda t: t[1].to_float())
    return verts


def rational_vertex_bound(c: GoldenConstants, surplus=0) -> Fraction:
    """Vertex minimum of the opening polytope built from the instance's own
    rational constants r_B = t_B/k, r_C = t_C/k; exact, and a valid lower
    bound on the cost of any solution opening k + surplus*k facilities."""
    rB = Fraction(c.t_B, c.k)
    rC = Fraction(c.t_C, c.k)
    ell, a = c.ell_q, c.a_q
    coeff = {"x_A": rB, "x_B": rB, "x_C": rC}
    rhs = 1 + Fraction(surplus)
    names = ["x_A", "x_B", "x_C"]
    best = None
    for fixed in itertools.combinations(names, 2):
        free = [n for n in names if n not in fixed][0]
        for vals in itertools.product((Fraction(0), Fraction(1)), repeat=2):
            point = dict(zip(fixed, vals))
            rem = rhs - sum(coeff[n] * point[n] for n in fixed)
            point[free] = rem / coeff[free]
            if any(not (0 <= point[n] <= 1) for n in names):
                continue
            x_A, x_B, x_C = point["x_A"], point["x_B"], point["x_C"]
            val = ell + 2 * (1 - x_C) * (1 - ell * x_A) \
                + 2 * a * ell * (1 - x_B) + 2 * a * max(1 - x_B - x_A, 0)
            if best is None or val < best:
                best = val
    return best


def verify_gap_identities() -> dict:
    """Exact checks in Q(sqrt(phi)): the defining quadratic of phi, the
    four-way tie of the minimizing vertices at sqrt(phi), the odd vertex
    out, and the facility / cost ratio identities."""
    verts = _field_vertices()
    ties = [v for _, v in verts if (v - F_S).is_zero()]
    odd = [v for _, v in verts if not (v - F_S).is_zero()]
    v5_target = 3 * F_ELL + 2 * F_INV_S - 2  # 3/phi + 2/sqrt(phi) - 2
    D1 = (2 - F_ELL) + 2 * F_A * F_ELL
    sqrt_phi_50 = mpmath.nstr(mpmath.sqrt(mpmath.phi), 50)
    min50 = _field_eval_50(verts[0][1])
    return {
        "phi_quadratic": (F_PHI * F_PHI - F_PHI - 1).is_zero(),
        "n_vertices": len(verts),
        "n_at_sqrt_phi": len(ties),
        "odd_vertex_value_ok": len(odd) == 1 and (odd[0] - v5_target).is_zero(),
        "min_is_sqrt_phi": (verts[0][1] - F_S).is_zero(),
        "facility_ratio_is_omega": (F_RB / (F_RB + F_RC) - F_OMEGA).is_zero(),
        "cost_ratio_is_omega": (F_ELL / D1 - F_OMEGA).is_zero(),
        "sqrt_phi_50_digits": sqrt_phi_50,
        "min_value_50_digits": min50,
        "min_matches_50_digits": min50 == sqrt_phi_50,
    }


def _field_eval_50(elt: FieldElt) -> str:
    s = mpmath.sqrt(mpmath.phi)
    total = mpmath.mpf(0)
    for i, a in enumerate(elt):
        total += mpmath.mpf(a.numerator) / mpmath.mpf(a.denominator) * s ** i
    return mpmath.nstr(total, 50)


# --- brute force ------------------------------------------------------------


def _scan_combos(combos, rows, u, prune, shared):
    """Scan an iterable of index tuples, pruning against a shared bound.

    ``shared`` is a single-element list holding the best cost seen by any
    worker; it only ever decreases, so stale reads just weaken the prune.
    """
    best_cost = math.inf
    best_subset = None
    for combo in combos:
        sub = rows[:, combo].min(axis=1)
        bound = min(best_cost, shared[0])
        if prune:
            acc = 0.0
            ok = True
            for w, d in zip(u, sub):
                acc += w * d
                if acc >= bound:
                    ok = False
                    break
            if ok:
                best_cost = acc
                best_subset = combo
                shared[0] = min(shared[0], acc)
        else:
            cost = float((u * sub).sum())
            if cost < best_cost:
                best_cost = cost
                best_subset = combo
                shared[0] = min(shared[0], cost)
    return best_cost, best_subset


def brute_force_opt(inst: MetricInstance, k: int = None, budget: int = None,
                    prune: bool = True, jobs: int = 1) -> tuple:
    """Exact optimum over all k-subsets of the facilities.

    The float scan finds the argmin (with per-client early abort when
    pruning); the winner is re-costed in exact arithmetic.  With ``jobs`` > 1
    the chunks (split on the first facility index) share the incumbent cost
    as a pruning bound and the reduction breaks ties lexicographically;
    exact float-cost ties across chunks may resolve either way.
    """
    k = inst.k if k is None else k
    fac = sorted(inst.facilities)
    total = math.comb(len(fac), k)
    if budget is not None and total > budget:
        raise ValueError(f"{total} subsets exceed the budget {budget}")
    D = inst.dist_array()
    u = np.array([float(inst.demand(j)) for j in inst.clients])
    rows = D[np.ix_(inst.clients, fac)]
    shared = [math.inf]
    n = len(fac)
    if jobs <= 1:
        results = [_scan_combos(itertools.combinations(range(n), k),
                                rows, u, prune, shared)]
    else:
        def chunk(first):
            rest = itertools.combinations(range(first + 1, n), k - 1)
            return [(first,) + tail for tail in rest]

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda f: _scan_combos(chunk(f), rows, u, prune, shared),
                range(n - k + 1)))
    best_cost, best_subset = min(
        (r for r in results if r[1] is not None),
        key=lambda r: (r[0], r[1]))
    chosen = frozenset(fac[i] for i in best_subset)
    exact = connection_cost(inst, OpenSet(chosen))
    return OpenSet(chosen), exact
