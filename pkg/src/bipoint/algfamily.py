"""The partition-hierarchy rounding family: validity, enumeration, chains,
execution, and aggregate cost bounds.

An algorithm is a vector of opening probabilities p_W, one per partition set
W in {A_1..A_m, B_1..B_m, C_1..C_m}; it samples ceil(p_W |W|) facilities
uniformly from each set.  A chain fixes an m-subset of sets to 1 and assigns
the rest in order, each absorbing as much of the remaining facility mass as
fits, so that the instantiation at any feasible (b, gamma) is a valid vector
with at most one fractional entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .exprs import Const, Expr, Op, Var, clamp01, reduce_ratio
from .instances import BiPointSolution, OpenSet, connection_cost_float
from .partition import FacilityPartition, build_partition, build_stars, \
    class_aggregates, classify_clients
from .rounding import star_round, sr_cost_bound
from .tables import builtin_tables, set_names

# default g-thresholds for the two- and three-level hierarchies
G_M2 = (Fraction(6586, 10000),)
G_M3 = (Fraction(642, 1000), Fraction(833, 1000))

ONE = Fraction(1)


def _size_key(name: str) -> str:
    # |A_t| = |B_t| by padding, both normalized by |C|
    t = name[1:]
    return f"gC{t}" if name[0] == "C" else f"gA{t}"


def set_size(name: str, env) -> Fraction:
    return env[_size_key(name)]


def mass_target(env, m: int):
    """Normalized total mass: sum_t gamma_{A_t} + b."""
    return sum(env[f"gA{t}"] for t in range(1, m + 1)) + env["b"]


def derive_gamma_env(b, gAs) -> dict:
    """Environment from b and gamma_{A_1..m}, with the gamma_{C_t} filled in
    by the size recurrence: C_m takes min(1, gA_m), lower levels take what is
    left, C_1 the remainder."""
    m = len(gAs)
    env = {"b": Fraction(b)}
    for t, g in enumerate(gAs, 1):
        env[f"gA{t}"] = Fraction(g)
    if m == 1:
        env["gC1"] = Fraction(1)
        return env
    gC = {m: min(Fraction(1), env[f"gA{m}"])}
    tail = gC[m]
    for t in range(m - 1, 1, -1):
        gC[t] = min(env[f"gA{t}"], 1 - tail)
        tail += gC[t]
    gC[1] = 1 - tail
    for t, v in gC.items():
        env[f"gC{t}"] = v
    return env


@dataclass
class ValidityReport:
    ok: bool
    violations: list = field(default_factory=list)


def is_valid(values: dict, env: dict, m: int, tol=None) -> ValidityReport:
    """Check the four validity conditions of a parameter vector.

    ``values`` maps set names to probabilities (None marks a parameter whose
    defining formula divided by zero, i.e. an empty set).  Empty sets are
    skipped: their probabilities carry no mass and guard no facility.
    """
    violations = []
    names = set_names(m)
    sizes = {W: set_size(W, env) for W in names}
    nonempty = {W for W in names if sizes[W] > 0}

    exact = all(
        isinstance(v, (Fraction, int))
        for v in list(env.values()) + [values.get(W) for W in nonempty]
        if v is not None
    )
    if tol is None:
        tol = 0 if exact else 1e-9

    def is_one(W):
        v = values.get(W)
        return v is not None and abs(v - 1) <= tol

    for W in nonempty:
        v = values.get(W)
        if v is None:
            violations.append(f"{W}: no value for a nonempty set")
        elif not (-tol <= v <= 1 + tol):
            violations.append(f"{W}: p={v} outside [0,1]")
    if violations:
        return ValidityReport(False, violations)

    lhs = sum(values[W] * sizes[W] for W in nonempty)
    rhs = mass_target(env, m)
    if abs(lhs - rhs) > tol:
        violations.append(f"mass {lhs} != {rhs}")

    for t in range(1, m + 1):
        if f"A{t}" not in nonempty:
            continue
        ok_a = is_one(f"A{t}")
        ok_b = all(is_one(f"B{s}") for s in range(1, t + 1)
                   if f"B{s}" in nonempty)
        ok_c = all(is_one(f"C{s}") for s in range(t, m + 1)
                   if f"C{s}" in nonempty)
        if not (ok_a or ok_b or ok_c):
            violations.append(f"backup property fails at level {t}")

    if "A1" in nonempty and not (is_one("A1") or is_one("B1")):
        violations.append("neither A1 nor B1 fully open")

    return ValidityReport(not violations, violations)


def instantiate(params: dict, env: dict) -> dict:
    """Evaluate chain parameter formulas at a point; zero division marks an
    empty set and yields None."""
    out = {}
    for W, e in params.items():
        try:
            out[W] = e.ev(env)
        except ZeroDivisionError:
            out[W] = None
    return out


def canonical(values: dict, env: dict, m: int) -> tuple:
    """Hashable exact form of a parameter vector, ignoring empty sets."""
    out = []
    for W in set_names(m):
        if set_size(W, env) > 0:
            v = values[W]
            out.append((W, Fraction(v) if not isinstance(v, Fraction) else v))
    return tuple(out)


def enumerate_algm(m: int, env: dict) -> list:
    """All valid parameter vectors with at most one fractional entry.

    The fractional entry, when present, is solved from the mass equation
    with every other parameter fixed to 0 or 1.  Exact rationals throughout;
    deduplicated on the canonical form.
    """
    names = set_names(m)
    sizes = {W: Fraction(set_size(W, env)) for W in names}
    T = Fraction(mass_target(env, m))
    seen = {}

    def consider(values):
        rep = is_valid(values, env, m, tol=0)
        if rep.ok:
            seen.setdefault(canonical(values, env, m), dict(values))

    for bits in itertools.product((Fraction(0), ONE), repeat=len(names)):
        values = dict(zip(names, bits))
        if sum(values[W] * sizes[W] for W in names) == T:
            consider(values)
        for v_idx, V in enumerate(names):
            if sizes[V] == 0:
                continue
            rest = sum(values[W] * sizes[W] for W in names if W != V)
            pv = (T - rest) / sizes[V]
            if 0 <= pv <= 1:
                consider({**values, V: pv})
    return list(seen.values())


# --- chains -----------------------------------------------------------------


def _total_mass_expr(m: int) -> Expr:
    e = Var("b")
    for t in range(1, m + 1):
        e = e + Var(f"gA{t}")
    return e


@dataclass(frozen=True)
class ChainSpec:
    """A start set opened fully plus an ordering that absorbs leftover mass."""

    m: int
    start: tuple  # m set names fixed to 1
    order: tuple  # remaining 2m set names

    def params(self) -> dict:
        """Per-set probability formulas, truncated to [0,1]."""
        out = {W: clamp01(Const(ONE)) for W in self.start}
        cum = Const(Fraction(0))
        for W in self.start:
            cum = cum + Var(_size_key(W))
        total = _total_mass_expr(self.m)
        for W in self.order:
            size = Var(_size_key(W))
            out[W] = clamp01(reduce_ratio(Op("/", total - cum, size)))
            cum = cum + size
        return {W: out[W] for W in set_names(self.m)}

    def breakpoints_b(self, env: dict) -> list:
        """b-values where some parameter formula hits 0 or 1 (gammas fixed)."""
        gA = sum(env[f"gA{t}"] for t in range(1, self.m + 1))
        pts = []
        cum = sum(set_size(W, env) for W in self.start)
        for W in self.order:
            size = set_size(W, env)
            if size > 0:
                # (gA + b - cum)/size in {0, 1}
                pts.extend([cum - gA, cum + size - gA])
            cum += size
        return sorted({p for p in pts if 0 < p < 1})

    def label(self) -> str:
        return f"start={{{','.join(self.start)}}} order=({','.join(self.order)})"


def _structurally_valid(start, m: int) -> bool:
    """Backup properties with only the start sets guaranteed open.

    Opening more prefix sets along the ordering only helps, so checking the
    start set alone covers every piece of the chain.
    """
    s = set(start)
    if "A1" not in s and "B1" not in s:
        return False
    for t in range(1, m + 1):
        if f"A{t}" in s:
            continue
        if all(f"B{u}" in s for u in range(1, t + 1)):
            continue
        if all(f"C{u}" in s for u in range(t, m + 1)):
            continue
        return False
    return True


def generate_chains(m: int) -> list:
    """All structurally valid chains, deduplicated by their formulas."""
    names = set_names(m)
    out = []
    seen = set()
    for start in itertools.combinations(names, m):
        if not _structurally_valid(start, m):
            continue
        rest = [W for W in names if W not in start]
        for order in itertools.permutations(rest):
            chain = ChainSpec(m=m, start=tuple(start), order=tuple(order))
            key = tuple(repr(e) for e in chain.params().values())
            if key not in seen:
                seen.add(key)
                out.append(chain)
    return out


def greedy_cover(chains: list, universe: list) -> list:
    """Smallest-first greedy set cover of sampled valid parameter vectors.

    ``universe`` is a list of (env, canonical_vector) pairs; a chain covers a
    pair when its instantiation at env matches the vector on nonempty sets.
    """
    m = chains[0].m if chains else 0
    covers = []
    for chain in chains:
        params = chain.params()
        got = set()
        for idx, (env, can) in enumerate(universe):
            vals = instantiate(params, env)
            if canonical(vals, env, m) == can:
                got.add(idx)
        covers.append(got)
    uncovered = set(range(len(universe)))
    picked = []
    while uncovered:
        best = max(range(len(chains)),
                   key=lambda i: (len(covers[i] & uncovered), -i))
        gain = covers[best] & uncovered
        if not gain:
            break
        picked.append(chains[best])
        uncovered -= gain
    return picked


def iterative_addition(chains: list, objective, init: list = None) -> list:
    """Grow a chain set by repeatedly adding the chain that most lowers the
    given objective (a callable on chain lists), until no chain improves it."""
    current = list(init or [])
    pool = [c for c in chains if c not in current]
    val = objective(current)
    while pool:
        best_i, best_v = None, val
        for i, c in enumerate(pool):
            v = objective(current + [c])
            if v < best_v - 1e-12:
                best_i, best_v = i, v
        if best_i is None:
            break
        current.append(pool.pop(best_i))
        val = best_v
    return current


# --- execution --------------------------------------------------------------


@dataclass
class ExecutionResult:
    open_set: OpenSet
    counts: dict
    slack: int  # facilities lost to flooring non-integral p_W |W|


def execute(values: dict, part: FacilityPartition, rng) -> ExecutionResult:
    """Sample each partition set according to its probability.

    When p_W |W| is integral (guaranteed for enumerated vectors, since all
    mass but one term is integral) exactly that many facilities open.  A
    non-integral count is floored and reported as slack, keeping the total
    at most k.
    """
    groups = {}
    for t in range(part.m):
        groups[f"A{t+1}"] = part.A[t]
        groups[f"B{t+1}"] = part.B[t]
        groups[f"C{t+1}"] = part.C[t]
    open_fac = set()
    counts = {}
    slack = 0
    for W, members in groups.items():
        if not members:
            counts[W] = 0
            continue
        p = values.get(W)
        if p is None:
            raise ValueError(f"no probability for nonempty set {W}")
        mass = Fraction(p) * len(members)
        n = int(mass)
        if mass != n:
            slack += 1
        counts[W] = n
        if n:
            open_fac.update(rng.sample(sorted(members), n))
    return ExecutionResult(open_set=OpenSet(facilities=frozenset(open_fac)),
                           counts=counts, slack=slack)


# --- aggregate cost bounds --------------------------------------------------


def _min_backup(values: dict, env: dict, x: int):
    """min over s <= x of p_{B_s}, skipping empty sets (vacuous guards)."""
    vals = [values[f"B{s}"] for s in range(1, x + 1)
            if set_size(f"B{s}", env) > 0 and values.get(f"B{s}") is not None]
    return min(vals) if vals else 1


def cost_bound(values: dict, env: dict, g_bounds, m: int, profile: dict):
    """Upper bound on the expected total connection cost of a parameter vector.

    ``g_bounds`` is the threshold list g_0=0 < g_1 < ... < g_m=1; ``profile``
    maps (zone, x, y) to the pair of per-class distance sums (D_1, D_2).
    """
    total = 0
    for (zone, x, y), (d1s, d2s) in profile.items():
        if d1s == 0 and d2s == 0:
            continue
        pA = values[f"A{x}"]
        pZ = values[f"{zone}{y}"]
        q = (1 - pZ) * (1 - pA)
        if zone == "B":
            if x == 1:
                k = q
            elif y <= x:
                assert g_bounds[x - 1] > 0, "1/g bound needs a positive threshold"
                k = q / g_bounds[x - 1]
            else:
                assert 2 <= x <= m - 1
                assert g_bounds[x - 1] > 0, "1/g bound needs a positive threshold"
                minb = _min_backup(values, env, x)
                k = q * (1 + (1 / g_bounds[x - 1] - 1) * (1 - minb))
        else:
            minb = _min_backup(values, env, x)
            gx = g_bounds[x]
            k = q * (gx + (1 - gx) * (1 - minb))
        total += pZ * d2s + (1 - pZ) * d1s + k * (d1s + d2s)
    return total


# --- end-to-end best-of -----------------------------------------------------


@dataclass
class BestOfResult:
    open_set: OpenSet
    cost: float
    label: str
    records: list  # (label, cost, n_open) per attempted algorithm


def param_env(sol: BiPointSolution, part: FacilityPartition) -> dict:
    env = {"b": Fraction(sol.b)}
    for t in range(part.m):
        env[f"gA{t+1}"] = part.gammaA[t]
        env[f"gC{t+1}"] = part.gammaC[t]
    return env


def best_of(sol: BiPointSolution, eps: float, rng,
            thresholds: dict = None) -> BestOfResult:
    """Run the star-rounding algorithm plus every built-in chain and keep the
    cheapest open set."""
    thresholds = thresholds or {2: G_M2, 3: G_M3}
    inst = sol.instance
    records = []

    sr = star_round(sol, eps, rng)
    best = (connection_cost_float(inst, sr.facilities), "SR", sr)
    records.append(("SR", best[0], len(sr)))

    forest = build_stars(sol)
    tables = builtin_tables()
    if forest.has_secondary:
        plans = [("alg1", None), ("alg2", thresholds[2]),
                 ("alg3", thresholds[3]), ("uniform", thresholds[2])]
        for name, th in plans:
            m, chains = tables[name]
            if th is not None and len(th) != m - 1:
                continue
            try:
                part = build_partition(sol, forest, th or ())
            except ValueError:
                continue
            env = param_env(sol, part)
            for ci, params in enumerate(chains):
                values = instantiate(params, env)
                if not is_valid(values, env, m).ok:
                    continue
                res = execute(values, part, rng)
                if not res.open_set.facilities:
                    continue
                cost = connection_cost_float(inst, res.open_set.facilities)
                label = f"{name}[{ci}]"
                records.append((label, cost, len(res.open_set)))
                if cost < best[0]:
                    best = (cost, label, res.open_set)

    return BestOfResult(open_set=best[2], cost=best[0], label=best[1],
                        records=records)


def partition_report(sol: BiPointSolution, g_thresholds) -> dict:
    """Partition an instance and summarize levels, gammas and client classes."""
    forest = build_stars(sol)
    part = build_partition(sol, forest, g_thresholds)
    classified = classify_clients(sol, forest, part)
    agg = class_aggregates(sol.instance, classified, part.m)
    return {
        "m": part.m,
        "sizes": part.sizes(),
        "gammaA": [str(g) if g is not None else None for g in part.gammaA],
        "gammaC": [str(g) if g is not None else None for g in part.gammaC],
        "classes": {
            f"{z}{x}{y}": {"D1": float(v[0]), "D2": float(v[1])}
            for (z, x, y), v in agg.items() if v[0] or v[1]
        },
    }
