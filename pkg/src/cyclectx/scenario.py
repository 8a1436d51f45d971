"""Theory-independent contextuality framework.

A measurement scenario is a finite set of measurements, a family of maximal
contexts (sets of jointly measurable measurements), and an outcome label set.
A behavior attaches a probability distribution over joint outcomes to every
context; its possibilistic collapse keeps only the supports. A possibilistic
behavior is logically contextual when some possible joint outcome admits no
global outcome assignment that stays possible in every context.

The types admit arbitrary finite scenarios, but everything in this package
is exercised on n-cycle scenarios (contexts {i, i+1} plus the closing pair
{n, 1}) with binary outcomes. Outcome tuples are always keyed by the
context's measurements in ascending label order, so the closing context is
stored as the ordered pair (1, n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

Context = tuple[int, ...]
OutcomeTuple = tuple[int, ...]

ENUMERATION_GUARD = 2**24
POSSIBILITY_EPS = 1e-9


class ScenarioError(ValueError):
    """Scenario or behavior structure violates an invariant."""


class EnumerationLimitError(RuntimeError):
    """The assignment space is too large to enumerate exhaustively."""


@dataclass(frozen=True)
class Scenario:
    measurements: tuple[int, ...]
    contexts: tuple[Context, ...]
    outcomes: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        mset = set(self.measurements)
        if len(mset) != len(self.measurements):
            raise ScenarioError("duplicate measurement labels")
        for c in self.contexts:
            if tuple(sorted(c)) != c:
                raise ScenarioError(f"context {c} must be stored in ascending order")
            if not set(c) <= mset:
                raise ScenarioError(f"context {c} is not a subset of the measurement set")
        for c1 in self.contexts:
            for c2 in self.contexts:
                if c1 != c2 and set(c1) <= set(c2):
                    raise ScenarioError(f"context {c1} is contained in {c2}; contexts must be maximal")

    @property
    def n(self) -> int:
        return len(self.measurements)

    def tuples(self, context: Context) -> list[OutcomeTuple]:
        return list(itertools.product(self.outcomes, repeat=len(context)))


@dataclass(frozen=True)
class Behavior:
    scenario: Scenario
    tables: Mapping[Context, Mapping[OutcomeTuple, float]]

    def __post_init__(self):
        s = self.scenario
        if set(self.tables) != set(s.contexts):
            raise ScenarioError("behavior must carry exactly one table per context")
        for c, table in self.tables.items():
            total = 0.0
            for t, p in table.items():
                if len(t) != len(c):
                    raise ScenarioError(f"tuple {t} has wrong arity for context {c}")
                if p < -1e-15 or p > 1 + 1e-12:
                    raise ScenarioError(f"probability {p} outside [0,1] in context {c}")
                total += p
            if abs(total - 1.0) > 1e-12:
                raise ScenarioError(f"table for context {c} sums to {total}, not 1")


@dataclass(frozen=True)
class PossibilisticBehavior:
    scenario: Scenario
    supports: Mapping[Context, frozenset[OutcomeTuple]]
    # Annotations set by generators; not part of support equality.
    kind: str | None = field(default=None, compare=False)
    required: tuple[Context, OutcomeTuple] | None = field(default=None, compare=False)

    def __post_init__(self):
        s = self.scenario
        if set(self.supports) != set(s.contexts):
            raise ScenarioError("supports must cover exactly the contexts")
        for c, sup in self.supports.items():
            if not sup:
                raise ScenarioError(f"context {c} has empty support")
            for t in sup:
                if len(t) != len(c):
                    raise ScenarioError(f"tuple {t} has wrong arity for context {c}")

    def possible(self, context: Context, t: OutcomeTuple) -> bool:
        return t in self.supports[context]

    def indicator_behavior(self) -> Behavior:
        """Uniform distribution over each context's support."""
        tables = {}
        for c in self.scenario.contexts:
            sup = sorted(self.supports[c])
            tables[c] = {t: 1.0 / len(sup) for t in sup}
        return Behavior(self.scenario, tables)


@dataclass(frozen=True)
class AssignmentFate:
    assignment: OutcomeTuple          # values in measurement-label order
    killed_by: Context


@dataclass(frozen=True)
class Witness:
    context: Context
    outcome_tuple: OutcomeTuple
    fates: tuple[AssignmentFate, ...]


@dataclass(frozen=True)
class ContextualityVerdict:
    contextual: bool
    witness: Witness | None


@dataclass(frozen=True)
class ChainConflict:
    context: Context
    fixed: Mapping[int, int]


@dataclass(frozen=True)
class ChainResult:
    forced: Mapping[int, int]                 # includes the seed
    steps: tuple[tuple[int, int], ...]        # (measurement, value) in forcing order
    conflict: ChainConflict | None

    @property
    def conflicted(self) -> bool:
        return self.conflict is not None


def make_cycle_scenario(n: int) -> Scenario:
    """n binary measurements with contexts {i, i+1} for i < n plus {n, 1}."""
    if n < 3:
        raise ScenarioError(f"a cycle needs at least 3 measurements, got {n}")
    contexts = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    return Scenario(tuple(range(1, n + 1)), tuple(contexts))


def closing_context(s: Scenario) -> Context | None:
    """The cycle-closing context (1, n), if the scenario has one."""
    c = (1, s.n)
    return c if c in s.contexts and s.n > 2 else None


def marginal(table: Mapping[OutcomeTuple, float], context: Context,
             sub: Context) -> dict[OutcomeTuple, float]:
    """Marginal of a context table onto a subset of its measurements."""
    idx = [context.index(m) for m in sub]
    out: dict[OutcomeTuple, float] = {}
    for t, p in table.items():
        key = tuple(t[i] for i in idx)
        out[key] = out.get(key, 0.0) + p
    return out


def check_no_disturbance(b: Behavior, tol: float = 1e-12) -> bool:
    """Marginals on every context overlap agree entrywise within tol."""
    s = b.scenario
    for c1, c2 in itertools.combinations(s.contexts, 2):
        shared = tuple(sorted(set(c1) & set(c2)))
        if not shared:
            continue
        m1 = marginal(b.tables[c1], c1, shared)
        m2 = marginal(b.tables[c2], c2, shared)
        for t in set(m1) | set(m2):
            if abs(m1.get(t, 0.0) - m2.get(t, 0.0)) > tol:
                return False
    return True


def possibilistic_collapse(b: Behavior, eps: float = POSSIBILITY_EPS) -> PossibilisticBehavior:
    """Keep the support: a tuple is possible iff its probability exceeds eps.

    eps separates genuine support from floating-point dust; quantum-computed
    zeros land many orders below it, genuine supports well above.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    supports = {
        c: frozenset(t for t, p in table.items() if p > eps)
        for c, table in b.tables.items()
    }
    return PossibilisticBehavior(b.scenario, supports)


def enumerate_global_assignments(s: Scenario) -> Iterator[dict[int, int]]:
    """All outcome assignments to the measurement set, lexicographic order."""
    size = len(s.outcomes) ** s.n
    if size > ENUMERATION_GUARD:
        raise EnumerationLimitError(f"{size} assignments exceed the enumeration guard")
    for values in itertools.product(s.outcomes, repeat=s.n):
        yield dict(zip(s.measurements, values))


def _witness_scan_order(s: Scenario) -> list[Context]:
    closing = closing_context(s)
    if closing is None:
        return list(s.contexts)
    return [closing] + [c for c in s.contexts if c != closing]


def is_logically_contextual(pb: PossibilisticBehavior) -> ContextualityVerdict:
    """Search for a possible tuple none of whose global extensions survives.

    An assignment survives when its restriction to every context is possible.
    Contexts are scanned starting from the cycle-closing one, so on the
    cycle behaviors the reported witness is the tuple the paradox
    post-selects on.
    """
    s = pb.scenario
    size = len(s.outcomes) ** s.n
    if size > ENUMERATION_GUARD:
        raise EnumerationLimitError(f"{size} assignments exceed the enumeration guard")

    pos = {m: k for k, m in enumerate(s.measurements)}
    ctx_idx = {c: [pos[m] for m in c] for c in s.contexts}

    surviving_restrictions: dict[Context, set[OutcomeTuple]] = {c: set() for c in s.contexts}
    for values in itertools.product(s.outcomes, repeat=s.n):
        if all(tuple(values[i] for i in ctx_idx[c]) in pb.supports[c] for c in s.contexts):
            for c in s.contexts:
                surviving_restrictions[c].add(tuple(values[i] for i in ctx_idx[c]))

    for c in _witness_scan_order(s):
        for t in sorted(pb.supports[c]):
            if t in surviving_restrictions[c]:
                continue
            # every extension of t dies somewhere; record where
            fates = []
            free = [m for m in s.measurements if m not in c]
            for rest in itertools.product(s.outcomes, repeat=len(free)):
                assignment = dict(zip(c, t))
                assignment.update(zip(free, rest))
                full = tuple(assignment[m] for m in s.measurements)
                killer = None
                for c2 in s.contexts:
                    if tuple(full[i] for i in ctx_idx[c2]) not in pb.supports[c2]:
                        killer = c2
                        break
                assert killer is not None
                fates.append(AssignmentFate(full, killer))
            return ContextualityVerdict(True, Witness(c, t, tuple(fates)))
    return ContextualityVerdict(False, None)


def propagate_chain(pb: PossibilisticBehavior, seed_measurement: int,
                    seed_value: int) -> ChainResult:
    """Unit propagation of forced outcome values along the contexts.

    Starting from the seeded value, whenever the support of some context
    restricted to the currently fixed values leaves a single option for an
    unfixed measurement, that value is forced. Stops at a fixpoint, or at
    the first context whose restricted support becomes empty.
    """
    s = pb.scenario
    if seed_measurement not in s.measurements:
        raise ScenarioError(f"unknown measurement {seed_measurement}")
    fixed: dict[int, int] = {seed_measurement: seed_value}
    steps: list[tuple[int, int]] = [(seed_measurement, seed_value)]
    changed = True
    while changed:
        changed = False
        for c in s.contexts:
            allowed = [
                t for t in pb.supports[c]
                if all(m not in fixed or t[k] == fixed[m] for k, m in enumerate(c))
            ]
            if not allowed:
                return ChainResult(dict(fixed), tuple(steps), ChainConflict(c, dict(fixed)))
            for k, m in enumerate(c):
                if m in fixed:
                    continue
                vals = {t[k] for t in allowed}
                if len(vals) == 1:
                    v = vals.pop()
                    fixed[m] = v
                    steps.append((m, v))
                    changed = True
    return ChainResult(dict(fixed), tuple(steps), None)


def supports_within(inner: PossibilisticBehavior, outer: PossibilisticBehavior) -> bool:
    """True iff every tuple possible in ``inner`` is possible in ``outer``."""
    if inner.scenario.contexts != outer.scenario.contexts:
        raise ScenarioError("behaviors live on different scenarios")
    return all(inner.supports[c] <= outer.supports[c] for c in inner.scenario.contexts)


# --- serialization ---------------------------------------------------------

def _ctx_key(c: Context) -> str:
    return ",".join(str(i) for i in c)


def _tuple_key(t: OutcomeTuple) -> str:
    return ",".join(str(v) for v in t)


def behavior_to_doc(b: Behavior) -> dict:
    s = b.scenario
    return {
        "n": s.n,
        "contexts": [list(c) for c in s.contexts],
        "tables": {
            _ctx_key(c): {_tuple_key(t): float(b.tables[c][t]) for t in sorted(b.tables[c])}
            for c in s.contexts
        },
    }


def possibilistic_to_doc(pb: PossibilisticBehavior) -> dict:
    s = pb.scenario
    doc: dict = {
        "n": s.n,
        "contexts": [list(c) for c in s.contexts],
        "tables": {
            _ctx_key(c): {_tuple_key(t): int(t in pb.supports[c]) for t in s.tuples(c)}
            for c in s.contexts
        },
    }
    if pb.kind is not None:
        doc["kind"] = pb.kind
    return doc


def behavior_from_doc(doc: Mapping) -> Behavior:
    contexts = tuple(tuple(c) for c in doc["contexts"])
    n = int(doc["n"])
    s = Scenario(tuple(range(1, n + 1)), contexts)
    tables = {}
    for ck, table in doc["tables"].items():
        c = tuple(int(x) for x in ck.split(","))
        tables[c] = {tuple(int(x) for x in tk.split(",")): float(p) for tk, p in table.items()}
    return Behavior(s, tables)
