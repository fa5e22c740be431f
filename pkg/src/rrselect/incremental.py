"""Best recovery of a first-stage selection under known costs.

``Inc(x, c)`` keeps at least ``P - k`` of the first-stage items. Per part the
optimal recovery for a fixed number ``m`` of kept items takes the ``m``
cheapest selected items and the ``p_j - m`` cheapest unselected ones, so a
small knapsack-style DP over parts on the total kept count is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, InstanceError, Scenario, check_selection, labels

INF = math.inf
DEFAULT_ENUMERATION_LIMIT = 10**6


class EnumerationLimitError(RuntimeError):
    """Brute-force enumeration would exceed the configured bound."""


@dataclass(frozen=True)
class IncResult:
    value: int
    recovery: frozenset

    def labels(self):
        return labels(self.recovery)


def resolve_costs(instance: Instance, costs):
    if costs is None:
        return instance.c_lower
    if isinstance(costs, Scenario):
        return costs.costs(instance)
    costs = tuple(costs)
    if len(costs) != instance.n:
        raise InstanceError(f"cost vector has length {len(costs)}, expected n={instance.n}")
    return costs


def _part_table(part, x, c, pj):
    key = lambda i: (c[i], i)
    sel = sorted((i for i in part if x[i]), key=key)
    uns = sorted((i for i in part if not x[i]), key=key)
    table = {}
    for m in range(max(0, pj - len(uns)), pj + 1):
        table[m] = sum(c[i] for i in sel[:m]) + sum(c[i] for i in uns[:pj - m])
    return sel, uns, table


def inc_solve(instance: Instance, x, costs=None) -> IncResult:
    """Exact ``Inc(x, c)``; ``costs`` is a Scenario, a cost vector or None (nominal)."""
    check_selection(instance, x)
    c = resolve_costs(instance, costs)
    need = max(0, instance.P - instance.k)

    tables = []
    dp = {0: 0}
    choices = []
    for part, pj in zip(instance.parts, instance.p):
        sel, uns, table = _part_table(part, x, c, pj)
        tables.append((sel, uns))
        new, choice = {}, {}
        for s in sorted(dp):
            # more kept items first: ties resolve towards leaving x unchanged
            for m in sorted(table, reverse=True):
                t = min(s + m, need)
                val = dp[s] + table[m]
                if val < new.get(t, INF):
                    new[t], choice[t] = val, (s, m)
        dp = new
        choices.append(choice)

    if need not in dp:
        raise InstanceError("no recovery keeps enough first-stage items")
    recovery = []
    state = need
    for j in range(instance.K - 1, -1, -1):
        prev, m = choices[j][state]
        sel, uns = tables[j]
        recovery.extend(sel[:m])
        recovery.extend(uns[:instance.p[j] - m])
        state = prev
    return IncResult(dp[need], frozenset(recovery))


def inc_swap_value(instance: Instance, x, costs=None) -> int:
    """``Inc(x, c)`` through the exchange view: ``c.x`` minus the ``k`` best swaps.

    Within a part the i-th most expensive selected item is paired with the
    i-th cheapest unselected one; the marginal savings are nonincreasing, so
    the best ``k`` positive savings over all parts form an optimal recovery.
    """
    c = resolve_costs(instance, costs)
    savings = []
    for part in instance.parts:
        sel = sorted((c[i] for i in part if x[i]), reverse=True)
        uns = sorted(c[i] for i in part if not x[i])
        savings.extend(a - b for a, b in zip(sel, uns) if a > b)
    savings.sort(reverse=True)
    return sum(c[i] for i in range(instance.n) if x[i]) - sum(savings[:instance.k])


def count_first_stage(instance: Instance) -> int:
    return math.prod(math.comb(len(part), pj) for part, pj in zip(instance.parts, instance.p))


def iter_first_stage(instance: Instance, limit=DEFAULT_ENUMERATION_LIMIT):
    """All quota-feasible 0/1 vectors in lexicographic order of per-part choices."""
    total = count_first_stage(instance)
    if limit is not None and total > limit:
        raise EnumerationLimitError(f"{total} first-stage solutions exceed the bound {limit}")
    local = [list(itertools.combinations(sorted(part), pj))
             for part, pj in zip(instance.parts, instance.p)]
    for combo in itertools.product(*local):
        x = [0] * instance.n
        for chosen in combo:
            for i in chosen:
                x[i] = 1
        yield tuple(x)


def iter_recoveries(instance: Instance, x, limit=DEFAULT_ENUMERATION_LIMIT):
    budget = 2 * instance.k
    for y in iter_first_stage(instance, limit):
        if sum(abs(a - b) for a, b in zip(x, y)) <= budget:
            yield y


def inc_brute(instance: Instance, x, costs=None, limit=DEFAULT_ENUMERATION_LIMIT) -> IncResult:
    """Enumerate ``R(x)``; the first minimiser in enumeration order is returned."""
    check_selection(instance, x)
    c = np.asarray(resolve_costs(instance, costs), dtype=np.int64)
    best, best_y = None, None
    for y in iter_recoveries(instance, x, limit):
        val = int(c @ np.asarray(y))
        if best is None or val < best:
            best, best_y = val, y
    return IncResult(best, frozenset(i for i, v in enumerate(best_y) if v))
