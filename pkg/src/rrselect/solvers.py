"""Exact solvers for the recoverable robust problem.

``solve_m1`` grows a pool of attack scenarios, ``solve_m2`` a pool of dual
candidates ``(beta, alpha)``. Both alternate an exact master over the pool
(lower bound) with the exact adversary at the master's selection (upper
bound) and stop when the two bounds are equal.

The master enumerates every first-stage selection. Each pool member is
evaluated once over the whole enumeration with numpy and folded into a
running worst-case column, so an iteration costs one vectorised pass.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .adversary import (CutCandidate, adv_brute, adv_solve, adversary_values, alpha_candidates,
                        beta_candidates, full_budget_scenario, iter_scenarios)
from .core import Instance, Scenario, require_valid
from .incremental import DEFAULT_ENUMERATION_LIMIT, EnumerationLimitError, count_first_stage

_CHUNK = 1 << 15


def _top_sum(values, count):
    """Row-wise sum of the ``count`` largest entries (entries are >= 0)."""
    width = values.shape[1]
    if count <= 0 or width == 0:
        return np.zeros(values.shape[0], dtype=np.int64)
    if count >= width:
        return values.sum(axis=1)
    part = np.partition(values, width - count, axis=1)
    return part[:, width - count:].sum(axis=1)


class FirstStageSpace:
    """All quota-feasible selections, as per-part choice indices.

    Row ``r`` of ``choice`` holds, for every part, the index of its local
    combination; rows follow lexicographic order of per-part combinations.
    """

    def __init__(self, instance: Instance, limit=DEFAULT_ENUMERATION_LIMIT):
        total = count_first_stage(instance)
        if limit is not None and total > limit:
            raise EnumerationLimitError(f"{total} first-stage solutions exceed the bound {limit}")
        self.instance = instance
        self.size = total
        self.local = []      # per part: (options, m) 0/1 matrix over the part's items
        for part, pj in zip(instance.parts, instance.p):
            combos = list(itertools.combinations(range(len(part)), pj))
            mat = np.zeros((len(combos), len(part)), dtype=np.int64)
            for r, combo in enumerate(combos):
                mat[r, list(combo)] = 1
            self.local.append(mat)
        shape = [m.shape[0] for m in self.local]
        self.choice = np.stack(np.unravel_index(np.arange(total), shape), axis=1) \
            if instance.K else np.zeros((1, 0), dtype=np.int64)
        C, _, _ = instance.arrays
        self.first_stage = self._per_part_sum(
            [mat @ C[list(part)] for mat, part in zip(self.local, instance.parts)])

    def _per_part_sum(self, tables):
        out = np.zeros(self.size, dtype=np.int64)
        for j, table in enumerate(tables):
            out += table[self.choice[:, j]]
        return out

    def vector(self, row) -> tuple:
        x = [0] * self.instance.n
        for j, part in enumerate(self.instance.parts):
            for local, item in zip(self.local[j][self.choice[row, j]], part):
                x[item] = int(local)
        return tuple(x)

    def matrix(self, rows) -> np.ndarray:
        """0/1 selections for the given rows, one per row."""
        rows = np.asarray(rows)
        X = np.zeros((len(rows), self.instance.n), dtype=np.int64)
        for j, part in enumerate(self.instance.parts):
            X[:, list(part)] = self.local[j][self.choice[rows, j]]
        return X

    def _chunks(self):
        for start in range(0, self.size, _CHUNK):
            yield slice(start, min(start + _CHUNK, self.size))

    def inc_values(self, costs) -> np.ndarray:
        """``Inc(x, costs)`` for every selection: ``c.x`` minus the ``k`` best swap savings."""
        inst = self.instance
        costs = np.asarray(costs, dtype=np.int64)
        sel_cost, savings = [], []
        for mat, part in zip(self.local, inst.parts):
            c = costs[list(part)]
            sel_cost.append(mat @ c)
            pj = int(mat[0].sum()) if mat.shape[0] else 0
            width = min(pj, len(part) - pj)
            sav = np.zeros((mat.shape[0], width), dtype=np.int64)
            for r, row in enumerate(mat):
                chosen = np.sort(c[row == 1])[::-1]
                other = np.sort(c[row == 0])
                sav[r] = np.maximum(chosen[:width] - other[:width], 0)
            savings.append(sav)
        base = self._per_part_sum(sel_cost)
        out = np.empty(self.size, dtype=np.int64)
        for sl in self._chunks():
            rows = self.choice[sl]
            stacked = np.concatenate([savings[j][rows[:, j]] for j in range(inst.K)], axis=1)
            out[sl] = base[sl] - _top_sum(stacked, inst.k)
        return out

    def cut_values(self, candidate: CutCandidate) -> np.ndarray:
        """Vectorised ``cut_value`` over every selection."""
        inst = self.instance
        _, lo_all, dev_all = inst.arrays
        beta = candidate.beta
        const = (inst.P - inst.k) * beta
        fixed, gains = [], []
        for j, (mat, part) in enumerate(zip(self.local, inst.parts)):
            alpha = candidate.alpha[j]
            const += inst.p[j] * alpha
            lo, dev = lo_all[list(part)], dev_all[list(part)]
            a = alpha + mat * beta - lo[None, :]
            br = np.maximum(a, 0)
            fixed.append(-br.sum(axis=1))
            gains.append(br - np.maximum(a - dev[None, :], 0))
        base = const + self._per_part_sum(fixed)
        out = np.empty(self.size, dtype=np.int64)
        for sl in self._chunks():
            rows = self.choice[sl]
            stacked = np.concatenate([gains[j][rows[:, j]] for j in range(inst.K)], axis=1)
            out[sl] = base[sl] + _top_sum(stacked, inst.gamma)
        return out


class ExhaustiveMaster:
    """``min_x C.x + max_{pool} value(x)``, updated incrementally as the pool grows.

    An empty pool behaves like the nominal scenario.
    """

    def __init__(self, space: FirstStageSpace, kind="scenario"):
        if kind not in ("scenario", "cut"):
            raise ValueError(f"unknown pool kind {kind!r}")
        self.space = space
        self.kind = kind
        self.worst = None
        self.pool = []

    def add(self, item):
        if self.kind == "scenario":
            column = self.space.inc_values(item.costs(self.space.instance))
        else:
            column = self.space.cut_values(item)
        self.worst = column if self.worst is None else np.maximum(self.worst, column)
        self.pool.append(item)

    def solve(self):
        if self.worst is None:
            self.add(Scenario() if self.kind == "scenario" else initial_candidate(self.space.instance))
        total = self.space.first_stage + self.worst
        row = int(np.argmin(total))
        return int(total[row]), self.space.vector(row)


def master_exhaustive(instance: Instance, pool, kind="scenario", limit=DEFAULT_ENUMERATION_LIMIT):
    """One-shot master over a given pool; returns ``(value, x)``."""
    master = ExhaustiveMaster(FirstStageSpace(instance, limit), kind)
    for item in pool:
        master.add(item)
    return master.solve()


def initial_candidate(instance: Instance) -> CutCandidate:
    alpha = []
    for part, pj in zip(instance.parts, instance.p):
        costs = sorted(instance.c_lower[i] for i in part)
        alpha.append(costs[pj - 1] if pj > 0 else 0)
    return CutCandidate(0, tuple(alpha))


# ---------------------------------------------------------------------------
# brute force


SCENARIO_SWEEP_LIMIT = 5 * 10**7
_DP_BATCH = 4096     # selections times beta candidates per batched adversary call
# one attack column costs about as much as this many per-selection adversary calls
SCENARIO_COLUMN_WEIGHT = 16


def _full_budget_attacks(instance):
    return itertools.combinations(range(instance.n), min(instance.gamma, instance.n))


def rec_brute(instance: Instance, adversary="auto", limit=DEFAULT_ENUMERATION_LIMIT):
    """Exact ``Rec`` by enumerating all first-stage selections; returns ``(value, x)``.

    ``adversary`` picks how each worst case is found:

    * ``"scenarios"``: every attack of full size, each evaluated over all
      selections at once (``Inc`` only grows when costs rise, so smaller
      attacks never matter);
    * ``"dp"``: the polynomial adversary per selection, visiting selections
      by increasing nominal total (first-stage cost plus nominal recovery)
      until that lower bound exceeds the incumbent;
    * ``"brute"``: attack enumeration per selection (slowest);
    * ``"auto"``: ``"scenarios"`` when there are few attacks relative to
      selections (``SCENARIO_COLUMN_WEIGHT``) and the sweep stays below
      ``SCENARIO_SWEEP_LIMIT`` cells, else ``"dp"``.

    Ties go to the first selection in lexicographic enumeration order.
    """
    require_valid(instance)
    space = FirstStageSpace(instance, limit)
    if adversary == "auto":
        attacks = math.comb(instance.n, min(instance.gamma, instance.n))
        few = attacks * SCENARIO_COLUMN_WEIGHT <= space.size
        adversary = "scenarios" if few and attacks * space.size <= SCENARIO_SWEEP_LIMIT else "dp"
    if adversary == "scenarios":
        worst = None
        for attacked in _full_budget_attacks(instance):
            column = space.inc_values(Scenario(attacked).costs(instance))
            worst = column if worst is None else np.maximum(worst, column)
        total = space.first_stage + worst
        row = int(np.argmin(total))
        return int(total[row]), space.vector(row)
    # the worst case costs at least the nominal recovery
    bound = space.first_stage + space.inc_values(Scenario().costs(instance))
    order = np.argsort(bound, kind="stable")
    best = None
    if adversary == "dp":
        step = max(1, _DP_BATCH // max(1, len(beta_candidates(instance))))
        for start in range(0, len(order), step):
            rows = order[start:start + step]
            if best is not None:
                rows = rows[bound[rows] <= best[0]]
                if not len(rows):
                    break
            vals = space.first_stage[rows] + adversary_values(instance, space.matrix(rows))
            for row, val in zip(rows.tolist(), vals.tolist()):
                if best is None or (val, row) < best:
                    best = (val, row)
        return int(best[0]), space.vector(best[1])
    if adversary != "brute":
        raise ValueError(f"unknown adversary mode {adversary!r}")
    for row in order:
        if best is not None and bound[row] > best[0]:
            break
        val = int(space.first_stage[row]) + adv_brute(instance, space.vector(int(row)), limit).value
        if best is None or (val, int(row)) < best:
            best = (val, int(row))
    return best[0], space.vector(best[1])


# ---------------------------------------------------------------------------
# iterative methods


@dataclass
class Iteration:
    lower: int
    upper: int
    x: tuple
    generated: object


@dataclass
class SolveLog:
    method: str
    iterations: list = field(default_factory=list)
    status: str = "optimal"
    wall_time: float = 0.0
    pool: list = field(default_factory=list)

    @property
    def lower(self):
        return self.iterations[-1].lower if self.iterations else None

    @property
    def upper(self):
        return min(it.upper for it in self.iterations) if self.iterations else None

    def rows(self):
        for t, it in enumerate(self.iterations, start=1):
            gen = it.generated
            if isinstance(gen, Scenario):
                gen = " ".join(map(str, gen.labels()))
            elif isinstance(gen, CutCandidate):
                gen = f"beta={gen.beta} alpha={list(gen.alpha)}"
            yield {"iteration": t, "lb": it.lower, "ub": it.upper,
                   "x": [i + 1 for i, v in enumerate(it.x) if v], "generated": gen}


@dataclass
class Limits:
    time_limit: float = math.inf
    max_iter: int = 10**9
    enumeration: int = DEFAULT_ENUMERATION_LIMIT


def _generation_loop(instance, limits, kind, method):
    require_valid(instance)
    limits = limits or Limits()
    start = time.monotonic()
    space = FirstStageSpace(instance, limits.enumeration)
    master = ExhaustiveMaster(space, kind)
    seen = set()
    if kind == "scenario":
        first = Scenario()
        seen.add(first.attacked)
    else:
        first = initial_candidate(instance)
        seen.add(first.key())
    master.add(first)
    log = SolveLog(method)
    best_upper, best_x = None, None
    while True:
        lower, x = master.solve()
        adv = adv_solve(instance, x)
        upper = sum(c * v for c, v in zip(instance.C, x)) + adv.value
        if best_upper is None or upper < best_upper:
            best_upper, best_x = upper, x
        if kind == "scenario":
            item = full_budget_scenario(instance, adv.scenario)
            key = item.attacked
        else:
            item = adv.candidate
            key = item.key()
        done = lower == best_upper
        log.iterations.append(Iteration(lower, best_upper, x, None if done else item))
        if done:
            break
        if key in seen:
            raise RuntimeError(f"{method}: generated a pool member twice while LB < UB")
        elapsed = time.monotonic() - start
        if elapsed >= limits.time_limit or len(log.iterations) >= limits.max_iter:
            log.status = "time-limit"
            break
        seen.add(key)
        master.add(item)
    log.wall_time = time.monotonic() - start
    log.pool = list(master.pool)
    return best_upper, best_x, log


def solve_m1(instance: Instance, limits: Limits = None):
    """Scenario generation; returns ``(value, x, log)``.

    Generated scenarios are padded to the full attack budget (still worst
    cases for the master's selection, and stronger for all others).
    """
    return _generation_loop(instance, limits, "scenario", "m1")


def solve_m2(instance: Instance, limits: Limits = None, shortcut=True):
    """Dual-candidate generation; returns ``(value, x, log)``.

    With no attack budget and ``shortcut`` set it solves the nominal-scenario
    master instead, so the log's pool then holds that scenario. Pass
    ``shortcut=False`` when the pool must consist of dual candidates.
    """
    kind = "scenario" if shortcut and instance.gamma == 0 else "cut"
    return _generation_loop(instance, limits, kind, "m2")


def full_scenario_pool(instance: Instance, limit=DEFAULT_ENUMERATION_LIMIT):
    return list(iter_scenarios(instance, limit))


def full_candidate_pool(instance: Instance, limit=DEFAULT_ENUMERATION_LIMIT):
    """Every ``(beta, alpha)`` with beta in B and alpha_j in A_j(beta)."""
    pool = []
    for beta in beta_candidates(instance):
        choices = [alpha_candidates(instance, j, beta) for j in range(instance.K)]
        if limit is not None and len(pool) + math.prod(map(len, choices)) > limit:
            raise EnumerationLimitError(f"candidate pool exceeds the bound {limit}")
        pool.extend(CutCandidate(beta, alpha) for alpha in itertools.product(*choices))
    return pool
