"""Worst-case scenario for a fixed first-stage selection.

The adversary's problem is solved through the dual of the recovery LP: fix
the dual of the kept-items row (``beta``), fix one quota dual per part
(``alpha_j``), and the attack within each part becomes a "pick the largest
gains" problem. Candidate values for ``beta`` and ``alpha_j`` are the
breakpoints of the piecewise-linear dual objective, and a DP spreads the
attack budget over the parts.

Values are exact: integral selections give integers, fractional ones
(relaxation evaluation) give ``Fraction``s. The ``(P - k) * beta`` term is
added once for the whole instance, never per part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Instance, InstanceError, Scenario, check_selection, is_integral, scaled
from .incremental import DEFAULT_ENUMERATION_LIMIT, EnumerationLimitError, inc_solve


def pos(v):
    return v if v > 0 else 0


@dataclass(frozen=True)
class CutCandidate:
    beta: int
    alpha: tuple

    def key(self):
        return (self.beta, self.alpha)


@dataclass(frozen=True)
class AdvResult:
    value: object
    beta: int
    alpha: tuple
    budget: tuple
    scenario: Scenario

    @property
    def candidate(self) -> CutCandidate:
        return CutCandidate(self.beta, self.alpha)


# ---------------------------------------------------------------------------
# candidate sets


def beta_candidates(instance: Instance) -> tuple:
    """Nonnegative differences of all nominal and raised costs, plus 0."""
    _, lo, dev = instance.arrays
    values = np.unique(np.concatenate([lo, lo + dev]))
    diff = np.subtract.outer(values, values).ravel()
    return tuple(int(b) for b in np.unique(np.concatenate([diff[diff >= 0], [0]])))


def alpha_candidates(instance: Instance, j: int, beta: int) -> tuple:
    lo = [instance.c_lower[i] for i in instance.parts[j]]
    hi = [instance.c_lower[i] + instance.d[i] for i in instance.parts[j]]
    return tuple(sorted(set(lo) | set(hi) | {v - beta for v in lo} | {v - beta for v in hi}))


# ---------------------------------------------------------------------------
# scalar pieces (work with ints or Fractions)


def _gain_terms(instance, x, items, alpha, beta):
    brackets, gains = [], []
    for i in items:
        a = alpha + x[i] * beta - instance.c_lower[i]
        b = pos(a)
        brackets.append(b)
        gains.append(b - pos(a - instance.d[i]))
    return brackets, gains


def _top_gains(items, gains, budget):
    order = sorted(range(len(items)), key=lambda t: (-gains[t], items[t]))
    chosen = [t for t in order[:budget] if gains[t] > 0]
    return sum(gains[t] for t in chosen), frozenset(items[t] for t in chosen)


def adv_part(instance: Instance, x, j: int, beta, gamma_j: int, alpha):
    """Per-part adversary value for fixed ``beta``, budget and ``alpha``.

    Returns ``(value, attacked)``; ``attacked`` holds the positive-gain items
    the budget is spent on. Excludes the global ``(P - k) * beta`` term.
    """
    items = instance.parts[j]
    brackets, gains = _gain_terms(instance, x, items, alpha, beta)
    extra, attacked = _top_gains(items, gains, gamma_j)
    return instance.p[j] * alpha - sum(brackets) + extra, attacked


def cut_value(instance: Instance, x, candidate: CutCandidate):
    """Lower bound on ``Adv(x)`` induced by a fixed ``(beta, alpha)``; tight where it was generated."""
    beta = candidate.beta
    total = (instance.P - instance.k) * beta
    all_items, all_gains = [], []
    for j, items in enumerate(instance.parts):
        alpha = candidate.alpha[j]
        brackets, gains = _gain_terms(instance, x, items, alpha, beta)
        total += instance.p[j] * alpha - sum(brackets)
        all_items.extend(items)
        all_gains.extend(gains)
    extra, _ = _top_gains(all_items, all_gains, instance.gamma)
    return total + extra


# ---------------------------------------------------------------------------
# vectorised DP over all beta candidates at once


def _part_values(instance, j, xnum, D, betas, gamma):
    """Best per-part value for every selection, beta and budget 0..min(gamma, |T_j|).

    ``xnum`` holds one selection per row, scaled by ``D`` so fractional
    selections stay integral. Returns shape ``(rows, betas, budgets)``.
    """
    items = np.asarray(instance.parts[j], dtype=np.int64)
    _, lo, dev = instance.arrays
    lo, dev = lo[items] * D, dev[items] * D
    xi = xnum[:, items]
    base = np.concatenate([lo, lo + dev])
    alphas = np.concatenate([np.broadcast_to(base, (len(betas), base.size)),
                             base[None, :] - betas[:, None] * D], axis=1)
    a = (alphas[None, :, :, None] + xi[:, None, None, :] * betas[None, :, None, None]
         - lo[None, None, None, :])
    brackets = np.maximum(a, 0)
    gains = brackets - np.maximum(a - dev, 0)
    base_val = instance.p[j] * alphas[None] - brackets.sum(axis=3)
    cap = min(gamma, len(items))
    ordered = -np.sort(-gains, axis=3)[..., :cap]
    cum = np.concatenate([np.zeros(ordered.shape[:3] + (1,), dtype=np.int64),
                          np.cumsum(ordered, axis=3)], axis=3)
    return (base_val[..., None] + cum).max(axis=2)


def _budget_dp(tables, gamma, rows):
    F = np.zeros((rows, gamma + 1), dtype=np.int64)
    for V in tables:
        cap = V.shape[1] - 1
        new = F + V[:, :1]
        for g in range(1, cap + 1):
            np.maximum(new[:, g:], F[:, :gamma + 1 - g] + V[:, g:g + 1], out=new[:, g:])
        F = new
    return F


def _dp_totals(instance, xnum, D):
    """DP optimum for every row of ``xnum`` and every beta, shape ``(rows, betas)``."""
    betas = np.asarray(beta_candidates(instance), dtype=np.int64)
    m, nb = xnum.shape[0], len(betas)
    tables = [_part_values(instance, j, xnum, D, betas, instance.gamma).reshape(m * nb, -1)
              for j in range(instance.K)]
    F = _budget_dp(tables, instance.gamma, m * nb)
    return betas, (instance.P - instance.k) * betas * D + F[:, instance.gamma].reshape(m, nb)


def _backtrack(instance, x, beta):
    """Deterministic argmax (alpha, budget, attacked items) for a fixed beta."""
    gamma = instance.gamma
    per_part = []
    for j in range(instance.K):
        cap = min(gamma, len(instance.parts[j]))
        best = []
        for g in range(cap + 1):
            top = None
            for alpha in alpha_candidates(instance, j, beta):
                val, attacked = adv_part(instance, x, j, beta, g, alpha)
                if top is None or val > top[0]:
                    top = (val, alpha, attacked)
            best.append(top)
        per_part.append(best)

    F = [[0] * (gamma + 1)]
    for best in per_part:
        prev = F[-1]
        F.append([max(prev[r - g] + best[g][0] for g in range(min(r, len(best) - 1) + 1))
                  for r in range(gamma + 1)])

    budget, alpha, attacked = [0] * instance.K, [0] * instance.K, set()
    r = gamma
    for j in range(instance.K - 1, -1, -1):
        best = per_part[j]
        for g in range(min(r, len(best) - 1) + 1):
            if F[j][r - g] + best[g][0] == F[j + 1][r]:
                break
        budget[j] = g
        alpha[j] = best[g][1]
        attacked |= best[g][2]
        r -= g
    if not any(budget):
        # with no budget spent the alpha choice is still the gamma=0 maximiser
        alpha = [per_part[j][0][1] for j in range(instance.K)]
    return F[instance.K][gamma], tuple(alpha), tuple(budget), Scenario(attacked)


def _dp_optimum(instance, x):
    """``(value, beta)`` of the budget DP, maximised over beta (smallest beta on ties)."""
    fractional = not is_integral(x)
    check_selection(instance, x, fractional=fractional)
    D, num = scaled(x)
    betas, totals = _dp_totals(instance, np.asarray([num], dtype=np.int64), D)
    b = int(np.argmax(totals[0]))
    value = Fraction(int(totals[0, b]), D)
    if value.denominator == 1:
        value = int(value)
    return value, int(betas[b])


def adv_solve(instance: Instance, x) -> AdvResult:
    """Exact ``Adv(x)`` by enumerating beta candidates and a budget DP.

    ``x`` may hold Fractions; the result then evaluates the same formulas at
    the fractional point (relaxation evaluation, not a certified optimum).
    """
    value, beta = _dp_optimum(instance, x)
    inner, alpha, budget, scenario = _backtrack(instance, x, beta)
    assert (instance.P - instance.k) * beta + inner == value, "backtrack disagrees with DP"
    return AdvResult(value, beta, alpha, budget, scenario)


def adversary_value(instance: Instance, x):
    """``Adv(x)`` alone, skipping the extraction of a worst case."""
    return _dp_optimum(instance, x)[0]


def adversary_values(instance: Instance, X) -> np.ndarray:
    """``Adv`` for every row of the 0/1 matrix ``X`` (selections are not re-checked)."""
    X = np.asarray(X, dtype=np.int64)
    return _dp_totals(instance, X.reshape(-1, instance.n), 1)[1].max(axis=1)


# ---------------------------------------------------------------------------
# oracles and fast paths


def iter_scenarios(instance: Instance, limit=DEFAULT_ENUMERATION_LIMIT):
    n, gamma = instance.n, instance.gamma
    total = sum(math.comb(n, s) for s in range(gamma + 1))
    if limit is not None and total > limit:
        raise EnumerationLimitError(f"{total} scenarios exceed the bound {limit}")
    for size in range(gamma + 1):
        for attacked in itertools.combinations(range(n), size):
            yield Scenario(attacked)


def adv_brute(instance: Instance, x, limit=DEFAULT_ENUMERATION_LIMIT) -> AdvResult:
    """Enumerate every attack set of size at most gamma and recover optimally."""
    check_selection(instance, x)
    best, best_s = None, None
    for scenario in iter_scenarios(instance, limit):
        val = inc_solve(instance, x, scenario).value
        if best is None or val > best:
            best, best_s = val, scenario
    return AdvResult(best, None, None, None, best_s)


def adv_k0(instance: Instance, x) -> int:
    """Without recovery the adversary raises the largest deviations among selected items."""
    if instance.k != 0:
        raise InstanceError("adv_k0 requires k = 0")
    check_selection(instance, x)
    chosen = [i for i in range(instance.n) if x[i]]
    devs = sorted((instance.d[i] for i in chosen), reverse=True)
    return sum(instance.c_lower[i] for i in chosen) + sum(devs[:instance.gamma])


def full_budget_scenario(instance: Instance, scenario: Scenario) -> Scenario:
    """Pad an attack to exactly ``min(gamma, n)`` items, lowest indices first.

    Raising more costs never lowers ``Inc``, so a padded worst case stays a
    worst case and dominates the unpadded one for every other selection.
    """
    attacked = set(scenario.attacked)
    for i in range(instance.n):
        if len(attacked) >= instance.gamma:
            break
        attacked.add(i)
    return Scenario(attacked)
