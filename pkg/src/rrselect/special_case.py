"""Polynomial algorithm for two-item parts, one pick per part, gamma = k = 1.

With one attack and one exchange the adversary has two useful moves: raise
the unselected item of the part whose exchange saves the most (strategy I),
or raise a selected item (strategy II). The solver guesses which move is
optimal and the parts that pin down its gain; the remaining parts are then
constrained independently, so the cheapest consistent completion is built
part by part.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import Instance, InstanceError, check_selection
from .adversary import adv_brute, pos
from .incremental import iter_first_stage


@dataclass(frozen=True)
class StrategyAnalysis:
    j_star: int
    b_star: object  # None when K = 1
    i_star: int
    g1: int
    g2: int


class _Pick:
    """One part with a fixed selected item."""

    __slots__ = ("part", "chosen", "exchange", "blocked", "raised", "dev", "nominal", "cost")

    def __init__(self, instance, part, chosen, other):
        lo, dev = instance.c_lower, instance.d
        self.part = part
        self.chosen = chosen
        self.exchange = lo[chosen] - lo[other]               # saving of the nominal swap
        self.blocked = lo[chosen] - lo[other] - dev[other]   # saving once `other` is raised
        self.raised = lo[chosen] + dev[chosen] - lo[other]   # saving once `chosen` is raised
        self.dev = dev[chosen]
        self.nominal = lo[chosen]
        self.cost = instance.C[chosen] + lo[chosen]

    def attack_gain(self, top):
        """Gain of raising the selected item when the best nominal swap saves ``top``."""
        return self.dev - pos(self.raised - top)


def _require_pair(instance):
    if not instance.is_pair_instance():
        raise InstanceError(
            "special-case solver needs |T_j| = 2, p_j = 1 for all parts and gamma = k = 1")


def _options(instance, j):
    a, b = instance.parts[j]
    return (_Pick(instance, j, a, b), _Pick(instance, j, b, a))


def _picks_of(instance, x):
    return [q for j in range(instance.K) for q in _options(instance, j) if x[q.chosen]]


def _argmax(values, skip=None):
    best = None
    for j, v in enumerate(values):
        if j != skip and (best is None or v > values[best]):
            best = j
    return best


def _analyze(picks):
    exch = [q.exchange for q in picks]
    j_star = _argmax(exch)
    b_star = _argmax(exch, skip=j_star)
    top = pos(exch[j_star])
    runner_up = pos(exch[b_star]) if b_star is not None else 0
    g1 = top - max(pos(picks[j_star].blocked), runner_up)
    second = [q.attack_gain(top) for q in picks]
    i_star = _argmax(second)
    return StrategyAnalysis(j_star, b_star, i_star, g1, second[i_star])


def analyze(instance: Instance, x) -> StrategyAnalysis:
    """Parts defining both adversary strategies and their gains (ties: smallest part)."""
    _require_pair(instance)
    check_selection(instance, x)
    return _analyze(_picks_of(instance, x))


def _closed_form(picks):
    a = _analyze(picks)
    inc = sum(q.nominal for q in picks) - pos(max(q.exchange for q in picks))
    return inc + max(a.g1, a.g2)


def _short_form(instance, x):
    # one pick per part, parts of any size: only a selected item or the
    # cheapest unselected item of a part is worth raising
    lo, hi = instance.c_lower, instance.c_upper
    chosen, rest = [], []
    for part in instance.parts:
        chosen.append(next(i for i in part if x[i]))
        rest.append(sorted((i for i in part if not x[i]), key=lambda i: (lo[i], i)))

    def exchange(j, raised=None):
        if not rest[j]:
            return 0
        own = hi[chosen[j]] if raised == chosen[j] else lo[chosen[j]]
        alt = min(hi[i] if i == raised else lo[i] for i in rest[j])
        return pos(own - alt)

    nominal = [exchange(j) for j in range(instance.K)]
    order = sorted(range(instance.K), key=lambda j: -nominal[j])
    base = sum(lo[s] for s in chosen)
    best = base - nominal[order[0]]
    for j in range(instance.K):
        others = next((nominal[m] for m in order if m != j), 0)
        for t in [chosen[j]] + rest[j][:1]:
            extra = instance.d[t] if t == chosen[j] else 0
            best = max(best, base + extra - max(exchange(j, t), others))
    return best


def adv_closed_form(instance: Instance, x) -> int:
    """``Adv(x)`` without enumeration when every quota is 1 and gamma = k = 1.

    Pair instances use the nominal recovery plus the better strategy gain;
    larger parts evaluate the two relevant attacks per part directly.
    """
    if any(pj != 1 for pj in instance.p) or instance.gamma != 1 or instance.k != 1:
        raise InstanceError("closed form needs p_j = 1 for all parts and gamma = k = 1")
    check_selection(instance, x)
    if instance.is_pair_instance():
        return _closed_form(_picks_of(instance, x))
    return _short_form(instance, x)


# ---------------------------------------------------------------------------
# exact solver


def _fill(instance, fixed, admissible):
    """Cheapest admissible pick for every free part; None if a part has none."""
    picks = []
    for j in range(instance.K):
        if j in fixed:
            picks.append(fixed[j])
            continue
        ok = [q for q in _options(instance, j) if admissible(q)]
        if not ok:
            return None
        picks.append(min(ok, key=lambda q: (q.cost, q.chosen)))
    return picks


def _strategy_one(instance):
    """Completions on which raising the unselected item of part j* is optimal.

    j* has the largest nominal swap saving and b* the second largest; with
    both picks fixed, the gain g1 is fixed and every other part only has to
    stay below b*'s saving and keep strategy II from beating g1.
    """
    for j_star, b_star in itertools.permutations(range(instance.K), 2):
        for qj, qb in itertools.product(_options(instance, j_star), _options(instance, b_star)):
            if qb.exchange > qj.exchange:
                continue
            top = pos(qj.exchange)
            g1 = top - max(pos(qj.blocked), pos(qb.exchange))
            if qj.attack_gain(top) > g1 or qb.attack_gain(top) > g1:
                continue
            picks = _fill(instance, {j_star: qj, b_star: qb},
                          lambda q: q.exchange <= qb.exchange and q.attack_gain(top) <= g1)
            if picks is not None:
                yield picks


def _strategy_two(instance):
    """Completions on which raising the selected item of part i* is optimal.

    Strategy I must not win: either raising j*'s partner already kills the
    swap, or some part other than j* offers a swap saving at least
    ``top - g2``. The latter is an "at least one part" condition, enforced by
    switching the single part where that is cheapest.
    """
    K = instance.K
    for j_star, i_star in itertools.product(range(K), repeat=2):
        if j_star == i_star:
            combos = [(q, q) for q in _options(instance, j_star)]
        else:
            combos = itertools.product(_options(instance, j_star), _options(instance, i_star))
        for qj, qi in combos:
            top = pos(qj.exchange)
            g2 = qi.attack_gain(top)
            threshold = top - g2

            def admissible(q, qj=qj, top=top, g2=g2):
                if q.part == qj.part:
                    return q is qj and q.attack_gain(top) <= g2
                return q.exchange <= qj.exchange and q.attack_gain(top) <= g2

            fixed = {j_star: qj, i_star: qi}
            if not all(admissible(q) for q in fixed.values()):
                continue
            picks = _fill(instance, fixed, admissible)
            if picks is None:
                continue
            if pos(qj.blocked) < threshold:
                picks = _force_runner_up(instance, picks, fixed, admissible, j_star, threshold)
                if picks is None:
                    continue
            yield picks


def _force_runner_up(instance, picks, fixed, admissible, j_star, threshold):
    def hits(q):
        return pos(q.exchange) >= threshold

    if any(hits(q) for j, q in enumerate(picks) if j != j_star):
        return picks
    best = None
    for j in range(instance.K):
        if j == j_star or j in fixed:
            continue
        for q in _options(instance, j):
            if admissible(q) and hits(q):
                penalty = (q.cost - picks[j].cost, j, q.chosen)
                if best is None or penalty < best[0]:
                    best = (penalty, j, q)
    if best is None:
        return None
    picks = list(picks)
    picks[best[1]] = best[2]
    return picks


def _vector(instance, picks):
    x = [0] * instance.n
    for q in picks:
        x[q.chosen] = 1
    return tuple(x)


def solve_special(instance: Instance):
    """Exact ``Rec`` for the pair case in O(K^3); returns ``(value, x)``.

    Among equally good selections the one that is lexicographically largest
    as a 0/1 vector (earliest items picked) wins.
    """
    _require_pair(instance)
    if instance.K == 1:
        best = None
        for x in iter_first_stage(instance):
            val = sum(c * v for c, v in zip(instance.C, x)) + adv_brute(instance, x).value
            if best is None or val < best[0]:
                best = (val, x)
        return best

    best = None
    for picks in itertools.chain(_strategy_one(instance), _strategy_two(instance)):
        val = sum(instance.C[q.chosen] for q in picks) + _closed_form(picks)
        x = _vector(instance, picks)
        key = (val, tuple(-v for v in x))
        if best is None or key < best[0]:
            best = (key, val, x)
    return best[1], best[2]
