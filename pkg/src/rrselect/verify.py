"""Oracle-equivalence checks: every fast routine against its enumeration oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .adversary import adv_brute, adv_k0, adv_solve
from .generators import random_pair, random_scenario, random_selection, random_small
from .incremental import inc_brute, inc_solve, inc_swap_value
from .solvers import rec_brute, solve_m1, solve_m2
from .special_case import adv_closed_form, solve_special


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    mismatches: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self):
        return not self.mismatches

    def record(self, tag, got, expected):
        self.cases += 1
        if got != expected:
            self.mismatches.append(f"{tag}: got {got}, expected {expected}")


def check_adversary(count, seed=0):
    res = CheckResult("adversary")
    for s in range(seed, seed + count):
        inst = random_small(s)
        x = random_selection(inst, s)
        adv = adv_solve(inst, x)
        res.record(f"seed {s}", adv.value, adv_brute(inst, x).value)
        res.record(f"seed {s} worst case", inc_solve(inst, x, adv.scenario).value, adv.value)
        if inst.k == 0:
            res.record(f"seed {s} no recovery", adv_k0(inst, x), adv.value)
    return res


def check_incremental(count, seed=0):
    res = CheckResult("incremental")
    for s in range(seed, seed + count):
        inst = random_small(s)
        x = random_selection(inst, s)
        scen = random_scenario(inst, s)
        value = inc_solve(inst, x, scen).value
        res.record(f"seed {s}", value, inc_brute(inst, x, scen).value)
        res.record(f"seed {s} swap form", inc_swap_value(inst, x, scen), value)
    return res


def check_special(count, seed=0):
    res = CheckResult("special case")
    for s in range(seed, seed + count):
        inst = random_pair(s)
        res.record(f"seed {s}", solve_special(inst)[0], rec_brute(inst)[0])
        x = random_selection(inst, s)
        res.record(f"seed {s} closed form", adv_closed_form(inst, x), adv_solve(inst, x).value)
    return res


def check_generation(count, seed=0):
    res = CheckResult("generation methods")
    for s in range(seed, seed + count):
        inst = random_small(s)
        exact = rec_brute(inst)[0]
        for name, solve in (("m1", solve_m1), ("m2", solve_m2)):
            value, _, log = solve(inst)
            res.record(f"seed {s} {name}", value, exact)
            lows = [it.lower for it in log.iterations]
            if lows != sorted(lows) or log.lower != log.upper:
                res.mismatches.append(f"seed {s} {name}: bounds {lows} / {log.upper}")
    return res


def run_checks(quick=False, seed=0):
    """All checks; ``quick`` uses small sample sizes."""
    sizes = (50, 50, 30, 20) if quick else (1000, 1000, 500, 200)
    out = []
    for check, count in zip((check_adversary, check_incremental, check_special, check_generation),
                            sizes):
        start = time.monotonic()
        res = check(count, seed)
        res.seconds = time.monotonic() - start
        out.append(res)
    return out
