"""
The four-item running example
=============================

Two parts of two items, one pick per part, one attack and one exchange.
Buying {1,4} is cheapest up front but not overall.
"""

# %%
from rrselect import builtin, adv_solve, inc_solve, rec_brute, solve_special
from rrselect.core import Scenario, first_stage_cost
from rrselect.incremental import iter_first_stage
from rrselect.special_case import analyze

ex1 = builtin("ex1")
print("C      ", ex1.C)
print("c_lower", ex1.c_lower)
print("c_upper", ex1.c_upper)

# %%
# Every first-stage choice with its worst case.
for x in iter_first_stage(ex1):
    adv = adv_solve(ex1, x)
    picked = [i + 1 for i, v in enumerate(x) if v]
    print(picked, "first stage", first_stage_cost(ex1, x), "+ worst case", adv.value,
          "=", first_stage_cost(ex1, x) + adv.value, " attack on", adv.scenario.labels())

# %%
# Raising item 4 under {1,4}: the recovery swaps 4 for 3.
x = ex1.selection([1, 4])
res = inc_solve(ex1, x, Scenario({3}))
print("recovery", res.labels(), "costs", res.value)

# %%
# The same number split into the two attack strategies.
a = analyze(ex1, x)
print("nominal recovery", inc_solve(ex1, x).value, "gain I", a.g1, "gain II", a.g2)

# %%
print("optimum (enumeration)", rec_brute(ex1))
print("optimum (pair algorithm)", solve_special(ex1))
