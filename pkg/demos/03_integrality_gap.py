"""
A fractional point the compact model cannot cut off
===================================================

On the five-item example every integral choice costs 1, but spreading
the picks evenly leaves the adversary nothing to gain.
"""

# %%
from fractions import Fraction

from rrselect import builtin, adv_solve, rec_brute
from rrselect.mip_export import build_m3, solve_highs

ex2 = builtin("ex2")
print("integral optimum", rec_brute(ex2))

# %%
third = Fraction(1, 3)
x = (third, third, third, 2 * third, third)
adv = adv_solve(ex2, x).value
cost = sum(c * v for c, v in zip(ex2.C, x))
print("fractional point: first stage", cost, "+ adversary", adv, "=", cost + adv)

# %%
# The same gap inside the compact model, solved with HiGHS.
model = build_m3(ex2)
print(len(model.variables), "variables,", len(model.constraints), "rows")
print("integral:", solve_highs(model).objective)
fixed = {f"x{i + 1}": v for i, v in enumerate(x)}
print("relaxed at the point:", solve_highs(model, relax=True, fix=fixed).objective)
print("relaxed, free:", solve_highs(model, relax=True).objective)
