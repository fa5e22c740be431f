"""
Equal splits from robust selection
==================================

The reduction instance for a multiset A stays under M + 3Q exactly when
A splits into two halves of equal sum.
"""

# %%
import itertools

from rrselect.generators import PartitionInput, gen_reduction, has_equal_split
from rrselect.solvers import rec_brute

for A in [(1, 2, 3), (1, 2, 4), (2, 2), (3, 5), (1, 1, 2, 4)]:
    pin = PartitionInput(A)
    value, x = rec_brute(gen_reduction(pin))
    bound = pin.threshold_doubled / 2
    print(f"A={A}: Rec={value}  M+3Q={bound:g}  under={value <= bound}  split={has_equal_split(A)}")

# %%
# The first-stage picks in the number parts encode one half of A.
pin = PartitionInput((1, 2, 3))
value, x = rec_brute(gen_reduction(pin))
half = [a for j, a in enumerate(pin.A) if x[2 * j]]
print("bought now:", half, "sum", sum(half), "of", pin.total)

# %%
# All multisets of size <= 3 with entries <= 4.
bad = 0
for size in range(1, 4):
    for A in itertools.combinations_with_replacement(range(1, 5), size):
        pin = PartitionInput(A)
        under = 2 * rec_brute(gen_reduction(pin))[0] <= pin.threshold_doubled
        bad += under != has_equal_split(A)
print("mismatches:", bad)
