"""Instance construction: seeded random families, the Partition reduction, built-in examples.

Random instances come from numpy's PCG64 bit generator seeded with the
64-bit ``seed``, so a given ``GeneratorSpec`` yields the same instance on
any platform. Draw order: for every part in turn, the quota and then the
three cost columns ``C``, ``c_lower``, ``d`` over the part's items.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Instance, InstanceError, Scenario, require_valid

FAMILIES = ("i1", "i2", "reduction", "custom")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str = "i1"
    K: int = 5
    n_j: int = 5
    gamma: int = 2
    k: int = None          # i1 default: K // 2
    cost_range: tuple = (1, 100)
    seed: int = 0
    A: tuple = ()          # reduction only

    def checked(self) -> "GeneratorSpec":
        """Family rules applied; raises InstanceError on inconsistent parameters."""
        if self.family not in FAMILIES:
            raise InstanceError(f"unknown family {self.family!r} (expected one of {FAMILIES})")
        if not 0 <= self.seed < 2**64:
            raise InstanceError("seed must be a 64-bit unsigned integer")
        lo, hi = self.cost_range
        if lo < 0 or hi < lo:
            raise InstanceError(f"bad cost range {self.cost_range}")
        if self.family == "reduction":
            if not self.A or any(a <= 0 for a in self.A):
                raise InstanceError("reduction needs a nonempty multiset of positive integers")
            return self
        if self.K < 1:
            raise InstanceError("K must be positive")
        if self.family == "i2":
            if self.K % 2:
                raise InstanceError("family i2 needs an even K (k = K/2)")
            return replace(self, n_j=3, gamma=self.K, k=self.K // 2)
        if self.n_j < 2:
            raise InstanceError("parts need at least two items (quotas are drawn from 1..n_j-1)")
        k = self.K // 2 if self.k is None else self.k
        if self.gamma < 0 or k < 0:
            raise InstanceError("budgets must be nonnegative")
        return replace(self, k=k)


def gen_random(spec: GeneratorSpec) -> Instance:
    spec = spec.checked()
    if spec.family == "reduction":
        return gen_reduction(spec.A)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    lo, hi = spec.cost_range
    parts, p, C, c_lower, d = [], [], [], [], []
    for j in range(spec.K):
        parts.append(tuple(range(j * spec.n_j, (j + 1) * spec.n_j)))
        p.append(int(rng.integers(1, spec.n_j, endpoint=False)))
        for column in (C, c_lower, d):
            column.extend(int(v) for v in rng.integers(lo, hi, size=spec.n_j, endpoint=True))
    inst = Instance(tuple(parts), tuple(p), tuple(C), tuple(c_lower), tuple(d),
                    spec.gamma, spec.k)
    return require_valid(inst)


def sweep(spec: GeneratorSpec, replications, seed_base=0, **values):
    """Specs for every combination of swept parameters times ``replications`` seeds."""
    names = sorted(values)
    for combo in itertools.product(*(values[n] for n in names)):
        for r in range(replications):
            yield replace(spec, seed=seed_base + r, **dict(zip(names, combo)))


# ---------------------------------------------------------------------------
# Partition reduction


@dataclass(frozen=True)
class PartitionInput:
    A: tuple
    M: int = field(default=None)

    def __post_init__(self):
        if not self.A or any(int(a) != a or a <= 0 for a in self.A):
            raise InstanceError("A must be a nonempty multiset of positive integers")
        object.__setattr__(self, "A", tuple(int(a) for a in self.A))
        if self.M is None:
            object.__setattr__(self, "M", 50 * sum(self.A))
        elif 2 * self.M < 100 * sum(self.A):
            raise InstanceError("M must be at least 100 Q")

    @property
    def total(self):
        return sum(self.A)

    @property
    def Q(self):
        """Half the total (may be a half-integer for odd totals)."""
        return self.total / 2

    @property
    def big(self):
        return 1000 * (self.M + self.total)

    @property
    def threshold_doubled(self):
        """``2 (M + 3Q)``, kept integral."""
        return 2 * self.M + 3 * self.total


def gen_reduction(A, M=None) -> Instance:
    """Instance that has ``Rec <= M + 3Q`` exactly when ``A`` splits into two equal halves.

    Parts 1..n encode the numbers (pick ``a`` now, or risk a raise by ``2a``);
    parts n+1..2n+1 are guard pairs whose expensive item can only be avoided
    by recovery. ``Gamma = n + 1``, ``k = n``.
    """
    pin = A if isinstance(A, PartitionInput) else PartitionInput(tuple(A), M)
    n = len(pin.A)
    parts, C, lo, d = [], [], [], []
    for j, a in enumerate(pin.A):
        parts.append((2 * j, 2 * j + 1))
        C += [a, 0]
        lo += [0, 0]
        d += [0, 2 * a]
    for j in range(n + 1):
        base = 2 * n + 2 * j
        parts.append((base, base + 1))
        C += [pin.big, 0]
        lo += [0, pin.M]
        d += [0, pin.total]
    inst = Instance(tuple(parts), (1,) * (2 * n + 1), tuple(C), tuple(lo), tuple(d), n + 1, n)
    return require_valid(inst)


def has_equal_split(A) -> bool:
    """Subset-sum oracle: some sub-multiset of ``A`` sums to half the total."""
    total = sum(A)
    if total % 2:
        return False
    reach = 1
    for a in A:
        reach |= reach << a
    return bool(reach >> (total // 2) & 1)


# ---------------------------------------------------------------------------
# built-in examples


def builtin(name: str) -> Instance:
    """``ex1``: two pairs, the running example. ``ex2``: the integrality-gap example."""
    if name == "ex1":
        return Instance.from_labels([[1, 2], [3, 4]], [1, 1], [1, 5, 8, 7], [10, 7, 9, 4],
                                    None, 1, 1, c_upper=[19, 17, 19, 13])
    if name == "ex2":
        return Instance.from_labels([[1, 2, 3], [4, 5]], [1, 1], [0, 0, 0, 0, 1], [0, 0, 0, 1, 0],
                                    None, 1, 1, c_upper=[1, 1, 1, 1, 0])
    raise InstanceError(f"unknown built-in instance {name!r} (expected ex1 or ex2)")


# ---------------------------------------------------------------------------
# small random instances for oracle checks


def random_small(seed, n_max=10, K_max=4, gamma_max=3, k_max=2, cost_max=20, p_min=0) -> Instance:
    """Arbitrary partition shape (items shuffled across parts), costs in ``0..cost_max``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    K = int(rng.integers(1, K_max, endpoint=True))
    n = int(rng.integers(K, max(K, n_max), endpoint=True))
    sizes = np.ones(K, dtype=int) + np.bincount(rng.integers(0, K, size=n - K), minlength=K)
    items = rng.permutation(n)
    parts, start = [], 0
    for size in sizes:
        parts.append(tuple(sorted(int(i) for i in items[start:start + size])))
        start += size
    p = tuple(int(rng.integers(min(p_min, len(t)), len(t), endpoint=True)) for t in parts)
    costs = [tuple(int(v) for v in rng.integers(0, cost_max, size=n, endpoint=True))
             for _ in range(3)]
    gamma = int(rng.integers(0, gamma_max, endpoint=True))
    k = int(rng.integers(0, k_max, endpoint=True))
    return require_valid(Instance(tuple(parts), p, *costs, gamma, k))


def random_pair(seed, K_max=8, cost_max=20) -> Instance:
    """Two items per part, one pick per part, one attack and one exchange."""
    rng = np.random.Generator(np.random.PCG64(seed))
    K = int(rng.integers(1, K_max, endpoint=True))
    costs = [tuple(int(v) for v in rng.integers(0, cost_max, size=2 * K, endpoint=True))
             for _ in range(3)]
    parts = tuple((2 * j, 2 * j + 1) for j in range(K))
    return require_valid(Instance(parts, (1,) * K, *costs, 1, 1))


def random_selection(instance: Instance, seed) -> tuple:
    rng = np.random.Generator(np.random.PCG64(seed))
    x = [0] * instance.n
    for part, pj in zip(instance.parts, instance.p):
        for i in rng.choice(len(part), size=pj, replace=False):
            x[part[int(i)]] = 1
    return tuple(x)


def random_scenario(instance: Instance, seed) -> Scenario:
    rng = np.random.Generator(np.random.PCG64(seed))
    size = int(rng.integers(0, instance.gamma, endpoint=True))
    return Scenario(frozenset(int(i) for i in rng.choice(instance.n, size=size, replace=False)))
