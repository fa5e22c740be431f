"""Instance data model, validation and the plain-text instance format.

Items are 0-based inside the library; files, CLI output and the
``labels``/``selection`` helpers use the 1-based numbering of the tables
the instances come from.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

FORMAT_VERSION = 1
_FIELDS = ("n", "K", "parts", "p", "C", "c_lower", "d", "gamma", "k")


class InstanceError(ValueError):
    """Raised for structurally invalid instances or selections."""


class ParseError(ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class Instance:
    """A recoverable robust multi-selection instance.

    ``parts`` holds 0-based item indices. ``gamma`` and ``k`` are clamped to
    ``n`` and ``P`` on construction; the clamping is recorded in ``notes``.
    """

    parts: tuple
    p: tuple
    C: tuple
    c_lower: tuple
    d: tuple
    gamma: int
    k: int
    notes: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "parts", tuple(tuple(int(i) for i in part) for part in self.parts))
        for name in ("p", "C", "c_lower", "d"):
            set_(self, name, tuple(_as_int(v, name) for v in getattr(self, name)))
        set_(self, "gamma", _as_int(self.gamma, "gamma"))
        set_(self, "k", _as_int(self.k, "k"))
        notes = list(self.notes)
        n, P = len(self.C), sum(self.p)
        if self.gamma > n:
            notes.append(f"gamma={self.gamma} clamped to n={n}")
            set_(self, "gamma", n)
        if self.k > P >= 0:
            notes.append(f"k={self.k} clamped to P={P}")
            set_(self, "k", P)
        set_(self, "notes", tuple(notes))

    @classmethod
    def from_labels(cls, parts, p, C, c_lower, d, gamma, k, c_upper=None):
        """Build from 1-based part lists; ``c_upper`` may replace ``d``."""
        if c_upper is not None:
            d = [hi - lo for hi, lo in zip(c_upper, c_lower)]
        return cls(
            parts=tuple(tuple(i - 1 for i in part) for part in parts),
            p=tuple(p), C=tuple(C), c_lower=tuple(c_lower), d=tuple(d),
            gamma=gamma, k=k,
        )

    @property
    def n(self):
        return len(self.C)

    @property
    def K(self):
        return len(self.parts)

    @property
    def P(self):
        return sum(self.p)

    @property
    def c_upper(self):
        return tuple(lo + dev for lo, dev in zip(self.c_lower, self.d))

    @cached_property
    def part_of(self):
        owner = [-1] * self.n
        for j, part in enumerate(self.parts):
            for i in part:
                if 0 <= i < self.n:
                    owner[i] = j
        return tuple(owner)

    @cached_property
    def arrays(self):
        """int64 copies of ``C``, ``c_lower``, ``d`` for vectorised code."""
        return (
            np.asarray(self.C, dtype=np.int64),
            np.asarray(self.c_lower, dtype=np.int64),
            np.asarray(self.d, dtype=np.int64),
        )

    def with_budgets(self, gamma=None, k=None):
        return Instance(
            self.parts, self.p, self.C, self.c_lower, self.d,
            self.gamma if gamma is None else gamma,
            self.k if k is None else k,
        )

    def digest(self):
        return hashlib.sha256(write_instance(self).encode()).hexdigest()[:16]

    # -- selections -------------------------------------------------------

    def selection(self, labels: Iterable[int]) -> tuple:
        """0/1 vector from 1-based item labels."""
        x = [0] * self.n
        for lab in labels:
            if not 1 <= lab <= self.n:
                raise InstanceError(f"item {lab} outside 1..{self.n}")
            x[lab - 1] = 1
        return tuple(x)

    def is_pair_instance(self):
        return (
            all(len(part) == 2 for part in self.parts)
            and all(pj == 1 for pj in self.p)
            and self.gamma == 1
            and self.k == 1
        )


@dataclass(frozen=True)
class Scenario:
    """Set of attacked items (0-based); attacked items cost ``c_lower + d``."""

    attacked: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "attacked", frozenset(int(i) for i in self.attacked))

    def costs(self, instance: "Instance") -> tuple:
        if len(self.attacked) > instance.gamma:
            raise InstanceError(
                f"scenario attacks {len(self.attacked)} items, budget is {instance.gamma}")
        if any(not 0 <= i < instance.n for i in self.attacked):
            raise InstanceError("scenario attacks an unknown item")
        return tuple(lo + (dev if i in self.attacked else 0)
                     for i, (lo, dev) in enumerate(zip(instance.c_lower, instance.d)))

    def labels(self):
        return labels(self.attacked)


def _as_int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InstanceError(f"{name} must hold integers, got {value!r}")
    return int(value)


def labels(selected: Iterable[int]) -> list:
    """1-based labels of a set of 0-based indices (sorted)."""
    return sorted(i + 1 for i in selected)


def support(x: Sequence) -> frozenset:
    return frozenset(i for i, v in enumerate(x) if v)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(instance: Instance) -> ValidationReport:
    report = ValidationReport(warnings=list(instance.notes))
    n = instance.n
    for name in ("c_lower", "d"):
        if len(getattr(instance, name)) != n:
            report.violations.append(f"{name} has length {len(getattr(instance, name))}, expected {n}")
    if len(instance.p) != instance.K:
        report.violations.append(f"p has length {len(instance.p)}, expected K={instance.K}")

    seen = {}
    for j, part in enumerate(instance.parts):
        if not part:
            report.violations.append(f"part {j + 1} is empty")
        for i in part:
            if not 0 <= i < n:
                report.violations.append(f"part {j + 1} references unknown item {i + 1}")
            elif i in seen:
                report.violations.append(
                    f"parts overlap: item {i + 1} in parts {seen[i] + 1} and {j + 1}")
            else:
                seen[i] = j
    missing = [i + 1 for i in range(n) if i not in seen]
    if missing:
        report.violations.append(f"items not covered by any part: {missing}")

    for j, (part, pj) in enumerate(zip(instance.parts, instance.p)):
        if pj < 0:
            report.violations.append(f"quota p_{j + 1}={pj} is negative")
        elif pj > len(part):
            report.violations.append(
                f"quota exceeds part size: p_{j + 1}={pj} > |T_{j + 1}|={len(part)}")

    for name in ("C", "c_lower", "d"):
        neg = [i + 1 for i, v in enumerate(getattr(instance, name)) if v < 0]
        if neg:
            report.violations.append(f"negative cost in {name} at items {neg}")
    if instance.gamma < 0:
        report.violations.append("gamma is negative")
    if instance.k < 0:
        report.violations.append("k is negative")
    return report


def require_valid(instance: Instance):
    report = validate(instance)
    if not report.ok:
        raise InstanceError("; ".join(report.violations))
    return instance


def check_selection(instance: Instance, x: Sequence, *, fractional=False):
    """Check quota feasibility of a first-stage vector, exactly."""
    if len(x) != instance.n:
        raise InstanceError(f"selection has length {len(x)}, expected n={instance.n}")
    for i, v in enumerate(x):
        if fractional:
            if not 0 <= v <= 1:
                raise InstanceError(f"x_{i + 1}={v} outside [0, 1]")
        elif v not in (0, 1):
            raise InstanceError(f"x_{i + 1}={v} is not binary")
    for j, part in enumerate(instance.parts):
        total = sum(Fraction(x[i]) for i in part)
        if total != instance.p[j]:
            raise InstanceError(
                f"selection picks {total} items of part {j + 1}, quota is {instance.p[j]}")


def is_integral(x: Sequence) -> bool:
    return all(v in (0, 1) for v in x)


def first_stage_cost(instance: Instance, x: Sequence):
    check_selection(instance, x, fractional=not is_integral(x))
    return sum(c * v for c, v in zip(instance.C, x))


def scaled(x: Sequence):
    """Common denominator D and integer numerators of a rational vector."""
    fr = [Fraction(v) for v in x]
    D = math.lcm(*(f.denominator for f in fr)) if fr else 1
    return D, [int(f * D) for f in fr]


# ---------------------------------------------------------------------------
# text format


def write_instance(instance: Instance) -> str:
    parts = [[i + 1 for i in part] for part in instance.parts]
    lines = [
        f"format-version: {FORMAT_VERSION}",
        f"n: {instance.n}",
        f"K: {instance.K}",
        f"parts: {json.dumps(parts)}",
        f"p: {json.dumps(list(instance.p))}",
        f"C: {json.dumps(list(instance.C))}",
        f"c_lower: {json.dumps(list(instance.c_lower))}",
        f"d: {json.dumps(list(instance.d))}",
        f"gamma: {instance.gamma}",
        f"k: {instance.k}",
    ]
    return "\n".join(lines) + "\n"


def parse_fields(text: str, allowed: Sequence[str]) -> dict:
    """Parse ``key: <json>`` lines after a mandatory ``format-version`` line.

    Shared by instance files and experiment configs. Blank lines and lines
    starting with ``#`` are ignored.
    """
    values, lines_of = {}, {}
    version_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError("expected 'key: value'", line=lineno)
        if not version_seen:
            if key != "format-version":
                raise ParseError("first entry must be 'format-version'", line=lineno, field=key)
            if rest.strip() != str(FORMAT_VERSION):
                raise ParseError(f"unsupported format version {rest.strip()!r}",
                                 line=lineno, field=key)
            version_seen = True
            continue
        if key not in allowed:
            raise ParseError("unknown field", line=lineno, field=key)
        if key in values:
            raise ParseError("duplicate field", line=lineno, field=key)
        try:
            values[key] = json.loads(rest)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed value ({exc.msg})", line=lineno, field=key) from None
        lines_of[key] = lineno
    if not version_seen:
        raise ParseError("missing 'format-version' header")
    values["__lines__"] = lines_of
    return values


def _int_list(value, key, line):
    if not isinstance(value, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ParseError("expected a list of integers", line=line, field=key)
    return value


def read_instance(text: str) -> Instance:
    values = parse_fields(text, _FIELDS)
    lines_of = values.pop("__lines__")
    for key in _FIELDS:
        if key not in values:
            raise ParseError("missing field", field=key)
    for key in ("n", "K", "gamma", "k"):
        v = values[key]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError("expected an integer", line=lines_of[key], field=key)
    parts = values["parts"]
    if not isinstance(parts, list):
        raise ParseError("expected a list of item lists", line=lines_of["parts"], field="parts")
    for part in parts:
        _int_list(part, "parts", lines_of["parts"])
    for key in ("p", "C", "c_lower", "d"):
        _int_list(values[key], key, lines_of[key])
    n, K = values["n"], values["K"]
    if len(parts) != K:
        raise ParseError(f"{len(parts)} parts listed but K={K}", line=lines_of["parts"], field="parts")
    for key in ("C", "c_lower", "d"):
        if len(values[key]) != n:
            raise ParseError(f"length {len(values[key])} differs from n={n}",
                             line=lines_of[key], field=key)
    try:
        inst = Instance.from_labels(parts, values["p"], values["C"], values["c_lower"],
                                    values["d"], values["gamma"], values["k"])
    except InstanceError as exc:
        raise ParseError(str(exc)) from None
    report = validate(inst)
    if not report.ok:
        raise ParseError("; ".join(report.violations))
    return inst


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return read_instance(fh.read())


def save_instance(instance: Instance, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_instance(instance))
