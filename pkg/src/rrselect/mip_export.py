"""Solver-neutral MIP models for the three formulations, and LP-file I/O.

LP dialect written by :func:`write_lp` (byte-for-byte deterministic)::

    \\ formulation: m1
    \\ instance: <digest>
    Minimize
     obj: +1 x1 +5 x2 ...
    Subject To
     <row>: <terms> >= <rhs>
    Bounds
     t free
     0 <= pi1
    Binaries
     x1 x2 ...
    End

Every term is ``<signed coefficient> <name>``; long rows wrap onto lines
indented by three spaces. Rows appear in construction order; Bounds and Binaries list variables in
order of first appearance (objective, then rows).
Continuous variables are nonnegative unless listed otherwise under Bounds.

Solution files (written by an external solver) hold a ``#status <word>``
header, an optional ``#objective <value>`` header and one ``name value``
pair per line.
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import tempfile
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .adversary import CutCandidate, alpha_candidates, beta_candidates, pos
from .core import Instance, Scenario

SOLVER_ENV = "RRSELECT_SOLVER"
M3_VARIABLE_LIMIT = 10**6
_TERMS_PER_LINE = 8


class ModelError(ValueError):
    pass


class ModelSizeError(ModelError):
    pass


class ExternalSolverError(RuntimeError):
    pass


class SolutionParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class Variable:
    name: str
    kind: str = "continuous"
    lower: object = 0        # None = -inf
    upper: object = None     # None = +inf


@dataclass
class Constraint:
    name: str
    terms: list
    sense: str
    rhs: object


@dataclass
class MipModel:
    formulation: str
    variables: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    sense: str = "min"
    metadata: dict = field(default_factory=dict)

    def add_var(self, name, kind="continuous", lower=0, upper=None):
        if name in self.variables:
            raise ModelError(f"duplicate variable {name}")
        if kind not in ("binary", "continuous"):
            raise ModelError(f"unknown variable kind {kind}")
        if kind == "binary":
            lower, upper = 0, 1
        self.variables[name] = Variable(name, kind, lower, upper)
        return name

    def add_constraint(self, name, terms, sense, rhs):
        if sense not in (">=", "<=", "="):
            raise ModelError(f"unknown sense {sense}")
        merged = {}
        for var, coef in terms:
            if var not in self.variables:
                raise ModelError(f"row {name} uses undeclared variable {var}")
            merged[var] = merged.get(var, 0) + coef
        self.constraints.append(Constraint(name, [(v, c) for v, c in merged.items() if c != 0],
                                           sense, rhs))

    def set_objective(self, terms, sense="min"):
        for var, _ in terms:
            if var not in self.variables:
                raise ModelError(f"objective uses undeclared variable {var}")
        self.objective = [(v, c) for v, c in terms if c != 0]
        self.sense = sense

    @property
    def binaries(self):
        return [v.name for v in self.variables.values() if v.kind == "binary"]

    def check_names(self):
        names = [c.name for c in self.constraints]
        if len(names) != len(set(names)):
            raise ModelError("duplicate constraint names")

    def objective_value(self, assignment):
        return sum(float(c) * assignment.get(v, 0.0) for v, c in self.objective)


@dataclass
class ExternalSolution:
    objective: float
    values: dict
    status: str

    @property
    def rounded(self):
        return int(round(self.objective))


# ---------------------------------------------------------------------------
# builders


def _x(i):
    return f"x{i + 1}"


def _first_stage(model, instance):
    for i in range(instance.n):
        model.add_var(_x(i), "binary")
    model.add_var("t", lower=None)
    model.set_objective([(_x(i), instance.C[i]) for i in range(instance.n)] + [("t", 1)])


def _quota_rows(model, instance):
    for j, part in enumerate(instance.parts):
        model.add_constraint(f"quota{j + 1}", [(_x(i), 1) for i in part], "=", instance.p[j])


def build_m1(instance: Instance, scenarios) -> MipModel:
    """Scenario-based model: one recovery (``y``) and kept-item (``z``) copy per scenario."""
    scenarios = list(scenarios)
    if not scenarios:
        raise ModelError("scenario list must be nonempty")
    model = MipModel("m1", metadata={"instance": instance.digest(), "scenarios": len(scenarios)})
    _first_stage(model, instance)
    n = instance.n
    for s in range(1, len(scenarios) + 1):
        for i in range(n):
            model.add_var(f"y{s}_{i + 1}", "binary")
        for i in range(n):
            model.add_var(f"z{s}_{i + 1}", "binary")
    for s, scen in enumerate(scenarios, start=1):
        costs = scen.costs(instance)
        model.add_constraint(f"cost{s}", [("t", 1)] + [(f"y{s}_{i + 1}", -costs[i]) for i in range(n)],
                             ">=", 0)
    _quota_rows(model, instance)
    for s in range(1, len(scenarios) + 1):
        for j, part in enumerate(instance.parts):
            model.add_constraint(f"rquota{s}_{j + 1}", [(f"y{s}_{i + 1}", 1) for i in part],
                                 "=", instance.p[j])
    for s in range(1, len(scenarios) + 1):
        for i in range(n):
            model.add_constraint(f"zx{s}_{i + 1}", [(f"z{s}_{i + 1}", 1), (_x(i), -1)], "<=", 0)
    for s in range(1, len(scenarios) + 1):
        for i in range(n):
            model.add_constraint(f"zy{s}_{i + 1}", [(f"z{s}_{i + 1}", 1), (f"y{s}_{i + 1}", -1)],
                                 "<=", 0)
    for s in range(1, len(scenarios) + 1):
        model.add_constraint(f"keep{s}", [(f"z{s}_{i + 1}", 1) for i in range(n)],
                             ">=", instance.P - instance.k)
    model.check_names()
    return model


def bracket_coefficients(alpha, beta, lo, dev):
    """Linearised bracket and gain of one item as ``(constant, slope in x_i)``.

    Uses ``[a + b x]_+ = [a + b]_+ x + [a]_+ (1 - x)`` for binary ``x``.
    """
    b0, b1 = pos(alpha - lo), pos(alpha + beta - lo)
    g0 = b0 - pos(alpha - lo - dev)
    g1 = b1 - pos(alpha + beta - lo - dev)
    return (b0, b1 - b0), (g0, g1 - g0)


def _dual_block(model, instance, items, alpha, beta, pi, rho_name, row_prefix):
    """Rows ``pi + rho_i >= gain_i(x_i)``; returns the linearised ``-sum brackets`` part."""
    const, terms = 0, []
    for i in items:
        (b0, bs), (g0, gs) = bracket_coefficients(alpha, beta, instance.c_lower[i], instance.d[i])
        const -= b0
        if bs:
            terms.append((_x(i), bs))
        rho = model.add_var(rho_name(i))
        model.add_constraint(f"{row_prefix}_{i + 1}", [(pi, 1), (rho, 1), (_x(i), -gs)], ">=", g0)
    return const, terms


def build_m2(instance: Instance, candidates) -> MipModel:
    """Candidate-based model: the adversary is described by ``(beta, alpha)`` pairs."""
    candidates = list(candidates)
    if not candidates:
        raise ModelError("candidate list must be nonempty")
    model = MipModel("m2", metadata={"instance": instance.digest(), "candidates": len(candidates)})
    _first_stage(model, instance)
    _quota_rows(model, instance)
    for s, cand in enumerate(candidates, start=1):
        pi = model.add_var(f"pi{s}")
        rhs = (instance.P - instance.k) * cand.beta
        lin = []
        rho_names = []
        for j, items in enumerate(instance.parts):
            alpha = cand.alpha[j]
            rhs += instance.p[j] * alpha
            c, terms = _dual_block(model, instance, items, alpha, cand.beta, pi,
                                   lambda i: f"rho{s}_{i + 1}", f"gain{s}")
            rhs += c
            lin.extend(terms)
            rho_names.extend(f"rho{s}_{i + 1}" for i in items)
        # t >= rhs - sum(slope x) + gamma pi + sum rho
        row = [("t", 1), (pi, -instance.gamma)] + [(r, -1) for r in rho_names]
        row += [(v, c) for v, c in lin]
        model.add_constraint(f"cut{s}", row, ">=", rhs)
    model.check_names()
    return model


def m3_size(instance: Instance):
    gamma, K = instance.gamma, instance.K
    total = instance.n + 1
    for beta in beta_candidates(instance):
        total += (K + 1) * (gamma + 1) + K * (gamma + 1)
        for j, items in enumerate(instance.parts):
            total += (gamma + 1) * len(alpha_candidates(instance, j, beta)) * (1 + len(items))
    return total


def build_m3(instance: Instance, max_variables=M3_VARIABLE_LIMIT, allow_large=False) -> MipModel:
    """Compact model: the budget DP becomes node potentials of a layered graph per beta."""
    size = m3_size(instance)
    if size > max_variables:
        if not allow_large:
            raise ModelSizeError(f"compact model needs {size} variables (limit {max_variables})")
        warnings.warn(f"compact model has {size} variables", stacklevel=2)
    model = MipModel("m3", metadata={"instance": instance.digest()})
    _first_stage(model, instance)
    gamma, K = instance.gamma, instance.K
    betas = beta_candidates(instance)
    model.metadata["betas"] = len(betas)

    def s_var(b, j, g):
        return f"s{b}_{j}_{g}"

    def c_var(b, j, g):
        return f"c{b}_{j}_{g}"

    for b, beta in enumerate(betas, start=1):
        for j in range(1, K + 2):
            for g in range(gamma + 1):
                model.add_var(s_var(b, j, g), lower=None)
        for j in range(1, K + 1):
            for g in range(gamma + 1):
                model.add_var(c_var(b, j, g), lower=None)

        model.add_constraint(f"top{b}", [("t", 1), (s_var(b, K + 1, gamma), -1)],
                             ">=", (instance.P - instance.k) * beta)
        for j in range(1, K + 1):
            for g in range(gamma + 1):
                for g2 in range(g, gamma + 1):
                    model.add_constraint(
                        f"arc{b}_{j}_{g}_{g2}",
                        [(s_var(b, j + 1, g2), 1), (s_var(b, j, g), -1), (c_var(b, j, g2 - g), -1)],
                        ">=", 0)
        for g in range(1, gamma + 1):
            model.add_constraint(f"slack{b}_{g}",
                                 [(s_var(b, K + 1, g), 1), (s_var(b, K + 1, g - 1), -1)], ">=", 0)
        for g in range(gamma + 1):
            model.add_constraint(f"start{b}_{g}", [(s_var(b, 1, g), 1)], "=", 0)

        for j, items in enumerate(instance.parts, start=1):
            for g in range(gamma + 1):
                for a, alpha in enumerate(alpha_candidates(instance, j - 1, beta), start=1):
                    tag = f"{b}_{j}_{g}_{a}"
                    pi = model.add_var(f"pi{tag}")
                    const, lin = _dual_block(model, instance, items, alpha, beta, pi,
                                             lambda i, tag=tag: f"rho{tag}_{i + 1}",
                                             f"gain{tag}")
                    row = [(c_var(b, j, g), 1), (pi, -g)]
                    row += [(f"rho{tag}_{i + 1}", -1) for i in items]
                    row += lin
                    model.add_constraint(f"part{tag}", row, ">=",
                                         instance.p[j - 1] * alpha + const)
    _quota_rows(model, instance)
    model.check_names()
    return model


# ---------------------------------------------------------------------------
# LP text


def _num(v):
    if isinstance(v, Fraction):
        v = v.numerator if v.denominator == 1 else float(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _signed(v):
    s = _num(v)
    return s if s.startswith("-") else "+" + s


def _terms(terms):
    chunks = [f"{_signed(c)} {v}" for v, c in terms] or ["+0 t"]
    lines = []
    for k in range(0, len(chunks), _TERMS_PER_LINE):
        lines.append(" ".join(chunks[k:k + _TERMS_PER_LINE]))
    return lines


def _appearance_order(model):
    order = dict.fromkeys(v for v, _ in model.objective)
    for con in model.constraints:
        order.update(dict.fromkeys(v for v, _ in con.terms))
    order.update(dict.fromkeys(model.variables))
    return [model.variables[v] for v in order]


def write_lp(model: MipModel) -> str:
    out = [f"\\ formulation: {model.formulation}"]
    for key in sorted(model.metadata):
        out.append(f"\\ {key}: {model.metadata[key]}")
    out.append("Minimize" if model.sense == "min" else "Maximize")
    lines = _terms(model.objective)
    out.append(f" obj: {lines[0]}")
    out.extend(f"   {ln}" for ln in lines[1:])
    out.append("Subject To")
    for con in model.constraints:
        lines = _terms(con.terms)
        lines[-1] += f" {con.sense} {_num(con.rhs)}"
        out.append(f" {con.name}: {lines[0]}")
        out.extend(f"   {ln}" for ln in lines[1:])
    out.append("Bounds")
    ordered = _appearance_order(model)
    for var in ordered:
        if var.kind == "binary":
            continue
        lo, hi = var.lower, var.upper
        if lo is None and hi is None:
            out.append(f" {var.name} free")
        elif hi is None:
            if lo != 0:
                out.append(f" {var.name} >= {_num(lo)}")
        elif lo is None:
            out.append(f" -inf <= {var.name} <= {_num(hi)}")
        else:
            out.append(f" {_num(lo)} <= {var.name} <= {_num(hi)}")
    out.append("Binaries")
    names = [v.name for v in ordered if v.kind == "binary"]
    for k in range(0, len(names), _TERMS_PER_LINE * 2):
        out.append(" " + " ".join(names[k:k + _TERMS_PER_LINE * 2]))
    out.append("End")
    return "\n".join(out) + "\n"


def _parse_number(tok):
    try:
        return int(tok)
    except ValueError:
        return Fraction(tok)


def read_lp(text: str) -> MipModel:
    """Parse the dialect produced by :func:`write_lp`."""
    sections = {"minimize": [], "maximize": [], "subject to": [], "bounds": [], "binaries": []}
    meta, current = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
            continue
        low = line.lower()
        if low in sections:
            current = low
            continue
        if low == "end":
            break
        if current is None:
            raise ModelError(f"line {lineno}: content before any section")
        sections[current].append((lineno, line))

    model = MipModel(meta.pop("formulation", "lp"), metadata=meta)
    binaries = [tok for _, ln in sections["binaries"] for tok in ln.split()]
    bounds = {}
    for lineno, ln in sections["bounds"]:
        tok = ln.split()
        if len(tok) == 2 and tok[1] == "free":
            bounds[tok[0]] = (None, None)
        elif len(tok) == 3 and tok[1] == ">=":
            bounds[tok[0]] = (_parse_number(tok[2]), None)
        elif len(tok) == 5 and tok[1] == "<=" and tok[3] == "<=":
            lo = None if tok[0] == "-inf" else _parse_number(tok[0])
            bounds[tok[2]] = (lo, _parse_number(tok[4]))
        else:
            raise ModelError(f"line {lineno}: unreadable bound '{ln}'")

    def rows(entries):
        tokens = [(lineno, t) for lineno, ln in entries for t in ln.split()]
        current = None
        for lineno, tok in tokens:
            if tok.endswith(":"):
                if current:
                    yield current
                current = [tok[:-1], lineno, []]
            elif current is None:
                raise ModelError(f"line {lineno}: expected a row name")
            else:
                current[2].append(tok)
        if current:
            yield current

    def split_terms(tokens, lineno):
        if len(tokens) % 2:
            raise ModelError(f"line {lineno}: odd number of term tokens")
        return [(tokens[k + 1], _parse_number(tokens[k])) for k in range(0, len(tokens), 2)]

    objective = sections["minimize"] or sections["maximize"]
    obj_rows = list(rows(objective))
    cons = []
    names = set()
    for name, lineno, toks in rows(sections["subject to"]):
        if len(toks) < 2 or toks[-2] not in (">=", "<=", "="):
            raise ModelError(f"line {lineno}: row {name} lacks a sense")
        terms = split_terms(toks[:-2], lineno)
        names.update(v for v, _ in terms)
        cons.append((name, terms, toks[-2], _parse_number(toks[-1])))
    obj_terms = split_terms(obj_rows[0][2], obj_rows[0][1]) if obj_rows else []
    names.update(v for v, _ in obj_terms)
    names.update(bounds)
    names.update(binaries)

    order = []
    seen = set()
    for v in [v for v, _ in obj_terms] + [v for _, t, _, _ in cons for v, _ in t] + list(bounds) + binaries:
        if v not in seen:
            seen.add(v)
            order.append(v)
    bset = set(binaries)
    for v in order:
        if v in bset:
            model.add_var(v, "binary")
        else:
            lo, hi = bounds.get(v, (0, None))
            model.add_var(v, lower=lo, upper=hi)
    model.set_objective([(v, c) for v, c in obj_terms if not (v == "t" and c == 0)],
                        "min" if sections["minimize"] else "max")
    for name, terms, sense, rhs in cons:
        model.add_constraint(name, terms, sense, rhs)
    return model


# ---------------------------------------------------------------------------
# solutions


def write_solution(solution: ExternalSolution) -> str:
    lines = [f"#status {solution.status}", f"#objective {solution.objective!r}"]
    lines += [f"{name} {value!r}" for name, value in solution.values.items()]
    return "\n".join(lines) + "\n"


def read_solution(text: str, model: MipModel = None) -> ExternalSolution:
    status, objective, values = None, None, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, rest = line[1:].partition(" ")
            if key == "status":
                status = rest.strip()
            elif key == "objective":
                try:
                    objective = float(rest)
                except ValueError:
                    raise SolutionParseError(f"bad objective {rest!r}", lineno) from None
            continue
        tok = line.split()
        if len(tok) != 2:
            raise SolutionParseError(f"expected 'name value', got {line!r}", lineno)
        try:
            values[tok[0]] = float(tok[1])
        except ValueError:
            raise SolutionParseError(f"bad value {tok[1]!r} for {tok[0]}", lineno) from None
        if model is not None and tok[0] not in model.variables:
            raise SolutionParseError(f"unknown variable {tok[0]}", lineno)
    if status is None:
        raise SolutionParseError("missing '#status' header")
    if model is not None and status == "optimal":
        missing = [b for b in model.binaries if b not in values]
        if missing:
            raise SolutionParseError(f"solution misses binaries {missing[:5]}")
        implied = model.objective_value(values)
        if objective is None:
            objective = implied
        elif abs(implied - objective) > 1e-6 * max(1.0, abs(objective)):
            raise SolutionParseError(
                f"objective {objective} inconsistent with assignment ({implied})")
    return ExternalSolution(objective if objective is not None else math.nan, values, status)


def run_external(model: MipModel, command_template=None, workdir=None) -> ExternalSolution:
    """Run an external solver: ``command_template`` has ``{model}`` and ``{solution}`` slots.

    Falls back to the ``RRSELECT_SOLVER`` environment variable.
    """
    template = command_template or os.environ.get(SOLVER_ENV)
    if not template:
        raise ExternalSolverError(f"no solver command configured (set {SOLVER_ENV})")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        lp_path.write_text(write_lp(model), encoding="utf-8")
        cmd = template.format(model=shlex.quote(str(lp_path)), solution=shlex.quote(str(sol_path)))
        proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True)
        if proc.returncode != 0:
            raise ExternalSolverError(
                f"solver exited with {proc.returncode}: {proc.stderr.strip()[-500:]}")
        if not sol_path.exists():
            raise ExternalSolverError("solver wrote no solution file")
        solution = read_solution(sol_path.read_text(encoding="utf-8"), model)
    if solution.status == "infeasible":
        raise ExternalSolverError("solver reports a feasible model as infeasible")
    return solution


def solver_configured():
    return bool(os.environ.get(SOLVER_ENV))


def solve_highs(model: MipModel, relax=False, fix=None) -> ExternalSolution:
    """Solve the IR in-process with HiGHS (``scipy.optimize.milp``).

    ``fix`` pins variables to given values; ``relax`` drops integrality.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    names = list(model.variables)
    index = {v: k for k, v in enumerate(names)}
    sign = 1.0 if model.sense == "min" else -1.0
    c = np.zeros(len(names))
    for v, coef in model.objective:
        c[index[v]] += sign * float(coef)
    lb = np.array([-np.inf if var.lower is None else float(var.lower)
                   for var in model.variables.values()])
    ub = np.array([np.inf if var.upper is None else float(var.upper)
                   for var in model.variables.values()])
    for v, value in (fix or {}).items():
        lb[index[v]] = ub[index[v]] = float(value)
    rows, cols, data, lo_rhs, hi_rhs = [], [], [], [], []
    for r, con in enumerate(model.constraints):
        for v, coef in con.terms:
            rows.append(r)
            cols.append(index[v])
            data.append(float(coef))
        rhs = float(con.rhs)
        lo_rhs.append(rhs if con.sense in (">=", "=") else -np.inf)
        hi_rhs.append(rhs if con.sense in ("<=", "=") else np.inf)
    A = coo_matrix((data, (rows, cols)), shape=(len(model.constraints), len(names))).tocsr()
    integrality = np.array([0 if relax or var.kind != "binary" else 1
                            for var in model.variables.values()])
    res = milp(c, constraints=[LinearConstraint(A, lo_rhs, hi_rhs)] if model.constraints else [],
               bounds=Bounds(lb, ub), integrality=integrality)
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    if res.x is None:
        return ExternalSolution(math.nan, {}, status)
    values = {v: float(res.x[k]) for k, v in enumerate(names)}
    return ExternalSolution(sign * float(res.fun), values, status)


def selection_from(solution: ExternalSolution, instance: Instance) -> tuple:
    return tuple(int(round(solution.values.get(_x(i), 0.0))) for i in range(instance.n))
