"""A small solver-agnostic MILP representation (minimization only)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_().]*\Z")
SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


class LinExpr:
    """Sum of ``coef * variable`` terms plus a constant. Keys are variable names."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[str, float] | None = None, constant: float = 0.0):
        self.terms = dict(terms or {})
        self.constant = float(constant)

    @staticmethod
    def of(obj) -> "LinExpr":
        if isinstance(obj, LinExpr):
            return obj
        if isinstance(obj, Var):
            return LinExpr({obj.name: 1.0})
        if isinstance(obj, (int, float)):
            return LinExpr(constant=obj)
        if isinstance(obj, Mapping):
            return LinExpr(obj)
        raise TypeError(f"cannot build a linear expression from {type(obj).__name__}")

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.constant)

    def add(self, other, scale: float = 1.0) -> "LinExpr":
        """In-place ``self += scale * other``."""
        other = LinExpr.of(other)
        for k, c in other.terms.items():
            self.terms[k] = self.terms.get(k, 0.0) + scale * c
        self.constant += scale * other.constant
        return self

    def canonical(self) -> "LinExpr":
        return LinExpr({k: c for k, c in self.terms.items() if c != 0.0}, self.constant)

    def value(self, values: Mapping[str, float]) -> float:
        return self.constant + sum(c * values[k] for k, c in self.terms.items())

    def __add__(self, other):
        return self.copy().add(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.copy().add(other, -1.0)

    def __rsub__(self, other):
        return LinExpr.of(other).copy().add(self, -1.0)

    def __mul__(self, k):
        if not isinstance(k, (int, float)):
            raise TypeError("only scalar multiplication is linear")
        return LinExpr({n: k * c for n, c in self.terms.items()}, k * self.constant)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        if not isinstance(other, LinExpr):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.terms == b.terms and a.constant == b.constant

    def __repr__(self):
        parts = [f"{c:+g} {k}" for k, c in self.terms.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return " ".join(parts)


@dataclass(frozen=True)
class Var:
    name: str
    kind: str = "continuous"
    lower: float = 0.0
    upper: float = math.inf

    def __add__(self, other):
        return LinExpr.of(self) + other

    __radd__ = __add__

    def __sub__(self, other):
        return LinExpr.of(self) - other

    def __rsub__(self, other):
        return LinExpr.of(other) - self

    def __mul__(self, k):
        return LinExpr.of(self) * k

    __rmul__ = __mul__

    def __neg__(self):
        return LinExpr.of(self) * -1.0

    @property
    def is_integer(self):
        return self.kind == "binary"


@dataclass
class Constraint:
    name: str
    expr: LinExpr
    sense: str
    rhs: float


@dataclass
class Finding:
    kind: str
    subject: str

    def __str__(self):
        return f"{self.kind}: {self.subject}"


def canonicalize(expr: LinExpr, sense: str, rhs: float) -> tuple[LinExpr, str, float]:
    """Fold the constant into the right-hand side and drop zero terms."""
    expr = LinExpr.of(expr)
    return LinExpr({k: c for k, c in expr.terms.items() if c != 0.0}), sense, float(rhs) - expr.constant


@dataclass
class MilpModel:
    name: str = "model"
    variables: dict[str, Var] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)
    # Free-form build context (weights, scenario ids, ...) used by extraction.
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._row_names: set[str] = {c.name for c in self.constraints}

    def add_variable(self, name: str, kind: str = "continuous", lower: float = 0.0, upper: float = math.inf) -> Var:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name!r}")
        if not NAME_RE.match(name):
            raise ModelError(f"illegal variable name {name!r}")
        if kind == "binary":
            lower, upper = 0.0, 1.0
        elif kind != "continuous":
            raise ModelError(f"unknown variable kind {kind!r}")
        if lower > upper:
            raise ModelError(f"{name}: lower bound {lower} exceeds upper bound {upper}")
        v = Var(name, kind, float(lower), float(upper))
        self.variables[name] = v
        return v

    def var(self, name: str) -> Var:
        return self.variables[name]

    def add_constraint(self, name: str, expr, sense: str, rhs: float = 0.0) -> Constraint:
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        if name in self._row_names:
            raise ModelError(f"duplicate constraint {name!r}")
        if not NAME_RE.match(name):
            raise ModelError(f"illegal constraint name {name!r}")
        expr = LinExpr.of(expr)
        for k in expr.terms:
            if k not in self.variables:
                raise ModelError(f"constraint {name!r} uses unknown variable {k!r}")
        expr, sense, rhs = canonicalize(expr, sense, rhs)
        c = Constraint(name, expr, sense, rhs)
        self.constraints.append(c)
        self._row_names.add(name)
        return c

    def set_objective(self, expr) -> None:
        expr = LinExpr.of(expr)
        for k in expr.terms:
            if k not in self.variables:
                raise ModelError(f"objective uses unknown variable {k!r}")
        self.objective = expr.canonical()

    def binaries(self) -> list[str]:
        return [n for n, v in self.variables.items() if v.kind == "binary"]

    def validate(self) -> list[Finding]:
        findings = []
        if not self.objective.terms:
            findings.append(Finding("empty objective", self.name))
        used = set(self.objective.terms)
        for c in self.constraints:
            used.update(c.expr.terms)
            if not c.expr.terms:
                ok = (
                    (c.sense == "<=" and 0.0 <= c.rhs)
                    or (c.sense == ">=" and 0.0 >= c.rhs)
                    or (c.sense == "=" and c.rhs == 0.0)
                )
                if not ok:
                    findings.append(Finding("trivially infeasible row", c.name))
        for n in self.variables:
            if n not in used:
                findings.append(Finding("unused variable", n))
        return findings

    def row_violation(self, c: Constraint, values: Mapping[str, float]) -> float:
        lhs = c.expr.value(values)
        if c.sense == "<=":
            return max(0.0, lhs - c.rhs)
        if c.sense == ">=":
            return max(0.0, c.rhs - lhs)
        return abs(lhs - c.rhs)

    def max_violation(self, values: Mapping[str, float]) -> tuple[float, str | None]:
        worst, where = 0.0, None
        for c in self.constraints:
            viol = self.row_violation(c, values)
            if viol > worst:
                worst, where = viol, c.name
        for n, v in self.variables.items():
            x = values[n]
            viol = max(v.lower - x, x - v.upper, 0.0)
            if viol > worst:
                worst, where = viol, n
        return worst, where

    def fix(self, assignments: Mapping[str, float]) -> "MilpModel":
        """Copy with the named variables' bounds pinned to the given values."""
        out = MilpModel(self.name, dict(self.variables), list(self.constraints), self.objective, dict(self.meta))
        for n, val in assignments.items():
            v = out.variables[n]
            out.variables[n] = Var(n, v.kind, float(val), float(val))
        return out

    def stats(self) -> dict:
        return {
            "variables": len(self.variables),
            "binaries": len(self.binaries()),
            "constraints": len(self.constraints),
        }


def sum_expr(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out.add(it)
    return out
