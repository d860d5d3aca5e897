"""Topological recursion on the genus zero spin geometry as a rewriting system.

An expression is a connected invariant GW_{d,g}(∏ τ_{s_i}φ^{t_i}(F*)) of the ruled surface over a
genus zero spin curve, either absolute or relative with contact (1^d) along two fibers. One
recursion step lowers one ψ-power s_j by one and raises the matching φ-power; a correction term
of lower degree appears when s_j < d. Expressions with all s_i = 0 are opaque.
"""

import enum
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal, NamedTuple, Sequence

from spingw.core.algebra import SymbolicCombo, combo_substitute
from spingw.core.errors import (
    HypothesisViolation,
    InconsistentRecurrence,
    InvalidInput,
    UnexpectedFormat,
    UnsupportedKey,
)
from spingw.core.sum_engine import ReductionTrace

log = logging.getLogger(__name__)

Strategy = Literal["leftmost", "rightmost"]
STRATEGIES: tuple[Strategy, ...] = ("leftmost", "rightmost")

# both recursion lemmas need at least three marked points
MIN_INSERTIONS = 3

_EXPR_RE = re.compile(r"GW\|(abs|rel)\|d=([0-9]+)\|g=([0-9]+)\|ins=(.*)")
_INSERTION_RE = re.compile(r"\(([0-9]+),([0-9]+)\)")


class ExprFlavor(str, enum.Enum):
    """Absolute, or relative with contact (1^d) along two fibers."""

    absolute = "abs"
    relative_full = "rel"


class Insertion(NamedTuple):
    """τ_s φ^t(F*)."""

    s: int
    t: int

    def is_plain(self) -> bool:
        return self.s == 0 and self.t == 0

    def label(self) -> str:
        parts = []
        if self.s:
            parts.append(f"tau_{self.s}")
        if self.t:
            parts.append(f"phi^{self.t}")
        return " ".join(parts) + "(F*)" if parts else "F*"


@dataclass(frozen=True)
class MixedExpr:
    """A descendant invariant with per-insertion (τ-power, φ-power) pairs.

    Insertions are kept sorted by (s, t) descending.
    """

    degree: int
    genus: int
    insertions: tuple[Insertion, ...]
    flavor: ExprFlavor = ExprFlavor.absolute

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise InvalidInput(f"Degree must be at least 1: {self.degree}")
        if self.genus < 0:
            raise InvalidInput(f"Genus must be nonnegative: {self.genus}")
        insertions = tuple(Insertion(int(s), int(t)) for s, t in self.insertions)
        if any(s < 0 or t < 0 for s, t in insertions):
            raise InvalidInput(f"Descendant powers must be nonnegative: {insertions}")
        object.__setattr__(self, "insertions", tuple(sorted(insertions, reverse=True)))

    @classmethod
    def of(
        cls,
        degree: int,
        genus: int,
        insertions: Sequence[tuple[int, int]],
        flavor: ExprFlavor = ExprFlavor.absolute,
    ) -> "MixedExpr":
        return cls(degree, genus, tuple(Insertion(s, t) for s, t in insertions), flavor)

    @property
    def n(self) -> int:
        return len(self.insertions)

    @property
    def weight(self) -> int:
        """∑ s_i, the quantity each recursion step lowers."""
        return sum(insertion.s for insertion in self.insertions)

    @property
    def total_weight(self) -> int:
        return sum(s + t for s, t in self.insertions)

    def is_pure(self) -> bool:
        return self.weight == 0

    def is_on_shell(self) -> bool:
        """Whether the dimension constraint ∑(s_i + t_i) = d + g − 1 holds."""
        return self.total_weight == self.degree + self.genus - 1

    def with_insertion(self, j: int, insertion: Insertion) -> "MixedExpr":
        insertions = list(self.insertions)
        insertions[j] = insertion
        return MixedExpr(self.degree, self.genus, tuple(insertions), self.flavor)

    def with_flavor(self, flavor: ExprFlavor) -> "MixedExpr":
        return MixedExpr(self.degree, self.genus, self.insertions, flavor)

    def serialize(self) -> str:
        insertions = ";".join(f"({s},{t})" for s, t in self.insertions)
        return f"GW|{self.flavor.value}|d={self.degree}|g={self.genus}|ins={insertions}"

    def __str__(self) -> str:
        return self.serialize()

    @classmethod
    def parse(cls, text: str) -> "MixedExpr":
        match = _EXPR_RE.fullmatch(text.strip())
        if not match:
            raise UnexpectedFormat(f"Not a descendant expression: {text!r}")
        flavor, degree, genus, raw_insertions = match.groups()
        insertions = []
        for chunk in filter(None, raw_insertions.split(";")):
            item = _INSERTION_RE.fullmatch(chunk)
            if not item:
                raise UnexpectedFormat(f"Invalid insertion {chunk!r} in {text!r}")
            insertions.append((int(item.group(1)), int(item.group(2))))
        return cls.of(int(degree), int(genus), insertions, ExprFlavor(flavor))

    def label(self) -> str:
        if self.flavor is ExprFlavor.absolute:
            name = f"GW_{{{self.degree},{self.genus}}}"
        else:
            contact = f"(1^{self.degree})"
            name = f"GW_{{{contact},{contact},{self.genus}}}"
        return name + "(" + ", ".join(insertion.label() for insertion in self.insertions) + ")"

    def symbol(self) -> SymbolicCombo:
        return SymbolicCombo.symbol(self.serialize())

    def pure_symbol(self) -> "PurePhiSymbol":
        if not self.is_pure():
            raise UnsupportedKey(f"{self.label()} still has descendants")
        return PurePhiSymbol(
            self.degree, self.genus, tuple(sorted(t for _, t in self.insertions)), self.flavor
        )


@dataclass(frozen=True)
class PurePhiSymbol:
    """An opaque invariant with φ-powers only."""

    degree: int
    genus: int
    t_powers: tuple[int, ...]
    flavor: ExprFlavor

    def to_expr(self) -> MixedExpr:
        return MixedExpr.of(self.degree, self.genus, [(0, t) for t in self.t_powers], self.flavor)

    def serialize(self) -> str:
        return self.to_expr().serialize()


def label_of(symbol: str) -> str:
    try:
        return MixedExpr.parse(symbol).label()
    except UnexpectedFormat:
        return symbol


# ------------------------------------------------------------------------------------------------
# Base cases
# ------------------------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def base_absolute(k: int) -> Fraction:
    """GW_{k,0}(τ_{k−1}(F*) F*) by recursion on k.

    Appending a divisor multiplies by k and one recursion step leaves −B(k−1), so
    B(k) = −B(k−1)/k with B(1) = GW_{1,0}(F* F*) = 1.
    """
    if k < 1:
        raise InvalidInput(f"Degree must be at least 1: {k}")
    value = Fraction(1) if k == 1 else -base_absolute(k - 1) / k

    expected = Fraction((-1) ** (k - 1), math.factorial(k))
    if value != expected:
        raise InconsistentRecurrence(f"Absolute base case at degree {k}: {value} != {expected}")
    return value


@lru_cache(maxsize=None)
def base_relative(k: int) -> Fraction:
    """GW_{(1^k),(1^k),0}(φ^{k−1}(F*) F*) by recursion on k.

    The divisor factor k and the correction −k² of the relative step give B(k) = −k·B(k−1),
    with B(1) = GW_{(1),(1),0}(F* F*) = 1.
    """
    if k < 1:
        raise InvalidInput(f"Degree must be at least 1: {k}")
    value = Fraction(1) if k == 1 else -k * base_relative(k - 1)

    expected = Fraction((-1) ** (k - 1) * math.factorial(k))
    if value != expected:
        raise InconsistentRecurrence(f"Relative base case at degree {k}: {value} != {expected}")
    return value


# ------------------------------------------------------------------------------------------------
# Recursion steps
# ------------------------------------------------------------------------------------------------


class Term(NamedTuple):
    coefficient: Fraction
    expr: MixedExpr


def _check_step(e: MixedExpr, j: int, flavor: ExprFlavor) -> Insertion:
    if e.flavor is not flavor:
        raise UnsupportedKey(f"{e.label()} is not {flavor.name.replace('_', ' ')}")
    if e.n < MIN_INSERTIONS:
        raise HypothesisViolation(
            f"Recursion needs at least {MIN_INSERTIONS} insertions, {e.label()} has {e.n}",
            solution="Pad the invariant with plain F* insertions first.",
        )
    if not 0 <= j < e.n:
        raise InvalidInput(f"No insertion {j} in {e.label()}")
    insertion = e.insertions[j]
    if insertion.s < 1:
        raise HypothesisViolation(f"Insertion {j} of {e.label()} has no ψ-power to trade")
    return insertion


def _step_terms(e: MixedExpr, j: int) -> list[Term]:
    s, t = _check_step(e, j, e.flavor)
    terms = [Term(Fraction(1), e.with_insertion(j, Insertion(s - 1, t + 1)))]

    # only k = s_j survives the sum over 0 < k < d
    k = s
    if k < e.degree:
        if e.flavor is ExprFlavor.absolute:
            coefficient = -base_absolute(k)
        else:
            coefficient = -base_relative(k) * math.comb(e.degree, k) ** 2
        lower = MixedExpr(e.degree - k, e.genus, e.insertions, e.flavor)
        terms.append(Term(coefficient, lower.with_insertion(j, Insertion(0, t))))
    return terms


def _as_combo(terms: Sequence[Term]) -> SymbolicCombo:
    combo = SymbolicCombo.zero()
    for coefficient, expr in terms:
        combo += expr.symbol() * coefficient
    return combo


def trr_absolute_step(e: MixedExpr, j: int) -> SymbolicCombo:
    """One recursion step on insertion j of an absolute expression."""
    _check_step(e, j, ExprFlavor.absolute)
    return _as_combo(_step_terms(e, j))


def trr_relative_step(e: MixedExpr, j: int) -> SymbolicCombo:
    """One recursion step on insertion j of a relative expression."""
    _check_step(e, j, ExprFlavor.relative_full)
    return _as_combo(_step_terms(e, j))


def trr_step(e: MixedExpr, j: int) -> SymbolicCombo:
    if e.flavor is ExprFlavor.absolute:
        return trr_absolute_step(e, j)
    return trr_relative_step(e, j)


# ------------------------------------------------------------------------------------------------
# Divisor insertions
# ------------------------------------------------------------------------------------------------


class DivisorMove(NamedTuple):
    """value(expr) = factor · value(original)."""

    factor: Fraction
    expr: MixedExpr


def append_divisor(e: MixedExpr) -> DivisorMove:
    """Add a plain F* insertion; F*·(dS + kF) = d and F* ∪ F* = 0."""
    padded = MixedExpr(e.degree, e.genus, (*e.insertions, Insertion(0, 0)), e.flavor)
    return DivisorMove(Fraction(e.degree), padded)


def remove_divisor(e: MixedExpr) -> DivisorMove:
    """Drop a plain F* insertion.

    :raises HypothesisViolation: if every insertion carries a descendant
    """
    insertions = list(e.insertions)
    plain = next((j for j, insertion in enumerate(insertions) if insertion.is_plain()), None)
    if plain is None:
        raise HypothesisViolation(
            f"{e.label()} has no plain F* insertion, a descended insertion cannot be removed"
        )
    del insertions[plain]
    stripped = MixedExpr(e.degree, e.genus, tuple(insertions), e.flavor)
    return DivisorMove(Fraction(1, e.degree), stripped)


# ------------------------------------------------------------------------------------------------
# Full reduction
# ------------------------------------------------------------------------------------------------


def _select(e: MixedExpr, strategy: Strategy) -> int:
    candidates = [j for j, insertion in enumerate(e.insertions) if insertion.s >= 1]
    if strategy == "leftmost":
        return candidates[0]
    if strategy == "rightmost":
        return candidates[-1]
    raise InvalidInput(f"Unknown reduction strategy {strategy!r}, use one of {STRATEGIES}")


def reduce_full(e: MixedExpr, strategy: Strategy = "leftmost") -> SymbolicCombo:
    """Rewrite an expression into a combination of pure φ symbols.

    Terminates since every step lowers ∑ s_i by one.
    """
    if e.n < MIN_INSERTIONS:
        raise HypothesisViolation(
            f"Recursion needs at least {MIN_INSERTIONS} insertions, {e.label()} has {e.n}",
            solution="Use the padded reduction for fewer insertions.",
        )
    return _reduce_full(e, strategy)


@lru_cache(maxsize=None)
def _reduce_full(e: MixedExpr, strategy: Strategy) -> SymbolicCombo:
    if e.is_pure():
        return SymbolicCombo.symbol(e.pure_symbol().serialize())

    result = SymbolicCombo.zero()
    for coefficient, expr in _step_terms(e, _select(e, strategy)):
        result += _reduce_full(expr, strategy) * coefficient
    return result


def trace_reduction(
    e: MixedExpr, strategy: Strategy = "leftmost"
) -> tuple[SymbolicCombo, ReductionTrace]:
    """Reduce step by step on the whole combo, recording every rule application."""
    combo = e.symbol()
    trace = ReductionTrace()
    while pending := [s for s in combo.symbols() if not MixedExpr.parse(s).is_pure()]:
        target = pending[0]
        expr = MixedExpr.parse(target)
        j = _select(expr, strategy)
        rule = f"trr-{expr.flavor.name.replace('_', '-')}[{j}]"
        rewritten = combo_substitute(combo, target, trr_step(expr, j))
        trace = trace.then(rule, combo, rewritten)
        combo = rewritten
    return combo, trace


def reduce_padded(e: MixedExpr, strategy: Strategy = "leftmost") -> SymbolicCombo:
    """Reduction for any number of insertions.

    With fewer than three insertions two plain F* are appended first, which multiplies the
    invariant by d², and the result is divided by d² again.
    """
    if e.n >= MIN_INSERTIONS:
        return reduce_full(e, strategy)
    if e.is_pure():
        return e.symbol()

    first = append_divisor(e)
    second = append_divisor(first.expr)
    factor = first.factor * second.factor
    log.debug("Padded %s with two divisors, factor %s", e, factor)
    return reduce_full(second.expr, strategy) * (1 / factor)


# ------------------------------------------------------------------------------------------------
# Relative versus absolute
# ------------------------------------------------------------------------------------------------


class ApCheck(NamedTuple):
    holds: bool
    absolute: SymbolicCombo
    relative: SymbolicCombo
    trace: ReductionTrace


def _as_absolute(combo: SymbolicCombo) -> SymbolicCombo:
    """Identify each pure relative symbol Y[d'] with (d'!)² X[d']."""

    def identify(symbol: str) -> SymbolicCombo:
        expr = MixedExpr.parse(symbol)
        if expr.flavor is ExprFlavor.absolute:
            return SymbolicCombo.symbol(symbol)
        absolute = expr.with_flavor(ExprFlavor.absolute)
        return absolute.symbol() * math.factorial(expr.degree) ** 2

    return combo.map_symbols(identify)


def _compare(d: int, absolute: SymbolicCombo, relative: SymbolicCombo) -> bool:
    return _as_absolute(relative) == absolute * math.factorial(d) ** 2


def verify_ap(d: int, g: int, insertions: Sequence[tuple[int, int]]) -> ApCheck:
    """Check GW_{(1^d),(1^d),g}(...) = (d!)² GW_{d,g}(...) after full reduction of both sides."""
    absolute_expr = MixedExpr.of(d, g, insertions, ExprFlavor.absolute)
    relative_expr = absolute_expr.with_flavor(ExprFlavor.relative_full)

    absolute, absolute_trace = trace_reduction(absolute_expr)
    relative = reduce_full(relative_expr)
    if absolute != reduce_full(absolute_expr):
        raise InconsistentRecurrence(f"Traced and memoized reductions of {absolute_expr} differ")

    holds = _compare(d, absolute, relative)
    log.debug("Relative/absolute comparison for %s: %s", absolute_expr, holds)
    return ApCheck(holds, absolute, relative, absolute_trace)


def verify_dec_rel(d: int, g: int, insertions: Sequence[tuple[int, int]]) -> bool:
    """Same comparison for any number of insertions, through the padded reduction."""
    absolute_expr = MixedExpr.of(d, g, insertions, ExprFlavor.absolute)
    relative_expr = absolute_expr.with_flavor(ExprFlavor.relative_full)
    return _compare(d, reduce_padded(absolute_expr), reduce_padded(relative_expr))
