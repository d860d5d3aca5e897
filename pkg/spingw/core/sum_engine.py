"""Degeneration sum formulas as executable rewriting rules.

Local invariants of a spin curve of genus h are related to those of lower genus by degenerating
the curve and summing over contact partitions. The rules here produce :class:`SymbolicCombo`
values over opaque invariants; the degree 2 genus zero invariant with contact (2),
GT_(2)^{loc,0,+}, is never assigned a number.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

from spingw.core.algebra import SymbolicCombo, combo_substitute, solve_for
from spingw.core.closed_forms import (
    GENUS_ZERO,
    InsertionKind,
    InvariantKey,
    Parity,
    SpinKey,
    Target,
    closed_form_value,
    contact_two_key,
    evaluate_dim0,
    local_key,
)
from spingw.core.errors import HypothesisViolation, InconsistentRecurrence, InvalidInput
from spingw.core.models.output import ReductionTraceModel, TraceStepModel
from spingw.core.partitions import Partition, partitions_of
from spingw.core.registry import Registry

log = logging.getLogger(__name__)

ONE_EVEN = SpinKey(1, Parity.even)
ONE_ODD = SpinKey(1, Parity.odd)

TWO = Partition((2,))


class TraceStep(NamedTuple):
    rule: str
    before: SymbolicCombo
    after: SymbolicCombo


@dataclass(frozen=True)
class ReductionTrace:
    """Ordered record of rewrite rule applications; each step starts where the last ended."""

    steps: tuple[TraceStep, ...] = ()

    def __post_init__(self) -> None:
        for previous, current in zip(self.steps, self.steps[1:]):
            if previous.after != current.before:
                raise ValueError(
                    f"trace step {current.rule!r} does not continue the previous one"
                )

    def then(self, rule: str, before: SymbolicCombo, after: SymbolicCombo) -> "ReductionTrace":
        log.debug("Applied %s", rule)
        return ReductionTrace((*self.steps, TraceStep(rule, before, after)))

    def __len__(self) -> int:
        return len(self.steps)

    def render(self, label: Callable[[str], str] = str) -> str:
        return "\n".join(
            f"{step.rule}: {step.before.render(label)} -> {step.after.render(label)}"
            for step in self.steps
        )

    def to_model(self) -> ReductionTraceModel:
        return ReductionTraceModel(
            [
                TraceStepModel(
                    rule=step.rule, before=step.before.to_json(), after=step.after.to_json()
                )
                for step in self.steps
            ]
        )


def genus_zero_symbol() -> SymbolicCombo:
    return contact_two_key(GENUS_ZERO).symbol()


def _contact_two(s: SpinKey) -> SymbolicCombo:
    return contact_two_key(s).symbol()


def _scalar(s: SpinKey) -> Fraction:
    """(−1)^p 2^h."""
    return Fraction(s.sign * 2**s.genus)


# ------------------------------------------------------------------------------------------------
# Sum over partitions of d
# ------------------------------------------------------------------------------------------------


def _dim0_or_symbol(key: InvariantKey) -> SymbolicCombo:
    if key.insertions:
        return key.symbol()
    return evaluate_dim0(key)


def theorem_a_combo(
    d: int, s: SpinKey, ks: Sequence[int], split: tuple[int, int]
) -> SymbolicCombo:
    """Degenerate the spin curve against F0 and sum over contact partitions m of d.

    The first n1 descendants stay on the local side, the remaining n2 move to F0:

        1/(d!)² ∑_m |m|/m! · GT^{loc}_{(1^d),m}(∏ φ^{k_i}) · GT^{F0}_{m,(1^d)}(∏ φ^{k_j})

    Closed forms are applied; other factors stay opaque.
    """
    n1, n2 = split
    if n1 < 0 or n2 < 0 or n1 + n2 != len(ks):
        raise InvalidInput(f"Split {split} does not distribute {len(ks)} descendants")

    ones = Partition.ones(d)
    local_ks, f0_ks = tuple(ks[:n1]), tuple(ks[n1:])

    total = SymbolicCombo.zero()
    for m in partitions_of(d):
        f0_key = InvariantKey(
            degree=d,
            m1=m,
            m2=ones,
            insertions=f0_ks,
            insertion_kind=InsertionKind.phi,
            target=Target.F0,
        )
        f0_factor = _dim0_or_symbol(f0_key)
        if f0_factor.is_zero():
            continue
        local_factor = _dim0_or_symbol(
            local_key(d, s, m1=ones, m2=m, ks=local_ks, kind=InsertionKind.phi)
        )
        total += local_factor * f0_factor * Fraction(m.product, m.aut)

    return total * Fraction(1, math.factorial(d) ** 2)


def evaluate_combo(combo: SymbolicCombo, registry: Registry) -> Fraction:
    """Assign values to all symbols: closed forms first, then the registry.

    :raises MissingRegistryEntry: for the first symbol with neither
    """

    def lookup(symbol: str) -> Fraction:
        value = closed_form_value(InvariantKey.parse(symbol))
        if value is not None:
            return value
        return registry.value_of(symbol)

    return combo.evaluate(lookup)


def theorem_a_rhs(
    d: int, s: SpinKey, ks: Sequence[int], split: tuple[int, int], registry: Registry
) -> Fraction:
    """Numeric value of :func:`theorem_a_combo`."""
    return evaluate_combo(theorem_a_combo(d, s, ks, split), registry)


def mp_reduction_expansion(d: int, s: SpinKey, ks: Sequence[int]) -> SymbolicCombo:
    """GT_d^{loc,h,p}(∏ τ_{k_i}(F*)) with every descendant moved to the F0 side."""
    return theorem_a_combo(d, s, ks, (0, len(ks)))


# ------------------------------------------------------------------------------------------------
# Degree 2 with contact (2)
# ------------------------------------------------------------------------------------------------


def theorem_b_split(k1: SpinKey, k2: SpinKey) -> SymbolicCombo:
    """GT_(2) of the curve of genus h1 + h2 obtained by joining two spin curves.

    (−1)^{p1}2^{h1} GT_(2)^{h2,p2} + (−1)^{p2}2^{h2} GT_(2)^{h1,p1}
        − (−1)^p 2^h GT_(2)^{0,+}
    """
    joined = k1 + k2
    return (
        _contact_two(k2) * _scalar(k1)
        + _contact_two(k1) * _scalar(k2)
        - genus_zero_symbol() * _scalar(joined)
    )


def _check_descent_hypothesis(s: SpinKey) -> None:
    if s.genus == 0 or s == ONE_ODD:
        raise HypothesisViolation(
            f"Lowering the genus needs h >= 2 or (h, p) = (1, +), got ({s})",
            solution="Use the splitting formula for this curve instead.",
        )


def theorem_b_descent(s: SpinKey) -> SymbolicCombo:
    """GT_(2)^{h,p} = 4 GT_(2)^{h−1,p} − (−1)^p 2^h GT_(2)^{0,+}, for h ≥ 2 or (1, +)."""
    _check_descent_hypothesis(s)
    lower = SpinKey(s.genus - 1, s.parity)
    return _contact_two(lower) * 4 - genus_zero_symbol() * _scalar(s)


def f1_contribution(s1: Partition, s2: Partition) -> SymbolicCombo:
    """Contribution of the ruled surface F1 glued along two fibers with contact s1 and s2."""
    if s1.degree != 2 or s2.degree != 2:
        raise InvalidInput(f"Contact partitions along F1 must be partitions of 2: {s1}, {s2}")
    if s1 == TWO and s2 == TWO:
        return SymbolicCombo.zero()
    if s1 != s2:
        return SymbolicCombo.constant(1)
    return genus_zero_symbol() * -4


def _f1_sum(factor: Callable[[Partition, Partition], SymbolicCombo]) -> SymbolicCombo:
    """∑_{m¹,m²⊢2} |m¹||m²|/(m¹!m²!) · factor(m¹, m²) · F1(m¹, m²)."""
    total = SymbolicCombo.zero()
    for m1 in partitions_of(2):
        for m2 in partitions_of(2):
            f1 = f1_contribution(m1, m2)
            if f1.is_zero():
                continue
            weight = Fraction(m1.product * m2.product, m1.aut * m2.aut)
            total += factor(m1, m2) * f1 * weight
    return total


def sum_scd_eval(k1: SpinKey, k2: SpinKey) -> SymbolicCombo:
    """Expand the splitting formula from the degeneration into two curves and F1."""
    return _f1_sum(
        lambda m1, m2: evaluate_dim0(local_key(2, k1, m1=m1))
        * evaluate_dim0(local_key(2, k2, m1=m2))
    )


def sum_descent_eval(s: SpinKey) -> SymbolicCombo:
    """Expand the genus lowering formula from the degeneration into genus h−1 and F1."""
    _check_descent_hypothesis(s)
    lower = SpinKey(s.genus - 1, s.parity)
    return _f1_sum(lambda m1, m2: evaluate_dim0(local_key(2, lower, m1=m1, m2=m2)))


# ------------------------------------------------------------------------------------------------
# Genus reduction
# ------------------------------------------------------------------------------------------------


def _relation_for(s: SpinKey) -> tuple[str, SymbolicCombo]:
    """Rewrite rule expressing GT_(2)^{h,p} through invariants of lower genus."""
    if s.genus >= 2:
        return "split-off-genus-one", theorem_b_split(SpinKey(s.genus - 1, s.parity), ONE_EVEN)
    if s == ONE_ODD:
        # both parities of genus 1 split the even genus 2 curve
        relation = theorem_b_split(ONE_EVEN, ONE_EVEN) - theorem_b_split(ONE_ODD, ONE_ODD)
        return "genus-one-parity", solve_for(relation, contact_two_key(s).serialize())
    if s == ONE_EVEN:
        return "genus-one-descent", theorem_b_descent(ONE_EVEN)
    raise InconsistentRecurrence(f"No rule lowers the genus of ({s})")


def _spin_of(symbol: str) -> SpinKey:
    spin = InvariantKey.parse(symbol).spin
    assert spin is not None
    return spin


def _highest_genus_first(symbol: str) -> tuple[int, bool]:
    spin = _spin_of(symbol)
    return spin.genus, spin.parity is Parity.odd


@lru_cache(maxsize=None)
def reduce_genus_zero(s: SpinKey) -> tuple[Fraction, ReductionTrace]:
    """Find c with GT_(2)^{loc,h,p} = c · GT_(2)^{loc,0,+} by unrolling the sum formulas.

    The invariant of the highest genus left in the combo is rewritten first.
    """
    base = contact_two_key(GENUS_ZERO).serialize()
    combo = _contact_two(s)
    trace = ReductionTrace()

    while pending := [symbol for symbol in combo.symbols() if symbol != base]:
        target = max(pending, key=_highest_genus_first)
        rule, replacement = _relation_for(_spin_of(target))
        reduced = combo_substitute(combo, target, replacement)
        trace = trace.then(rule, combo, reduced)
        combo = reduced

    coefficient = combo.coefficient(base)
    if combo != genus_zero_symbol() * coefficient:
        raise InconsistentRecurrence(f"Genus reduction of ({s}) left {combo.render()}")

    log.debug("GT_(2) of (%s) is %s times the genus zero invariant", s, coefficient)
    return coefficient, trace


def express_in_genus_zero(combo: SymbolicCombo) -> SymbolicCombo:
    """Replace every GT_(2)^{loc,h,p} by its multiple of GT_(2)^{loc,0,+}."""
    base = genus_zero_symbol()

    def reduce(symbol: str) -> SymbolicCombo:
        key = InvariantKey.parse(symbol)
        if key.spin is not None and key == contact_two_key(key.spin):
            coefficient, _ = reduce_genus_zero(key.spin)
            return base * coefficient
        return SymbolicCombo.symbol(symbol)

    return combo.map_symbols(reduce)


class MpReduction(NamedTuple):
    holds: bool
    ratio: Fraction
    trace: ReductionTrace


def verify_mp_reduction(s: SpinKey, d: int, ks: Sequence[int] = (1,)) -> MpReduction:
    """Check GT_d^{loc,h,p}(∏τ) = ratio · GT_d^{loc,0,+}(∏τ) through the F0 degeneration.

    The ratio is (−1)^p for d = 1 and (−1)^p 2^h for d = 2; the relative F0 descendants stay
    opaque on both sides.
    """
    if d not in (1, 2):
        raise InvalidInput(f"Degree must be 1 or 2, got {d}")

    expansion = mp_reduction_expansion(d, s, ks)
    trace = ReductionTrace().then("degenerate", local_key(d, s, ks=ks).symbol(), expansion)
    reduced = expansion
    if d == 2:
        reduced = express_in_genus_zero(expansion)
        trace = trace.then("reduce-genus", expansion, reduced)

    ratio = Fraction(s.sign * (2**s.genus if d == 2 else 1))
    holds = reduced == mp_reduction_expansion(d, GENUS_ZERO, ks) * ratio
    return MpReduction(holds, ratio, trace)
