"""Identity suites behind the ``verify`` command.

Every suite is a list of identities; an identity produces one :class:`IdentityCheck` per
instance it sweeps over. Identities run on a thread pool and are reported in declaration order,
so the report does not depend on scheduling.
"""

import itertools
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional

from spingw.core.algebra import (
    DegreeSeries,
    SymbolicCombo,
    series_exp,
    series_log,
    series_product_unit,
)
from spingw.core.closed_forms import (
    GENUS_ZERO,
    InvariantKey,
    Parity,
    SpinKey,
    closed_form_value,
    contact_two_key,
    dimension_chi,
    evaluate_dim0,
    gt_dim0,
    gw_dim0,
    local_key,
    mp_descendant,
    spin_keys,
)
from spingw.core.config import get_config
from spingw.core.errors import BaseError, InvalidInput
from spingw.core.models.input import Suite
from spingw.core.models.output import IdentityCheck, VerificationReport
from spingw.core.partitions import Partition, ordered_count, partitions_of, stats
from spingw.core.registry import Registry
from spingw.core.sum_engine import (
    express_in_genus_zero,
    reduce_genus_zero,
    sum_descent_eval,
    sum_scd_eval,
    theorem_a_rhs,
    theorem_b_descent,
    theorem_b_split,
    verify_mp_reduction,
)
from spingw.core.trr_engine import (
    STRATEGIES,
    ExprFlavor,
    MixedExpr,
    base_absolute,
    base_relative,
    reduce_full,
    trr_step,
    verify_ap,
    verify_dec_rel,
)

log = logging.getLogger(__name__)

# fixed sweeps that do not scale with the command line bounds
MAX_COMPOSITION_DEGREE = 12
MAX_PARTITION_DEGREE = 30
MAX_AUT_DEGREE = 20
MAX_SPLIT_GENUS = 8
MAX_MULTIPLICATIVE_ORDER = 8
MAX_BASE_DEGREE = 12
MAX_FILTER_DEGREE = 5
MAX_FILTER_POWER = 6


@dataclass(frozen=True)
class Sweep:
    """Bounds and inputs shared by all identities of a run."""

    h_max: int
    d_max: int
    weight_max: int
    registry: Registry = field(default_factory=Registry.empty)


Identity = Callable[[Sweep], Iterator[IdentityCheck]]
# (instance, holds, detail on failure)
Instances = Iterator[tuple[str, bool, Optional[str]]]


def _identity(name: str, description: str) -> Callable[[Callable[[Sweep], Instances]], Identity]:
    """Turn a generator of instances into an identity producing checks.

    An error raised while sweeping fails the identity at that point.
    """

    def decorator(instances: Callable[[Sweep], Instances]) -> Identity:
        def run(sweep: Sweep) -> Iterator[IdentityCheck]:
            log.debug("Checking %s", name)
            try:
                for instance, holds, detail in instances(sweep):
                    yield IdentityCheck(
                        identity=name,
                        description=description,
                        instance=instance,
                        holds=holds,
                        detail=None if holds else detail,
                    )
            except BaseError as e:
                yield IdentityCheck(
                    identity=name,
                    description=description,
                    instance="?",
                    holds=False,
                    detail=f"{type(e).__name__}: {e}",
                )

        return run

    return decorator


def _differs(left: object, right: object) -> Optional[str]:
    return None if left == right else f"{left} != {right}"


def _combo_differs(left: SymbolicCombo, right: SymbolicCombo) -> Optional[str]:
    if left == right:
        return None
    return f"difference {(left - right).render()}"


def _random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def _random_series(rng: random.Random, order: int) -> DegreeSeries:
    return DegreeSeries(tuple(_random_rational(rng) for _ in range(order)))


def _random_combo(rng: random.Random) -> SymbolicCombo:
    return SymbolicCombo(
        {f"X{rng.randint(0, 4)}": _random_rational(rng) for _ in range(rng.randint(0, 5))}
    )


def _rng() -> random.Random:
    return random.Random(get_config().random_seed)  # nosec B311: reproducible sampling


# ------------------------------------------------------------------------------------------------
# algebra
# ------------------------------------------------------------------------------------------------


@_identity("exp-log-inverse", "logarithm undoes the exponential transform of series")
def _exp_log_inverse(sweep: Sweep) -> Instances:
    rng = _rng()
    config = get_config()
    for sample in range(config.random_samples):
        s = _random_series(rng, rng.randint(1, config.truncation_order))
        yield f"sample {sample}", series_log(series_exp(s)) == s, None


@_identity("exp-multiplicative", "exp(a + b) = (1 + exp(a))(1 + exp(b)) - 1")
def _exp_multiplicative(sweep: Sweep) -> Instances:
    rng = _rng()
    for sample in range(get_config().random_samples):
        order = rng.randint(1, MAX_MULTIPLICATIVE_ORDER)
        a, b = _random_series(rng, order), _random_series(rng, order)
        yield (
            f"sample {sample}",
            series_exp(a + b) == series_product_unit(series_exp(a), series_exp(b)),
            None,
        )


@_identity("combo-vector-space", "scalars distribute over symbolic combinations")
def _combo_vector_space(sweep: Sweep) -> Instances:
    rng = _rng()
    for sample in range(get_config().random_samples):
        a, b = _random_combo(rng), _random_combo(rng)
        c1, c2 = _random_rational(rng), _random_rational(rng)
        holds = a * (c1 + c2) == a * c1 + a * c2 and (a + b) * c1 == a * c1 + b * c1
        yield f"sample {sample}", holds and a + b == b + a, None


@_identity("rational-canonical", "rational arithmetic stays reduced with positive denominator")
def _rational_canonical(sweep: Sweep) -> Instances:
    rng = _rng()
    for sample in range(get_config().random_samples):
        x, y = _random_rational(rng), _random_rational(rng)
        results = [x + y, x - y, x * y] + ([x / y] if y else [])
        holds = all(
            r.denominator > 0 and math.gcd(abs(r.numerator), r.denominator) == 1 for r in results
        )
        yield f"sample {sample}", holds, None


# ------------------------------------------------------------------------------------------------
# partitions
# ------------------------------------------------------------------------------------------------


def euler_partition_counts(n: int) -> list[int]:
    """p(0..n) from Euler's pentagonal number recurrence."""
    counts = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            pentagonals = (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2)
            if pentagonals[0] > m:
                break
            sign = 1 if k % 2 else -1
            for pentagonal in pentagonals:
                if pentagonal <= m:
                    total += sign * counts[m - pentagonal]
            k += 1
        counts[m] = total
    return counts


@_identity("compositions", "ordered sequences of all partitions of d number 2^(d-1)")
def _compositions(sweep: Sweep) -> Instances:
    for d in range(1, MAX_COMPOSITION_DEGREE + 1):
        total = sum(ordered_count(m) for m in partitions_of(d))
        yield f"d={d}", total == 2 ** (d - 1), _differs(total, 2 ** (d - 1))


@_identity("partition-count", "enumeration agrees with the pentagonal number recurrence")
def _partition_count(sweep: Sweep) -> Instances:
    expected = euler_partition_counts(MAX_PARTITION_DEGREE)
    for d in range(1, MAX_PARTITION_DEGREE + 1):
        found = len(partitions_of(d))
        yield f"d={d}", found == expected[d], _differs(found, expected[d])


@_identity("transverse-automorphisms", "(1^d)! = d!")
def _transverse_automorphisms(sweep: Sweep) -> Instances:
    for d in range(1, MAX_AUT_DEGREE + 1):
        aut = stats(Partition.ones(d)).aut
        yield f"d={d}", aut == math.factorial(d), _differs(aut, math.factorial(d))


# ------------------------------------------------------------------------------------------------
# closed forms
# ------------------------------------------------------------------------------------------------


@_identity("connected-to-disconnected", "exponential of connected degree 1, 2 values")
def _connected_to_disconnected(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        connected = DegreeSeries((gw_dim0(1, s), gw_dim0(2, s)))
        expected = DegreeSeries((gt_dim0(1, s), gt_dim0(2, s)))
        found = series_exp(connected)
        yield f"({s})", found == expected, _differs(found.values, expected.values)


@_identity("descendants-dimension-zero", "descendant formula without insertions")
def _descendants_dimension_zero(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            found, expected = mp_descendant(d, s, []), gt_dim0(d, s)
            yield f"d={d} ({s})", found == expected, _differs(found, expected)


def _exponent_lists(weight_max: int, length: int) -> list[tuple[int, ...]]:
    return [
        ks
        for ks in itertools.combinations_with_replacement(range(weight_max + 1), length)
        if sum(ks) <= weight_max
    ]


@_identity("descendants-symmetric", "descendant formula does not depend on insertion order")
def _descendants_symmetric(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            for ks in _exponent_lists(sweep.weight_max, 3):
                values = {mp_descendant(d, s, list(p)) for p in itertools.permutations(ks)}
                yield f"d={d} ({s}) k={ks}", len(values) == 1, None


@_identity("descendants-genus-reduction", "descendants are (-1)^p 2^h times genus zero values")
def _descendants_genus_reduction(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            ratio = s.sign * (2**s.genus if d == 2 else 1)
            for ks in _exponent_lists(sweep.weight_max, 2):
                found = mp_descendant(d, s, ks)
                expected = ratio * mp_descendant(d, GENUS_ZERO, ks)
                yield f"d={d} ({s}) k={ks}", found == expected, _differs(found, expected)


@_identity("degeneration-dimension-zero", "sum over contact partitions without insertions")
def _degeneration_dimension_zero(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            found = theorem_a_rhs(d, s, [], (0, 0), Registry.empty())
            yield f"d={d} ({s})", found == gt_dim0(d, s), _differs(found, gt_dim0(d, s))


@_identity("transverse-normalization", "transverse contact costs d! per fiber")
def _transverse_normalization(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            ones = Partition.ones(d)
            value = gt_dim0(d, s)
            one_sided = evaluate_dim0(local_key(d, s, m1=ones))
            two_sided = evaluate_dim0(local_key(d, s, m1=ones, m2=ones))
            holds = (
                one_sided == SymbolicCombo.constant(math.factorial(d) * value)
                and two_sided == SymbolicCombo.constant(math.factorial(d) ** 2 * value)
                and dimension_chi(local_key(d, s, m1=ones, m2=ones))
                == dimension_chi(local_key(d, s))
            )
            yield f"d={d} ({s})", holds, None


@_identity("registry-closed-forms", "registry entries agree with known closed forms")
def _registry_closed_forms(sweep: Sweep) -> Instances:
    for raw_key, value in sweep.registry.entries.items():
        expected = closed_form_value(InvariantKey.parse(raw_key))
        if expected is not None:
            yield raw_key, value == expected, _differs(value, expected)


# ------------------------------------------------------------------------------------------------
# sums
# ------------------------------------------------------------------------------------------------


def _spin_pairs(h_max: int) -> list[tuple[SpinKey, SpinKey]]:
    keys = spin_keys(h_max)
    return [(k1, k2) for k1 in keys for k2 in keys]


@_identity("split-symmetric", "joining two curves is symmetric")
def _split_symmetric(sweep: Sweep) -> Instances:
    rng = _rng()
    keys = spin_keys(sweep.h_max)
    for _ in range(get_config().random_samples):
        k1, k2 = rng.choice(keys), rng.choice(keys)
        holds = theorem_b_split(k1, k2) == theorem_b_split(k2, k1)
        yield f"({k1}) ({k2})", holds, None


@_identity("split-neutral", "joining a genus zero curve changes nothing")
def _split_neutral(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        found, expected = theorem_b_split(s, GENUS_ZERO), contact_two_key(s).symbol()
        yield f"({s})", found == expected, _combo_differs(found, expected)


@_identity("split-degeneration", "splitting formula equals the degeneration through F1")
def _split_degeneration(sweep: Sweep) -> Instances:
    for k1, k2 in _spin_pairs(min(sweep.h_max, MAX_SPLIT_GENUS)):
        found, expected = sum_scd_eval(k1, k2), theorem_b_split(k1, k2)
        yield f"({k1}) ({k2})", found == expected, _combo_differs(found, expected)


@_identity("split-reduced", "splitting formula holds after genus reduction")
def _split_reduced(sweep: Sweep) -> Instances:
    for k1, k2 in _spin_pairs(sweep.h_max):
        if k1.genus + k2.genus > sweep.h_max:
            continue
        found = express_in_genus_zero(theorem_b_split(k1, k2))
        expected = express_in_genus_zero(contact_two_key(k1 + k2).symbol())
        yield f"({k1}) ({k2})", found == expected, _combo_differs(found, expected)


def _descent_keys(h_max: int) -> list[SpinKey]:
    return [s for s in spin_keys(h_max) if s.genus >= 2 or s == SpinKey(1, Parity.even)]


@_identity("descent-reduced", "genus lowering formula holds after genus reduction")
def _descent_reduced(sweep: Sweep) -> Instances:
    for s in _descent_keys(sweep.h_max):
        found = express_in_genus_zero(theorem_b_descent(s))
        expected = express_in_genus_zero(contact_two_key(s).symbol())
        yield f"({s})", found == expected, _combo_differs(found, expected)


@_identity("descent-degeneration", "genus lowering formula equals the degeneration through F1")
def _descent_degeneration(sweep: Sweep) -> Instances:
    for s in _descent_keys(sweep.h_max):
        found, expected = sum_descent_eval(s), theorem_b_descent(s)
        yield f"({s})", found == expected, _combo_differs(found, expected)


@_identity("descendant-reduction", "degree 1, 2 descendants reduce to genus zero via F0")
def _descendant_reduction(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        for d in (1, 2):
            result = verify_mp_reduction(s, d)
            yield f"d={d} ({s})", result.holds, None if result.holds else f"ratio {result.ratio}"


# ------------------------------------------------------------------------------------------------
# reduction
# ------------------------------------------------------------------------------------------------


@_identity("genus-reduction", "GT_(2)^{loc,h,p} = (-1)^p 2^h GT_(2)^{loc,0,+} by induction")
def _genus_reduction(sweep: Sweep) -> Instances:
    for s in spin_keys(sweep.h_max):
        coefficient, trace = reduce_genus_zero(s)
        expected = s.sign * 2**s.genus
        holds = coefficient == expected and len(trace) >= s.genus
        yield f"({s})", holds, _differs(coefficient, expected)


@_identity("odd-genus-zero-rejected", "there is no odd spin curve of genus zero")
def _odd_genus_zero_rejected(sweep: Sweep) -> Instances:
    try:
        SpinKey(0, Parity.odd)
    except InvalidInput:
        yield "(0,-)", True, None
    else:
        yield "(0,-)", False, "accepted"


# ------------------------------------------------------------------------------------------------
# trr
# ------------------------------------------------------------------------------------------------


@_identity("base-absolute", "GW_{k,0}(tau_{k-1}(F*) F*) = (-1)^(k-1)/k!")
def _base_absolute(sweep: Sweep) -> Instances:
    for k in range(1, MAX_BASE_DEGREE + 1):
        expected = Fraction((-1) ** (k - 1), math.factorial(k))
        yield f"k={k}", base_absolute(k) == expected, _differs(base_absolute(k), expected)


@_identity("base-relative", "GW_{(1^k),(1^k),0}(phi^{k-1}(F*) F*) = (-1)^(k-1) k!")
def _base_relative(sweep: Sweep) -> Instances:
    for k in range(1, MAX_BASE_DEGREE + 1):
        expected = Fraction((-1) ** (k - 1) * math.factorial(k))
        yield f"k={k}", base_relative(k) == expected, _differs(base_relative(k), expected)


@_identity("base-product", "absolute and relative base cases multiply to 1")
def _base_product(sweep: Sweep) -> Instances:
    for k in range(1, MAX_BASE_DEGREE + 1):
        yield f"k={k}", base_absolute(k) * base_relative(k) == 1, None


def insertion_multisets(n: int, weight_max: int) -> list[tuple[tuple[int, int], ...]]:
    """Multisets of n insertions (s, t) with ∑(s + t) ≤ weight_max."""
    pairs = sorted(
        ((s, t) for s in range(weight_max + 1) for t in range(weight_max + 1 - s)), reverse=True
    )
    return [
        insertions
        for insertions in itertools.combinations_with_replacement(pairs, n)
        if sum(s + t for s, t in insertions) <= weight_max
    ]


def on_shell_exprs(
    d_max: int, weight_max: int, sizes: Iterable[int]
) -> Iterator[tuple[int, int, tuple[tuple[int, int], ...]]]:
    """(d, g, insertions) satisfying ∑(s_i + t_i) = d + g − 1."""
    for n in sizes:
        for insertions in insertion_multisets(n, weight_max):
            total = sum(s + t for s, t in insertions)
            for d in range(1, d_max + 1):
                g = total - d + 1
                if g >= 0:
                    yield d, g, insertions


@_identity("relative-equals-absolute", "GW_{(1^d),(1^d),g} = (d!)^2 GW_{d,g} after reduction")
def _relative_equals_absolute(sweep: Sweep) -> Instances:
    for d, g, insertions in on_shell_exprs(sweep.d_max, sweep.weight_max, (3, 4, 5)):
        result = verify_ap(d, g, insertions)
        yield str(MixedExpr.of(d, g, insertions)), result.holds, None


@_identity("padded-relative-equals-absolute", "same comparison with fewer than 3 insertions")
def _padded_relative_equals_absolute(sweep: Sweep) -> Instances:
    for d, g, insertions in on_shell_exprs(sweep.d_max, sweep.weight_max, (1, 2)):
        yield str(MixedExpr.of(d, g, insertions)), verify_dec_rel(d, g, insertions), None


@_identity("reduction-order-independent", "leftmost and rightmost rewriting agree")
def _reduction_order_independent(sweep: Sweep) -> Instances:
    for n in (3, 4, 5):
        for insertions in insertion_multisets(n, sweep.weight_max):
            if not any(s for s, _ in insertions):
                continue
            for d in range(1, sweep.d_max + 1):
                for flavor in ExprFlavor:
                    e = MixedExpr.of(d, 0, insertions, flavor)
                    results = [reduce_full(e, strategy) for strategy in STRATEGIES]
                    yield str(e), results[0] == results[1], _combo_differs(*results)


@_identity("correction-filter", "no correction term when s_j >= d")
def _correction_filter(sweep: Sweep) -> Instances:
    for d in range(1, MAX_FILTER_DEGREE + 1):
        for s_j in range(1, MAX_FILTER_POWER + 1):
            for flavor in ExprFlavor:
                e = MixedExpr.of(d, 0, [(s_j, 0), (0, 0), (0, 0)], flavor)
                terms = len(trr_step(e, 0).terms)
                yield str(e), terms == (1 if s_j >= d else 2), f"{terms} terms"


SUITES: dict[Suite, list[Identity]] = {
    Suite.algebra: [
        _exp_log_inverse,
        _exp_multiplicative,
        _combo_vector_space,
        _rational_canonical,
    ],
    Suite.partitions: [_compositions, _partition_count, _transverse_automorphisms],
    Suite.closed: [
        _connected_to_disconnected,
        _descendants_dimension_zero,
        _descendants_symmetric,
        _descendants_genus_reduction,
        _degeneration_dimension_zero,
        _transverse_normalization,
        _registry_closed_forms,
    ],
    Suite.sums: [
        _split_symmetric,
        _split_neutral,
        _split_degeneration,
        _split_reduced,
        _descent_reduced,
        _descent_degeneration,
        _descendant_reduction,
    ],
    Suite.reduction: [_genus_reduction, _odd_genus_zero_rejected],
    Suite.trr: [
        _base_absolute,
        _base_relative,
        _base_product,
        _relative_equals_absolute,
        _padded_relative_equals_absolute,
        _reduction_order_independent,
        _correction_filter,
    ],
}


def selected_suites(suite: Suite) -> list[Suite]:
    if suite is Suite.all:
        return list(SUITES)
    return [suite]


def run_verification(suite: Suite, sweep: Sweep) -> VerificationReport:
    """Run the identities of a suite (or of all suites) and collect the checks."""
    suites = selected_suites(suite)
    identities = [identity for name in suites for identity in SUITES[name]]
    log.info("Verifying %d identities of %s", len(identities), ", ".join(s.value for s in suites))

    with ThreadPoolExecutor(max_workers=get_config().concurrency_limit) as executor:
        results = executor.map(lambda identity: list(identity(sweep)), identities)
        checks = [check for result in results for check in result]

    report = VerificationReport(suites=[s.value for s in suites], checks=checks)
    log.info("%d of %d checks passed", len(checks) - len(report.failures), len(checks))
    return report
