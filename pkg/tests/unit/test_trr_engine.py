from fractions import Fraction
from math import factorial

import pytest

from spingw.core.algebra import SymbolicCombo
from spingw.core.errors import (
    HypothesisViolation,
    InvalidInput,
    UnexpectedFormat,
    UnsupportedKey,
)
from spingw.core.trr_engine import (
    STRATEGIES,
    ExprFlavor,
    Insertion,
    MixedExpr,
    PurePhiSymbol,
    append_divisor,
    base_absolute,
    base_relative,
    label_of,
    reduce_full,
    reduce_padded,
    remove_divisor,
    trace_reduction,
    trr_absolute_step,
    trr_relative_step,
    trr_step,
    verify_ap,
    verify_dec_rel,
)

ABS = ExprFlavor.absolute
REL = ExprFlavor.relative_full


def sym(text: str) -> SymbolicCombo:
    return SymbolicCombo.symbol(text)


# GW_{2,0}(tau_1(F*) F* F*) and the two expressions one recursion step produces
SIMPLE = MixedExpr.of(2, 0, [(1, 0), (0, 0), (0, 0)])
SIMPLE_MAIN = "GW|{}|d=2|g=0|ins=(0,1);(0,0);(0,0)"
SIMPLE_CORRECTION = "GW|{}|d=1|g=0|ins=(0,0);(0,0);(0,0)"


class TestMixedExpr:
    def test_insertions_sorted_descending(self) -> None:
        e = MixedExpr.of(2, 0, [(0, 0), (0, 3), (1, 0)])
        assert e.insertions == (Insertion(1, 0), Insertion(0, 3), Insertion(0, 0))
        assert e == MixedExpr.of(2, 0, [(1, 0), (0, 0), (0, 3)])

    @pytest.mark.parametrize(
        "degree, genus, insertions, expect_error",
        [
            (0, 0, [(0, 0)], "Degree must be at least 1"),
            (1, -1, [(0, 0)], "Genus must be nonnegative"),
            (1, 0, [(-1, 0)], "must be nonnegative"),
        ],
    )
    def test_invalid(
        self, degree: int, genus: int, insertions: list[tuple[int, int]], expect_error: str
    ) -> None:
        with pytest.raises(InvalidInput, match=expect_error):
            MixedExpr.of(degree, genus, insertions)

    def test_weights(self) -> None:
        e = MixedExpr.of(3, 1, [(2, 1), (0, 0), (0, 0)])
        assert e.n == 3
        assert e.weight == 2
        assert e.total_weight == 3
        assert e.is_on_shell()
        assert not e.is_pure()
        assert MixedExpr.of(3, 0, [(0, 1), (0, 0)]).is_pure()

    @pytest.mark.parametrize(
        "e, expect",
        [
            (SIMPLE, "GW|abs|d=2|g=0|ins=(1,0);(0,0);(0,0)"),
            (MixedExpr.of(3, 1, [(0, 2)], REL), "GW|rel|d=3|g=1|ins=(0,2)"),
            (MixedExpr.of(1, 0, []), "GW|abs|d=1|g=0|ins="),
        ],
    )
    def test_serialize_and_parse(self, e: MixedExpr, expect: str) -> None:
        assert e.serialize() == expect
        assert MixedExpr.parse(expect) == e

    @pytest.mark.parametrize(
        "text",
        [
            "GW|xyz|d=1|g=0|ins=",
            "GT|abs|d=1|g=0|ins=",
            "GW|abs|d=1|g=0|ins=(1,0);(a,0)",
            "GW|abs|d=0|g=0|ins=",
        ],
    )
    def test_parse_rejects(self, text: str) -> None:
        with pytest.raises((UnexpectedFormat, InvalidInput)):
            MixedExpr.parse(text)

    def test_label(self) -> None:
        assert SIMPLE.label() == "GW_{2,0}(tau_1(F*), F*, F*)"
        relative = MixedExpr.of(2, 1, [(1, 2), (0, 1)], REL)
        assert relative.label() == "GW_{(1^2),(1^2),1}(tau_1 phi^2(F*), phi^1(F*))"
        assert label_of(relative.serialize()) == relative.label()
        assert label_of("X") == "X"

    def test_pure_symbol(self) -> None:
        e = MixedExpr.of(2, 0, [(0, 2), (0, 0), (0, 1)], REL)
        pure = e.pure_symbol()
        assert pure == PurePhiSymbol(2, 0, (0, 1, 2), REL)
        assert pure.to_expr() == e
        assert pure.serialize() == e.serialize()
        with pytest.raises(UnsupportedKey, match="still has descendants"):
            SIMPLE.pure_symbol()


class TestBaseCases:
    @pytest.mark.parametrize("k", range(1, 10))
    def test_closed_forms(self, k: int) -> None:
        assert base_absolute(k) == Fraction((-1) ** (k - 1), factorial(k))
        assert base_relative(k) == (-1) ** (k - 1) * factorial(k)
        assert base_absolute(k) * base_relative(k) == 1

    def test_first_values(self) -> None:
        assert [base_absolute(k) for k in range(1, 5)] == [
            1,
            Fraction(-1, 2),
            Fraction(1, 6),
            Fraction(-1, 24),
        ]
        assert [base_relative(k) for k in range(1, 5)] == [1, -2, 6, -24]

    def test_invalid_degree(self) -> None:
        with pytest.raises(InvalidInput):
            base_absolute(0)
        with pytest.raises(InvalidInput):
            base_relative(0)


class TestRecursionStep:
    def test_absolute_step(self) -> None:
        assert trr_absolute_step(SIMPLE, 0) == sym(SIMPLE_MAIN.format("abs")) - sym(
            SIMPLE_CORRECTION.format("abs")
        )

    def test_relative_step(self) -> None:
        e = SIMPLE.with_flavor(REL)
        expect = sym(SIMPLE_MAIN.format("rel")) - sym(SIMPLE_CORRECTION.format("rel")) * 4
        assert trr_relative_step(e, 0) == expect
        assert trr_step(e, 0) == expect

    @pytest.mark.parametrize("flavor", list(ExprFlavor))
    def test_no_correction_when_power_reaches_degree(self, flavor: ExprFlavor) -> None:
        e = MixedExpr.of(1, 0, [(1, 0), (0, 0), (0, 0)], flavor)
        assert trr_step(e, 0) == sym(f"GW|{flavor.value}|d=1|g=0|ins=(0,1);(0,0);(0,0)")

    def test_wrong_flavor(self) -> None:
        with pytest.raises(UnsupportedKey, match="is not absolute"):
            trr_absolute_step(SIMPLE.with_flavor(REL), 0)
        with pytest.raises(UnsupportedKey, match="is not relative full"):
            trr_relative_step(SIMPLE, 0)

    def test_too_few_insertions(self) -> None:
        with pytest.raises(HypothesisViolation, match="at least 3 insertions"):
            trr_step(MixedExpr.of(2, 0, [(1, 0), (0, 0)]), 0)

    def test_no_such_insertion(self) -> None:
        with pytest.raises(InvalidInput, match="No insertion 3"):
            trr_step(SIMPLE, 3)

    def test_insertion_without_descendant(self) -> None:
        with pytest.raises(HypothesisViolation, match="no ψ-power to trade"):
            trr_step(SIMPLE, 1)


class TestDivisor:
    def test_append_and_remove(self) -> None:
        e = MixedExpr.of(3, 0, [(1, 1)])
        padded = append_divisor(e)
        assert padded.factor == 3
        assert padded.expr == MixedExpr.of(3, 0, [(1, 1), (0, 0)])

        stripped = remove_divisor(padded.expr)
        assert stripped.factor == Fraction(1, 3)
        assert stripped.expr == e

    def test_remove_keeps_phi_insertions(self) -> None:
        e = MixedExpr.of(2, 1, [(0, 1), (0, 0), (1, 0), (0, 0)], REL)
        stripped = remove_divisor(e)
        assert stripped.factor == Fraction(1, 2)
        assert stripped.expr == MixedExpr.of(2, 1, [(1, 0), (0, 1), (0, 0)], REL)

    @pytest.mark.parametrize(
        "insertion, plain",
        [((0, 0), True), ((0, 1), False), ((1, 0), False)],
    )
    def test_is_plain(self, insertion: tuple[int, int], plain: bool) -> None:
        assert Insertion(*insertion).is_plain() is plain

    def test_remove_needs_plain_insertion(self) -> None:
        with pytest.raises(HypothesisViolation, match="no plain F\\* insertion"):
            remove_divisor(MixedExpr.of(3, 0, [(1, 1)]))


class TestReduction:
    CONFLUENT = MixedExpr.of(3, 0, [(2, 0), (1, 0), (0, 0)])
    CONFLUENT_RESULT = (
        sym("GW|abs|d=3|g=0|ins=(0,2);(0,1);(0,0)")
        - sym("GW|abs|d=2|g=0|ins=(0,2);(0,0);(0,0)")
        - sym("GW|abs|d=2|g=0|ins=(0,1);(0,1);(0,0)")
        + sym("GW|abs|d=1|g=0|ins=(0,1);(0,0);(0,0)") * Fraction(3, 2)
    )

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_reduce_full(self, strategy: str) -> None:
        assert reduce_full(self.CONFLUENT, strategy) == self.CONFLUENT_RESULT  # type: ignore

    def test_pure_expression_is_its_own_reduction(self) -> None:
        e = MixedExpr.of(2, 0, [(0, 1), (0, 0), (0, 0)])
        assert reduce_full(e) == e.symbol()

    def test_every_symbol_is_pure(self) -> None:
        e = MixedExpr.of(4, 0, [(3, 0), (2, 1), (1, 0), (0, 0)], REL)
        result = reduce_full(e)
        assert not result.is_zero()
        assert all(MixedExpr.parse(symbol).is_pure() for symbol in result.symbols())
        assert all(
            MixedExpr.parse(symbol).pure_symbol().serialize() == symbol
            for symbol in result.symbols()
        )

    def test_trace(self) -> None:
        combo, trace = trace_reduction(self.CONFLUENT)
        assert combo == self.CONFLUENT_RESULT
        assert len(trace) == 5
        assert trace.steps[0].before == self.CONFLUENT.symbol()
        assert all(step.rule.startswith("trr-absolute[") for step in trace.steps)

    def test_too_few_insertions(self) -> None:
        with pytest.raises(HypothesisViolation, match="needs at least 3 insertions") as exc_info:
            reduce_full(MixedExpr.of(2, 0, [(1, 0)]))
        assert exc_info.value.solution == "Use the padded reduction for fewer insertions."

    def test_unknown_strategy(self) -> None:
        with pytest.raises(InvalidInput, match="Unknown reduction strategy"):
            reduce_full(self.CONFLUENT, "middle")  # type: ignore

    def test_padded(self) -> None:
        e = MixedExpr.of(2, 0, [(1, 0)])
        expect = (sym(SIMPLE_MAIN.format("abs")) - sym(SIMPLE_CORRECTION.format("abs"))) * (
            Fraction(1, 4)
        )
        assert reduce_padded(e) == expect
        assert reduce_padded(SIMPLE) == reduce_full(SIMPLE)

        pure = MixedExpr.of(2, 0, [(0, 1)])
        assert reduce_padded(pure) == pure.symbol()


class TestRelativeEqualsAbsolute:
    def test_simple(self) -> None:
        result = verify_ap(2, 0, [(1, 0), (0, 0), (0, 0)])
        assert result.holds
        assert result.absolute == trr_absolute_step(SIMPLE, 0)
        assert result.relative == trr_relative_step(SIMPLE.with_flavor(REL), 0)
        assert len(result.trace) == 1

    @pytest.mark.parametrize(
        "d, g, insertions",
        [
            (3, 0, [(2, 0), (0, 0), (0, 0)]),
            (3, 1, [(2, 0), (1, 0), (0, 0)]),
            (4, 0, [(1, 1), (1, 0), (0, 0), (0, 0)]),
            (2, 3, [(3, 0), (1, 0), (0, 1)]),
            (5, 0, [(4, 0), (0, 0), (0, 0)]),
        ],
    )
    def test_holds(self, d: int, g: int, insertions: list[tuple[int, int]]) -> None:
        assert verify_ap(d, g, insertions).holds

    @pytest.mark.parametrize(
        "d, g, insertions",
        [
            (2, 0, [(1, 0)]),
            (3, 0, [(2, 0)]),
            (3, 1, [(2, 0), (1, 0)]),
            (1, 0, [(0, 0)]),
        ],
    )
    def test_padded_holds(self, d: int, g: int, insertions: list[tuple[int, int]]) -> None:
        assert verify_dec_rel(d, g, insertions)
