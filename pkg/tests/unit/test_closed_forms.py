from fractions import Fraction
from typing import Optional

import pytest

from spingw.core.algebra import SymbolicCombo
from spingw.core.closed_forms import (
    GENUS_ZERO,
    Count,
    Flavor,
    InsertionKind,
    InvariantKey,
    NormalizedKey,
    Parity,
    SpinKey,
    Target,
    closed_form_value,
    contact_two_key,
    dimension_chi,
    evaluate_dim0,
    f0_relative,
    gt_dim0,
    gw_dim0,
    label_of,
    local_key,
    mp_descendant,
    normalize_relative,
    spin_keys,
)
from spingw.core.errors import InvalidInput, UnexpectedFormat, UnsupportedKey
from spingw.core.partitions import Partition

EVEN = Parity.even
ODD = Parity.odd


def f0_key(
    d: int, m1: Partition, m2: Optional[Partition] = None, count: Count = Count.GT
) -> InvariantKey:
    return InvariantKey(degree=d, m1=m1, m2=m2, count=count, target=Target.F0)


class TestSpinKey:
    def test_odd_genus_zero_rejected(self) -> None:
        with pytest.raises(InvalidInput, match=r"\(0, -\) does not exist"):
            SpinKey(0, ODD)

    def test_negative_genus_rejected(self) -> None:
        with pytest.raises(InvalidInput, match="nonnegative"):
            SpinKey(-1, EVEN)

    @pytest.mark.parametrize(
        "a, b, expect",
        [
            (SpinKey(1, ODD), SpinKey(1, ODD), SpinKey(2, EVEN)),
            (SpinKey(1, ODD), SpinKey(1, EVEN), SpinKey(2, ODD)),
            (GENUS_ZERO, SpinKey(3, ODD), SpinKey(3, ODD)),
        ],
    )
    def test_gluing_adds_genus_and_parity(self, a: SpinKey, b: SpinKey, expect: SpinKey) -> None:
        assert a + b == expect

    def test_sign(self) -> None:
        assert SpinKey(2, EVEN).sign == 1
        assert SpinKey(2, ODD).sign == -1
        assert str(SpinKey(2, ODD)) == "2,-"

    def test_spin_keys(self) -> None:
        assert spin_keys(2) == [
            SpinKey(0, EVEN),
            SpinKey(1, EVEN),
            SpinKey(1, ODD),
            SpinKey(2, EVEN),
            SpinKey(2, ODD),
        ]
        assert len(spin_keys(16)) == 33


class TestInvariantKey:
    def test_insertions_are_sorted(self) -> None:
        key = local_key(1, GENUS_ZERO, ks=[2, 0, 1])
        assert key.insertions == (0, 1, 2)
        assert key == local_key(1, GENUS_ZERO, ks=[0, 1, 2])

    def test_no_insertions_is_tau(self) -> None:
        key = local_key(1, GENUS_ZERO, kind=InsertionKind.phi)
        assert key.insertion_kind is InsertionKind.tau
        assert key == local_key(1, GENUS_ZERO)

    @pytest.mark.parametrize(
        "kwargs, expect_error",
        [
            ({"degree": 0, "spin": GENUS_ZERO}, "Degree must be at least 1"),
            ({"degree": 1}, "needs a spin curve"),
            (
                {"degree": 1, "spin": GENUS_ZERO, "m1": Partition((1,)), "target": Target.F0},
                "does not depend on a spin curve",
            ),
            ({"degree": 1, "target": Target.F0}, "needs a contact partition"),
            (
                {"degree": 1, "spin": GENUS_ZERO, "m2": Partition((1,))},
                "needs a first one",
            ),
            (
                {"degree": 3, "spin": GENUS_ZERO, "m1": Partition((1, 1))},
                "is not a partition of 3",
            ),
            ({"degree": 1, "spin": GENUS_ZERO, "insertions": (-1,)}, "nonnegative"),
        ],
    )
    def test_invalid(self, kwargs: dict, expect_error: str) -> None:
        with pytest.raises(InvalidInput, match=expect_error):
            InvariantKey(**kwargs)

    def test_flavor(self) -> None:
        s = SpinKey(1, EVEN)
        assert local_key(2, s).flavor is Flavor.absolute
        assert contact_two_key(s).flavor is Flavor.relative1
        assert local_key(2, s, Partition.ones(2), Partition((2,))).flavor is Flavor.relative2

    @pytest.mark.parametrize(
        "key, expect",
        [
            (contact_two_key(GENUS_ZERO), "GT|loc|h=0|p=+|d=2|m1=(2)|m2=|ins="),
            (
                local_key(1, SpinKey(3, ODD), ks=[1, 0]),
                "GT|loc|h=3|p=-|d=1|m1=|m2=|ins=tau:0,1",
            ),
            (
                InvariantKey(
                    degree=2,
                    m1=Partition.ones(2),
                    m2=Partition((2,)),
                    insertions=(1,),
                    insertion_kind=InsertionKind.phi,
                    target=Target.F0,
                ),
                "GT|F0|d=2|m1=(1,1)|m2=(2)|ins=phi:1",
            ),
            (
                InvariantKey(degree=3, spin=SpinKey(2, EVEN), count=Count.GW),
                "GW|loc|h=2|p=+|d=3|m1=|m2=|ins=",
            ),
        ],
    )
    def test_serialize_and_parse(self, key: InvariantKey, expect: str) -> None:
        assert key.serialize() == expect
        assert str(key) == expect
        assert InvariantKey.parse(expect) == key

    def test_parse_canonicalizes(self) -> None:
        key = InvariantKey.parse("GT|loc|h=0|p=+|d=3|m1=(1^3)|m2=|ins=tau:2,0")
        assert key.serialize() == "GT|loc|h=0|p=+|d=3|m1=(1,1,1)|m2=|ins=tau:0,2"

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "XX|loc|h=0|p=+|d=1|m1=|m2=|ins=",
            "GT|loc|h=0|p=+|d=1|m1=|m2=",
            "GT|loc|h=0|p=+|d=1|m1=|m2=|ins=|extra",
            "GT|loc|p=+|h=0|d=1|m1=|m2=|ins=",
            "GT|loc|h=0|p=-|d=1|m1=|m2=|ins=",
            "GT|loc|h=0|p=+|d=2|m1=(1)|m2=|ins=",
            "GT|loc|h=0|p=+|d=x|m1=|m2=|ins=",
            "GT|loc|h=0|p=+|d=1|m1=|m2=|ins=0,1",
            "GT|loc|h=0|p=+|d=1|m1=|m2=|ins=sigma:1",
            "GT|F0|h=0|p=+|d=1|m1=(1)|m2=|ins=",
        ],
    )
    def test_parse_rejects(self, text: str) -> None:
        with pytest.raises(UnexpectedFormat):
            InvariantKey.parse(text)

    @pytest.mark.parametrize(
        "key, expect",
        [
            (contact_two_key(GENUS_ZERO), "GT_(2)^{loc,0,+}"),
            (local_key(2, SpinKey(3, ODD)), "GT_2^{loc,3,-}"),
            (
                local_key(1, SpinKey(1, EVEN), ks=[0, 2]),
                "GT_1^{loc,1,+}(tau_0 tau_2)",
            ),
            (
                InvariantKey(
                    degree=2,
                    m1=Partition.ones(2),
                    m2=Partition((2,)),
                    insertions=(1,),
                    insertion_kind=InsertionKind.phi,
                    target=Target.F0,
                ),
                "GT_{(1,1),(2)}^{F0}(phi_1)",
            ),
        ],
    )
    def test_label(self, key: InvariantKey, expect: str) -> None:
        assert key.label() == expect
        assert label_of(key.serialize()) == expect

    def test_label_of_non_key(self) -> None:
        assert label_of("X") == "X"

    def test_symbol(self) -> None:
        key = contact_two_key(GENUS_ZERO)
        assert key.symbol() == SymbolicCombo.symbol(key.serialize())


class TestDimensionZero:
    @pytest.mark.parametrize(
        "d, s, expect_gw, expect_gt",
        [
            (1, SpinKey(0, EVEN), Fraction(1), Fraction(1)),
            (1, SpinKey(1, ODD), Fraction(-1), Fraction(-1)),
            (2, SpinKey(0, EVEN), Fraction(0), Fraction(1, 2)),
            (2, SpinKey(1, EVEN), Fraction(1, 2), Fraction(1)),
            (2, SpinKey(1, ODD), Fraction(-3, 2), Fraction(-1)),
            (2, SpinKey(3, ODD), Fraction(-9, 2), Fraction(-4)),
        ],
    )
    def test_values(self, d: int, s: SpinKey, expect_gw: Fraction, expect_gt: Fraction) -> None:
        assert gw_dim0(d, s) == expect_gw
        assert gt_dim0(d, s) == expect_gt

    @pytest.mark.parametrize("h", range(6))
    @pytest.mark.parametrize("p", [EVEN, ODD])
    def test_connected_to_disconnected(self, h: int, p: Parity) -> None:
        if h == 0 and p is ODD:
            pytest.skip("(0, -) does not exist")
        s = SpinKey(h, p)
        assert gt_dim0(1, s) == gw_dim0(1, s)
        assert gt_dim0(2, s) == gw_dim0(2, s) + gw_dim0(1, s) ** 2 / 2

    @pytest.mark.parametrize("d", [0, 3])
    def test_unknown_degree(self, d: int) -> None:
        with pytest.raises(InvalidInput, match="only for degree 1 and 2"):
            gt_dim0(d, GENUS_ZERO)
        with pytest.raises(InvalidInput, match="only for degree 1 and 2"):
            gw_dim0(d, GENUS_ZERO)


class TestDescendants:
    @pytest.mark.parametrize(
        "d, s, ks, expect",
        [
            (1, SpinKey(7, EVEN), [0], Fraction(1)),
            (1, SpinKey(2, ODD), [1], Fraction(1, 12)),
            (1, GENUS_ZERO, [1, 1], Fraction(1, 144)),
            (2, GENUS_ZERO, [0], Fraction(1)),
            (2, GENUS_ZERO, [1], Fraction(-1, 3)),
            (2, SpinKey(2, ODD), [0, 0], Fraction(-8)),
        ],
    )
    def test_values(self, d: int, s: SpinKey, ks: list[int], expect: Fraction) -> None:
        assert mp_descendant(d, s, ks) == expect

    @pytest.mark.parametrize("d", [1, 2])
    def test_no_insertions_is_dimension_zero(self, d: int) -> None:
        s = SpinKey(3, ODD)
        assert mp_descendant(d, s, []) == gt_dim0(d, s)

    def test_symmetric(self) -> None:
        s = SpinKey(2, EVEN)
        assert mp_descendant(2, s, [0, 1, 3]) == mp_descendant(2, s, [3, 0, 1])

    def test_divisor_equation(self) -> None:
        # a τ_0(F*) insertion multiplies by the degree
        s = SpinKey(1, ODD)
        assert mp_descendant(2, s, [1, 0]) == 2 * mp_descendant(2, s, [1])

    def test_negative_exponent(self) -> None:
        with pytest.raises(InvalidInput, match="nonnegative"):
            mp_descendant(1, GENUS_ZERO, [-1])


class TestRelative:
    def test_f0(self) -> None:
        assert f0_relative(4, two_sided=False) == 1
        assert f0_relative(4, two_sided=True) == 24
        with pytest.raises(InvalidInput):
            f0_relative(0, two_sided=True)

    def test_normalize_absolute_is_identity(self) -> None:
        key = local_key(3, GENUS_ZERO)
        assert normalize_relative(key) == NormalizedKey(Fraction(1), key)

    @pytest.mark.parametrize(
        "m1, m2, expect_factor, expect_m1",
        [
            ((1, 1, 1), None, 6, None),
            ((1, 1, 1), (1, 1, 1), 36, None),
            ((1, 2), (1, 1, 1), 6, (1, 2)),
            ((1, 1, 1), (1, 2), 6, (1, 2)),
            ((1, 2), None, 1, (1, 2)),
        ],
    )
    def test_normalize(
        self,
        m1: tuple[int, ...],
        m2: Optional[tuple[int, ...]],
        expect_factor: int,
        expect_m1: Optional[tuple[int, ...]],
    ) -> None:
        s = SpinKey(1, ODD)
        key = local_key(3, s, Partition(m1), Partition(m2) if m2 else None)
        factor, reduced = normalize_relative(key)
        assert factor == expect_factor
        assert reduced == local_key(3, s, Partition(expect_m1) if expect_m1 else None)

    @pytest.mark.parametrize(
        "key",
        [
            f0_key(2, Partition.ones(2)),
            local_key(1, GENUS_ZERO, Partition((1,)), ks=[0]),
            local_key(3, GENUS_ZERO, Partition((3,)), Partition((1, 2))),
        ],
    )
    def test_normalize_unsupported(self, key: InvariantKey) -> None:
        with pytest.raises(UnsupportedKey):
            normalize_relative(key)


class TestEvaluateDim0:
    @pytest.mark.parametrize(
        "key, expect",
        [
            (local_key(2, SpinKey(3, ODD)), Fraction(-4)),
            (local_key(2, SpinKey(3, ODD), Partition.ones(2)), Fraction(-8)),
            (local_key(2, SpinKey(1, EVEN), Partition.ones(2), Partition.ones(2)), Fraction(4)),
            (InvariantKey(degree=2, spin=SpinKey(1, ODD), count=Count.GW), Fraction(-3, 2)),
            (f0_key(2, Partition((2,))), Fraction(0)),
            (f0_key(3, Partition.ones(3)), Fraction(1)),
            (f0_key(3, Partition.ones(3), Partition.ones(3)), Fraction(6)),
        ],
    )
    def test_closed_forms(self, key: InvariantKey, expect: Fraction) -> None:
        assert evaluate_dim0(key) == SymbolicCombo.constant(expect)
        assert closed_form_value(key) == expect

    def test_symbols(self) -> None:
        s = SpinKey(2, EVEN)
        contact_two = contact_two_key(s)
        assert evaluate_dim0(contact_two) == contact_two.symbol()
        assert evaluate_dim0(local_key(2, s, Partition((2,)), Partition.ones(2))) == (
            2 * contact_two.symbol()
        )

        absolute = local_key(3, s)
        assert evaluate_dim0(local_key(3, s, Partition.ones(3))) == 6 * absolute.symbol()

        f0 = f0_key(3, Partition.ones(3), Partition((1, 2)))
        assert evaluate_dim0(f0) == f0.symbol()
        gw_f0 = f0_key(1, Partition((1,)), count=Count.GW)
        assert evaluate_dim0(gw_f0) == gw_f0.symbol()

        unnormalizable = local_key(3, s, Partition((3,)), Partition((1, 2)))
        assert evaluate_dim0(unnormalizable) == unnormalizable.symbol()
        assert closed_form_value(unnormalizable) is None

    def test_insertions_rejected(self) -> None:
        with pytest.raises(UnsupportedKey, match="not a dimension-zero invariant"):
            evaluate_dim0(local_key(1, GENUS_ZERO, ks=[0]))

    @pytest.mark.parametrize(
        "key, expect",
        [
            (local_key(1, SpinKey(2, ODD), ks=[1]), Fraction(1, 12)),
            (local_key(1, GENUS_ZERO, ks=[1], kind=InsertionKind.phi), None),
            (local_key(3, GENUS_ZERO, ks=[0]), None),
        ],
    )
    def test_closed_form_with_insertions(
        self, key: InvariantKey, expect: Optional[Fraction]
    ) -> None:
        assert closed_form_value(key) == expect


class TestDimensionChi:
    @pytest.mark.parametrize(
        "key, expect",
        [
            (local_key(1, GENUS_ZERO), 2),
            (local_key(2, SpinKey(1, EVEN)), 0),
            (local_key(1, GENUS_ZERO, ks=[1]), 0),
            (local_key(2, GENUS_ZERO, Partition((2,))), 2),
            (f0_key(1, Partition((1,))), 2),
            (f0_key(2, Partition.ones(2), Partition.ones(2)), 4),
        ],
    )
    def test_values(self, key: InvariantKey, expect: int) -> None:
        assert dimension_chi(key) == expect
