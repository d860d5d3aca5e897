"""Canonical invariant keys and the closed-form values of local invariants of spin curves.

A spin curve enters every value only through its genus h and parity p. Dimension-zero invariants
of degree 1 and 2, the descendant formulas of degree 1 and 2 and the relative invariants of F₀
with transverse contact are known exactly; everything else is carried as an opaque symbol whose
name is the canonical key string.
"""

import enum
import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from spingw.core.algebra import SymbolicCombo
from spingw.core.errors import InvalidInput, UnexpectedFormat, UnsupportedKey
from spingw.core.partitions import Partition

log = logging.getLogger(__name__)


class Parity(str, enum.Enum):
    """Parity of a spin curve, h⁰(N) mod 2."""

    even = "+"
    odd = "-"

    @property
    def sign(self) -> int:
        """(−1)^p."""
        return 1 if self is Parity.even else -1

    def add(self, other: "Parity") -> "Parity":
        return Parity.even if self is other else Parity.odd


@dataclass(frozen=True, order=True)
class SpinKey:
    """Genus and parity of a spin curve."""

    genus: int
    parity: Parity

    def __post_init__(self) -> None:
        if self.genus < 0:
            raise InvalidInput(f"Genus must be nonnegative: {self.genus}")
        if self.genus == 0 and self.parity is Parity.odd:
            raise InvalidInput("The only genus zero spin curve is even, (0, -) does not exist")

    @property
    def sign(self) -> int:
        return self.parity.sign

    def __add__(self, other: "SpinKey") -> "SpinKey":
        if not isinstance(other, SpinKey):
            return NotImplemented
        return SpinKey(self.genus + other.genus, self.parity.add(other.parity))

    def __str__(self) -> str:
        return f"{self.genus},{self.parity.value}"


GENUS_ZERO = SpinKey(0, Parity.even)


def spin_keys(h_max: int) -> list[SpinKey]:
    """All valid spin keys with genus ≤ h_max: genus ascending, even parity first."""
    return [
        SpinKey(h, p)
        for h in range(h_max + 1)
        for p in (Parity.even, Parity.odd)
        if not (h == 0 and p is Parity.odd)
    ]


class Count(str, enum.Enum):
    """Connected (GW) or possibly disconnected (GT) domains."""

    GT = "GT"
    GW = "GW"


class Target(str, enum.Enum):
    """Local invariant of a spin curve, or invariant of the ruled surface F₀."""

    loc = "loc"
    F0 = "F0"


class InsertionKind(str, enum.Enum):
    """Descendant classes: ψ-powers (absolute) or φ-powers (relative)."""

    tau = "tau"
    phi = "phi"


class Flavor(str, enum.Enum):
    absolute = "absolute"
    relative1 = "relative1"
    relative2 = "relative2"


@dataclass(frozen=True)
class InvariantKey:
    """Canonical identity of an invariant.

    All insertions carry the fiber class F*, so the key is symmetric in them and keeps the
    descendant exponents sorted. An invariant without insertions always has kind ``tau``.
    """

    degree: int
    spin: Optional[SpinKey] = None
    m1: Optional[Partition] = None
    m2: Optional[Partition] = None
    insertions: tuple[int, ...] = ()
    insertion_kind: InsertionKind = InsertionKind.tau
    count: Count = Count.GT
    target: Target = Target.loc

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise InvalidInput(f"Degree must be at least 1: {self.degree}")
        if self.target is Target.loc and self.spin is None:
            raise InvalidInput("A local invariant needs a spin curve (genus and parity)")
        if self.target is Target.F0:
            if self.spin is not None:
                raise InvalidInput("An invariant of F0 does not depend on a spin curve")
            if self.m1 is None:
                raise InvalidInput("An invariant of F0 needs a contact partition")
        if self.m2 is not None and self.m1 is None:
            raise InvalidInput("The second contact partition needs a first one")
        for m in (self.m1, self.m2):
            if m is not None and m.degree != self.degree:
                raise InvalidInput(f"Contact partition {m} is not a partition of {self.degree}")
        if any(k < 0 for k in self.insertions):
            raise InvalidInput(f"Descendant exponents must be nonnegative: {self.insertions}")

        object.__setattr__(self, "insertions", tuple(sorted(self.insertions)))
        if not self.insertions:
            object.__setattr__(self, "insertion_kind", InsertionKind.tau)

    @property
    def flavor(self) -> Flavor:
        if self.m1 is None:
            return Flavor.absolute
        if self.m2 is None:
            return Flavor.relative1
        return Flavor.relative2

    @property
    def partitions(self) -> list[Partition]:
        return [m for m in (self.m1, self.m2) if m is not None]

    def serialize(self) -> str:
        """Canonical string, used as the symbol of the invariant in combos and registries."""
        fields = [self.count.value, self.target.value]
        if self.spin is not None:
            fields += [f"h={self.spin.genus}", f"p={self.spin.parity.value}"]
        fields += [
            f"d={self.degree}",
            f"m1={self.m1 or ''}",
            f"m2={self.m2 or ''}",
        ]
        if self.insertions:
            ks = ",".join(map(str, self.insertions))
            fields.append(f"ins={self.insertion_kind.value}:{ks}")
        else:
            fields.append("ins=")
        return "|".join(fields)

    def __str__(self) -> str:
        return self.serialize()

    @classmethod
    def parse(cls, text: str) -> "InvariantKey":
        """Parse the canonical serialization.

        :raises UnexpectedFormat: if the text is not a serialized key
        """
        fields = text.strip().split("|")
        try:
            count, target = Count(fields[0]), Target(fields[1])
        except (IndexError, ValueError):
            raise UnexpectedFormat(f"Not an invariant key: {text!r}")

        expected = ["d", "m1", "m2", "ins"]
        if target is Target.loc:
            expected = ["h", "p", *expected]
        values = {}
        for name, item in zip(expected, fields[2:]):
            prefix = f"{name}="
            if not item.startswith(prefix):
                raise UnexpectedFormat(f"Expected field {name!r} in invariant key {text!r}")
            values[name] = item[len(prefix) :]
        if len(fields) != len(expected) + 2:
            raise UnexpectedFormat(f"Wrong number of fields in invariant key {text!r}")

        try:
            spin = None
            if target is Target.loc:
                spin = SpinKey(int(values["h"]), Parity(values["p"]))
            kind, ks = _parse_insertions(values["ins"])
            return cls(
                degree=int(values["d"]),
                spin=spin,
                m1=Partition.parse(values["m1"]) if values["m1"] else None,
                m2=Partition.parse(values["m2"]) if values["m2"] else None,
                insertions=ks,
                insertion_kind=kind,
                count=count,
                target=target,
            )
        except (ValueError, InvalidInput) as e:
            raise UnexpectedFormat(f"Invalid invariant key {text!r}: {e}") from e

    def label(self) -> str:
        """Readable name, e.g. GT_(2)^{loc,0,+} or GT_{(1,1),(2)}^{F0}(phi_1)."""
        if self.flavor is Flavor.absolute:
            subscript = str(self.degree)
        elif self.flavor is Flavor.relative1:
            subscript = str(self.m1)
        else:
            subscript = f"{{{self.m1},{self.m2}}}"

        if self.spin is not None:
            superscript = f"{{loc,{self.spin}}}"
        else:
            superscript = "{F0}"

        label = f"{self.count.value}_{subscript}^{superscript}"
        if self.insertions:
            kind = self.insertion_kind.value
            label += "(" + " ".join(f"{kind}_{k}" for k in self.insertions) + ")"
        return label

    def symbol(self) -> SymbolicCombo:
        """The key as an opaque symbol."""
        return SymbolicCombo.symbol(self.serialize())


def _parse_insertions(text: str) -> tuple[InsertionKind, tuple[int, ...]]:
    if not text:
        return InsertionKind.tau, ()
    kind, sep, ks = text.partition(":")
    if not sep:
        raise ValueError(f"insertions must look like 'kind:k1,k2', got {text!r}")
    if not ks:
        return InsertionKind(kind), ()
    return InsertionKind(kind), tuple(int(k) for k in ks.split(","))


def local_key(
    d: int,
    s: SpinKey,
    m1: Optional[Partition] = None,
    m2: Optional[Partition] = None,
    ks: Sequence[int] = (),
    kind: InsertionKind = InsertionKind.tau,
) -> InvariantKey:
    return InvariantKey(degree=d, spin=s, m1=m1, m2=m2, insertions=tuple(ks), insertion_kind=kind)


def contact_two_key(s: SpinKey) -> InvariantKey:
    """GT_(2)^{loc,h,p}, the degree 2 invariant with a single tangency of order 2."""
    return local_key(2, s, m1=Partition((2,)))


def label_of(symbol: str) -> str:
    """Label of a serialized invariant key, or the symbol itself if it is not one."""
    try:
        return InvariantKey.parse(symbol).label()
    except UnexpectedFormat:
        return symbol


# ------------------------------------------------------------------------------------------------
# Closed forms
# ------------------------------------------------------------------------------------------------


def _check_low_degree(d: int) -> None:
    if d not in (1, 2):
        raise InvalidInput(f"A closed form is known only for degree 1 and 2, not {d}")


def gw_dim0(d: int, s: SpinKey) -> Fraction:
    """Connected dimension-zero invariant GW_d^{loc,h,p} for d ∈ {1, 2}."""
    _check_low_degree(d)
    if d == 1:
        return Fraction(s.sign)
    return Fraction(s.sign * 2**s.genus - 1, 2)


def gt_dim0(d: int, s: SpinKey) -> Fraction:
    """Dimension-zero invariant GT_d^{loc,h,p} for d ∈ {1, 2}."""
    _check_low_degree(d)
    if d == 1:
        return Fraction(s.sign)
    return s.sign * Fraction(2) ** (s.genus - 1)


def _descendant_factor(k: int) -> Fraction:
    return Fraction(math.factorial(k), math.factorial(2 * k + 1))


def mp_descendant(d: int, s: SpinKey, ks: Sequence[int]) -> Fraction:
    """Descendant invariant GT_d^{loc,h,p}(∏ τ_{k_i}(F*)) for d ∈ {1, 2}.

    The empty product is 1, so ``ks=[]`` gives the dimension-zero value.
    """
    _check_low_degree(d)
    if any(k < 0 for k in ks):
        raise InvalidInput(f"Descendant exponents must be nonnegative: {list(ks)}")

    value = Fraction(s.sign)
    if d == 1:
        for k in ks:
            value *= _descendant_factor(k) * Fraction(-2) ** -k
    else:
        value *= Fraction(2) ** (s.genus + len(ks) - 1)
        for k in ks:
            value *= _descendant_factor(k) * Fraction(-2) ** k
    return value


def f0_relative(d: int, two_sided: bool) -> Fraction:
    """GT^{F0}_{(1^d)} = 1 and GT^{F0}_{(1^d),(1^d)} = d!."""
    if d < 1:
        raise InvalidInput(f"Degree must be at least 1: {d}")
    return Fraction(math.factorial(d) if two_sided else 1)


class NormalizedKey(NamedTuple):
    """value(key) = factor · value(reduced)."""

    factor: Fraction
    reduced: InvariantKey


def normalize_relative(key: InvariantKey) -> NormalizedKey:
    """Trade transverse contact (1^d) along a fiber for a factor of d!.

    For dimension-zero local invariants
    GT_d = GT_(1^d) / d! = GT_{(1^d),(1^d)} / (d!)² and GT_m = GT_{m,(1^d)} / d!.

    :raises UnsupportedKey: for invariants with insertions or of F0
    """
    if key.target is not Target.loc:
        raise UnsupportedKey(f"Only local invariants can be normalized: {key}")
    if key.insertions:
        raise UnsupportedKey(f"Only dimension-zero invariants can be normalized: {key}")

    d_factorial = math.factorial(key.degree)
    absolute = replace(key, m1=None, m2=None)

    if key.m1 is None:
        return NormalizedKey(Fraction(1), key)
    if key.m2 is None:
        if key.m1.is_ones():
            return NormalizedKey(Fraction(d_factorial), absolute)
        return NormalizedKey(Fraction(1), key)
    if key.m1.is_ones() and key.m2.is_ones():
        return NormalizedKey(Fraction(d_factorial**2), absolute)
    if key.m2.is_ones():
        return NormalizedKey(Fraction(d_factorial), replace(key, m2=None))
    if key.m1.is_ones():
        return NormalizedKey(Fraction(d_factorial), replace(key, m1=key.m2, m2=None))
    raise UnsupportedKey(
        f"Neither contact partition of {key.label()} is (1^{key.degree}), "
        "the key cannot be normalized"
    )


def dimension_chi(key: InvariantKey) -> int:
    """Euler characteristic of the domain forced by the dimension constraint.

    Local: ∑k_i = d(1−h) − χ/2 + ∑(ℓ(mⁱ) − d). F0: the glued side m1 additionally carries
    ℓ(m1) point contact constraints and c_1 pairs to 2d.
    """
    correction = sum(m.length - key.degree for m in key.partitions)
    weight = sum(key.insertions)
    if key.spin is not None:
        return 2 * (key.degree * (1 - key.spin.genus) - weight + correction)

    assert key.m1 is not None  # enforced by InvariantKey
    return 2 * (2 * key.degree - weight + correction - key.m1.length)


def closed_form_value(key: InvariantKey) -> Optional[Fraction]:
    """Exact value of a key with a known closed form, None otherwise."""
    value = evaluate_dim0(key) if not key.insertions else None
    if value is not None and value.is_constant():
        return value.coefficient("1")
    if key.insertions and key.target is Target.loc and key.flavor is Flavor.absolute:
        if key.count is Count.GT and key.degree <= 2 and key.insertion_kind is InsertionKind.tau:
            assert key.spin is not None
            return mp_descendant(key.degree, key.spin, key.insertions)
    return None


def evaluate_dim0(key: InvariantKey) -> SymbolicCombo:
    """Value of a dimension-zero key: a closed form where one is known, else an opaque symbol.

    :raises UnsupportedKey: if the key has insertions
    """
    if key.insertions:
        raise UnsupportedKey(f"{key.label()} is not a dimension-zero invariant")

    if key.target is Target.F0:
        return _evaluate_f0_dim0(key)
    if key.count is Count.GW:
        if key.flavor is Flavor.absolute and key.degree <= 2:
            assert key.spin is not None
            return SymbolicCombo.constant(gw_dim0(key.degree, key.spin))
        return key.symbol()

    try:
        factor, reduced = normalize_relative(key)
    except UnsupportedKey:
        return key.symbol()
    if reduced.flavor is Flavor.absolute and reduced.degree <= 2:
        assert reduced.spin is not None
        return SymbolicCombo.constant(factor * gt_dim0(reduced.degree, reduced.spin))
    return reduced.symbol() * factor


def _evaluate_f0_dim0(key: InvariantKey) -> SymbolicCombo:
    assert key.m1 is not None
    if key.count is Count.GW:
        return key.symbol()
    # transverse contact on the glued side is forced by the dimension count
    if not key.m1.is_ones():
        return SymbolicCombo.zero()
    if key.m2 is None:
        return SymbolicCombo.constant(f0_relative(key.degree, two_sided=False))
    if key.m2.is_ones():
        return SymbolicCombo.constant(f0_relative(key.degree, two_sided=True))
    return key.symbol()
