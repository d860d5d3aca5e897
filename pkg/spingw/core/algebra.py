"""Exact scalars, truncated degree series and free linear combinations of opaque symbols.

Every invariant value is a :class:`fractions.Fraction`. Invariants that are not determined by a
closed form are carried as opaque symbols inside a :class:`SymbolicCombo`; the symbol of an
invariant is its canonical key string, so combos built along different code paths compare equal.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterator, Mapping, Union

log = logging.getLogger(__name__)

BigRational = Fraction
Scalar = Union[int, Fraction]

# the empty monomial
CONSTANT = "1"
_FACTOR_SEPARATOR = " * "

_RATIONAL_RE = re.compile(r"-?[0-9]+(?:/[0-9]+)?")


def format_rational(value: Fraction) -> str:
    """Render a rational as "p/q", or "p" when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse the strict "p/q" / "p" notation (no whitespace, optional leading "-").

    :raises ValueError: if the text is not in the notation or the denominator is zero
    """
    if not _RATIONAL_RE.fullmatch(text):
        raise ValueError(f"not a rational in p/q notation: {text!r}")
    numerator, _, denominator = text.partition("/")
    if denominator and int(denominator) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(numerator), int(denominator or 1))


# ------------------------------------------------------------------------------------------------
# Degree series
# ------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeSeries:
    """A generating series ∑_{1≤d≤T} c_d t^d truncated at degree T.

    ``values[d - 1]`` is the coefficient of t^d, so the truncation order is ``len(values)``.
    """

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("truncation order must be at least 1")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @classmethod
    def from_mapping(
        cls, coefficients: Mapping[int, Scalar], truncation_order: int
    ) -> "DegreeSeries":
        """Build a series from a sparse {degree: coefficient} mapping."""
        if truncation_order < 1:
            raise ValueError(f"truncation order must be at least 1: {truncation_order}")
        for degree in coefficients:
            if not 1 <= degree <= truncation_order:
                raise ValueError(f"degree {degree} outside 1..{truncation_order}")
        return cls(
            tuple(Fraction(coefficients.get(d, 0)) for d in range(1, truncation_order + 1))
        )

    @classmethod
    def zero(cls, truncation_order: int) -> "DegreeSeries":
        return cls.from_mapping({}, truncation_order)

    @property
    def truncation_order(self) -> int:
        return len(self.values)

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Nonzero coefficients keyed by degree; absent degrees are zero."""
        return {d: c for d, c in enumerate(self.values, start=1) if c}

    def coefficient(self, degree: int) -> Fraction:
        if 1 <= degree <= self.truncation_order:
            return self.values[degree - 1]
        return Fraction(0)

    def is_zero(self) -> bool:
        return not any(self.values)

    def truncate(self, truncation_order: int) -> "DegreeSeries":
        return DegreeSeries.from_mapping(
            {d: c for d, c in self.coefficients.items() if d <= truncation_order},
            truncation_order,
        )

    def __add__(self, other: "DegreeSeries") -> "DegreeSeries":
        if not isinstance(other, DegreeSeries):
            return NotImplemented
        _check_same_order(self, other)
        return DegreeSeries(tuple(a + b for a, b in zip(self.values, other.values)))


def _check_same_order(a: DegreeSeries, b: DegreeSeries) -> None:
    if a.truncation_order != b.truncation_order:
        raise ValueError(
            f"truncation orders differ: {a.truncation_order} != {b.truncation_order}"
        )


def series_exp(s: DegreeSeries) -> DegreeSeries:
    """Return the degree 1..T coefficients of exp(∑ s_d t^d) − 1.

    Uses n·B_n = ∑_{k=1}^{n} k·A_k·B_{n−k} with B_0 = 1, which follows from B' = A'·B.
    """
    a = s.values
    b = [Fraction(1)]
    for n in range(1, s.truncation_order + 1):
        b.append(sum((k * a[k - 1] * b[n - k] for k in range(1, n + 1)), Fraction(0)) / n)
    return DegreeSeries(tuple(b[1:]))


def series_log(s: DegreeSeries) -> DegreeSeries:
    """Return the degree 1..T coefficients of log(1 + ∑ s_d t^d).

    Uses n·A_n = n·S_n − ∑_{k=1}^{n−1} k·A_k·S_{n−k}, the same relation read backwards.
    """
    c = s.values
    a: list[Fraction] = []
    for n in range(1, s.truncation_order + 1):
        tail = sum((k * a[k - 1] * c[n - k - 1] for k in range(1, n)), Fraction(0))
        a.append(c[n - 1] - tail / n)
    return DegreeSeries(tuple(a))


def series_product_unit(a: DegreeSeries, b: DegreeSeries) -> DegreeSeries:
    """Return (1 + A)(1 + B) − 1 truncated at the common order."""
    _check_same_order(a, b)
    order = a.truncation_order
    values = []
    for n in range(1, order + 1):
        cross = sum((a.values[k - 1] * b.values[n - k - 1] for k in range(1, n)), Fraction(0))
        values.append(a.values[n - 1] + b.values[n - 1] + cross)
    return DegreeSeries(tuple(values))


# disconnected (GT) invariants are the exponential transform of connected (GW) ones
gt_from_gw = series_exp
gw_from_gt = series_log


# ------------------------------------------------------------------------------------------------
# Symbolic combinations
# ------------------------------------------------------------------------------------------------


def monomial(*factors: str) -> str:
    """Canonical monomial of the given symbols: sorted factors joined by " * "."""
    names = sorted(
        name
        for factor in factors
        for name in factor.split(_FACTOR_SEPARATOR)
        if name != CONSTANT
    )
    return _FACTOR_SEPARATOR.join(names) if names else CONSTANT


def monomial_factors(key: str) -> list[str]:
    """Split a canonical monomial back into its symbols; the constant has none."""
    if key == CONSTANT:
        return []
    return key.split(_FACTOR_SEPARATOR)


class SymbolicCombo:
    """A finite ℚ-linear combination of monomials in opaque symbols.

    Instances are immutable; zero coefficients are never stored and keys are canonical monomials
    (see :func:`monomial`). Arithmetic follows the usual operators:

    >>> x = SymbolicCombo.symbol("X")
    >>> (x + x - 2 * x).is_zero()
    True
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[str, Scalar] = MappingProxyType({})) -> None:
        normalized: dict[str, Fraction] = {}
        for key, coefficient in terms.items():
            canonical = monomial(key)
            normalized[canonical] = normalized.get(canonical, Fraction(0)) + Fraction(coefficient)
        self._terms = MappingProxyType({k: c for k, c in normalized.items() if c})

    @classmethod
    def zero(cls) -> "SymbolicCombo":
        return cls()

    @classmethod
    def constant(cls, value: Scalar) -> "SymbolicCombo":
        return cls({CONSTANT: value})

    @classmethod
    def symbol(cls, name: str, coefficient: Scalar = 1) -> "SymbolicCombo":
        return cls({name: coefficient})

    @property
    def terms(self) -> Mapping[str, Fraction]:
        return self._terms

    def items(self) -> Iterator[tuple[str, Fraction]]:
        return iter(self._terms.items())

    def coefficient(self, key: str) -> Fraction:
        return self._terms.get(monomial(key), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(key == CONSTANT for key in self._terms)

    def symbols(self) -> list[str]:
        """All distinct symbols occurring in the combo, sorted."""
        return sorted({name for key in self._terms for name in monomial_factors(key)})

    def map_symbols(self, replace: Callable[[str], "SymbolicCombo"]) -> "SymbolicCombo":
        """Substitute every symbol by the combo returned by ``replace``."""
        result = SymbolicCombo()
        for key, coefficient in self._terms.items():
            term = SymbolicCombo.constant(coefficient)
            for name in monomial_factors(key):
                term = term * replace(name)
            result = result + term
        return result

    def evaluate(self, lookup: Callable[[str], Fraction]) -> Fraction:
        """Assign a value to every symbol; symbols are looked up in order of appearance."""
        total = Fraction(0)
        for key, coefficient in self._terms.items():
            value = coefficient
            for name in monomial_factors(key):
                value *= lookup(name)
            total += value
        return total

    def render(self, label: Callable[[str], str] = str) -> str:
        """Human readable form: "c * label + c * label", constants first."""
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms, key=lambda k: (k != CONSTANT, k)):
            coefficient = self._terms[key]
            if key == CONSTANT:
                body = format_rational(abs(coefficient))
            else:
                names = " * ".join(label(name) for name in monomial_factors(key))
                body = f"{format_rational(abs(coefficient))} * {names}"
            if not parts:
                parts.append(f"-{body}" if coefficient < 0 else body)
            else:
                parts.append(f"- {body}" if coefficient < 0 else f"+ {body}")
        return " ".join(parts)

    def to_json(self) -> dict[str, str]:
        """Render as {monomial: "p/q"} with sorted keys."""
        return {key: format_rational(self._terms[key]) for key in sorted(self._terms)}

    def __add__(self, other: "SymbolicCombo") -> "SymbolicCombo":
        if not isinstance(other, SymbolicCombo):
            return NotImplemented
        merged = dict(self._terms)
        for key, coefficient in other._terms.items():
            merged[key] = merged.get(key, Fraction(0)) + coefficient
        return SymbolicCombo(merged)

    def __neg__(self) -> "SymbolicCombo":
        return SymbolicCombo({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "SymbolicCombo") -> "SymbolicCombo":
        if not isinstance(other, SymbolicCombo):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Union[Scalar, "SymbolicCombo"]) -> "SymbolicCombo":
        if isinstance(other, (int, Fraction)):
            return SymbolicCombo({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, SymbolicCombo):
            return NotImplemented
        product: dict[str, Fraction] = {}
        for key_a, coef_a in self._terms.items():
            for key_b, coef_b in other._terms.items():
                key = monomial(key_a, key_b)
                product[key] = product.get(key, Fraction(0)) + coef_a * coef_b
        return SymbolicCombo(product)

    def __rmul__(self, other: Scalar) -> "SymbolicCombo":
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolicCombo):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"SymbolicCombo({self.to_json()})"


def combo_add(a: SymbolicCombo, b: SymbolicCombo) -> SymbolicCombo:
    return a + b


def combo_scale(c: Scalar, a: SymbolicCombo) -> SymbolicCombo:
    return a * c


def combo_mul(a: SymbolicCombo, b: SymbolicCombo) -> SymbolicCombo:
    return a * b


def combo_substitute(a: SymbolicCombo, symbol: str, replacement: SymbolicCombo) -> SymbolicCombo:
    """Replace every occurrence of ``symbol`` by ``replacement``."""
    return a.map_symbols(
        lambda name: replacement if name == symbol else SymbolicCombo.symbol(name)
    )


def solve_for(equation: SymbolicCombo, symbol: str) -> SymbolicCombo:
    """Given a relation ``equation = 0`` linear in ``symbol``, return the value of ``symbol``.

    :raises ValueError: if the symbol does not occur linearly
    """
    coefficient = equation.coefficient(symbol)
    if not coefficient:
        raise ValueError(f"{symbol} does not occur linearly in the relation")
    rest = equation - SymbolicCombo.symbol(symbol, coefficient)
    if symbol in rest.symbols():
        raise ValueError(f"{symbol} occurs non-linearly in the relation")
    log.debug("Solved relation for %s", symbol)
    return rest * (-1 / coefficient)
