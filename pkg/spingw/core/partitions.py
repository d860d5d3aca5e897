import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

from spingw.core.errors import InvalidInput, UnexpectedFormat

log = logging.getLogger(__name__)

# "3", "1^4"
_PART_RE = re.compile(r"([0-9]+)(?:\^([0-9]+))?")


class PartitionStats(NamedTuple):
    """ℓ(m), |m| and m! of a partition."""

    length: int
    product: int
    aut: int


@dataclass(frozen=True, order=True)
class Partition:
    """A partition m = (m_1 ≤ m_2 ≤ ⋯ ≤ m_ℓ) of its degree.

    Contact conditions along a fiber are partitions; (1^d) is d transverse contacts.
    """

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise InvalidInput("A partition needs at least one part")
        if any(part < 1 for part in self.parts):
            raise InvalidInput(f"Partition parts must be positive: {self.parts}")
        if list(self.parts) != sorted(self.parts):
            raise InvalidInput(f"Partition parts must be nondecreasing: {self.parts}")

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        """Build a partition from parts in any order."""
        return cls(tuple(sorted(parts)))

    @classmethod
    def ones(cls, d: int) -> "Partition":
        """The partition (1^d)."""
        if d < 1:
            raise InvalidInput(f"Degree must be at least 1: {d}")
        return cls((1,) * d)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse "(1,1,2)"; a part may be written "v^r" for r copies of v, e.g. "(1^3)".

        :raises UnexpectedFormat: if the text does not follow the notation
        """
        stripped = text.replace(" ", "")
        if not (stripped.startswith("(") and stripped.endswith(")")):
            raise UnexpectedFormat(f"Partition must be enclosed in parentheses: {text!r}")

        parts: list[int] = []
        for chunk in stripped[1:-1].split(","):
            match = _PART_RE.fullmatch(chunk)
            if not match:
                raise UnexpectedFormat(f"Invalid partition part {chunk!r} in {text!r}")
            value, repeat = int(match.group(1)), int(match.group(2) or 1)
            parts.extend([value] * repeat)

        if not parts:
            raise UnexpectedFormat(f"Partition has no parts: {text!r}")
        return cls.of(*parts)

    def serialize(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    def __str__(self) -> str:
        return self.serialize()

    @property
    def degree(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def product(self) -> int:
        return math.prod(self.parts)

    @property
    def aut(self) -> int:
        """Order of the group permuting equal parts."""
        return math.prod(math.factorial(r) for r in Counter(self.parts).values())

    def is_ones(self) -> bool:
        return all(part == 1 for part in self.parts)

    def stats(self) -> PartitionStats:
        return PartitionStats(self.length, self.product, self.aut)


def stats(m: Partition) -> PartitionStats:
    return m.stats()


def ordered_count(m: Partition) -> int:
    """Number of distinct orderings of the parts, ℓ(m)!/m!."""
    return math.factorial(m.length) // m.aut


def partitions_of(d: int) -> list[Partition]:
    """All partitions of d in lexicographic order of their nondecreasing parts."""
    if d < 1:
        raise InvalidInput(f"Cannot partition {d}, the degree must be at least 1")
    return list(_partitions_of(d))


@lru_cache(maxsize=None)
def _partitions_of(d: int) -> tuple[Partition, ...]:
    result = tuple(Partition(parts) for parts in _nondecreasing_parts(d, 1))
    log.debug("Enumerated %d partitions of %d", len(result), d)
    return result


def _nondecreasing_parts(n: int, smallest: int) -> Iterator[tuple[int, ...]]:
    for first in range(smallest, n + 1):
        rest = n - first
        if rest == 0:
            yield (first,)
        elif rest >= first:
            for tail in _nondecreasing_parts(rest, first):
                yield (first, *tail)
