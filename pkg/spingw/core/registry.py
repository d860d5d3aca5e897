import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping, Optional

import pydantic

from spingw.core.algebra import format_rational, parse_rational
from spingw.core.closed_forms import InvariantKey
from spingw.core.errors import InvalidInput, MissingRegistryEntry, UnexpectedFormat
from spingw.core.models.validators import unique_sorted

log = logging.getLogger(__name__)


class RegistryFile(pydantic.RootModel[dict[str, str]]):
    """JSON object mapping serialized invariant keys to rationals in "p/q" notation."""


@dataclass(frozen=True)
class Registry:
    """Values of invariants that have no closed form, keyed by canonical key string."""

    entries: Mapping[str, Fraction] = field(default_factory=lambda: MappingProxyType({}))
    source_path: Optional[Path] = None

    @classmethod
    def empty(cls) -> "Registry":
        return cls()

    @classmethod
    def from_raw(cls, raw: Mapping[str, str], source_path: Optional[Path] = None) -> "Registry":
        """Canonicalize keys and parse values of a raw key -> "p/q" mapping.

        :raises UnexpectedFormat: on malformed keys or values, or on two spellings of the same
            key with different values
        """
        items = []
        for raw_key, raw_value in raw.items():
            key = InvariantKey.parse(raw_key).serialize()
            try:
                value = parse_rational(raw_value)
            except ValueError as e:
                raise UnexpectedFormat(f"Invalid value for {raw_key}: {e}") from e
            items.append((key, value))

        try:
            entries = unique_sorted(items, by=lambda item: item[0])
        except ValueError as e:
            raise UnexpectedFormat(f"Conflicting registry entries: {e}") from e

        return cls(MappingProxyType(dict(entries)), source_path)

    @classmethod
    def load(cls, path: Path) -> "Registry":
        """Load a registry file."""
        try:
            raw = RegistryFile.model_validate_json(path.read_text())
        except pydantic.ValidationError as e:
            raise UnexpectedFormat(
                f"{path} is not a registry file: {e.error_count()} errors"
            ) from e
        except OSError as e:
            raise InvalidInput(f"Cannot read registry file {path}: {e.strerror}") from e

        registry = cls.from_raw(raw.root, source_path=path)
        log.info("Loaded %d registry entries from %s", len(registry), path)
        return registry

    def to_raw(self) -> dict[str, str]:
        return {key: format_rational(value) for key, value in sorted(self.entries.items())}

    def dump(self) -> str:
        return json.dumps(self.to_raw(), indent=2) + "\n"

    def save(self, path: Path) -> None:
        try:
            path.write_text(self.dump())
        except OSError as e:
            raise InvalidInput(f"Cannot write registry file {path}: {e.strerror}") from e
        log.info("Wrote %d registry entries to %s", len(self), path)

    def with_entry(self, key: InvariantKey, value: Fraction) -> "Registry":
        entries = dict(self.entries)
        entries[key.serialize()] = value
        return Registry(MappingProxyType(dict(sorted(entries.items()))), self.source_path)

    def lookup(self, key: str) -> Optional[Fraction]:
        value = self.entries.get(key)
        log.debug("Registry lookup %s -> %s", key, value)
        return value

    def value_of(self, key: str) -> Fraction:
        value = self.lookup(key)
        if value is None:
            raise MissingRegistryEntry(key)
        return value

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)
