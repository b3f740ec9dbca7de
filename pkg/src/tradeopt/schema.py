"""Attribute schemas: the universe of candidate attributes and their domains."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaError

# Sensitivity value meaning "never share"; such attributes are excluded from
# every candidate universe but may still appear in logs.
NEVER_SHARE = math.inf


@dataclass(frozen=True)
class AttributeDef:
    """One candidate attribute: a categorical variable with a small domain.

    Values are encoded as integers in [0, cardinality). `bits` is the integer
    encoding width (informational); `sensitivity` is the per-attribute
    additive cost in bits (NEVER_SHARE excludes the attribute entirely).
    """

    name: str
    cardinality: int
    bits: int = 0
    sensitivity: float = 0.0

    def __post_init__(self):
        if not self.name or "," in self.name or "+" in self.name:
            raise SchemaError(f"bad attribute name {self.name!r}")
        if self.cardinality < 2:
            raise SchemaError(f"{self.name}: cardinality must be >= 2")
        if self.bits == 0:
            object.__setattr__(self, "bits", math.ceil(math.log2(self.cardinality)))
        if not isinstance(self.bits, int) or self.bits < 1:
            raise SchemaError(f"{self.name}: bits must be an integer >= 1")
        if self.sensitivity < 0:
            raise SchemaError(f"{self.name}: sensitivity must be >= 0")


class AttributeSchema:
    """Ordered, name-unique collection of attributes.

    Schema order is the tie-breaking order everywhere: subsets are kept
    sorted by index, and optimizers resolve equal scores toward the lowest
    index.
    """

    def __init__(self, attributes: Iterable[AttributeDef]):
        self.attributes: tuple[AttributeDef, ...] = tuple(attributes)
        if not self.attributes:
            raise SchemaError("schema must contain at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate attribute names: {dupes}")
        self._index = {a.name: i for i, a in enumerate(self.attributes)}

    def __len__(self) -> int:
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __getitem__(self, i: int) -> AttributeDef:
        return self.attributes[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, AttributeSchema) and self.attributes == other.attributes

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([a.cardinality for a in self.attributes], dtype=np.int64)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def subset_indices(self, names: Iterable[str]) -> tuple[int, ...]:
        """Resolve names to a deduplicated index tuple sorted in schema order."""
        return tuple(sorted({self.index(n) for n in names}))

    def subset_names(self, indices: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.attributes[i].name for i in sorted(set(indices)))

    def shareable_indices(self) -> tuple[int, ...]:
        """Indices of attributes that may be shared (finite sensitivity)."""
        return tuple(
            i for i, a in enumerate(self.attributes) if not math.isinf(a.sensitivity)
        )

    def with_sensitivities(self, table: Mapping[str, float]) -> "AttributeSchema":
        """Return a copy with sensitivities replaced from `table` (by name)."""
        for name in table:
            self.index(name)
        return AttributeSchema(
            replace(a, sensitivity=table.get(a.name, a.sensitivity))
            for a in self.attributes
        )


def read_sensitivity_csv(text: str) -> dict[str, float]:
    """Parse a sensitivity table: header ``attribute,sensitivity_bits``."""
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r]
    if not rows or [c.strip() for c in rows[0]] != ["attribute", "sensitivity_bits"]:
        raise SchemaError("sensitivity table must start with 'attribute,sensitivity_bits'")
    table: dict[str, float] = {}
    for row in rows[1:]:
        if len(row) != 2:
            raise SchemaError(f"sensitivity row has {len(row)} fields: {row!r}")
        name, raw = row[0].strip(), row[1].strip()
        value = NEVER_SHARE if raw.lower() in ("never", "inf") else float(raw)
        if value < 0:
            raise SchemaError(f"{name}: sensitivity must be >= 0")
        table[name] = value
    return table


def write_sensitivity_csv(table: Mapping[str, float]) -> str:
    lines = ["attribute,sensitivity_bits"]
    for name, value in table.items():
        raw = "never" if math.isinf(value) else repr(float(value))
        lines.append(f"{name},{raw}")
    return "\n".join(lines) + "\n"


def sorted_subset(indices: Sequence[int]) -> tuple[int, ...]:
    """Canonical form of an index subset: sorted, deduplicated tuple."""
    return tuple(sorted(set(indices)))
