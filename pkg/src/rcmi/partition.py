"""Grouping of subsystem labels into the roles A, B, C (and an optional D)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import BadPartition
from .linalg import SystemLayout

__all__ = ["Partition"]


def _tuple(x: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(x, str):
        return tuple(s for s in x.split(",") if s) if "," in x else ((x,) if x else ())
    return tuple(x)


@dataclass(frozen=True)
class Partition:
    """Disjoint label groups for a conditional mutual information ``I(A;B|C)``.

    ``c`` may be empty (trivial conditioning system). ``d`` lists the remaining
    systems that are traced out before any quantity is evaluated; it exists so
    that a pure four-party state can be used directly in duality checks.

    Examples
    --------
    >>> Partition.parse("A|B|C")
    Partition(a=('A',), b=('B',), c=('C',), d=())
    >>> Partition.parse("A1,A2|B|").c
    ()
    """

    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...] = ()
    d: tuple[str, ...] = ()

    def __init__(self, a, b, c=(), d=()):
        object.__setattr__(self, "a", _tuple(a))
        object.__setattr__(self, "b", _tuple(b))
        object.__setattr__(self, "c", _tuple(c))
        object.__setattr__(self, "d", _tuple(d))
        if not self.a or not self.b:
            raise BadPartition("systems A and B must be non-empty")
        groups = self.a + self.b + self.c + self.d
        if len(set(groups)) != len(groups):
            raise BadPartition(f"partition groups overlap: {groups}")

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse ``"A|B|C"`` or ``"A|B|C|D"``; commas separate labels in a group."""
        parts = text.split("|")
        if len(parts) not in (2, 3, 4):
            raise BadPartition(f"cannot parse partition {text!r}; expected 'A|B|C' form")
        groups = [tuple(s.strip() for s in p.split(",") if s.strip()) for p in parts]
        return cls(*groups)

    @property
    def abc(self) -> tuple[str, ...]:
        return self.a + self.b + self.c

    def validate(self, layout: SystemLayout) -> None:
        """Check that the groups exactly cover ``layout``."""
        labels = set(layout.labels)
        groups = set(self.abc + self.d)
        unknown = groups - labels
        if unknown:
            raise BadPartition(f"labels {sorted(unknown)} not in layout {layout.labels}")
        missing = labels - groups
        if missing:
            raise BadPartition(f"layout systems {sorted(missing)} not assigned to A, B, C or D")

    def swapped(self) -> "Partition":
        """Exchange the roles of A and B."""
        return Partition(self.b, self.a, self.c, self.d)

    def __str__(self) -> str:
        s = "|".join(",".join(g) for g in (self.a, self.b, self.c))
        return s + ("|" + ",".join(self.d) if self.d else "")
