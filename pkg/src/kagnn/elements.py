"""Static element property table (atomic number, covalent radius,
Pauling electronegativity) backing node featurization.

The table ships as package data and covers atomic numbers 1..64 without
gaps plus a few heavier elements; anything else raises FeaturizationError
naming the symbol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import FeaturizationError

__all__ = ["ElementInfo", "element_info", "known_elements"]


@dataclass(frozen=True)
class ElementInfo:
    symbol: str
    atomic_number: int
    covalent_radius: float
    electronegativity: float


@lru_cache(maxsize=1)
def _table() -> dict[str, ElementInfo]:
    text = (resources.files("kagnn") / "data" / "element_properties.json").read_text()
    raw = json.loads(text)["elements"]
    return {
        sym: ElementInfo(
            symbol=sym,
            atomic_number=int(rec["atomic_number"]),
            covalent_radius=float(rec["covalent_radius"]),
            electronegativity=float(rec["electronegativity"]),
        )
        for sym, rec in raw.items()
    }


def element_info(symbol: str) -> ElementInfo:
    """Look up an element symbol, tolerating case sloppiness ("CL" -> "Cl")."""
    table = _table()
    if symbol in table:
        return table[symbol]
    normalized = symbol.strip().capitalize()
    if normalized in table:
        return table[normalized]
    raise FeaturizationError(f"unknown element symbol {symbol!r}")


def known_elements() -> list[str]:
    return sorted(_table(), key=lambda sym: _table()[sym].atomic_number)
