"""Products of atomic factors, recorded modulo units and powers of p.

Symbols are strings: ``"ell:j"`` for the formal element l_j and
``"pi:n:j"`` for its level-n irreducible factor.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping

_SYMBOL = re.compile(r"^(ell:-?\d+|pi:\d+:-?\d+)$")


def ell_symbol(j: int) -> str:
    return f"ell:{j}"


def pi_symbol(n: int, j: int) -> str:
    return f"pi:{n}:{j}"


def parse_symbol(symbol: str) -> tuple:
    """``"pi:2:-1"`` -> ``("pi", 2, -1)``; ``"ell:3"`` -> ``("ell", 3)``."""
    if not _SYMBOL.match(symbol):
        raise ValueError(f"malformed factor symbol {symbol!r}")
    kind, *nums = symbol.split(":")
    return (kind, *map(int, nums))


def symbol_key(symbol: str):
    kind, *nums = parse_symbol(symbol)
    if kind == "ell":
        return (0, 0, nums[0])
    return (1, nums[0], nums[1])


class FactoredElement(Mapping):
    """A finitely supported map symbol -> non-negative exponent.

    Multiplication adds exponents and divisibility is exponent-wise
    domination; the empty product is the unit ideal.
    """

    __slots__ = ("_items",)

    def __init__(self, exponents: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = dict(exponents)
        for s, e in items.items():
            parse_symbol(s)
            if e < 0:
                raise ValueError(f"negative exponent for {s}")
        self._items = tuple(sorted(((s, int(e)) for s, e in items.items() if e),
                                   key=lambda it: symbol_key(it[0])))

    @classmethod
    def one(cls) -> FactoredElement:
        return cls()

    @classmethod
    def product_of(cls, symbols: Iterable[str]) -> FactoredElement:
        out: dict[str, int] = {}
        for s in symbols:
            out[s] = out.get(s, 0) + 1
        return cls(out)

    def __getitem__(self, symbol):
        for s, e in self._items:
            if s == symbol:
                return e
        raise KeyError(symbol)

    def get(self, symbol, default=0):
        try:
            return self[symbol]
        except KeyError:
            return default

    def __iter__(self):
        return (s for s, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, FactoredElement):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return hash(self._items)

    def __mul__(self, other: FactoredElement) -> FactoredElement:
        out = dict(self._items)
        for s, e in other.items():
            out[s] = out.get(s, 0) + e
        return FactoredElement(out)

    def __pow__(self, n: int) -> FactoredElement:
        return FactoredElement({s: e * n for s, e in self._items})

    def valuations(self) -> dict[str, int]:
        """Order of vanishing along each atom; pi_{n,j} also sees every l_j."""
        out: dict[str, int] = {}
        for s, e in self._items:
            kind, *nums = parse_symbol(s)
            if kind == "ell":
                out[s] = out.get(s, 0) + e
            else:
                out[s] = out.get(s, 0) + e + self.get(ell_symbol(nums[1]))
        return out

    def _valuation_at(self, symbol: str) -> int:
        kind, *nums = parse_symbol(symbol)
        if kind == "ell":
            return self.get(symbol)
        return self.get(symbol) + self.get(ell_symbol(nums[1]))

    def divides(self, other: FactoredElement) -> bool:
        return all(other._valuation_at(s) >= self._valuation_at(s) for s, _ in self._items)

    def is_unit(self) -> bool:
        return not self._items

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self._items)

    def gcd(self, other: FactoredElement) -> FactoredElement:
        syms = set(self) | set(other)
        ells = {s: min(self.get(s), other.get(s)) for s in syms if s.startswith("ell:")}
        out = dict(ells)
        for s in syms:
            if s.startswith("pi:"):
                j = parse_symbol(s)[2]
                out[s] = min(self._valuation_at(s), other._valuation_at(s)) - ells.get(ell_symbol(j), 0)
        return FactoredElement(out)

    def __str__(self):
        if not self._items:
            return "1"
        return "*".join(s if e == 1 else f"{s}^{e}" for s, e in self._items)

    def __repr__(self):
        return f"FactoredElement({str(self)!r})"

    def to_json(self) -> dict[str, int]:
        return dict(self._items)


def parse_factored(obj) -> FactoredElement:
    """From ``{"pi:1:0": 1, ...}``, a product string ``"ell:0*ell:1^2"`` or ``1``."""
    if isinstance(obj, FactoredElement):
        return obj
    if isinstance(obj, Mapping):
        return FactoredElement(obj)
    if obj in (1, "1", ""):
        return FactoredElement()
    if isinstance(obj, str):
        out: dict[str, int] = {}
        for part in obj.split("*"):
            sym, _, exp = part.strip().partition("^")
            out[sym] = out.get(sym, 0) + (int(exp) if exp else 1)
        return FactoredElement(out)
    raise ValueError(f"cannot read factored element from {obj!r}")
