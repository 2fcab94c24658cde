"""Finite-precision p-adic scalars.

Two kinds of values live here:

* :class:`PadicScalar` -- an element of Q_p known modulo ``p**prec``.  It is
  stored as ``rep / p**shift`` with ``0 <= rep < p**(prec + shift)``, so
  elements with a bounded denominator (from psi, log and ``1/log u``) need no
  general fraction field.
* :class:`ExtScalar` -- an element of ``Z_p[t] / (modulus)`` for either the
  cyclotomic polynomial of level ``p**n`` (ramified, used to evaluate at
  ``zeta - 1``) or an inert polynomial (the unramified field K, which carries
  a Frobenius).

Precision is absolute and propagated pessimistically.  Nothing here ever
silently widens precision: dividing by something indistinguishable from zero
raises :class:`PrecisionError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class PadicError(ValueError):
    """Domain error in p-adic arithmetic (non-unit where a unit is required, ...)."""


class PrecisionError(ArithmeticError):
    """The requested result cannot be certified at the available precision."""


def vp(n: int, p: int) -> float:
    """p-adic valuation of an integer; ``math.inf`` for zero."""
    if n == 0:
        return math.inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(x: Fraction, p: int) -> float:
    if x == 0:
        return math.inf
    return vp(x.numerator, p) - vp(x.denominator, p)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def frac_mod(x: Fraction, p: int, prec: int) -> tuple[int, int]:
    """Write a rational with p-power-bounded denominator as ``(rep, shift)``.

    The value equals ``rep / p**shift`` modulo ``p**prec``.
    """
    num, den = x.numerator, x.denominator
    shift = 0
    while den % p == 0:
        den //= p
        shift += 1
    mod = p ** (prec + shift)
    rep = num * pow(den, -1, mod) % mod
    return rep, shift


@dataclass(frozen=True)
class PadicScalar:
    """``rep / p**shift`` known modulo ``p**prec``."""

    p: int
    rep: int
    prec: int
    shift: int = 0

    def __post_init__(self):
        if self.prec < 1 - self.shift and self.rep:
            raise PadicError("precision must leave at least one digit")
        rep, shift = self.rep, max(self.shift, 0)
        mod = self.p ** (self.prec + shift) if self.prec + shift > 0 else 1
        rep %= mod
        while shift > 0 and rep % self.p == 0:
            rep //= self.p
            shift -= 1
        object.__setattr__(self, "rep", rep)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def from_int(cls, p: int, n: int, prec: int) -> PadicScalar:
        return cls(p, n, prec)

    @classmethod
    def from_fraction(cls, p: int, x, prec: int) -> PadicScalar:
        rep, shift = frac_mod(Fraction(x), p, prec)
        return cls(p, rep, prec, shift)

    # -- inspection --------------------------------------------------------

    @property
    def val_floor(self) -> int:
        """Known lower bound on the valuation (negative for non-integral values)."""
        v = self.valuation
        return self.prec if v is None else v

    @property
    def valuation(self) -> int | None:
        """Exact valuation, or ``None`` when the scalar is zero to precision."""
        if self.rep == 0:
            return None
        return int(vp(self.rep, self.p)) - self.shift

    def is_zero(self) -> bool:
        return self.rep == 0

    def is_unit(self) -> bool:
        return self.valuation == 0

    def lift(self) -> Fraction:
        """The canonical rational representative."""
        return Fraction(self.rep, self.p ** self.shift)

    def digits_of_agreement(self, other: PadicScalar) -> int:
        d = self - other
        return d.prec if d.valuation is None else d.valuation

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> PadicScalar:
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise PadicError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_fraction(self.p, other, self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        shift = max(self.shift, other.shift)
        rep = self.rep * self.p ** (shift - self.shift) + other.rep * self.p ** (shift - other.shift)
        return PadicScalar(self.p, rep, min(self.prec, other.prec), shift)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.p, -self.rep, self.prec, self.shift)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec + other.val_floor, other.prec + self.val_floor)
        shift = self.shift + other.shift
        if prec + shift <= 0:
            return PadicScalar(self.p, 0, max(prec, 1 - shift), shift)
        return PadicScalar(self.p, self.rep * other.rep, prec, shift)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vy = other.valuation
        if vy is None:
            raise PrecisionError("division by a scalar indistinguishable from 0")
        p = self.p
        prec = min(self.prec - vy, other.prec - 2 * vy + self.val_floor)
        # other = p**vy * w with w a unit integer
        w = other.rep // p ** (vy + other.shift)
        shift = self.shift + vy
        mod = p ** max(prec + shift, 1)
        rep = self.rep * pow(w, -1, mod)
        if shift < 0:
            rep *= p ** (-shift)
            shift = 0
        return PadicScalar(p, rep, prec, shift)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return PadicScalar(self.p, 1, self.prec) / self ** (-n)
        out = PadicScalar(self.p, 1, self.prec)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        """Equality to the common precision."""
        if isinstance(other, (int, Fraction)):
            other = PadicScalar.from_fraction(self.p, other, self.prec)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.p, self.rep, self.shift))

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"PadicScalar({format_scalar(self)!r})"


_LITERAL = re.compile(
    r"^\s*(?P<num>-?\d+)(?:\s*/\s*(?P<dp>\d+)\s*\^\s*(?P<de>\d+))?"
    r"\s*\+\s*O\(\s*(?P<p>\d+)\s*\^\s*(?P<prec>-?\d+)\s*\)\s*$"
)


def parse_scalar(text: str, p: int | None = None, prec: int | None = None) -> PadicScalar:
    """Parse ``"<integer> + O(<p>^<N>)"`` (optionally ``"<int>/<p>^<k> + O(...)"``).

    Bare integers and fractions such as ``"-1/4"`` are accepted when ``p``
    and ``prec`` are supplied.
    """
    m = _LITERAL.match(text)
    if m:
        q = int(m["p"])
        if p is not None and q != p:
            raise PadicError(f"literal {text!r} uses prime {q}, expected {p}")
        num = int(m["num"])
        shift = int(m["de"]) if m["de"] else 0
        if m["dp"] and int(m["dp"]) != q:
            raise PadicError(f"denominator of {text!r} is not a power of {q}")
        return PadicScalar(q, num, int(m["prec"]), shift)
    if p is None or prec is None:
        raise PadicError(f"cannot parse p-adic literal {text!r}")
    try:
        value = Fraction(text.strip())
    except ValueError as exc:
        raise PadicError(f"cannot parse p-adic literal {text!r}") from exc
    return PadicScalar.from_fraction(p, value, prec)


def format_scalar(x: PadicScalar) -> str:
    if x.shift:
        return f"{x.rep}/{x.p}^{x.shift} + O({x.p}^{x.prec})"
    return f"{x.rep} + O({x.p}^{x.prec})"


def teichmuller(a: int, prec: int, p: int) -> PadicScalar:
    """The (p-1)-th root of unity congruent to ``a`` modulo p."""
    if a % p == 0:
        raise PadicError(f"teichmuller: {a} is not a unit mod {p}")
    mod = p ** prec
    x = a % mod
    for _ in range(prec):
        x = pow(x, p, mod)
    return PadicScalar(p, x, prec)


def log_unit_fraction(z: Fraction, p: int, prec: int) -> Fraction:
    """Rational approximation of log(1 + z) correct modulo p**prec, v(z) >= 1."""
    if vp_fraction(z, p) < 1:
        raise PadicError("log_unit: argument is not a principal unit")
    total = Fraction(0)
    term = Fraction(1)
    k = 1
    while True:
        term *= z
        if k - math.log(k, p) > prec + 1 and k > 1:
            break
        total += (-1) ** (k + 1) * term / k
        k += 1
    return total


def log_unit(x: PadicScalar, prec: int | None = None) -> PadicScalar:
    """log of a principal unit ``x = 1 (mod p)``."""
    p = x.p
    if x.shift or (x.rep - 1) % p:
        raise PadicError("log_unit: argument is not congruent to 1 mod p")
    prec = x.prec if prec is None else min(prec, x.prec)
    value = log_unit_fraction(Fraction(x.rep - 1), p, prec + 2)
    return PadicScalar.from_fraction(p, value, prec)


@lru_cache(maxsize=None)
def log_u_parts(p: int, u: int, prec: int) -> tuple[int, int]:
    """``log u = p**v * w`` with ``w`` a unit given modulo ``p**prec``."""
    lg = log_unit_fraction(Fraction(u - 1), p, prec + 8)
    v = int(vp_fraction(lg, p))
    unit = lg / Fraction(p) ** v
    mod = p ** prec
    return v, unit.numerator * pow(unit.denominator, -1, mod) % mod


# -- polynomials over Z/p^k (coefficient lists, low degree first) ------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a, b, m, mod):
    """a*b reduced by the monic polynomial m, coefficients mod ``mod``."""
    d = len(m) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k] % mod
        if c:
            for i in range(d):
                prod[k - d + i] -= c * m[i]
        prod[k] = 0
    out = [c % mod for c in prod[:d]]
    return out + [0] * (d - len(out))


def _poly_divmod_p(a, b, p):
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        s = len(a) - len(b)
        q[s] = c
        for i, bi in enumerate(b):
            a[s + i] = (a[s + i] - c * bi) % p
        _trim(a)
    return q, a


def _poly_gcd_p(a, b, p):
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    while b:
        _, r = _poly_divmod_p(a, b, p)
        a, b = b, r
    return a


def _poly_xgcd_inverse_p(a, m, p):
    """Inverse of a modulo (m, p) by the extended Euclidean algorithm."""
    r0, r1 = _trim([c % p for c in m]), _trim([c % p for c in a])
    s0, s1 = [], [1]
    while r1:
        q, r = _poly_divmod_p(r0, r1, p)
        qs = [0] * (len(q) + len(s1))
        for i, qi in enumerate(q):
            for j, sj in enumerate(s1):
                qs[i + j] += qi * sj
        s2 = [((s0[i] if i < len(s0) else 0) - (qs[i] if i < len(qs) else 0)) % p
              for i in range(max(len(s0), len(qs)))]
        r0, r1, s0, s1 = r1, r, s1, _trim(s2)
    if len(r0) != 1:
        raise PadicError("element is not a unit modulo p")
    c = pow(r0[0], -1, p)
    return [x * c % p for x in s0]


def _is_irreducible_mod_p(m: tuple[int, ...], p: int) -> bool:
    f = len(m) - 1
    if f == 1:
        return True
    t = [0, 1]
    factors = [q for q in range(2, f + 1) if f % q == 0 and is_prime(q)]

    def frob_power(k):
        x = t + [0] * (f - 2)
        for _ in range(k):
            x = _poly_powmod(x, p, m, p)
        return x

    if _trim([(a - b) % p for a, b in zip(frob_power(f) + [0] * f, t + [0] * f)]):
        return False
    for q in factors:
        x = frob_power(f // q)
        diff = [(x[i] if i < len(x) else 0) - (t[i] if i < 2 else 0) for i in range(max(len(x), 2))]
        if len(_poly_gcd_p(list(m), diff, p)) > 1:
            return False
    return True


def _poly_powmod(a, n, m, mod):
    d = len(m) - 1
    out = [1] + [0] * (d - 1)
    base = list(a) + [0] * (d - len(a))
    while n:
        if n & 1:
            out = _poly_mulmod(out, base, m, mod)
        base = _poly_mulmod(base, base, m, mod)
        n >>= 1
    return out


def cyclotomic_modulus(p: int, n: int) -> tuple[int, ...]:
    """Phi_{p^n}(t) = sum_{i<p} t^{i p^(n-1)}, low degree first."""
    if n < 1:
        raise PadicError("cyclotomic level must be >= 1")
    step = p ** (n - 1)
    coeffs = [0] * (step * (p - 1) + 1)
    for i in range(p):
        coeffs[i * step] = 1
    return tuple(coeffs)


@lru_cache(maxsize=None)
def inert_modulus(p: int, f: int) -> tuple[int, ...]:
    """The first monic polynomial of degree f irreducible mod p (lexicographic search)."""
    if f < 1:
        raise PadicError("degree must be >= 1")
    if f == 1:
        return (0, 1)
    for idx in range(p ** f):
        coeffs = [(idx // p ** i) % p for i in range(f)] + [1]
        if coeffs[0] == 0:
            continue
        if _is_irreducible_mod_p(tuple(coeffs), p):
            return tuple(coeffs)
    raise PadicError(f"no irreducible polynomial of degree {f} mod {p}")


@dataclass(frozen=True)
class ExtScalar:
    """Element of Z_p[t]/(modulus) known modulo p**prec.

    ``kind`` is ``"cyclotomic"`` (t is a primitive p^n-th root of unity) or
    ``"inert"`` (t generates the unramified extension of degree deg(modulus)).
    """

    p: int
    modulus: tuple[int, ...]
    coeffs: tuple[int, ...]
    prec: int
    kind: str = "inert"

    def __post_init__(self):
        d = len(self.modulus) - 1
        if self.modulus[-1] != 1:
            raise PadicError("modulus must be monic")
        mod = self.p ** self.prec
        c = list(self.coeffs)[:d] + [0] * max(0, d - len(self.coeffs))
        if len(self.coeffs) > d:
            c = _poly_mulmod(list(self.coeffs), [1], list(self.modulus), mod)
        object.__setattr__(self, "coeffs", tuple(x % mod for x in c))

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @classmethod
    def from_int(cls, p, modulus, n, prec, kind="inert") -> ExtScalar:
        return cls(p, tuple(modulus), (n,), prec, kind)

    @classmethod
    def from_scalar(cls, x: PadicScalar, modulus, kind="inert") -> ExtScalar:
        if x.shift:
            raise PadicError("only integral scalars embed into ExtScalar")
        return cls(x.p, tuple(modulus), (x.rep,), x.prec, kind)

    @classmethod
    def generator(cls, p, modulus, prec, kind="inert") -> ExtScalar:
        return cls(p, tuple(modulus), (0, 1), prec, kind)

    def _like(self, coeffs, prec=None) -> ExtScalar:
        return ExtScalar(self.p, self.modulus, tuple(coeffs),
                         self.prec if prec is None else prec, self.kind)

    def _coerce(self, other) -> ExtScalar:
        if isinstance(other, ExtScalar):
            if other.modulus != self.modulus or other.p != self.p:
                raise PadicError("mixing different extensions")
            return other
        if isinstance(other, int):
            return self._like((other,))
        if isinstance(other, Fraction):
            return ExtScalar.from_scalar(PadicScalar.from_fraction(self.p, other, self.prec),
                                         self.modulus, self.kind)
        if isinstance(other, PadicScalar):
            return ExtScalar.from_scalar(other, self.modulus, self.kind)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._like([a + b for a, b in zip(self.coeffs, other.coeffs)],
                          min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return self._like([-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        c = _poly_mulmod(list(self.coeffs), list(other.coeffs), list(self.modulus), self.p ** prec)
        return self._like(c, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        c = _poly_powmod(list(self.coeffs), n, list(self.modulus), self.p ** self.prec)
        return self._like(c)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.p, self.modulus, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def coefficient_valuation(self) -> int:
        """Minimum valuation of the power-basis coordinates (``prec`` if zero).

        This is a lower bound for the element's valuation; for the inert
        modulus it is exact.
        """
        vals = [vp(c, self.p) for c in self.coeffs if c]
        return int(min(vals)) if vals else self.prec

    def inverse(self) -> ExtScalar:
        if self.kind != "inert":
            raise PadicError("inverse is only provided in the unramified extension")
        p = self.p
        y = _poly_xgcd_inverse_p(list(self.coeffs), list(self.modulus), p)
        y = y + [0] * (self.degree - len(y))
        k = 1
        m = list(self.modulus)
        while k < self.prec:
            k = min(2 * k, self.prec)
            mod = p ** k
            cy = _poly_mulmod(list(self.coeffs), y, m, mod)
            two_minus = [(-c) % mod for c in cy]
            two_minus[0] = (two_minus[0] + 2) % mod
            y = _poly_mulmod(y, two_minus, m, mod)
        return self._like(y)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def frobenius(self) -> ExtScalar:
        """sigma(x): the lift of the p-power map on the residue field."""
        if self.kind != "inert":
            raise PadicError("Frobenius is only supported on the unramified (inert) modulus")
        image = _frobenius_of_generator(self.p, self.modulus, self.prec)
        gen = ExtScalar(self.p, self.modulus, image, self.prec)
        out = self._like((0,))
        power = self._like((1,))
        for c in self.coeffs:
            out = out + power * c
            power = power * gen
        return out

    def __repr__(self):
        return f"ExtScalar({list(self.coeffs)} mod {list(self.modulus)}, O({self.p}^{self.prec}))"


@lru_cache(maxsize=None)
def _frobenius_of_generator(p: int, modulus: tuple[int, ...], prec: int) -> tuple[int, ...]:
    """Hensel-lift the root of ``modulus`` congruent to t**p mod p."""
    t = ExtScalar.generator(p, modulus, prec)
    r = t ** p

    def evaluate(poly, x):
        acc = x._like((0,))
        for c in reversed(poly):
            acc = acc * x + c
        return acc

    deriv = [i * c for i, c in enumerate(modulus)][1:]
    for _ in range(max(1, prec).bit_length() + 2):
        r = r - evaluate(modulus, r) / evaluate(deriv, r)
    return r.coeffs
