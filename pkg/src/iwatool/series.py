"""Truncated power series over Q_p with circle norms and Newton polygons.

A :class:`TruncatedSeries` stores ``p**-shift * sum(coeffs[k] * x**k)`` with
each numerator known modulo ``p**(prec + shift)``.  Coefficients at index
``>= x_trunc`` are either zero (``tail is None``: an exact polynomial) or
unknown but bounded by ``v(a_k) >= c - l*log_p(k)`` where ``tail == (c, l)``.
That bound is what lets norms and unit tests be *certified* instead of
guessed from a finite window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .factored import FactoredElement, pi_symbol
from .padic import (
    ExtScalar,
    PadicError,
    PadicScalar,
    PrecisionError,
    frac_mod,
    is_prime,
    log_u_parts,
    vp,
)

_EPS = 1e-9


class UncertifiedError(PrecisionError):
    """A minimum or a vertex cannot be certified from the truncation."""


@dataclass(frozen=True)
class SeriesContext:
    """Ambient configuration: prime, the unit u generating 1 + pZ_p, precisions."""

    p: int = 3
    u: int = 4
    prec: int = 30
    x_trunc: int = 200

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise PadicError(f"p must be an odd prime, got {self.p}")
        if (self.u - 1) % self.p or (self.u - 1) % self.p ** 2 == 0:
            raise PadicError(f"u = {self.u} must be 1 mod p and not 1 mod p^2")
        if self.prec < 1 or self.x_trunc < 1:
            raise PadicError("prec and x_trunc must be >= 1")

    def with_(self, **kw) -> SeriesContext:
        d = dict(p=self.p, u=self.u, prec=self.prec, x_trunc=self.x_trunc)
        d.update(kw)
        return SeriesContext(**d)


def _logp(k: int, p: int) -> float:
    return math.log(max(k, 1), p)


@dataclass(frozen=True)
class TruncatedSeries:
    p: int
    coeffs: tuple[int, ...]
    prec: int
    shift: int = 0
    tail: tuple[float, float] | None = None
    var: str = "x"

    def __post_init__(self):
        if self.shift < 0:
            scale = self.p ** (-self.shift)
            object.__setattr__(self, "coeffs", tuple(c * scale for c in self.coeffs))
            object.__setattr__(self, "shift", 0)
        mod = self.p ** (self.prec + self.shift)
        c = [x % mod for x in self.coeffs]
        shift = self.shift
        while shift > 0 and all(x % self.p == 0 for x in c):
            c = [x // self.p for x in c]
            shift -= 1
        if self.tail is None:
            while c and c[-1] == 0:
                c.pop()
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "shift", shift)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_fractions(cls, p, values, prec, tail=None, var="x") -> TruncatedSeries:
        values = [Fraction(v) for v in values]
        shift = max((int(-min(0, _vfrac(v, p))) for v in values if v), default=0)
        mod = p ** (prec + shift)
        scale = Fraction(p) ** shift
        coeffs = []
        for v in values:
            w = v * scale
            coeffs.append(w.numerator * pow(w.denominator, -1, mod) % mod)
        return cls(p, tuple(coeffs), prec, shift, tail, var)

    @classmethod
    def polynomial(cls, p, coeffs, prec, var="x") -> TruncatedSeries:
        return cls.from_fractions(p, coeffs, prec, None, var)

    @classmethod
    def zero(cls, p, prec, x_trunc=None, var="x") -> TruncatedSeries:
        if x_trunc is None:
            return cls(p, (), prec, var=var)
        return cls(p, (0,) * x_trunc, prec, tail=(prec, 0.0), var=var)

    # -- inspection ------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.tail is None

    @property
    def x_trunc(self) -> int:
        return len(self.coeffs)

    @property
    def degree(self) -> int:
        if not self.exact:
            raise PadicError("degree is only defined for exact polynomials")
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> PadicScalar:
        if k >= len(self.coeffs):
            if self.exact:
                return PadicScalar(self.p, 0, self.prec)
            raise PrecisionError(f"coefficient {k} is beyond the truncation {self.x_trunc}")
        return PadicScalar(self.p, self.coeffs[k], self.prec, self.shift)

    def coefficient_fraction(self, k: int) -> Fraction:
        return Fraction(self.coeffs[k], self.p ** self.shift) if k < len(self.coeffs) else Fraction(0)

    def valuation_of(self, k: int) -> int | None:
        """Exact valuation of a_k, or None if it is zero to precision."""
        c = self.coeffs[k] if k < len(self.coeffs) else 0
        return None if c == 0 else int(vp(c, self.p)) - self.shift

    def vmin(self) -> float:
        """Smallest coefficient valuation among known coefficients (prec if all vanish)."""
        vals = [vp(c, self.p) for c in self.coeffs if c]
        return (min(vals) - self.shift) if vals else self.prec

    def floor_bound(self) -> tuple[float, float]:
        """(c, l) with v(a_k) >= c - l*log_p(k) for *every* k (known and tail)."""
        l = 0.0 if self.exact else self.tail[1]
        c = math.inf if self.exact else self.tail[0]
        for k, a in enumerate(self.coeffs):
            v = self.prec if a == 0 else vp(a, self.p) - self.shift
            c = min(c, v + l * _logp(k, self.p))
        if c == math.inf:
            c = self.prec
        return c, l

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def truncate(self, m: int) -> TruncatedSeries:
        """Forget coefficients at index >= m."""
        if m >= len(self.coeffs) and not self.exact:
            return self
        c, l = self.floor_bound()
        return TruncatedSeries(self.p, self.coeffs[:m], self.prec, self.shift, (c, l), self.var)

    def as_polynomial(self) -> TruncatedSeries:
        """The known part, declared an exact polynomial."""
        return TruncatedSeries(self.p, self.coeffs, self.prec, self.shift, None, self.var)

    def with_prec(self, prec: int) -> TruncatedSeries:
        prec = min(prec, self.prec)
        tail = self.tail
        return TruncatedSeries(self.p, self.coeffs, prec, self.shift, tail, self.var)

    def fractions(self) -> list[Fraction]:
        return [Fraction(c, self.p ** self.shift) for c in self.coeffs]

    # -- ring operations -------------------------------------------------------

    def _check(self, other: TruncatedSeries):
        if other.p != self.p or other.var != self.var:
            raise PadicError("incompatible series")

    def _aligned(self, other):
        shift = max(self.shift, other.shift)
        a = [c * self.p ** (shift - self.shift) for c in self.coeffs]
        b = [c * self.p ** (shift - other.shift) for c in other.coeffs]
        return a, b, shift

    def _out_len(self, other, natural: int) -> tuple[int, tuple | None]:
        if self.exact and other.exact:
            return natural, None
        ms = [s.x_trunc for s in (self, other) if not s.exact]
        return min(min(ms), natural), ()

    def __add__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            other = self.constant_like(other)
        self._check(other)
        a, b, shift = self._aligned(other)
        n, tail = self._out_len(other, max(len(a), len(b)))
        out = [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)]
        if tail is not None:
            fa, fb = self.floor_bound(), other.floor_bound()
            tail = (min(fa[0], fb[0]), max(fa[1], fb[1]))
        return TruncatedSeries(self.p, tuple(out), min(self.prec, other.prec), shift, tail, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.p, tuple(-c for c in self.coeffs), self.prec, self.shift,
                               self.tail, self.var)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            other = self.constant_like(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def constant_like(self, value) -> TruncatedSeries:
        if isinstance(value, PadicScalar):
            return TruncatedSeries(self.p, (value.rep,), value.prec, value.shift, var=self.var)
        return TruncatedSeries.from_fractions(self.p, [value], self.prec, var=self.var)

    def scale(self, s) -> TruncatedSeries:
        """Multiply by a scalar (int, Fraction or PadicScalar)."""
        if not isinstance(s, PadicScalar):
            s = PadicScalar.from_fraction(self.p, Fraction(s), self.prec + 8)
        v = s.val_floor
        prec = min(self.prec + v, s.prec + self.vmin())
        prec = int(max(prec, 1 - self.shift - s.shift))
        tail = None
        if not self.exact:
            tail = (self.tail[0] + v, self.tail[1])
        return TruncatedSeries(self.p, tuple(c * s.rep for c in self.coeffs), prec,
                               self.shift + s.shift, tail, self.var)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.scale(other)
        self._check(other)
        natural = len(self.coeffs) + len(other.coeffs) - 1 if self.coeffs and other.coeffs else 0
        n, tail = self._out_len(other, natural)
        if not self.exact or not other.exact:
            n = min(s.x_trunc for s in (self, other) if not s.exact)
        prec = min(self.prec + other.vmin(), other.prec + self.vmin())
        shift = self.shift + other.shift
        prec = int(max(prec, 1 - shift))
        out = _convolve(self.coeffs, other.coeffs, n, self.p ** (prec + shift))
        if tail is not None:
            fa, fb = self.floor_bound(), other.floor_bound()
            tail = (fa[0] + fb[0], fa[1] + fb[1])
        return TruncatedSeries(self.p, tuple(out), prec, shift, tail, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.constant_like(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def equals(self, other: TruncatedSeries, upto: int | None = None) -> bool:
        """Coefficientwise equality on the common known window and precision."""
        d = self - other
        m = d.x_trunc if upto is None else min(upto, d.x_trunc)
        return not any(d.coeffs[:m]) and (upto is None or upto <= d.x_trunc or d.exact)

    def agreement(self, other: TruncatedSeries, upto: int | None = None) -> int:
        """Number of p-adic digits to which the two agree (capped at precision)."""
        d = self - other
        m = d.x_trunc if upto is None else min(upto, d.x_trunc)
        vals = [vp(c, self.p) - d.shift for c in d.coeffs[:m] if c]
        return int(min(vals)) if vals else d.prec

    def __repr__(self):
        state = "exact" if self.exact else f"O({self.var}^{self.x_trunc})"
        return (f"TruncatedSeries(p={self.p}, {len(self.coeffs)} coeffs, {state}, "
                f"prec={self.prec}, shift={self.shift})")


def _vfrac(v: Fraction, p: int) -> float:
    return vp(v.numerator, p) - vp(v.denominator, p)


def _convolve(a, b, n, mod):
    out = [0] * n
    for i, ai in enumerate(a):
        if not ai or i >= n:
            continue
        lim = min(len(b), n - i)
        for j in range(lim):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return [c % mod for c in out]


# -- radii, norms and Newton polygons -------------------------------------------


@dataclass(frozen=True)
class RadiusExp:
    """The radius rho = p**(-a/b)."""

    a: int
    b: int

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("radius exponent must be positive")
        g = math.gcd(self.a, self.b)
        object.__setattr__(self, "a", self.a // g)
        object.__setattr__(self, "b", self.b // g)

    @classmethod
    def parse(cls, text: str) -> RadiusExp:
        num, _, den = text.partition("/")
        return cls(int(num), int(den or 1))

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.a, self.b)

    def root(self, p: int, n: int) -> RadiusExp:
        """rho**(1/p**n)."""
        return RadiusExp(self.a, self.b * p ** n)

    def __str__(self):
        return f"{self.a}/{self.b}"


def critical_radius(p: int, n: int) -> RadiusExp:
    """p**(-1/(p**(n-1)(p-1))): where l_j has its level-n zeros."""
    return RadiusExp(1, p ** (n - 1) * (p - 1))


@dataclass(frozen=True)
class NormResult:
    valuation: Fraction
    indices: tuple[int, ...]


def _tail_lower_bound(c: float, l: float, start: int, slope: float, p: int) -> float:
    """min over k >= start of c - l*log_p(k) + slope*k."""
    if l == 0:
        if slope < 0:
            return -math.inf
        return c + slope * start
    if slope <= 0:
        return -math.inf
    kstar = l / (slope * math.log(p))
    k = max(start, kstar, 1)
    return c - l * math.log(k, p) + slope * k


def norm_at_radius(f: TruncatedSeries, rho: RadiusExp) -> NormResult:
    """v_rho(f) = min_n v(a_n) + n*a/b, with the minimizing indices.

    Raises :class:`UncertifiedError` unless undetermined coefficients and the
    unknown tail provably stay strictly above the minimum.
    """
    s = rho.exponent
    best = None
    indices: list[int] = []
    unknown_floor = math.inf
    for k, c in enumerate(f.coeffs):
        if c == 0:
            unknown_floor = min(unknown_floor, f.prec + k * s)
            continue
        val = int(vp(c, f.p)) - f.shift + k * s
        if best is None or val < best:
            best, indices = val, [k]
        elif val == best:
            indices.append(k)
    if not f.exact:
        c, l = f.tail
        unknown_floor = min(unknown_floor, _tail_lower_bound(c, l, f.x_trunc, float(s), f.p))
    if best is None:
        raise UncertifiedError("series is zero to working precision")
    if not unknown_floor > best + _EPS:
        raise UncertifiedError(
            f"minimum {best} at radius p^-{rho} not certified (unknown terms may reach {unknown_floor})")
    return NormResult(best, tuple(indices))


def is_unit_on_circle(f: TruncatedSeries, rho: RadiusExp) -> bool:
    """True iff f has no zero on |x| = rho (a unique dominant monomial)."""
    return len(norm_at_radius(f, rho).indices) == 1


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple[tuple[int, int], ...]
    reliable_window: int

    @property
    def slopes(self) -> tuple[Fraction, ...]:
        v = self.vertices
        return tuple(Fraction(v[i + 1][1] - v[i][1], v[i + 1][0] - v[i][0]) for i in range(len(v) - 1))


def lower_hull(points) -> list[tuple]:
    pts = sorted(points)
    hull: list = []
    for pt in pts:
        if hull and hull[-1][0] == pt[0]:
            if pt[1] >= hull[-1][1]:
                continue
            hull.pop()
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(f: TruncatedSeries) -> NewtonPolygon:
    """Lower convex hull of (n, v(a_n)) over the determined coefficients."""
    pts = [(k, int(vp(c, f.p)) - f.shift) for k, c in enumerate(f.coeffs) if c]
    if not pts:
        raise UncertifiedError("series is zero to working precision")
    hull = lower_hull(pts)
    unknown = [(k, f.prec) for k, c in enumerate(f.coeffs) if c == 0]
    window = -1
    for t, (kt, vt) in enumerate(hull):
        if t == 0:
            ok = all(k > kt for k, _ in unknown)
            slope = None
        else:
            k0, v0 = hull[t - 1]
            slope = Fraction(vt - v0, kt - k0)
            ok = True
            for k, lb in unknown:
                if k > kt and not lb > vt + slope * (k - kt):
                    ok = False
                if k < kt and not lb >= _hull_value(hull[: t + 1], k):
                    ok = False
        if ok and not f.exact:
            c, l = f.tail
            s = -float(slope) if slope is not None else 0.0
            bound = _tail_lower_bound(c, l, f.x_trunc, s, f.p)
            ok = bound - (vt - s * kt) > _EPS if slope is not None else bound > vt
        if not ok:
            break
        window = kt
    return NewtonPolygon(tuple(hull), window)


def _hull_value(hull, k):
    if k <= hull[0][0]:
        return -math.inf
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= k <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (k - x1)
    return -math.inf


# -- distinguished elements ------------------------------------------------------


def _require_level(n: int, ctx: SeriesContext):
    if ctx.p ** n > ctx.x_trunc:
        raise PadicError(f"level {n} needs x_trunc >= {ctx.p ** n}, have {ctx.x_trunc}")


def _binomial_poly(e: int) -> list[int]:
    return [math.comb(e, k) for k in range(e + 1)]


def omega(n: int, ctx: SeriesContext) -> TruncatedSeries:
    """(1+x)^(p^n) - 1 as an exact polynomial."""
    if n < 0:
        raise PadicError("omega needs n >= 0")
    _require_level(n, ctx)
    c = _binomial_poly(ctx.p ** n)
    c[0] -= 1
    return TruncatedSeries.polynomial(ctx.p, c, ctx.prec)


def xi(n: int, ctx: SeriesContext) -> TruncatedSeries:
    """omega_n / omega_{n-1} = sum_{i<p} (1+x)^(i p^(n-1))."""
    if n < 1:
        raise PadicError("xi needs n >= 1")
    _require_level(n, ctx)
    step = ctx.p ** (n - 1)
    c = [0] * (step * (ctx.p - 1) + 1)
    for i in range(ctx.p):
        for k, b in enumerate(_binomial_poly(i * step)):
            c[k] += b
    return TruncatedSeries.polynomial(ctx.p, c, ctx.prec)


def _taylor_shift(coeffs: list[int], alpha: int, mod: int) -> list[int]:
    """Coefficients of f(x + alpha)."""
    c = list(coeffs)
    n = len(c)
    for i in range(n):
        for k in range(n - 2, i - 1, -1):
            c[k] = (c[k] + alpha * c[k + 1]) % mod
    return c


def _unit_power(u: int, e: int, p: int, mod: int) -> int:
    """u**e modulo ``mod`` for any integer e (u is a p-adic unit)."""
    return pow(u, e, mod) if e >= 0 else pow(pow(u, -1, mod), -e, mod)


def twist(f: TruncatedSeries, j: int, ctx: SeriesContext) -> TruncatedSeries:
    """Tw_u^{-j}(f) = f(u^{-j}(1+x) - 1)."""
    if j == 0:
        return f
    p = ctx.p
    va = 1 + int(vp(j, p))
    coeffs = list(f.coeffs)
    m_out = len(coeffs)
    tail = None
    if not f.exact:
        c, l = f.floor_bound()
        m = f.x_trunc
        need = f.prec - c + l * _logp(m, p)
        m_out = max(0, min(m, math.floor(m - need / va)))
        tail = (c, l)
    mod = p ** (f.prec + f.shift)
    scale = _unit_power(ctx.u, -j, p, mod)
    shifted = _taylor_shift(coeffs, (scale - 1) % mod, mod)
    out, power = [], 1
    for k in range(m_out):
        out.append(shifted[k] * power % mod)
        power = power * scale % mod
    return TruncatedSeries(p, tuple(out), f.prec, f.shift, tail, f.var)


def chi_u_eval(f: TruncatedSeries, k: int, ctx: SeriesContext, prec: int | None = None) -> PadicScalar:
    """f(u^k - 1): the value of f at the character chi^k.

    The returned scalar carries the precision the truncation actually
    certifies (never more than ``prec`` if given).
    """
    p = ctx.p
    x0 = Fraction(ctx.u) ** k - 1
    target = f.prec if prec is None else min(prec, f.prec)
    if x0 == 0:
        if not f.coeffs:
            return PadicScalar(p, 0, target)
        return PadicScalar(p, f.coeffs[0], target, f.shift)
    vx = int(_vfrac(x0, p))
    attainable = f.prec
    if not f.exact:
        c, l = f.tail
        attainable = min(attainable, math.floor(_tail_lower_bound(c, l, f.x_trunc, vx, p)))
    attainable = min(attainable, target)
    if attainable < 1 - f.shift:
        raise PrecisionError(f"truncation {f.x_trunc} cannot certify chi^{k}")
    mod = p ** (attainable + f.shift)
    rep, sh = frac_mod(x0, p, attainable + f.shift)
    xint = rep % mod
    acc = 0
    for a in reversed(f.coeffs):
        acc = (acc * xint + a) % mod
    return PadicScalar(p, acc, attainable, f.shift)


def _log_series(ctx: SeriesContext, divide_by_log_u: bool, j: int = 0) -> TruncatedSeries:
    p, m, prec = ctx.p, ctx.x_trunc, ctx.prec
    v_log = log_u_parts(p, ctx.u, 4)[0] if divide_by_log_u else 0
    emax = max((int(vp(k, p)) for k in range(1, m)), default=0)
    shift = v_log + emax
    mod = p ** (prec + shift)
    w = log_u_parts(p, ctx.u, prec + shift)[1] if divide_by_log_u else 1
    coeffs = [(-j * p ** shift) % mod]
    for k in range(1, m):
        e = int(vp(k, p))
        unit = k // p ** e
        sign = 1 if k % 2 else -1
        coeffs.append(sign * p ** (shift - v_log - e) * pow(unit * w, -1, mod) % mod)
    return TruncatedSeries(p, tuple(coeffs), prec, shift, (-v_log, 1.0))


def log1p_series(ctx: SeriesContext) -> TruncatedSeries:
    """log(1+x) truncated at x_trunc."""
    return _log_series(ctx, False)


def ell(j: int, ctx: SeriesContext) -> TruncatedSeries:
    """l_j = log(1+x)/log(u) - j."""
    return _log_series(ctx, True, j)


@lru_cache(maxsize=None)
def pi_factor_rational(n: int, j: int, p: int, u: int) -> tuple[Fraction, ...]:
    """Monic xi_n(u^{-j}(1+x) - 1) with exact rational coefficients."""
    step = p ** (n - 1)
    deg = step * (p - 1)
    c = [Fraction(0)] * (deg + 1)
    for i in range(p):
        weight = Fraction(u) ** (-j * step * (i - (p - 1)))
        for k in range(i * step + 1):
            c[k] += weight * math.comb(i * step, k)
    return tuple(c)


def pi_factor(n: int, j: int, ctx: SeriesContext) -> TruncatedSeries:
    """The monic irreducible level-n factor of l_j; its roots are u^j*zeta - 1."""
    if n < 1:
        raise PadicError("pi_factor needs n >= 1")
    _require_level(n, ctx)
    return TruncatedSeries.polynomial(ctx.p, pi_factor_rational(n, j, ctx.p, ctx.u), ctx.prec)


def evaluate_at(f: TruncatedSeries, point):
    """Horner evaluation of an exact polynomial at an ExtScalar or PadicScalar."""
    if not f.exact:
        raise PadicError("evaluate_at needs an exact polynomial")
    if f.shift:
        raise PadicError("evaluate_at needs integral coefficients")
    acc = point * 0
    for a in reversed(f.coeffs):
        acc = acc * point + a
    return acc


def pi_factor_root(n: int, j: int, zeta_power: int, ctx: SeriesContext) -> ExtScalar:
    """u^j * zeta^zeta_power - 1 in the cyclotomic extension of level n."""
    from .padic import cyclotomic_modulus

    mod = cyclotomic_modulus(ctx.p, n)
    zeta = ExtScalar.generator(ctx.p, mod, ctx.prec, kind="cyclotomic")
    uj = _unit_power(ctx.u, j, ctx.p, ctx.p ** ctx.prec)
    return zeta ** zeta_power * uj - 1


# -- divisibility ------------------------------------------------------------------


def _divmod_monic(a: list[int], b: list[int], mod: int):
    a = list(a)
    db = len(b) - 1
    if len(a) <= db:
        return [], a
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] % mod
        q[k - db] = c
        if c:
            for i in range(db + 1):
                a[k - db + i] -= c * b[i]
    return [x % mod for x in q], [x % mod for x in a[:db]]


def ord_at_factor(f: TruncatedSeries, pi: TruncatedSeries, tau: int | None = None) -> int:
    """Largest e with pi^e | f, remainders counted as zero from valuation tau on.

    ``f`` must be an exact polynomial and ``pi`` monic.  Division by a monic
    integral polynomial is exact modulo p^N, so the threshold defaults to the
    full effective precision of f after removing its content.
    """
    if not f.exact or not pi.exact:
        raise PadicError("ord_at_factor needs exact polynomials")
    if not pi.coeffs or pi.shift or pi.coeffs[-1] != 1:
        raise PadicError("pi must be monic with integral coefficients")
    p = f.p
    if f.is_zero():
        raise PrecisionError("indeterminate: f is zero at working precision")
    vals = [int(vp(c, p)) for c in f.coeffs if c]
    content = min(vals)
    eff = min(f.prec + f.shift - content, pi.prec)
    c = [x // p ** content for x in f.coeffs]
    if tau is None:
        tau = eff
    if tau < 1:
        raise PrecisionError("precision too low to test divisibility")
    e = 0
    b = list(pi.coeffs)
    while len(c) > len(b) - 1:
        q, r = _divmod_monic(c, b, p ** eff)
        if any(x % p ** tau for x in r):
            break
        e += 1
        qv = [int(vp(x, p)) for x in q if x]
        if not qv:
            raise PrecisionError("quotient vanished at working precision")
        k = min(qv)
        eff -= k
        tau = min(tau, eff)
        if tau < 1:
            raise PrecisionError("precision exhausted while dividing")
        c = [x // p ** k for x in q]
        while c and c[-1] % p ** eff == 0:
            c.pop()
    return e


def ell_shadow(j: int, n0: int) -> FactoredElement:
    """prod_{n<=n0} pi_{n,j}: the zeros of l_j visible up to level n0."""
    if n0 < 1:
        raise PadicError("ell_shadow needs level >= 1")
    return FactoredElement({pi_symbol(n, j): 1 for n in range(1, n0 + 1)})
