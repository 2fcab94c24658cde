"""Finite-level group rings Z_p[(Z/p^n)^x] and the Mellin transform.

Coefficients are integers modulo p^prec.  The quotient Z_p[x]/omega_n is
represented by exact polynomials of degree < p^n (``TruncatedSeries`` with
no tail); since omega_n = (1+x)^(p^n) - 1, the monomials (1+x)^a with
0 <= a < p^n form a basis of it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .padic import PadicError, PadicScalar, teichmuller
from .phipsi import phi, psi
from .series import SeriesContext, TruncatedSeries, _divmod_monic, _taylor_shift, chi_u_eval, omega, ell


def _units(p: int, n: int) -> list[int]:
    return [a for a in range(1, p ** n) if a % p]


@dataclass(frozen=True)
class GroupRingElem:
    p: int
    level: int
    prec: int
    items: tuple[tuple[int, int], ...]  # sorted (residue, coefficient mod p^prec)

    def __post_init__(self):
        if self.level < 1:
            raise PadicError("group ring level must be >= 1")
        mod_n, mod = self.p ** self.level, self.p ** self.prec
        acc: dict[int, int] = {}
        for a, c in self.items:
            a %= mod_n
            if a % self.p == 0:
                raise PadicError(f"{a} is not a unit modulo {mod_n}")
            acc[a] = (acc.get(a, 0) + c) % mod
        object.__setattr__(self, "items", tuple(sorted((a, c) for a, c in acc.items() if c)))

    @classmethod
    def from_dict(cls, p, level, prec, coeffs) -> GroupRingElem:
        mod = p ** prec
        items = []
        for a, c in dict(coeffs).items():
            if isinstance(c, PadicScalar):
                if c.shift:
                    raise PadicError("group ring coefficients must be integral")
                c = c.rep
            elif isinstance(c, Fraction):
                c = c.numerator * pow(c.denominator, -1, mod)
            items.append((int(a), int(c)))
        return cls(p, level, prec, tuple(items))

    @classmethod
    def dirac(cls, a: int, level: int, ctx: SeriesContext) -> GroupRingElem:
        return cls(ctx.p, level, ctx.prec, ((a, 1),))

    @classmethod
    def random(cls, level: int, ctx: SeriesContext, rng: random.Random) -> GroupRingElem:
        mod = ctx.p ** ctx.prec
        return cls(ctx.p, level, ctx.prec, tuple((a, rng.randrange(mod)) for a in _units(ctx.p, level)))

    @property
    def coeffs(self) -> dict[int, PadicScalar]:
        return {a: PadicScalar(self.p, c, self.prec) for a, c in self.items}

    def coefficient(self, a: int) -> PadicScalar:
        return PadicScalar(self.p, dict(self.items).get(a % self.p ** self.level, 0), self.prec)

    def _same(self, other: GroupRingElem):
        if (self.p, self.level) != (other.p, other.level):
            raise PadicError("group ring elements live at different levels")

    def __add__(self, other: GroupRingElem) -> GroupRingElem:
        self._same(other)
        return GroupRingElem(self.p, self.level, min(self.prec, other.prec), self.items + other.items)

    def __sub__(self, other: GroupRingElem) -> GroupRingElem:
        return self + other.scale(-1)

    def scale(self, s: int) -> GroupRingElem:
        return GroupRingElem(self.p, self.level, self.prec, tuple((a, c * s) for a, c in self.items))

    def __mul__(self, other: GroupRingElem) -> GroupRingElem:
        self._same(other)
        out = [(a * b, c * d) for a, c in self.items for b, d in other.items]
        return GroupRingElem(self.p, self.level, min(self.prec, other.prec), tuple(out))

    def act(self, sigma: int) -> GroupRingElem:
        """[sigma] * f."""
        return GroupRingElem(self.p, self.level, self.prec, tuple((sigma * a, c) for a, c in self.items))

    def project(self, level: int) -> GroupRingElem:
        """Image under (Z/p^n)^x -> (Z/p^m)^x."""
        if not 1 <= level <= self.level:
            raise PadicError("can only project to a lower level")
        return GroupRingElem(self.p, level, self.prec, self.items)

    def __eq__(self, other):
        if not isinstance(other, GroupRingElem):
            return NotImplemented
        prec = min(self.prec, other.prec)
        mod = self.p ** prec
        a = {k: v % mod for k, v in self.items if v % mod}
        b = {k: v % mod for k, v in other.items if v % mod}
        return (self.p, self.level) == (other.p, other.level) and a == b

    __hash__ = None


@dataclass(frozen=True)
class DeltaChar:
    """delta = omega^i on Delta = mu_{p-1}."""

    p: int
    i: int

    def __post_init__(self):
        object.__setattr__(self, "i", self.i % (self.p - 1))

    def value(self, d: int, prec: int) -> int:
        """delta(d) for d in Z_p^x, via the Teichmuller character."""
        t = teichmuller(d % self.p, prec, self.p).rep
        return pow(t, self.i, self.p ** prec)


# -- the quotient Z_p[x]/omega_n --------------------------------------------------------


def reduce_mod_omega(f: TruncatedSeries, n: int, ctx: SeriesContext) -> TruncatedSeries:
    """Remainder of an exact polynomial on division by omega_n."""
    if not f.exact:
        raise PadicError("reduction mod omega_n needs an exact polynomial")
    mod = ctx.p ** (f.prec + f.shift)
    w = omega(n, ctx.with_(x_trunc=max(ctx.x_trunc, ctx.p ** n)))
    _, r = _divmod_monic(list(f.coeffs), list(w.coeffs), mod)
    return TruncatedSeries(f.p, tuple(r), f.prec, f.shift)


def _poly_from_y(b: list[int], prec: int, p: int) -> TruncatedSeries:
    mod = p ** prec
    return TruncatedSeries(p, tuple(_taylor_shift(b, 1, mod)), prec)


def _y_coeffs(f: TruncatedSeries, n: int) -> list[int]:
    mod = f.p ** (f.prec + f.shift)
    b = _taylor_shift(list(f.coeffs), -1, mod)
    return b + [0] * (f.p ** n - len(b))


def mellin(f: GroupRingElem, ctx: SeriesContext | None = None) -> TruncatedSeries:
    """sum_a c_a (1+x)^a in Z_p[x]/omega_n, lifts 0 < a < p^n."""
    p, n = f.p, f.level
    b = [0] * p ** n
    for a, c in f.items:
        b[a] = c
    return _poly_from_y(b, f.prec, p)


def mellin_inverse(g: TruncatedSeries, n: int) -> GroupRingElem:
    """The group ring element with mellin image g; raises if g is not in the image."""
    p = g.p
    if g.shift:
        raise PadicError("not in the Mellin image: non-integral coefficients")
    b = _y_coeffs(g, n)
    if len(b) > p ** n:
        raise PadicError("reduce modulo omega_n first")
    bad = [a for a in range(0, p ** n, p) if b[a]]
    if bad:
        raise PadicError(f"not in the Mellin image: (1+x)^{bad[0]} occurs")
    return GroupRingElem(p, n, g.prec, tuple((a, c) for a, c in enumerate(b) if c))


def _compose_mod_omega(f: TruncatedSeries, h: TruncatedSeries, n: int, ctx: SeriesContext) -> TruncatedSeries:
    mod = ctx.p ** (f.prec + f.shift)
    w = list(omega(n, ctx.with_(x_trunc=max(ctx.x_trunc, ctx.p ** n))).coeffs)
    hc = list(h.coeffs)
    acc: list[int] = []
    for a in reversed(f.coeffs):
        prod = [0] * (len(acc) + len(hc))
        for i, x in enumerate(acc):
            if x:
                for k, y in enumerate(hc):
                    prod[i + k] += x * y
        if not prod:
            prod = [0]
        prod[0] += a
        _, acc = _divmod_monic([x % mod for x in prod], w, mod)
    return TruncatedSeries(f.p, tuple(acc), f.prec, f.shift)


def mellin_action_check(sigma: int, f: TruncatedSeries, n: int, ctx: SeriesContext) -> TruncatedSeries:
    """f((1+x)^sigma - 1) mod omega_n, computed by substitution in the x-basis."""
    p = ctx.p
    if sigma % p == 0:
        raise PadicError("sigma must be a unit")
    s = sigma % p ** n
    h = TruncatedSeries(p, tuple(math.comb(s, k) for k in range(s + 1)), f.prec) - 1
    h = reduce_mod_omega(h, n, ctx)
    return _compose_mod_omega(reduce_mod_omega(f, n, ctx), h, n, ctx)


def psi_quotient(f: TruncatedSeries, n: int, ctx: SeriesContext) -> TruncatedSeries:
    """psi: Z_p[x]/omega_n -> Z_p[x]/omega_(n-1)."""
    g = psi(reduce_mod_omega(f, n, ctx))
    return reduce_mod_omega(g, n - 1, ctx) if n > 1 else reduce_mod_omega(g, 0, ctx)


def phi_quotient(f: TruncatedSeries, n: int, ctx: SeriesContext) -> TruncatedSeries:
    """phi: Z_p[x]/omega_(n-1) -> Z_p[x]/omega_n."""
    return reduce_mod_omega(phi(f), n, ctx)


def e_delta(delta: DeltaChar, f: GroupRingElem) -> GroupRingElem:
    """(p-1)^-1 sum_{d in Delta} delta(d)^-1 [d] f."""
    p, prec = f.p, f.prec
    mod = p ** prec
    inv = pow(p - 1, -1, mod)
    out = None
    for b in range(1, p):
        d = teichmuller(b, max(prec, f.level), p).rep
        weight = pow(delta.value(b, prec), -1, mod) * inv
        term = f.act(d).scale(weight)
        out = term if out is None else out + term
    return out


def delta_elements(p: int, n: int) -> list[int]:
    """Teichmuller representatives of Delta modulo p^n."""
    return [teichmuller(b, n, p).rep % p ** n for b in range(1, p)]


# -- linear algebra modulo p ---------------------------------------------------------------


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    m = [[x % p for x in r] for r in rows if any(x % p for x in r)]
    rank, col = 0, 0
    ncols = max((len(r) for r in m), default=0)
    m = [r + [0] * (ncols - len(r)) for r in m]
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                c = m[i][col]
                m[i] = [(x - c * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def _vector(f: TruncatedSeries, size: int) -> list[int]:
    if f.shift:
        raise PadicError("expected integral coefficients")
    return list(f.coeffs) + [0] * (size - len(f.coeffs))


@dataclass(frozen=True)
class MellinImageReport:
    level: int
    injective: bool
    image_rank: int
    kernel_dimension: int
    expected_dimension: int


def mellin_image_report(n: int, ctx: SeriesContext) -> MellinImageReport:
    """Ranks mod p of the Dirac images and of psi on Z_p[x]/omega_n."""
    p = ctx.p
    size = p ** n
    dirac_rows = [_vector(mellin(GroupRingElem.dirac(a, n, ctx)), size) for a in _units(p, n)]
    img = rank_mod_p(dirac_rows, p)
    # psi on the x-basis; kernel dimension = p^n - rank
    cols = []
    for k in range(size):
        e = TruncatedSeries(p, tuple([0] * k + [1]), ctx.prec)
        cols.append(_vector(psi_quotient(e, n, ctx), p ** (n - 1)))
    psi_rank = rank_mod_p(cols, p)
    expected = p ** n - p ** (n - 1)
    return MellinImageReport(n, img == len(dirac_rows), img, size - psi_rank, expected)


def random_kernel_element(n: int, ctx: SeriesContext, rng: random.Random) -> TruncatedSeries:
    """g - phi(psi(g)) for a random g; lies in ker psi because psi o phi = id."""
    mod = ctx.p ** ctx.prec
    g = TruncatedSeries(ctx.p, tuple(rng.randrange(mod) for _ in range(ctx.p ** n)), ctx.prec)
    return g - phi_quotient(psi_quotient(g, n, ctx), n, ctx)


def delta_permutation(n: int, ctx: SeriesContext) -> dict[int, tuple[int, ...]]:
    """For d in Delta, the index map i -> j with d . S_i = S_j, where S_i = (1+x)^i phi(Z_p[x]/omega_(n-1)).

    Found by testing subspace equality modulo p in the x-basis; raises if the
    image of some S_i is not one of the S_j.
    """
    p = ctx.p
    size = p ** n
    spaces = []
    for i in range(p):
        yi = TruncatedSeries(p, tuple(math.comb(i, k) for k in range(i + 1)), ctx.prec)
        basis = []
        for k in range(p ** (n - 1)):
            xk = TruncatedSeries(p, tuple([0] * k + [1]), ctx.prec)
            basis.append(_vector(reduce_mod_omega(yi * phi(xk), n, ctx), size))
        spaces.append(basis)
    ranks = [rank_mod_p(s, p) for s in spaces]
    record = {}
    for d in delta_elements(p, n):
        perm = []
        for i, space in enumerate(spaces):
            moved = [_vector(mellin_action_check(d, TruncatedSeries(p, tuple(v), ctx.prec), n, ctx), size)
                     for v in space]
            hits = [j for j in range(p)
                    if rank_mod_p(spaces[j] + moved, p) == ranks[j] == rank_mod_p(moved, p)]
            if len(hits) != 1:
                raise PadicError(f"Delta element {d} does not map S_{i} onto a single S_j")
            perm.append(hits[0])
        record[d % p] = tuple(perm)
    return record


# -- l_j on the group side ---------------------------------------------------------------------


def ell_group(j: int, t_trunc: int, ctx: SeriesContext) -> TruncatedSeries:
    """log(1+T)/log(u) - j in T = gamma - 1, truncated at T^t_trunc."""
    f = ell(j, ctx.with_(x_trunc=t_trunc))
    return TruncatedSeries(f.p, f.coeffs, f.prec, f.shift, f.tail, "T")


def ell_group_eval(f: TruncatedSeries, k: int, ctx: SeriesContext) -> PadicScalar:
    """Value at the character gamma -> u^k, i.e. at T = u^k - 1."""
    return chi_u_eval(TruncatedSeries(f.p, f.coeffs, f.prec, f.shift, f.tail, "x"), k, ctx)


def ell_normalization(j: int, ks, ctx: SeriesContext, t_trunc: int = 200) -> list[Fraction]:
    """Ratios group-side / x-side of the values of l_j at chi^k (expected all 1)."""
    g = ell_group(j, t_trunc, ctx)
    x = ell(j, ctx.with_(x_trunc=t_trunc))
    out = []
    for k in ks:
        a, b = ell_group_eval(g, k, ctx), chi_u_eval(x, k, ctx)
        if b.is_zero():
            out.append(Fraction(1) if a.is_zero() else Fraction(0))
        else:
            out.append((a / b).lift())
    return out


def group_from_t_polynomial(coeffs, n: int, ctx: SeriesContext) -> GroupRingElem:
    """P([u] - 1) in Z_p[(Z/p^n)^x] for a polynomial P in T with integer coefficients."""
    p = ctx.p
    t = GroupRingElem(p, n, ctx.prec, ((ctx.u, 1), (1, -1)))
    out = GroupRingElem(p, n, ctx.prec, ())
    power = GroupRingElem.dirac(1, n, ctx)
    for c in coeffs:
        out = out + power.scale(c)
        power = power * t
    return out
