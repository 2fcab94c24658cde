"""The operators phi and psi, polynomials in log x, and growth-order estimates.

Two charts are used.

``x``-chart
    power series around 0 (elements of H and their truncations).  psi uses
    the y = 1+x basis: rewrite in y, keep exponents divisible by p, take the
    p-th root of the exponent, rewrite in x.

``w``-chart
    power series in w = 1/x, i.e. functions on an annulus near the boundary
    of the unit disk.  Polynomials in L = log x are carried here because
    phi(L) = p*L + log(phi(x)/x^p) with log(phi(x)/x^p) = log((1+w)^p - w^p)
    a genuine power series in w with p-divisible coefficients.  On this chart
    psi(w^k) is a polynomial of degree <= k with integral coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .padic import PadicError, PadicScalar, PrecisionError, vp
from .series import (
    RadiusExp,
    SeriesContext,
    TruncatedSeries,
    UncertifiedError,
    _logp,
    _taylor_shift,
    norm_at_radius,
)


def _require_chart(f: TruncatedSeries, var: str):
    if f.var != var:
        raise PadicError(f"expected a series in {var}, got one in {f.var}")


# -- x-chart -------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _omega1_powers(p: int, rows: int, cols: int, modexp: int) -> tuple[tuple[int, ...], int]:
    """omega_1^i mod (x^cols, p^modexp) for i < rows, each row packed into one integer."""
    mod = p ** modexp
    width = 2 * mod.bit_length() + rows.bit_length() + 2
    w1 = [math.comb(p, k) for k in range(p + 1)]
    row = [1] + [0] * (cols - 1)
    packed = []
    for _ in range(rows):
        packed.append(sum(c << (width * j) for j, c in enumerate(row) if c))
        new = [0] * cols
        for j, c in enumerate(row):
            if c:
                for k in range(1, min(p, cols - 1 - j) + 1):
                    new[j + k] += c * w1[k]
        row = [c % mod for c in new]
    return tuple(packed), width


def phi(f: TruncatedSeries) -> TruncatedSeries:
    """f((1+x)^p - 1); exact modulo x^x_trunc since omega_1 is divisible by x."""
    if f.var == "w":
        return phi_w(f)
    p = f.p
    e = f.prec + f.shift
    mod = p ** e
    if not f.coeffs:
        return f
    n_out = (len(f.coeffs) - 1) * p + 1 if f.exact else f.x_trunc
    rows, width = _omega1_powers(p, len(f.coeffs), n_out, e)
    total = sum(a * r for a, r in zip(f.coeffs, rows) if a)
    mask = (1 << width) - 1
    out = []
    for _ in range(n_out):
        out.append((total & mask) % mod)
        total >>= width
    # phi(x^k) only involves degrees k..pk, so the floor (c, l) persists
    tail = None if f.exact else f.floor_bound()
    return TruncatedSeries(p, tuple(out), f.prec, f.shift, tail, f.var)


@lru_cache(maxsize=8)
def _binomial_rows(m: int) -> tuple[tuple[int, ...], ...]:
    rows = [(1,)]
    for k in range(1, m):
        prev = rows[-1]
        rows.append((1,) + tuple(prev[i] + prev[i + 1] for i in range(k - 1)) + (1,))
    return tuple(rows)


def psi_truncation(f: TruncatedSeries) -> int:
    """Number of coefficients of psi(f) certified by the truncation of f.

    The unknown tail x^M*h contributes to coefficient i of psi with valuation
    at least (M - p*i)/(p-1) - 1 + v(h).
    """
    p = f.p
    c, l = f.floor_bound()
    m = f.x_trunc
    budget = m - (p - 1) * (f.prec + 1 - c + l * _logp(m, p))
    return max(0, math.floor(budget / p) + 1) if budget >= 0 else 0


def _psi_floor(bound: tuple[float, float], p: int) -> tuple[float, float]:
    # psi preserves Z_p[[x]]; a logarithmic floor loses a bounded amount
    c, l = bound
    if l == 0:
        return c, 0.0
    return c - l * (1 + math.log(2, p)) - 1, l


def _y_coefficients(f: TruncatedSeries) -> list[int]:
    mod = f.p ** (f.prec + f.shift)
    return _taylor_shift(list(f.coeffs), -1, mod)


def _from_y(b: list[int], mod: int) -> list[int]:
    return _taylor_shift(b, 1, mod)


def psi(f: TruncatedSeries) -> TruncatedSeries:
    """The left inverse of phi characterized by phi(psi(f)) = p^-1 sum_zeta f(zeta(1+x)-1)."""
    if f.var == "w":
        return psi_w(f)
    return phi_components(f, only_first=True)[0]


def phi_components(f: TruncatedSeries, only_first: bool = False) -> list[TruncatedSeries]:
    """f_0..f_{p-1} with f = sum_i (1+x)^i phi(f_i); f_0 = psi(f)."""
    _require_chart(f, "x")
    p = f.p
    mod = p ** (f.prec + f.shift)
    b = _y_coefficients(f)
    if f.exact:
        n_out, tail = None, None
    else:
        n_out, tail = psi_truncation(f), _psi_floor(f.floor_bound(), p)
    out = []
    for i in range(1 if only_first else p):
        comp = _from_y(b[i::p], mod)
        if n_out is not None:
            comp = comp[:n_out] + [0] * max(0, n_out - len(comp))
        out.append(TruncatedSeries(p, tuple(comp), f.prec, f.shift, tail, "x"))
    return out


def reconstruct_from_components(components: list[TruncatedSeries]) -> TruncatedSeries:
    """sum_i (1+x)^i phi(f_i)."""
    p = components[0].p
    total = None
    for i, comp in enumerate(components):
        y_pow = TruncatedSeries.polynomial(p, [math.comb(i, k) for k in range(i + 1)], comp.prec)
        term = y_pow * phi(comp)
        total = term if total is None else total + term
    return total


def cyclotomic_average(f: TruncatedSeries, upto: int | None = None) -> TruncatedSeries:
    """p^-1 sum_{zeta^p=1} f(zeta(1+x) - 1), computed in Z_p[zeta_p].

    This is the characterizing formula for phi o psi, evaluated by Taylor
    expansion at zeta - 1 and a trace; it shares no code with :func:`psi`.
    Coefficient j is certified when (M - j)/(p-1) - 1 + v(tail) >= prec.
    """
    _require_chart(f, "x")
    p = f.p
    d = p - 1
    mod = p ** (f.prec + f.shift + 1)
    m = len(f.coeffs)
    if f.exact:
        n_out = m
        tail = None
    else:
        c, l = f.floor_bound()
        n_out = max(0, math.floor(m - (p - 1) * (f.prec + 1 - c + l * _logp(m, p))))
        tail = (c, l)
    if upto is not None:
        n_out = min(n_out, upto)

    def times_zeta(e):
        # basis 1, z, ..., z^(p-2); z^(p-1) = -(1 + z + ... + z^(p-2))
        top = e[-1]
        return [-top] + [e[i - 1] - top for i in range(1, d)]

    alpha_pows = [[1] + [0] * (d - 1)]
    for _ in range(1, m):
        prev = alpha_pows[-1]
        zp = times_zeta(prev)
        alpha_pows.append([(zp[i] - prev[i]) % mod for i in range(d)])
    total = []
    zeta_j = [1] + [0] * (d - 1)
    binom = _binomial_rows(m)
    for j in range(n_out):
        g = [0] * d
        for k in range(j, m):
            a = f.coeffs[k]
            if a:
                coef = binom[k][j] * a
                ap = alpha_pows[k - j]
                for i in range(d):
                    g[i] += coef * ap[i]
        # multiply by zeta^j
        prod = [0] * d
        for i in range(d):
            if zeta_j[i]:
                shifted = g
                for _ in range(i):
                    shifted = times_zeta(shifted)
                for t in range(d):
                    prod[t] += zeta_j[i] * shifted[t]
        trace = (d * prod[0] - sum(prod[1:])) if d > 1 else prod[0]
        total.append(f.coeffs[j] + trace)
        zeta_j = [x % mod for x in times_zeta(zeta_j)]
    # divide by p: exact since the sum over mu_p is divisible by p
    return TruncatedSeries(p, tuple(total), f.prec, f.shift + 1, tail, "x")


# -- w-chart ----------------------------------------------------------------------


def _negligible_tail(f: TruncatedSeries) -> bool:
    if f.exact:
        return True
    c, l = f.tail
    return c - l * _logp(f.x_trunc, f.p) >= f.prec and l == 0


@lru_cache(maxsize=None)
def _psi_w_matrix(p: int, n: int, modexp: int) -> tuple[tuple[int, ...], ...]:
    """Row k: coefficients of psi(w^k) = sum_m C(pm-1, k-1) (w/(1+w))^m, degree <= k."""
    mod = p ** modexp
    rows = [(1,)]
    for k in range(1, n):
        row = [0] * (k + 1)
        m0 = -(-k // p)
        for r in range(m0, k + 1):
            acc = 0
            for m in range(m0, r + 1):
                acc += math.comb(p * m - 1, k - 1) * (-1) ** (r - m) * math.comb(r - 1, r - m)
            row[r] = acc % mod
        rows.append(tuple(row))
    return tuple(rows)


def psi_w(f: TruncatedSeries) -> TruncatedSeries:
    """psi on the w-chart; psi(w^k) only reaches degrees ceil(k/p)..k."""
    _require_chart(f, "w")
    p = f.p
    e = f.prec + f.shift
    mod = p ** e
    rows = _psi_w_matrix(p, len(f.coeffs), e)
    out = [0] * len(f.coeffs)
    for k, a in enumerate(f.coeffs):
        if a:
            for r, c in enumerate(rows[k]):
                if c:
                    out[r] += a * c
    out = [x % mod for x in out]
    if _negligible_tail(f):
        return TruncatedSeries(p, tuple(out), f.prec, f.shift, f.tail, "w")
    n_out = -(-f.x_trunc // p)
    return TruncatedSeries(p, tuple(out[:n_out]), f.prec, f.shift, (f.floor_bound()[0], 0.0), "w")


@lru_cache(maxsize=None)
def _phi_of_w(p: int, n: int, modexp: int) -> tuple[int, ...]:
    """w^p / ((1+w)^p - w^p) modulo w^n."""
    mod = p ** modexp
    den = [math.comb(p, k) for k in range(p)] + [0] * max(0, n - p)
    den = den[:n]
    inv = [0] * n
    inv[0] = 1
    for k in range(1, n):
        inv[k] = -sum(den[i] * inv[k - i] for i in range(1, min(k, p - 1) + 1)) % mod
    return tuple(([0] * p + inv)[:n])


def phi_w(f: TruncatedSeries, n_out: int | None = None) -> TruncatedSeries:
    """f(phi(w)) modulo w^n_out (default p * number of known coefficients).

    phi(w) is an infinite series with integral coefficients, so the result
    is truncated with an integral tail even for polynomial input.
    """
    _require_chart(f, "w")
    p = f.p
    e = f.prec + f.shift
    mod = p ** e
    if n_out is None:
        n_out = max(1, len(f.coeffs) * p)
    if not _negligible_tail(f):
        n_out = min(n_out, f.x_trunc)
    g = _phi_of_w(p, n_out, e)
    acc = [0] * n_out
    for a in reversed(f.coeffs):
        new = [0] * n_out
        for i, ai in enumerate(acc):
            if ai:
                for k in range(p, n_out - i):
                    if g[k]:
                        new[i + k] += ai * g[k]
        new[0] += a
        acc = [c % mod for c in new]
    return TruncatedSeries(p, tuple(acc), f.prec, f.shift, (f.floor_bound()[0], 0.0), "w")


def log_phi_x_over_x_p(ctx: SeriesContext) -> TruncatedSeries:
    """c = log((1+w)^p - w^p) = log(phi(x)/x^p), so that phi(L) = p*L + c."""
    p, prec = ctx.p, ctx.prec
    h = [math.comb(p, k) // p for k in range(1, p)]  # (1+w)^p - w^p - 1 = p*w*h(w)
    z = TruncatedSeries.polynomial(p, [0] + h, prec + 4, var="w")
    total = TruncatedSeries.polynomial(p, [], prec + 4, var="w")
    power = TruncatedSeries.polynomial(p, [1], prec + 4, var="w")
    m = 1
    while m - math.log(m, p) < prec + 2 or m < 2:
        power = power * z
        term = power.scale(Fraction((-1) ** (m + 1) * p ** m, m))
        total = total + term
        m += 1
    return total.with_prec(prec)


# -- polynomials in L = log x ------------------------------------------------------------


@dataclass(frozen=True)
class LogSeries:
    """sum_k coeffs[k] * L^k with coefficients in the w-chart.

    ``branch_const`` records the value assigned to log p.  The decomposition
    phi(L) = p*L + log((1+w)^p - w^p) only takes logarithms of principal units,
    so the constant never enters a computation; it is carried for reporting.
    """

    coeffs: tuple[TruncatedSeries, ...]
    branch_const: Fraction = field(default=Fraction(0))

    @property
    def p(self) -> int:
        return self.coeffs[0].p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def monomial(cls, k: int, ctx: SeriesContext, scalar=1) -> LogSeries:
        zero = TruncatedSeries.polynomial(ctx.p, [], ctx.prec, var="w")
        one = TruncatedSeries.polynomial(ctx.p, [scalar], ctx.prec, var="w")
        return cls(tuple([zero] * k + [one]))

    def __add__(self, other: LogSeries) -> LogSeries:
        n = max(len(self.coeffs), len(other.coeffs))
        zero = TruncatedSeries.polynomial(self.p, [], self.coeffs[0].prec, var="w")
        a = list(self.coeffs) + [zero] * (n - len(self.coeffs))
        b = list(other.coeffs) + [zero] * (n - len(other.coeffs))
        return LogSeries(tuple(x + y for x, y in zip(a, b)), self.branch_const)

    def __sub__(self, other: LogSeries) -> LogSeries:
        return self + other.scale(-1)

    def scale(self, s) -> LogSeries:
        return LogSeries(tuple(c.scale(s) for c in self.coeffs), self.branch_const)

    def agreement(self, other: LogSeries) -> tuple[int, bool]:
        """(digits, exact): digits of agreement over all L-coefficients.

        ``exact`` is True when the difference vanishes at working precision,
        in which case ``digits`` is the precision cap.
        """
        d = self - other
        vals = [c.vmin() for c in d.coeffs if not c.is_zero()]
        if not vals:
            return min(c.prec for c in d.coeffs), True
        return int(min(vals)), False


def log_valuation(g: LogSeries, rho: RadiusExp, n: int) -> Fraction:
    """Valuation of sum_k c_k L^k on |x| = rho_n = rho^(1/p^n).

    By convention L carries valuation n at level n (norm p^-n); nothing about
    log x itself is derived from this.  Coefficients in the w-chart must be
    exact polynomials, with v(w) = -v(x).
    """
    p = g.p
    rho_n = rho.root(p, n)
    s = rho_n.exponent
    best = None
    for k, c in enumerate(g.coeffs):
        if c.is_zero():
            continue
        if c.var == "w":
            if not c.exact:
                raise UncertifiedError("w-chart coefficients must be exact polynomials")
            v = min(c.coefficient(m).valuation - m * s for m in range(len(c.coeffs)) if c.coeffs[m])
        else:
            v = norm_at_radius(c, rho_n).valuation
        v += k * n
        best = v if best is None else min(best, v)
    if best is None:
        raise UncertifiedError("zero to working precision")
    return Fraction(best)


def psi_log(g: LogSeries, c_series: TruncatedSeries | None = None) -> LogSeries:
    """psi(sum_k g_k L^k) = sum_k p^-k sum_j C(k,j) (-1)^(k-j) L^j psi(g_k c^(k-j))."""
    p = g.p
    prec = g.coeffs[0].prec
    if c_series is None:
        c_series = log_phi_x_over_x_p(SeriesContext(p=p, u=1 + p, prec=prec, x_trunc=1))
    k_max = g.degree
    c_pows = [TruncatedSeries.polynomial(p, [1], prec, var="w")]
    for _ in range(k_max):
        c_pows.append(c_pows[-1] * c_series)
    zero = TruncatedSeries.polynomial(p, [], prec, var="w")
    out = [zero] * (k_max + 1)
    for k, gk in enumerate(g.coeffs):
        if gk.is_zero():
            continue
        for j in range(k + 1):
            term = psi_w(gk * c_pows[k - j]).scale(Fraction(math.comb(k, j) * (-1) ** (k - j), p ** k))
            out[j] = out[j] + term
    return LogSeries(tuple(c.with_prec(prec) for c in out), g.branch_const)


@dataclass(frozen=True)
class ThetaRun:
    k: int
    convergents: tuple[LogSeries, ...]
    agreement: tuple[tuple[int, int, bool], ...]  # (step, digits, exact)


def theta_k_approx(k: int, n_steps: int, ctx: SeriesContext) -> ThetaRun:
    """Convergents p^(k n) psi^n(L^k) for n = 0..n_steps with their agreement table.

    Row (n, digits, exact) compares step n with step n-1.  No limit value is
    extrapolated.
    """
    if k < 0 or k > 3:
        raise PadicError("theta_k_approx supports 0 <= k <= 3")
    c_series = log_phi_x_over_x_p(ctx)
    g = LogSeries.monomial(k, ctx)
    convergents = [g]
    table = []
    for n in range(1, n_steps + 1):
        g = psi_log(g, c_series).scale(p_power(ctx.p, k))
        digits, exact = g.agreement(convergents[-1])
        convergents.append(g)
        table.append((n, digits, exact))
    return ThetaRun(k, tuple(convergents), tuple(table))


def p_power(p: int, k: int) -> int:
    return p ** k


# -- growth orders --------------------------------------------------------------------


def _mat_inverse(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise PadicError("phi matrix is not invertible")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def _mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


@dataclass(frozen=True)
class GrowthEstimate:
    """Least-squares fit of c_n = v_{rho_n}((1 (x) phi)^-n g) against n.

    ``estimate`` is minus the fitted slope: the infimum of r making
    p^(rn) * ||.||_{rho_n} tend to zero.  ``bounded`` flags that the
    deviations from the fitted line stay inside ``band``.
    """

    estimate: float
    residual: float
    max_deviation: float
    levels: tuple[int, ...]
    values: tuple[Fraction, ...]
    bounded: bool
    truncated_at: int | None = None


def o_phi_estimate(g: list[TruncatedSeries], phi_matrix, rho: RadiusExp, n_max: int,
                   band: float = 0.5) -> GrowthEstimate:
    """Estimate the growth order of g in H (x) D along rho_n = rho^(1/p^n)."""
    p = g[0].p
    a = [[Fraction(x) for x in row] for row in phi_matrix]
    if len(a) != len(g):
        raise PadicError("phi matrix size does not match the coordinate vector")
    a_inv = _mat_inverse(a)
    power = [[Fraction(int(i == j)) for j in range(len(a))] for i in range(len(a))]
    levels, values = [], []
    truncated = None
    for n in range(n_max + 1):
        coords = []
        for i in range(len(g)):
            acc = None
            for k, gk in enumerate(g):
                if power[i][k] != 0:
                    term = gk.scale(power[i][k])
                    acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                coords.append(acc)
        try:
            vals = [norm_at_radius(c, rho.root(p, n)).valuation for c in coords]
        except UncertifiedError:
            truncated = n
            break
        levels.append(n)
        values.append(min(vals))
        power = _mat_mul(a_inv, power)
    if len(levels) < 2:
        raise UncertifiedError("fewer than two certified levels; increase x_trunc")
    xs = [float(n) for n in levels]
    ys = [float(v) for v in values]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    intercept = my - slope * mx
    devs = [y - (intercept + slope * x) for x, y in zip(xs, ys)]
    rms = math.sqrt(sum(d * d for d in devs) / len(devs))
    maxdev = max(abs(d) for d in devs)
    return GrowthEstimate(-slope + 0.0, rms, maxdev, tuple(levels), tuple(values), maxdev <= band, truncated)
