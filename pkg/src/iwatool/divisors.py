"""Elementary-divisor chains from minor valuations.

Chains are listed in descending order f_1, ..., f_r with f_{s+1} | f_s.
Two engines compute them:

* :func:`snf_exact` works on matrices whose entries are factored elements
  (or ``None`` for zero).  The exponent of an atom in a k x k minor is taken
  to be the least exponent sum over the k! diagonal products, which holds
  when the implicit units are generic (no cancellation between terms).
* :func:`snf_numeric` works on matrices of exact polynomials and measures
  the order of every minor at each supplied monic factor.

Neither engine row-reduces; the k-th ascending divisor has exponent
mu_k - mu_(k-1) where mu_k is the least exponent among k x k minors.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from .factored import FactoredElement, parse_symbol, pi_symbol
from .padic import PadicError, PrecisionError
from .series import SeriesContext, TruncatedSeries, ord_at_factor, pi_factor


class NoChainError(PadicError):
    pass


@dataclass(frozen=True)
class DivisorChain:
    entries: tuple[FactoredElement, ...]
    partial: bool = False
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for big, small in zip(self.entries, self.entries[1:]):
            if not small.divides(big):
                raise PadicError(f"chain is not descending: {small} does not divide {big}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        if not isinstance(other, DivisorChain):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def ascending(self) -> tuple[FactoredElement, ...]:
        return tuple(reversed(self.entries))

    def product(self) -> FactoredElement:
        out = FactoredElement.one()
        for e in self.entries:
            out = out * e
        return out

    def symbols(self) -> list[str]:
        seen = {s for e in self.entries for s in e}
        return sorted(seen, key=lambda s: (parse_symbol(s)[0] != "ell", parse_symbol(s)[1:]))

    def __str__(self):
        return "[" + "; ".join(str(e) for e in self.entries) + "]"

    @classmethod
    def from_ascending_exponents(cls, asc: dict[str, list[int]], rank: int, partial=False, notes=()):
        entries = []
        for k in range(rank):
            entries.append(FactoredElement({s: e[k] for s, e in asc.items() if e[k]}))
        return cls(tuple(reversed(entries)), partial, tuple(notes))


def exponent_of(chain: DivisorChain) -> FactoredElement:
    """f_1, the generator of the exponent ideal."""
    if not chain.entries:
        raise NoChainError("empty chain has no exponent")
    return chain.entries[0]


# -- exact engine ------------------------------------------------------------------------


def min_matching_profile(weights: list[list[float]]) -> list[float]:
    """mu_k = least sum of k entries in distinct rows and columns, k = 0..min(rows, cols)."""
    rows = len(weights)
    cols = len(weights[0]) if rows else 0
    inf = math.inf
    # dp[mask] = least cost using exactly the columns in mask
    dp = {0: 0.0}
    for r in range(rows):
        new = dict(dp)
        for mask, cost in dp.items():
            for c in range(cols):
                w = weights[r][c]
                if w == inf or mask >> c & 1:
                    continue
                m2 = mask | 1 << c
                v = cost + w
                if v < new.get(m2, inf):
                    new[m2] = v
        dp = new
    mu = [inf] * (min(rows, cols) + 1)
    for mask, cost in dp.items():
        k = bin(mask).count("1")
        mu[k] = min(mu[k], cost)
    return mu


def _parse_matrix(matrix) -> list[list[FactoredElement | None]]:
    out = []
    for row in matrix:
        out.append([None if e is None else e if isinstance(e, FactoredElement) else FactoredElement(e)
                    for e in row])
    if not out or any(len(r) != len(out[0]) for r in out):
        raise PadicError("matrix must be rectangular and nonempty")
    return out


def snf_exact(matrix) -> DivisorChain:
    """Chain of a factored matrix (entries FactoredElement, mapping, or None for 0)."""
    a = _parse_matrix(matrix)
    inf = math.inf
    support = [[0.0 if e is not None else inf for e in row] for row in a]
    rank_profile = min_matching_profile(support)
    rank = max(k for k, v in enumerate(rank_profile) if v < inf)
    if rank == 0:
        raise NoChainError("no chain: the matrix is zero")

    by_j: dict[int, set[str]] = {}
    for row in a:
        for e in row:
            for s in e or ():
                kind, *nums = parse_symbol(s)
                by_j.setdefault(nums[-1], set()).add(s)

    def profile(weight):
        w = [[inf if e is None else float(weight(e)) for e in row] for row in a]
        mu = min_matching_profile(w)
        return [int(mu[k] - mu[k - 1]) for k in range(1, rank + 1)]

    asc: dict[str, list[int]] = {}
    for j, symbols in by_j.items():
        ell_s = f"ell:{j}"
        levels = sorted(parse_symbol(s)[1] for s in symbols if s.startswith("pi:"))
        generic = profile(lambda e: e.get(ell_s)) if ell_s in symbols else [0] * rank
        if ell_s in symbols:
            asc[ell_s] = generic
        for n in levels:
            s = pi_symbol(n, j)
            prof = profile(lambda e: e.get(s) + e.get(ell_s))
            diff = [x - g for x, g in zip(prof, generic)]
            if min(diff) < 0:
                raise PadicError(f"divisors mixing {ell_s} and {s} are not products of atoms")
            asc[s] = diff
    notes = [f"rank {rank} of {len(a)}x{len(a[0])}"] if rank < min(len(a), len(a[0])) else []
    return DivisorChain.from_ascending_exponents(asc, rank, notes=notes)


# -- numeric engine ----------------------------------------------------------------------


class _Minors:
    """k x k minors by Laplace expansion along the first row, memoized."""

    def __init__(self, matrix: list[list[TruncatedSeries]]):
        self.matrix = matrix
        self.cache: dict = {}

    def __call__(self, rs: tuple[int, ...], cs: tuple[int, ...]) -> TruncatedSeries:
        key = (rs, cs)
        if key in self.cache:
            return self.cache[key]
        m = self.matrix
        if len(rs) == 1:
            out = m[rs[0]][cs[0]]
        else:
            out = None
            r0, rest = rs[0], rs[1:]
            for idx, c in enumerate(cs):
                entry = m[r0][c]
                if entry.is_zero():
                    continue
                term = entry * self(rest, cs[:idx] + cs[idx + 1:])
                if idx % 2:
                    term = -term
                out = term if out is None else out + term
            if out is None:
                out = m[r0][cs[0]] * 0
        self.cache[key] = out
        return out


EXHAUSTIVE_LIMIT = 5
SAMPLES_PER_SIZE = 200


def all_minors(matrix: list[list[TruncatedSeries]]) -> dict[tuple[tuple[int, ...], tuple[int, ...]], TruncatedSeries]:
    """Every k x k minor."""
    rows, cols = len(matrix), len(matrix[0])
    minor = _Minors(matrix)
    return {(rs, cs): minor(rs, cs)
            for k in range(1, min(rows, cols) + 1)
            for rs in itertools.combinations(range(rows), k)
            for cs in itertools.combinations(range(cols), k)}


def sampled_minors(matrix, rng: random.Random, samples: int = SAMPLES_PER_SIZE):
    """Up to ``samples`` distinct random k x k minors for each k; returns (minors, notes)."""
    rows, cols = len(matrix), len(matrix[0])
    minor = _Minors(matrix)
    out, notes = {}, []
    for k in range(1, min(rows, cols) + 1):
        total = math.comb(rows, k) * math.comb(cols, k)
        if total <= samples:
            keys = [(rs, cs) for rs in itertools.combinations(range(rows), k)
                    for cs in itertools.combinations(range(cols), k)]
        else:
            keys = set()
            while len(keys) < samples:
                keys.add((tuple(sorted(rng.sample(range(rows), k))), tuple(sorted(rng.sample(range(cols), k)))))
            keys = sorted(keys)
            notes.append(f"sampled {samples} of {total} {k}x{k} minors; mu_{k} is an upper bound")
        for key in keys:
            out[key] = minor(*key)
    return out, notes


def snf_numeric(matrix: list[list[TruncatedSeries]], factors: dict[str, TruncatedSeries],
                seed: int = 0) -> DivisorChain:
    """Chain of a polynomial matrix, assuming every divisor is a product of the given factors.

    The roots of the pi_{n,j} all lie close together p-adically, so a minor
    of high degree takes tiny values at every one of them.  A remainder that
    vanishes modulo p^N is read as exact divisibility; the guard that factor
    orders fit inside each minor's degree catches most precision shortfalls.
    Degree-50 minors typically need N around 60.

    Minors are enumerated exhaustively up to 5 x 5; larger matrices use a
    seeded random sample of minors and say so in the chain notes.
    """
    for row in matrix:
        for e in row:
            if not e.exact:
                raise PadicError("snf_numeric needs exact polynomial entries")
    size = min(len(matrix), len(matrix[0]))
    if size <= EXHAUSTIVE_LIMIT:
        minors, notes = all_minors(matrix), []
    else:
        minors, notes = sampled_minors(matrix, random.Random(seed))
    by_k: dict[int, list[TruncatedSeries]] = {k: [] for k in range(1, size + 1)}
    counts = dict.fromkeys(range(1, size + 1), 0)
    partial = bool(notes)
    for (rs, _), m in minors.items():
        counts[len(rs)] += 1
        if not m.is_zero():
            by_k[len(rs)].append(m)
    for k in range(1, size + 1):
        if len(by_k[k]) < counts[k]:
            partial = True
            notes.append(f"some {k}x{k} minors vanish at working precision")
    rank = max((k for k in by_k if by_k[k]), default=0)
    if rank == 0:
        raise NoChainError("no chain: the matrix is zero at working precision")
    ords: dict[int, list[dict[str, int]]] = {k: [] for k in by_k}
    for k in range(1, rank + 1):
        for m in by_k[k]:
            row = {sym: ord_at_factor(m, pi) for sym, pi in factors.items()}
            used = sum(e * (len(factors[sym].coeffs) - 1) for sym, e in row.items())
            if used > len(m.coeffs) - 1:
                named = ", ".join(f"{sym}^{e}" for sym, e in row.items() if e)
                raise PrecisionError(f"factor orders of a {k}x{k} minor exceed its degree "
                                     f"({named}); raise the precision")
            ords[k].append(row)
    asc: dict[str, list[int]] = {}
    for sym in factors:
        mu = [0] + [min(r[sym] for r in ords[k]) for k in range(1, rank + 1)]
        asc[sym] = [mu[k] - mu[k - 1] for k in range(1, rank + 1)]
    if any(x < 0 for e in asc.values() for x in e):
        raise PrecisionError("non-monotone minor profile: precision too low")
    if rank == len(matrix) == len(matrix[0]) and size <= EXHAUSTIVE_LIMIT:
        det = minors[(tuple(range(size)), tuple(range(size)))]
        for sym, pi in factors.items():
            if sum(asc[sym]) != ord_at_factor(det, pi):
                raise PrecisionError(f"chain exponents of {sym} disagree with the determinant")
    return DivisorChain.from_ascending_exponents(asc, rank, partial, notes)


def factor_table(symbols, ctx: SeriesContext) -> dict[str, TruncatedSeries]:
    out = {}
    for s in symbols:
        kind, *nums = parse_symbol(s)
        if kind != "pi":
            raise PadicError(f"numeric factors must be pi symbols, got {s}")
        out[s] = pi_factor(nums[0], nums[1], ctx)
    return out


def auto_factors(matrix: list[list[TruncatedSeries]], ctx: SeriesContext, max_level: int = 2,
                 max_j: int = 2) -> dict[str, TruncatedSeries]:
    """Candidate factors pi_{n,j} (n <= max_level, |j| <= max_j) dividing the determinant."""
    rows, cols = len(matrix), len(matrix[0])
    size = min(rows, cols)
    minor = _Minors(matrix)
    tops = [m for rs in itertools.combinations(range(rows), size)
            for cs in itertools.combinations(range(cols), size)
            if not (m := minor(rs, cs)).is_zero()]
    table = factor_table([pi_symbol(n, j) for n in range(1, max_level + 1)
                          for j in range(-max_j, max_j + 1)], ctx)
    return {s: f for s, f in table.items() if tops and max(ord_at_factor(m, f) for m in tops) > 0}


# -- materialization and random instances -----------------------------------------------


def materialize(e: FactoredElement | None, ctx: SeriesContext) -> TruncatedSeries:
    """The polynomial prod pi_{n,j}^e (ell symbols are not polynomials)."""
    one = TruncatedSeries.polynomial(ctx.p, [1], ctx.prec)
    if e is None:
        return one * 0
    out = one
    for s, k in e.items():
        kind, *nums = parse_symbol(s)
        if kind != "pi":
            raise PadicError(f"cannot materialize {s}; use its shadow at a finite level")
        out = out * pi_factor(nums[0], nums[1], ctx) ** k
    return out


def random_unimodular(d: int, ctx: SeriesContext, rng: random.Random, steps: int = 6) -> list[list[TruncatedSeries]]:
    """Product of elementary operations c*x^e*E_ij and unit scalings; determinant a unit."""
    p, prec = ctx.p, ctx.prec
    poly = lambda c: TruncatedSeries.polynomial(p, c, prec)
    m = [[poly([int(i == j)]) for j in range(d)] for i in range(d)]
    units = [[1], [-1], [2], [1, p]]
    for _ in range(steps):
        if rng.random() < 0.25:
            i = rng.randrange(d)
            u = poly(rng.choice(units))
            m[i] = [u * x for x in m[i]]
            continue
        i, j = rng.sample(range(d), 2)
        c = rng.choice([-2, -1, 1, 2])
        e = rng.randrange(2)
        t = poly([0] * e + [c])
        m[i] = [x + t * y for x, y in zip(m[i], m[j])]
    return m


def mat_mul(a, b):
    out = []
    for row in a:
        out_row = []
        for j in range(len(b[0])):
            acc = None
            for k, x in enumerate(row):
                if x.is_zero() or b[k][j].is_zero():
                    continue
                t = x * b[k][j]
                acc = t if acc is None else acc + t
            out_row.append(acc if acc is not None else row[0] * 0)
        out.append(out_row)
    return out


def diagonal(entries: list[TruncatedSeries], cols: int | None = None) -> list[list[TruncatedSeries]]:
    cols = len(entries) if cols is None else cols
    zero = entries[0] * 0
    return [[entries[i] if i == j else zero for j in range(cols)] for i in range(len(entries))]


def random_factored_diagonal(d: int, symbols: list[str], rng: random.Random, max_exp: int = 2,
                             density: float = 0.35) -> list[FactoredElement]:
    out = []
    for _ in range(d):
        out.append(FactoredElement({s: rng.randint(1, max_exp) for s in symbols if rng.random() < density}))
    return out
