"""Filtered (phi, N)-modules and the divisor data predicted from their Hodge weights.

Weights are the jumps -r_1 >= ... >= -r_d of the filtration, so
dim Fil^k = #{i : k <= -r_i}.  All predictions are products of the formal
symbols ell:j and depend on the weight multiset, the integer r* and the
degree f = [K:Q_p] only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .divisors import (
    DivisorChain,
    exponent_of,
    factor_table,
    mat_mul,
    diagonal,
    materialize,
    random_unimodular,
    snf_numeric,
)
from .factored import FactoredElement, ell_symbol, parse_symbol, pi_symbol
from .padic import ExtScalar, PadicError, PrecisionError, inert_modulus
from .series import SeriesContext


class HypothesisError(PadicError):
    """A hypothesis the predictions depend on was not asserted."""


SPECTRAL_WINDOW = 8


# -- matrices over K -----------------------------------------------------------------------


def _det(m, one, zero):
    """Determinant by expansion over column subsets; ring operations only."""
    n = len(m)
    dp = {0: one}
    for r in range(n):
        new = {}
        for mask, val in dp.items():
            for c in range(n):
                if mask >> c & 1:
                    continue
                # inversions added: earlier rows sitting in later columns
                sign = -1 if bin(mask >> (c + 1)).count("1") % 2 else 1
                term = val * m[r][c]
                term = term if sign > 0 else -term
                key = mask | 1 << c
                new[key] = new[key] + term if key in new else term
        dp = new
    return dp.get((1 << n) - 1, zero)


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ExtScalar) else x == 0


def _matmul(a, b, zero):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for t in range(k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


@dataclass(frozen=True)
class HodgeData:
    r: int
    r_star: int
    r_sorted: tuple[int, ...]  # r_1 <= ... <= r_d
    fil_dims: tuple[tuple[int, int], ...]

    def fil_dim(self, k: int) -> int:
        return sum(1 for ri in self.r_sorted if k <= -ri)


@dataclass(frozen=True)
class FilteredPhiNModule:
    """phi acts by x -> A*sigma(x); N is K-linear.

    For f = 1 matrix entries are Fractions; for f >= 2 they are ExtScalar
    elements of the unramified extension of degree f (p-integral entries).
    """

    p: int
    u: int
    K_degree: int
    phi_matrix: tuple
    N_matrix: tuple
    weights: tuple[int, ...]
    no_pj_eigenvalue: bool = False
    V_fixed_trivial: bool = False
    r_star: int | None = None
    r: int | None = None
    prec: int = 30

    def __post_init__(self):
        if not self.weights:
            raise PadicError("empty weight multiset")
        d = len(self.weights)
        for name, m in (("phi", self.phi_matrix), ("N", self.N_matrix)):
            if len(m) != d or any(len(row) != d for row in m):
                raise PadicError(f"{name} matrix must be {d}x{d} to match the weights")
        if self.K_degree < 1:
            raise PadicError("K_degree must be positive")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @classmethod
    def from_weights(cls, weights, K_degree: int = 1, r_star: int | None = None, p: int = 3, u: int = 4,
                     prec: int = 30) -> FilteredPhiNModule:
        """phi = 2*identity, N = 0, hypotheses asserted; enough for the weight-only predictions."""
        d = len(weights)
        if K_degree == 1:
            one, zero = Fraction(1), Fraction(0)
        else:
            mod = inert_modulus(p, K_degree)
            one, zero = ExtScalar.from_int(p, mod, 1, prec), ExtScalar.from_int(p, mod, 0, prec)
        phi = tuple(tuple(one * 2 if i == j else zero for j in range(d)) for i in range(d))
        n = tuple(tuple(zero for _ in range(d)) for _ in range(d))
        return cls(p, u, K_degree, phi, n, tuple(weights), True, True, r_star, None, prec)

    # -- ring helpers ------------------------------------------------------------------

    def _zero_one(self):
        if self.K_degree == 1:
            return Fraction(0), Fraction(1)
        mod = inert_modulus(self.p, self.K_degree)
        return ExtScalar.from_int(self.p, mod, 0, self.prec), ExtScalar.from_int(self.p, mod, 1, self.prec)

    def _sigma(self, m):
        if self.K_degree == 1:
            return m
        return tuple(tuple(x.frobenius() for x in row) for row in m)

    def linearized_phi(self):
        """A * sigma(A) * ... * sigma^(f-1)(A), the matrix of phi^f."""
        zero, _ = self._zero_one()
        out = [list(r) for r in self.phi_matrix]
        cur = self.phi_matrix
        for _ in range(1, self.K_degree):
            cur = self._sigma(cur)
            out = _matmul(out, cur, zero)
        return out


@dataclass(frozen=True)
class ValidationReport:
    commutation: bool
    nilpotent: bool
    phi_invertible: bool
    spectral_window: int
    spectral_ok: bool
    offending_j: tuple[int, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.commutation and self.nilpotent and self.phi_invertible and self.spectral_ok


def validate(D: FilteredPhiNModule, window: int = SPECTRAL_WINDOW) -> ValidationReport:
    """N*A = p*A*sigma(N), N^d = 0, det A != 0, and det(phi^f - p^(jf)) != 0 for |j| <= window."""
    zero, one = D._zero_one()
    a, n = D.phi_matrix, D.N_matrix
    lhs = _matmul(n, a, zero)
    rhs = _matmul(a, D._sigma(n), zero)
    commutes = all(_is_zero(lhs[i][j] - rhs[i][j] * D.p) for i in range(D.dim) for j in range(D.dim))
    power = [list(r) for r in n]
    for _ in range(D.dim - 1):
        power = _matmul(power, n, zero)
    nilpotent = all(_is_zero(x) for row in power for x in row)
    invertible = not _is_zero(_det(a, one, zero))
    lin = D.linearized_phi()
    bad = []
    f = D.K_degree
    for j in range(-window, window + 1):
        # det(phi^f - p^(jf)) vanishes iff det(p^(-jf) phi^f - 1) does; keep scalars integral
        if j >= 0:
            m = [[lin[i][k] - (D.p ** (j * f) if i == k else 0) for k in range(D.dim)] for i in range(D.dim)]
        else:
            m = [[lin[i][k] * D.p ** (-j * f) - (1 if i == k else 0) for k in range(D.dim)]
                 for i in range(D.dim)]
        if _is_zero(_det(m, one, zero)):
            bad.append(j)
    return ValidationReport(commutes, nilpotent, invertible, window, not bad, tuple(bad))


# -- Hodge statistics and predictions --------------------------------------------------------


def hodge_data(D: FilteredPhiNModule) -> HodgeData:
    w = sorted(D.weights, reverse=True)  # -r_1 >= ... >= -r_d
    r_sorted = tuple(-x for x in w)
    r = r_sorted[-1] if D.r is None else D.r
    r_star = w[0] if D.r_star is None else D.r_star
    if r < r_sorted[-1]:
        raise PadicError(f"r = {r} is below r_d = {r_sorted[-1]}: Fil^-r must be all of D")
    if r_star < w[0]:
        raise PadicError(f"r* = {r_star} is below the top weight {w[0]}")
    lo, hi = -r, r_star
    dims = tuple((k, sum(1 for ri in r_sorted if k <= -ri)) for k in range(lo, hi + 1))
    return HodgeData(r, r_star, r_sorted, dims)


def _ell_range(lo: int, hi: int) -> FactoredElement:
    """prod_{lo <= j < hi} ell_j."""
    return FactoredElement({ell_symbol(j): 1 for j in range(lo, hi)})


def _require_spectral(D: FilteredPhiNModule):
    if not D.no_pj_eigenvalue:
        raise HypothesisError("the prediction needs the hypothesis D^{phi=p^j} = 0 (flag no_pj_eigenvalue)")


def predicted_chain(D: FilteredPhiNModule) -> DivisorChain:
    """[prod_{-r*<=j<r_d} ell_j; ...; prod_{-r*<=j<r_1} ell_j], each entry f times."""
    _require_spectral(D)
    h = hodge_data(D)
    entries = []
    for ri in reversed(h.r_sorted):
        entries += [_ell_range(-h.r_star, ri)] * D.K_degree
    return DivisorChain(tuple(entries))


def predicted_determinant(D: FilteredPhiNModule) -> FactoredElement:
    """prod_{-r*<=j<r} ell_j^(f*(d - dim Fil^-j))."""
    _require_spectral(D)
    h = hodge_data(D)
    return FactoredElement({ell_symbol(j): D.K_degree * (D.dim - h.fil_dim(-j))
                            for j in range(-h.r_star, h.r)})


def predicted_annihilator(D: FilteredPhiNModule) -> FactoredElement:
    if not D.V_fixed_trivial:
        raise HypothesisError("the annihilator needs V^{G_K_infinity} = 0 (flag V_fixed_trivial)")
    h = hodge_data(D)
    return _ell_range(-h.r_star, h.r_sorted[-1])


def determinant_identity_check(D: FilteredPhiNModule) -> bool:
    return predicted_chain(D).product() == predicted_determinant(D)


def chain_from_determinant(n: dict[int, int], d_tilde: int) -> DivisorChain:
    """The unique chain with 0/1 exponents, decreasing in s, summing to n_j: f_s = prod_{n_j >= s} ell_j."""
    for j, nj in n.items():
        if nj < 0 or nj > d_tilde:
            raise PadicError(f"infeasible: n_{j} = {nj} is outside [0, {d_tilde}]")
    return DivisorChain(tuple(
        FactoredElement({ell_symbol(j): 1 for j, nj in n.items() if nj >= s}) for s in range(1, d_tilde + 1)))


def determinant_exponents(det: FactoredElement) -> dict[int, int]:
    out = {}
    for s, e in det.items():
        kind, *nums = parse_symbol(s)
        if kind != "ell":
            raise PadicError("expected a product of ell symbols")
        out[nums[0]] = e
    return out


def _with_r_star(D: FilteredPhiNModule, r_star: int) -> FilteredPhiNModule:
    return FilteredPhiNModule(D.p, D.u, D.K_degree, D.phi_matrix, D.N_matrix, D.weights,
                              D.no_pj_eigenvalue, D.V_fixed_trivial, r_star, D.r, D.prec)


def twist_shift_identity(D: FilteredPhiNModule, s: int) -> bool:
    """Raising r* by s multiplies each entry by prod_{-r*-s<=j<-r*} ell_j (and the determinant by its f*d-th power)."""
    if s < 0:
        raise PadicError("shift must be non-negative")
    h = hodge_data(D)
    extra = _ell_range(-h.r_star - s, -h.r_star)
    shifted = _with_r_star(D, h.r_star + s)
    base = predicted_chain(D)
    chain_ok = tuple(e * extra for e in base) == predicted_chain(shifted).entries
    det_ok = predicted_determinant(D) * extra ** (D.K_degree * D.dim) == predicted_determinant(shifted)
    return chain_ok and det_ok


# -- shadows and synthetic verification ------------------------------------------------------


def shadow(e: FactoredElement, n0: int) -> FactoredElement:
    """Replace each ell_j by prod_{n<=n0} pi_{n,j}."""
    out: dict[str, int] = {}
    for s, k in e.items():
        kind, *nums = parse_symbol(s)
        if kind == "ell":
            for n in range(1, n0 + 1):
                key = pi_symbol(n, nums[0])
                out[key] = out.get(key, 0) + k
        else:
            out[s] = out.get(s, 0) + k
    return FactoredElement(out)


def shadow_chain(chain: DivisorChain, n0: int) -> DivisorChain:
    return DivisorChain(tuple(shadow(e, n0) for e in chain))


@dataclass(frozen=True)
class SyntheticReport:
    expected: DivisorChain
    recovered: DivisorChain | None
    match: bool
    profiles: tuple[tuple[str, tuple[int, ...]], ...]
    partial: bool
    failure: str | None = None


def synthetic_verify(D: FilteredPhiNModule, n0: int, seed: int, ctx: SeriesContext,
                     decoys: int = 1) -> SyntheticReport:
    """Hide the predicted shadow chain behind random unimodular U, V and recover it numerically.

    The factor list offered to the numeric engine also contains the levels
    and twists adjacent to those that occur (``decoys``), so a recovered
    chain that is too large would be noticed.
    """
    rng = random.Random(seed)
    expected = shadow_chain(predicted_chain(D), n0)
    size = len(expected)
    js = {parse_symbol(s)[2] for e in expected for s in e}
    if not js:
        js = {0}
    js_all = range(min(js) - decoys, max(js) + decoys + 1)
    symbols = [pi_symbol(n, j) for n in range(1, n0 + 1 + (1 if decoys else 0)) for j in js_all]
    ctx_n = ctx.with_(x_trunc=max(ctx.x_trunc, ctx.p ** (n0 + 1)))
    diag = diagonal([materialize(e, ctx_n) for e in expected.entries])
    a = mat_mul(mat_mul(random_unimodular(size, ctx_n, rng), diag), random_unimodular(size, ctx_n, rng))
    try:
        got = snf_numeric(a, factor_table(symbols, ctx_n))
    except PrecisionError as exc:
        return SyntheticReport(expected, None, False, (), True, str(exc))
    asc = got.ascending()
    profiles = []
    for s in symbols:
        run, total = [], 0
        for e in asc:
            total += e.get(s)
            run.append(total)
        profiles.append((s, tuple(run)))
    return SyntheticReport(expected, got, got == expected, tuple(profiles), got.partial)


def annihilator_is_squarefree(D: FilteredPhiNModule) -> bool:
    return predicted_annihilator(D).is_squarefree()


def chain_matches_annihilator(D: FilteredPhiNModule) -> bool:
    return exponent_of(predicted_chain(D)) == predicted_annihilator(D)
