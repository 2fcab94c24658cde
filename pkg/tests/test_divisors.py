import itertools
import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from iwatool.divisors import (
    DivisorChain,
    NoChainError,
    all_minors,
    auto_factors,
    diagonal,
    exponent_of,
    factor_table,
    mat_mul,
    materialize,
    min_matching_profile,
    random_factored_diagonal,
    random_unimodular,
    sampled_minors,
    snf_exact,
    snf_numeric,
)
from iwatool.factored import FactoredElement, parse_factored
from iwatool.padic import PadicError, PrecisionError
from iwatool.series import SeriesContext, TruncatedSeries, pi_factor_rational

CTX = SeriesContext(prec=60, x_trunc=200)
X = sympy.symbols("x")
SYMS = [f"pi:{n}:{j}" for n in (1, 2) for j in range(-2, 3)]
F = FactoredElement


def chain(*entries):
    return DivisorChain(tuple(parse_factored(e) for e in entries))


def diag_exact(entries):
    d = len(entries)
    return [[entries[i] if i == j else None for j in range(d)] for i in range(d)]


# -- exact engine ------------------------------------------------------------------


def test_diagonal_ell_example():
    got = snf_exact([[F({"ell:0": 1}), None], [None, F({"ell:0": 1, "ell:1": 1})]])
    assert got == chain("ell:0*ell:1", "ell:0")


def test_identity_gives_trivial_chain():
    one = F()
    assert snf_exact([[one, None, None], [None, one, None], [None, None, one]]) == chain(1, 1, 1)


def test_zero_matrix_has_no_chain():
    with pytest.raises(NoChainError):
        snf_exact([[None, None], [None, None]])


def test_rectangular_rank():
    got = snf_exact([[F({"pi:1:0": 1}), None, F({"pi:1:0": 2})]])
    assert got == chain("pi:1:0")


def test_rank_deficient_note():
    got = snf_exact([[F(), F()], [None, None]])
    assert len(got) == 1 and got.notes


def test_exponent_of():
    assert exponent_of(chain("ell:0*ell:1", "ell:0")) == parse_factored("ell:0*ell:1")
    assert exponent_of(chain(1, 1)) == F()
    with pytest.raises(NoChainError):
        exponent_of(DivisorChain(()))


def test_chain_must_descend():
    with pytest.raises(PadicError):
        chain("ell:0", "ell:0*ell:1")


def test_pi_divides_ell_with_same_twist():
    # pi_{n,j} is a factor of l_j, so l_j * pi_{1,j} over l_j is a descending chain
    c = chain("ell:0*pi:1:0", "ell:0")
    assert c.product() == parse_factored("ell:0^2*pi:1:0")


def test_min_matching_profile_brute_force():
    rng = random.Random(5)
    for _ in range(30):
        r, c = rng.randint(1, 4), rng.randint(1, 4)
        w = [[rng.choice([0, 1, 2, 3, float("inf")]) for _ in range(c)] for _ in range(r)]
        mu = min_matching_profile(w)
        for k in range(1, min(r, c) + 1):
            best = min((sum(w[i][j] for i, j in zip(rs, cp))
                        for rs in itertools.combinations(range(r), k)
                        for cs in itertools.combinations(range(c), k)
                        for cp in itertools.permutations(cs)), default=float("inf"))
            assert mu[k] == best


@given(st.integers(0, 10 ** 6))
def test_exact_chain_is_sorted_diagonal(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 4)
    entries = random_factored_diagonal(d, SYMS[:4], rng, max_exp=3, density=0.5)
    got = snf_exact(diag_exact(entries))
    # ascending divisor k of a diagonal: per atom, the k-th smallest exponent
    for s in SYMS[:4]:
        exps = sorted(e.get(s) for e in entries)
        assert [f.get(s) for f in got.ascending()] == exps
    assert got.product() == F({s: sum(e.get(s) for e in entries) for s in SYMS[:4]})


# -- numeric engine ----------------------------------------------------------------


def test_numeric_diagonal_example():
    table = factor_table(["pi:1:0", "pi:1:1"], CTX)
    a = diagonal([table["pi:1:0"], table["pi:1:0"] * table["pi:1:1"]])
    assert snf_numeric(a, table) == chain("pi:1:0*pi:1:1", "pi:1:0")


def test_split_example():
    # det = pi^2 with rank deficiency 2 modulo pi: [pi; pi; 1]
    table = factor_table(["pi:1:0"], CTX)
    pi = table["pi:1:0"]
    one = TruncatedSeries.polynomial(3, [1], 60)
    rng = random.Random(11)
    a = mat_mul(mat_mul(random_unimodular(3, CTX, rng), diagonal([pi, pi, one])), random_unimodular(3, CTX, rng))
    assert snf_numeric(a, table) == chain("pi:1:0", "pi:1:0", 1)


def test_numeric_matches_exact_on_conjugates():
    rng = random.Random(2024)
    table = factor_table(SYMS, CTX)
    for i in range(6):
        d = 3 if i % 2 else 4
        entries = random_factored_diagonal(d, SYMS, rng)
        a = diagonal([materialize(e, CTX) for e in entries])
        a = mat_mul(mat_mul(random_unimodular(d, CTX, rng), a), random_unimodular(d, CTX, rng))
        assert snf_numeric(a, table) == snf_exact(diag_exact(entries))


def test_unimodular_invariance():
    rng = random.Random(8)
    table = factor_table(["pi:1:0", "pi:1:1", "pi:2:0"], CTX)
    entries = [F({"pi:1:0": 1}), F({"pi:1:0": 1, "pi:2:0": 1}), F({"pi:1:1": 2})]
    base = snf_numeric(diagonal([materialize(e, CTX) for e in entries]), table)
    a = diagonal([materialize(e, CTX) for e in entries])
    for _ in range(20):
        conj = mat_mul(mat_mul(random_unimodular(3, CTX, rng), a), random_unimodular(3, CTX, rng))
        assert snf_numeric(conj, table) == base


def _signed(c, prec=60):
    mod = 3 ** prec
    return c - mod if c > mod // 2 else c


def _sympy_matrix(a):
    return sympy.Matrix([[sum(_signed(c) * X ** k for k, c in enumerate(e.coeffs)) for e in row] for row in a])


def _sympy_pi(n, j):
    c = pi_factor_rational(n, j, 3, 4)
    return sympy.Poly([sympy.Rational(x.numerator, x.denominator) for x in reversed(c)], X, domain="QQ")


def _order(poly, pi):
    k = 0
    while True:
        q, r = poly.div(pi)
        if not r.is_zero:
            return k
        poly, k = q, k + 1


def test_gcd_of_minors_law_against_rational_oracle():
    # Over Q[x] the determinantal divisors are gcds of minors; pi_{n,j} has rational coefficients.
    rng = random.Random(3)
    symbols = ["pi:1:0", "pi:1:1", "pi:1:-1"]
    table = factor_table(symbols, CTX)
    for _ in range(3):
        entries = random_factored_diagonal(3, symbols, rng, density=0.6)
        rational = []
        for e in entries:
            expr = sympy.Poly(1, X, domain="QQ")
            for s, k in e.items():
                _, n, j = s.split(":")
                expr *= _sympy_pi(int(n), int(j)) ** k
            rational.append(expr)
        u = random_unimodular(3, CTX, rng)
        v = random_unimodular(3, CTX, rng)
        su, sv = _sympy_matrix(u), _sympy_matrix(v)
        m = su * sympy.diag(*[r.as_expr() for r in rational]) * sv
        numeric = mat_mul(mat_mul(u, diagonal([materialize(e, CTX) for e in entries])), v)
        got = snf_numeric(numeric, table)
        for s in symbols:
            _, n, j = s.split(":")
            pi = _sympy_pi(int(n), int(j))
            prev = 0
            for k in range(1, 4):
                minors = [sympy.Poly(m.extract(list(rs), list(cs)).det(), X, domain="QQ")
                          for rs in itertools.combinations(range(3), k)
                          for cs in itertools.combinations(range(3), k)]
                dk = sympy.Poly(0, X, domain="QQ")
                for mm in minors:
                    dk = dk.gcd(mm)
                mu = _order(dk, pi)
                assert got.ascending()[k - 1].get(s) == mu - prev
                prev = mu


def test_precision_guard_at_low_precision():
    ctx = SeriesContext(prec=30)
    rng = random.Random(0)
    entries = random_factored_diagonal(4, SYMS, rng)
    a = mat_mul(mat_mul(random_unimodular(4, ctx, rng), diagonal([materialize(e, ctx) for e in entries])),
                random_unimodular(4, ctx, rng))
    with pytest.raises(PrecisionError):
        snf_numeric(a, factor_table(SYMS, ctx))


def test_numeric_needs_exact_entries():
    f = TruncatedSeries(3, (1, 1), 60, 0, (0.0, 0.0))
    with pytest.raises(PadicError):
        snf_numeric([[f]], factor_table(["pi:1:0"], CTX))


def test_numeric_zero_matrix():
    z = TruncatedSeries.polynomial(3, [], 60)
    with pytest.raises(NoChainError):
        snf_numeric([[z, z], [z, z]], factor_table(["pi:1:0"], CTX))


def test_all_minors_determinant_matches_sympy():
    rng = random.Random(1)
    a = [[TruncatedSeries.polynomial(3, [rng.randint(-5, 5) for _ in range(3)], 60) for _ in range(4)]
         for _ in range(4)]
    det = all_minors(a)[((0, 1, 2, 3), (0, 1, 2, 3))]
    want = sympy.Poly(_sympy_matrix(a).det(), X).all_coeffs()[::-1]
    assert det.equals(TruncatedSeries.polynomial(3, [int(c) for c in want], 60))


def test_sampled_minors_beyond_exhaustive_limit():
    rng = random.Random(4)
    one = TruncatedSeries.polynomial(3, [1], 60)
    z = one * 0
    a = [[one if i == j else z for j in range(6)] for i in range(6)]
    minors, notes = sampled_minors(a, rng, samples=50)
    assert notes and all(len(rs) == len(cs) for rs, cs in minors)
    got = snf_numeric(a, factor_table(["pi:1:0"], CTX))
    assert got.partial and list(got) == [F()] * 6


def test_auto_factors_finds_determinant_factors():
    table = factor_table(["pi:1:0", "pi:2:1"], CTX)
    a = diagonal([table["pi:1:0"], table["pi:2:1"]])
    assert set(auto_factors(a, CTX)) == {"pi:1:0", "pi:2:1"}


def test_materialize_rejects_ell():
    with pytest.raises(PadicError):
        materialize(F({"ell:0": 1}), CTX)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_unimodular_has_unit_determinant(seed):
    rng = random.Random(seed)
    d = rng.randint(2, 4)
    u = random_unimodular(d, CTX, rng)
    # an integral polynomial is a unit of Z_p[[x]] iff its constant term is a unit
    det = all_minors(u)[(tuple(range(d)), tuple(range(d)))]
    value = sympy.Poly(sympy.expand(_sympy_matrix(u).det()), X)
    assert det.equals(TruncatedSeries.polynomial(3, [int(c) for c in value.all_coeffs()[::-1]], 60))
    assert det.shift == 0 and det.coefficient(0).valuation == 0
