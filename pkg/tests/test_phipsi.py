import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from iwatool.padic import PadicError
from iwatool.phipsi import (
    LogSeries,
    cyclotomic_average,
    log_phi_x_over_x_p,
    o_phi_estimate,
    phi,
    phi_components,
    phi_w,
    psi,
    psi_log,
    psi_truncation,
    psi_w,
    reconstruct_from_components,
    theta_k_approx,
)
from iwatool.series import RadiusExp, SeriesContext, TruncatedSeries, log1p_series, omega

CTX = SeriesContext()
X = sympy.symbols("x")
ZETA = (-1 + sympy.sqrt(-3)) / 2
small_polys = st.lists(st.integers(-20, 20), min_size=1, max_size=10)


def poly(c, prec=30, var="x"):
    return TruncatedSeries.polynomial(3, c, prec, var=var)


def one_plus_x_power(n, prec=30):
    return poly([math.comb(n, k) for k in range(n + 1)], prec)


def sympy_poly(c):
    return sum(a * X ** i for i, a in enumerate(c))


def to_series(expr, prec=30):
    p = sympy.Poly(sympy.expand(expr), X)
    coeffs = [p.coeff_monomial(X ** k) for k in range(max(p.degree(), -1) + 1)]
    return TruncatedSeries.from_fractions(3, [Fraction(int(c.p), int(c.q)) for c in coeffs], prec)


# -- examples ----------------------------------------------------------------------


def test_psi_of_power_divisible_by_p():
    assert psi(one_plus_x_power(6)).equals(one_plus_x_power(2))


def test_psi_kills_powers_prime_to_p():
    assert psi(one_plus_x_power(2)).is_zero()


def test_psi_of_constants_and_x():
    assert psi(poly([1])).equals(poly([1]))
    assert psi(poly([0, 1])).equals(poly([-1]))


def test_phi_of_x_is_omega_one():
    assert phi(poly([0, 1])).equals(omega(1, CTX))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi_of_omega(n):
    ctx = CTX.with_(x_trunc=100)
    assert phi(omega(n, ctx)).equals(omega(n + 1, ctx))


def test_components_of_monomial():
    # (1+x)^4 = (1+x) * phi(1+x)
    comps = phi_components(one_plus_x_power(4))
    assert comps[0].is_zero() and comps[2].is_zero()
    assert comps[1].equals(poly([1, 1]))


# -- oracles -----------------------------------------------------------------------


@settings(max_examples=25)
@given(small_polys)
def test_phi_matches_substitution(c):
    want = to_series(sympy_poly(c).subs(X, (1 + X) ** 3 - 1))
    assert phi(poly(c)).equals(want)


@settings(max_examples=25)
@given(small_polys)
def test_phi_psi_matches_root_of_unity_average(c):
    f = sympy_poly(c)
    avg = sum(f.subs(X, z * (1 + X) - 1) for z in (1, ZETA, ZETA ** 2)) / 3
    want = to_series(sympy.simplify(sympy.expand(avg)))
    assert phi(psi(poly(c))).equals(want)


@given(small_polys)
def test_cyclotomic_average_matches_phi_psi(c):
    f = poly(c)
    assert cyclotomic_average(f).equals(phi(psi(f)))


@given(small_polys)
def test_psi_phi_is_identity(c):
    f = poly(c)
    assert psi(phi(f)).equals(f)


@given(small_polys, small_polys)
def test_projection_formula(a, b):
    f, g = poly(a), poly(b)
    assert psi(phi(f) * g).equals(f * psi(g))


@given(small_polys)
def test_components_reconstruct(c):
    f = poly(c)
    assert reconstruct_from_components(phi_components(f)).equals(f)


@given(st.integers(0, 40))
def test_psi_basis_rule(n):
    got = psi(one_plus_x_power(n))
    if n % 3:
        assert got.is_zero()
    else:
        assert got.equals(one_plus_x_power(n // 3))


# -- truncation --------------------------------------------------------------------


@pytest.mark.parametrize("m", [9, 20, 40, 60])
def test_psi_of_monomial_respects_valuation_bound(m):
    g = psi(poly([0] * m + [1], 60))
    for i, a in enumerate(g.coeffs):
        v = g.coefficient(i).valuation
        if v is not None:
            assert v >= (m - 3 * i) / 2 - 1


def test_psi_truncation_count():
    f = TruncatedSeries(3, (0,) * 200, 30, 0, (0.0, 0.0))
    assert psi_truncation(f) == 47
    assert len(psi(f).coeffs) == 47


def test_truncated_psi_agrees_with_exact_psi():
    rng = random.Random(3)
    c = [rng.randrange(-99, 99) for _ in range(200)]
    full = psi(poly(c))
    cut = psi(TruncatedSeries(3, tuple(x % 3 ** 30 for x in c), 30, 0, (0.0, 0.0)))
    assert cut.equals(full.truncate(len(cut.coeffs)))


# -- w chart -----------------------------------------------------------------------


def _zmul(a, b):
    # Z[zeta_3] as pairs (x, y) = x + y*zeta with zeta^2 = -1 - zeta
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0] - a[1] * b[1])


def _zeta_oracle_exact(k, n):
    out = [[0, 0] for _ in range(n)]
    zetas = [(1, 0), (0, 1), (-1, -1)]
    for z in zetas:
        zinv = _zmul(z, z)
        a = (1 - zinv[0], -zinv[1])
        zk = (1, 0)
        for _ in range(k):
            zk = _zmul(zk, zinv)
        apow = (1, 0)
        for m in range(n - k):
            coef = (-1) ** m * math.comb(k + m - 1, m)
            term = _zmul(zk, apow)
            out[k + m][0] += coef * term[0]
            out[k + m][1] += coef * term[1]
            apow = _zmul(apow, a)
    assert all(y == 0 for _, y in out)
    return [Fraction(x, 3) for x, _ in out]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 7])
def test_phi_psi_of_w_power_matches_root_of_unity_expansion(k):
    n = 25
    got = phi_w(psi_w(poly([0] * k + [1], var="w")), n)
    want = TruncatedSeries.from_fractions(3, _zeta_oracle_exact(k, n), 30)
    assert [got.coefficient(i) for i in range(n)] == [want.coefficient(i) for i in range(n)]


def test_psi_w_examples():
    w = poly([0, 1], var="w")
    assert psi_w(w).equals(w)
    assert psi_w(poly([1], var="w")).equals(poly([1], var="w"))


def test_psi_kills_log_of_phi_ratio():
    c = log_phi_x_over_x_p(CTX)
    assert c.exact
    assert psi_w(c).is_zero()


def test_phi_w_of_w():
    # phi(w) = w^3 / ((1+w)^3 - w^3) = w^3 / (1 + 3w + 3w^2)
    got = phi_w(poly([0, 1], var="w"), 8)
    want = TruncatedSeries.polynomial(3, [0, 0, 0, 1, -3, 6, -9, 9], 30, var="w")
    assert [got.coefficient(i) for i in range(8)] == [want.coefficient(i) for i in range(8)]


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=8))
def test_psi_w_phi_w_is_identity(c):
    f = poly(c, var="w")
    back = psi_w(phi_w(f, 3 * len(c) + 3))
    assert len(back.coeffs) >= len(c)
    assert back.truncate(len(c)).equals(f.truncate(len(c)))


def test_wrong_chart_is_rejected():
    with pytest.raises(PadicError):
        psi_w(poly([1, 1]))


# -- log series and Theta ----------------------------------------------------------


def test_psi_log_of_constant():
    one = LogSeries.monomial(0, CTX)
    out = psi_log(one)
    assert out.degree == 0 and out.coeffs[0].equals(poly([1], var="w"))


def test_psi_log_inverts_phi_of_l_squared():
    c = log_phi_x_over_x_p(CTX)
    phi_l2 = LogSeries((c * c, c.scale(6), poly([9], var="w")))  # (3L + c)^2
    out = psi_log(phi_l2, c)
    assert out.coeffs[2].equals(poly([1], var="w"))
    assert out.coeffs[1].is_zero() and out.coeffs[0].is_zero()


def test_theta_zero_is_one():
    run = theta_k_approx(0, 3, CTX)
    for g in run.convergents:
        assert g.coeffs[0].equals(poly([1], var="w"))


def test_theta_one_convergents_are_exactly_l():
    run = theta_k_approx(1, 4, CTX)
    for g in run.convergents:
        assert g.coeffs[0].is_zero() and g.coeffs[1].equals(poly([1], var="w"))
    assert all(exact for _, _, exact in run.agreement)


def test_theta_two_agreement_increases():
    run = theta_k_approx(2, 6, CTX)
    digits = [d for _, d, _ in run.agreement]
    assert all(b > a for a, b in zip(digits, digits[1:]))
    # the pure L^2 coefficient is untouched by the recursion
    assert all(g.coeffs[2].equals(poly([1], var="w")) for g in run.convergents)


def test_theta_rejects_large_k():
    with pytest.raises(PadicError):
        theta_k_approx(4, 1, CTX)


# -- growth ------------------------------------------------------------------------


@pytest.mark.parametrize("h", [0, 1, 2, 3])
def test_growth_of_eigenvector(h):
    est = o_phi_estimate([poly([1])], [[3 ** h]], RadiusExp(1, 1), 6)
    assert est.estimate == pytest.approx(h, abs=1e-9)
    assert est.residual == pytest.approx(0, abs=1e-9) and est.bounded


def test_growth_of_log():
    ctx = CTX.with_(x_trunc=3 ** 6 + 3 ** 5 * 4, prec=20)
    est = o_phi_estimate([log1p_series(ctx)], [[1]], RadiusExp(1, 1), 6)
    assert est.estimate == pytest.approx(1, abs=0.15)


def test_growth_two_dimensional():
    # phi = diag(1, 9): the fastest-growing coordinate dominates
    one = poly([1])
    est = o_phi_estimate([one, one], [[1, 0], [0, 9]], RadiusExp(1, 1), 6)
    assert est.estimate == pytest.approx(2, abs=1e-9)


@settings(max_examples=20)
@given(st.lists(st.integers(-9, 9), min_size=1, max_size=5), st.integers(1, 2))
def test_psi_log_projection_formula(c, k):
    # psi(phi(f) * phi(L)^k) = f * L^k with phi(L) = 3L + c
    cs = log_phi_x_over_x_p(CTX)
    f = poly(c, var="w")
    pf = phi_w(f, 40)
    if k == 1:
        g = LogSeries((pf * cs, pf.scale(3)))
    else:
        g = LogSeries((pf * cs * cs, (pf * cs).scale(6), pf.scale(9)))
    out = psi_log(g, cs)
    n = min((x.x_trunc for x in out.coeffs if not x.exact), default=len(c))
    assert n >= len(c)
    for j, coeff in enumerate(out.coeffs):
        if j == k:
            assert coeff.truncate(n).equals(f.truncate(n))
        else:
            assert coeff.truncate(n).is_zero()


def test_log_valuation_convention():
    from iwatool.phipsi import log_valuation

    rho = RadiusExp(1, 1)
    # L alone: valuation n at level n
    assert [log_valuation(LogSeries.monomial(1, CTX), rho, n) for n in range(4)] == [0, 1, 2, 3]
    # 9 w^2 + 3 L^2 at level 1: rho_1 = 3^(-1/3), v(w^2) = -2/3
    g = LogSeries((poly([0, 0, 9], var="w"), poly([], var="w"), poly([3], var="w")))
    assert log_valuation(g, rho, 1) == min(Fraction(2) - Fraction(2, 3), 1 + 2)
