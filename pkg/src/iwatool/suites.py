"""Named verification suites run by ``iwatool verify`` and the acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .divisors import (
    diagonal,
    factor_table,
    mat_mul,
    materialize,
    random_factored_diagonal,
    random_unimodular,
    snf_exact,
    snf_numeric,
)
from .iwasawa import (
    GroupRingElem,
    delta_permutation,
    mellin,
    mellin_image_report,
    mellin_inverse,
    psi_quotient,
    random_kernel_element,
    reduce_mod_omega,
)
from .phipsi import (
    cyclotomic_average,
    o_phi_estimate,
    phi,
    phi_components,
    psi,
    reconstruct_from_components,
    theta_k_approx,
)
from .series import (
    RadiusExp,
    SeriesContext,
    TruncatedSeries,
    critical_radius,
    ell,
    evaluate_at,
    is_unit_on_circle,
    log1p_series,
    pi_factor,
    pi_factor_root,
)
from .structure import (
    FilteredPhiNModule,
    chain_from_determinant,
    chain_matches_annihilator,
    determinant_exponents,
    determinant_identity_check,
    predicted_chain,
    predicted_determinant,
    synthetic_verify,
    twist_shift_identity,
)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    check: str
    passed: bool
    detail: str
    reproducer: str = ""

    def record(self) -> dict:
        return {"suite": self.suite, "check": self.check, "status": "pass" if self.passed else "FAIL",
                "detail": self.detail, "reproducer": self.reproducer}


def random_series(ctx: SeriesContext, rng: random.Random) -> TruncatedSeries:
    """Integral coefficients, unknown tail assumed integral."""
    mod = ctx.p ** ctx.prec
    return TruncatedSeries(ctx.p, tuple(rng.randrange(mod) for _ in range(ctx.x_trunc)), ctx.prec, 0, (0.0, 0.0))


def _check(suite, check, ok, detail, reproducer):
    return CheckResult(suite, check, ok, detail, "" if ok else reproducer)


def _tally(suite, check, failures, total, extra=""):
    first = failures[0] if failures else ""
    detail = f"{total - len(failures)}/{total} ok" + (f"; {extra}" if extra else "")
    return CheckResult(suite, check, not failures, detail, str(first))


# -- criterion-level suites --------------------------------------------------------------


def suite_phi_psi(ctx: SeriesContext, samples: int, seed: int) -> list[CheckResult]:
    rng = random.Random(seed)
    fails = {k: [] for k in ("psi_phi_identity", "projection_formula", "cyclotomic_average", "components")}
    for i in range(samples):
        f, g = random_series(ctx, rng), random_series(ctx, rng)
        repro = f"seed={seed} sample={i}"
        back = psi(phi(f))
        if back.x_trunc == 0 or not back.equals(f.truncate(back.x_trunc)):
            fails["psi_phi_identity"].append(repro)
        lhs, rhs = psi(phi(f) * g), f * psi(g)
        if lhs.x_trunc == 0 or not lhs.equals(rhs):
            fails["projection_formula"].append(repro)
        a, b = phi(psi(f)), cyclotomic_average(f)
        if a.x_trunc == 0 or not a.equals(b):
            fails["cyclotomic_average"].append(repro)
        r = reconstruct_from_components(phi_components(f))
        if r.x_trunc == 0 or not r.equals(f.truncate(r.x_trunc)):
            fails["components"].append(repro)
    return [_tally("phi-psi", k, v, samples) for k, v in fails.items()]


def suite_mellin(ctx: SeriesContext, samples: int, seed: int, max_level: int = 4) -> list[CheckResult]:
    rng = random.Random(seed)
    out = []
    for n in range(1, max_level + 1):
        rep = mellin_image_report(n, ctx)
        out.append(_check("mellin", f"injective_level_{n}", rep.injective,
                          f"rank {rep.image_rank} of {rep.expected_dimension} Dirac images", f"level={n}"))
        out.append(_check("mellin", f"kernel_dimension_level_{n}",
                          rep.kernel_dimension == rep.expected_dimension == rep.image_rank,
                          f"dim ker psi = {rep.kernel_dimension}, expected {rep.expected_dimension}",
                          f"level={n}"))
        image_in_ker, ker_in_image, transitions = [], [], []
        for i in range(samples):
            repro = f"seed={seed} level={n} sample={i}"
            f = GroupRingElem.random(n, ctx, rng)
            m = mellin(f)
            if not psi_quotient(m, n, ctx).is_zero():
                image_in_ker.append(repro)
            k = random_kernel_element(n, ctx, rng)
            try:
                if not mellin(mellin_inverse(k, n)).equals(k):
                    ker_in_image.append(repro)
            except ValueError:
                ker_in_image.append(repro)
            if n > 1 and not reduce_mod_omega(m, n - 1, ctx).equals(mellin(f.project(n - 1))):
                transitions.append(repro)
        out.append(_tally("mellin", f"image_in_kernel_level_{n}", image_in_ker, samples))
        out.append(_tally("mellin", f"kernel_in_image_level_{n}", ker_in_image, samples))
        if n > 1:
            out.append(_tally("mellin", f"transition_level_{n}", transitions, samples))
    perm = delta_permutation(2, ctx)
    expected = {d: tuple(d * i % ctx.p for i in range(ctx.p)) for d in perm}
    bad = [d for d in perm if perm[d] != expected[d]]
    out.append(_check("mellin", "delta_permutation_level_2", not bad,
                      "; ".join(f"d={d}: {v}" for d, v in sorted(perm.items())),
                      f"level=2 d={bad[0]}" if bad else ""))
    return out


RADII_FALSE = [RadiusExp(1, 2), RadiusExp(1, 6), RadiusExp(1, 18)]
RADII_TRUE = [RadiusExp(1, 1), RadiusExp(2, 3), RadiusExp(1, 4), RadiusExp(1, 10)]


def suite_radii(ctx: SeriesContext, samples: int = 0, seed: int = 0) -> list[CheckResult]:
    c = ctx.with_(x_trunc=max(ctx.x_trunc, 400))
    out = []
    for label, radii, want in (("not_unit_at_critical_radii", RADII_FALSE, False),
                               ("unit_at_other_radii", RADII_TRUE, True)):
        wrong = []
        for j in range(-2, 3):
            f = ell(j, c)
            for rho in radii:
                if is_unit_on_circle(f, rho) != want:
                    wrong.append(f"j={j} rho=3^-{rho}")
        out.append(CheckResult("radii", f"ell_{label}", not wrong,
                               f"{5 * len(radii) - len(wrong)}/{5 * len(radii)} ok"
                               + (f"; unexpected: {', '.join(wrong)}" if wrong else ""),
                               wrong[0] if wrong else ""))
    crit = [critical_radius(ctx.p, n) for n in (1, 2, 3)]
    bad = [n for n, r, want in zip((1, 2, 3), crit, RADII_FALSE) if str(r) != str(want)]
    out.append(_check("radii", "critical_radius_formula", not bad,
                      ", ".join(f"3^-{r}" for r in crit), f"n={bad[0]}" if bad else ""))
    low, worst = [], None
    for n in (1, 2, 3):
        cn = c.with_(prec=max(c.prec, 20), x_trunc=max(c.x_trunc, c.p ** n))
        for j in range(-2, 3):
            pi = pi_factor(n, j, cn)
            for e in range(c.p ** n):
                if e % c.p == 0 and n > 0:
                    continue
                v = evaluate_at(pi, pi_factor_root(n, j, e, cn)).coefficient_valuation()
                worst = v if worst is None else min(worst, v)
                if v < 20:
                    low.append(f"n={n} j={j} zeta^{e}")
    out.append(CheckResult("radii", "pi_factor_vanishing", not low, f"least digits {worst}",
                           low[0] if low else ""))
    return out


SNF_SYMBOLS = [f"pi:{n}:{j}" for n in (1, 2) for j in range(-2, 3)]


def suite_snf(ctx: SeriesContext, samples: int, seed: int) -> list[CheckResult]:
    """Exact chain of a factored diagonal versus numeric chain of U*diag*V."""
    rng = random.Random(seed)
    c = ctx.with_(prec=max(ctx.prec, 60), x_trunc=max(ctx.x_trunc, 9))
    table = factor_table(SNF_SYMBOLS, c)
    mism, sizes = [], {3: 0, 4: 0}
    for i in range(samples):
        d = 3 if i % 2 == 0 else 4
        sizes[d] += 1
        diag = random_factored_diagonal(d, SNF_SYMBOLS, rng)
        exact = snf_exact([[diag[a] if a == b else None for b in range(d)] for a in range(d)])
        a = mat_mul(mat_mul(random_unimodular(d, c, rng), diagonal([materialize(e, c) for e in diag])),
                    random_unimodular(d, c, rng))
        try:
            numeric = snf_numeric(a, table)
            ok = numeric == exact
        except ArithmeticError:
            ok = False
        if not ok:
            mism.append(f"seed={seed} sample={i} diag={[str(e) for e in diag]}")
    return [_tally("snf", "numeric_equals_exact", mism, samples,
                   f"{sizes[3]} of size 3, {sizes[4]} of size 4, prec {c.prec}")]


def random_weight_config(rng: random.Random):
    d = rng.randint(1, 8)
    w = [rng.randint(-6, 0) for _ in range(d)]
    r_star = rng.randint(0, 3)
    f = rng.choice([1, 2])
    return w, r_star, f


def suite_structure(ctx: SeriesContext, samples: int, seed: int) -> list[CheckResult]:
    rng = random.Random(seed)
    fails = {k: [] for k in ("chain_product_is_determinant", "exponent_is_annihilator",
                             "chain_from_determinant_roundtrip", "twist_shift_identity")}
    for i in range(samples):
        w, r_star, f = random_weight_config(rng)
        repro = f"weights={w} r*={r_star} f={f}"
        D = FilteredPhiNModule.from_weights(w, f, r_star, ctx.p, ctx.u)
        if not determinant_identity_check(D):
            fails["chain_product_is_determinant"].append(repro)
        if not chain_matches_annihilator(D):
            fails["exponent_is_annihilator"].append(repro)
        n = determinant_exponents(predicted_determinant(D))
        if chain_from_determinant(n, f * len(w)) != predicted_chain(D):
            fails["chain_from_determinant_roundtrip"].append(repro)
        if not all(twist_shift_identity(D, s) for s in range(4)):
            fails["twist_shift_identity"].append(repro)
    return [_tally("structure", k, v, samples) for k, v in fails.items()]


SYNTHETIC_BATTERY = (((0, -2), 1, 1), ((0, -1, -3), 1, 1), ((0, -1), 2, 1), ((0, -2), 1, 2))


def suite_synthetic(ctx: SeriesContext, samples: int, seed: int) -> list[CheckResult]:
    """Each battery case is hidden behind max(1, samples) independent unimodular pairs."""
    c = ctx.with_(prec=max(ctx.prec, 40))
    trials = max(1, samples)
    out = []
    for weights, f, n0 in SYNTHETIC_BATTERY:
        D = FilteredPhiNModule.from_weights(list(weights), f, None, c.p, c.u)
        fails, expected, got = [], None, None
        for t in range(trials):
            rep = synthetic_verify(D, n0, seed + t, c)
            expected = rep.expected
            if not rep.match:
                got = str(rep.recovered) if rep.recovered is not None else f"failed: {rep.failure}"
                fails.append(f"seed={seed + t} prec={c.prec} recovered {got}")
        out.append(_tally("synthetic", f"weights={list(weights)} f={f} n0={n0}", fails, trials,
                          f"expected {expected}"))
    return out


def theta_table(k: int, steps: int, ctx: SeriesContext):
    return theta_k_approx(k, steps, ctx).agreement


def suite_theta(ctx: SeriesContext, samples: int = 0, seed: int = 0, steps: int = 6) -> list[CheckResult]:
    out = []
    for k in (1, 2):
        table = [row for row in theta_table(k, steps, ctx) if row[0] >= 2]
        digits = [d for _, d, _ in table]
        increasing = all(b > a for a, b in zip(digits, digits[1:]))
        shown = ", ".join(f"{n}:{d}{'*' if ex else ''}" for n, d, ex in table)
        out.append(_check("theta", f"agreement_strictly_increasing_k{k}", increasing,
                          f"step:digits {shown} (* = equal to working precision)",
                          f"k={k} steps={steps} p={ctx.p} prec={ctx.prec}"))
    return out


def suite_growth(ctx: SeriesContext, samples: int = 0, seed: int = 0, n_max: int = 8) -> list[CheckResult]:
    out = []
    rho = RadiusExp(1, 1)
    one = TruncatedSeries.polynomial(ctx.p, [1], ctx.prec)
    for h in (0, 1, 2):
        est = o_phi_estimate([one], [[Fraction(ctx.p) ** h]], rho, n_max)
        ok = abs(est.estimate - h) <= 0.1 and est.residual < 0.05
        out.append(_check("growth", f"phi_e_equals_p^{h}_e", ok,
                          f"estimate {est.estimate:.4f}, residual {est.residual:.4f}",
                          f"phi=[[{ctx.p}^{h}]] g=[1] rho=3^-1 n_max={n_max}"))
    lctx = ctx.with_(x_trunc=max(ctx.x_trunc, ctx.p ** n_max + ctx.p ** (n_max - 1) * 4), prec=min(ctx.prec, 20))
    est = o_phi_estimate([log1p_series(lctx)], [[1]], rho, n_max)
    out.append(_check("growth", "log1p_with_trivial_phi", abs(est.estimate - 1) <= 0.15,
                      f"estimate {est.estimate:.4f}, residual {est.residual:.4f}, "
                      f"levels {est.levels[0]}..{est.levels[-1]}",
                      f"phi=[[1]] g=[log(1+x)] rho=3^-1 n_max={n_max} x_trunc={lctx.x_trunc} prec={lctx.prec}"))
    return out


SUITES = {
    "phi-psi": suite_phi_psi,
    "mellin": suite_mellin,
    "radii": suite_radii,
    "snf": suite_snf,
    "structure": suite_structure,
    "synthetic": suite_synthetic,
    "theta": suite_theta,
    "growth": suite_growth,
}


def run_suite(name: str, ctx: SeriesContext, samples: int, seed: int) -> list[CheckResult]:
    if name == "all":
        out = []
        for key in SUITES:
            out += SUITES[key](ctx, samples, seed)
        return out
    return SUITES[name](ctx, samples, seed)
