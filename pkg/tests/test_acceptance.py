"""One test per acceptance criterion, at the stated sizes, tolerances and time limits.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from iwatool.series import SeriesContext
from iwatool.suites import (
    suite_growth,
    suite_mellin,
    suite_phi_psi,
    suite_radii,
    suite_snf,
    suite_structure,
    suite_synthetic,
    suite_theta,
)

SEED = 7
CTX = SeriesContext(p=3, u=4, prec=30, x_trunc=200)


def report(capsys, number, title, results, elapsed, limit=None):
    failed = [r for r in results if not r.passed]
    slow = limit is not None and elapsed >= limit
    ok = not failed and not slow
    timing = f"{elapsed:.1f}s" + (f" (limit {limit}s)" if limit is not None else "")
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}; {timing}"
    if failed:
        line += "; failing: " + "; ".join(f"{r.check} [{r.detail}] {r.reproducer}".rstrip() for r in failed)
    if slow:
        line += "; over the time limit"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    return ok, line


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def test_criterion_1_phi_psi_contract(capsys):
    results, t = timed(suite_phi_psi, CTX, 100, SEED)
    assert len(results) == 4 and all(r.detail.startswith("100/100") for r in results if r.passed)
    ok, line = report(capsys, 1, "psi o phi = id, projection formula, cyclotomic average on 100 series", results, t, 10)
    assert ok, line


def test_criterion_2_mellin_image(capsys):
    results, t = timed(suite_mellin, CTX, 50, SEED)
    ok, line = report(capsys, 2, "Mellin injective with image ker psi at levels 1..4, 50 samples each", results, t)
    assert ok, line


def test_criterion_3_critical_radii(capsys):
    results, t = timed(suite_radii, CTX, 0, SEED)
    ok, line = report(capsys, 3, "ell_j unit pattern on circles, pi_{n,j} root vanishing >= 20 digits", results, t)
    assert ok, line


def test_criterion_4_divisor_engine(capsys):
    results, t = timed(suite_snf, CTX, 50, SEED)
    assert "25 of size 3, 25 of size 4" in results[0].detail
    ok, line = report(capsys, 4, "snf_numeric = snf_exact on 50 conjugated 3x3/4x4 instances", results, t, 120)
    assert ok, line


def test_criterion_5_combinatorial_identities(capsys):
    results, t = timed(suite_structure, CTX, 1000, SEED)
    assert all(r.detail.startswith("1000/1000") for r in results if r.passed)
    ok, line = report(capsys, 5, "chain/determinant/annihilator/round-trip/twist on 1000 configurations",
                      results, t, 10)
    assert ok, line


def test_criterion_6_synthetic(capsys):
    results, t = timed(suite_synthetic, CTX.with_(prec=40), 10, SEED)
    assert len(results) == 4 and all(r.detail.startswith("10/10") for r in results if r.passed)
    ok, line = report(capsys, 6, "synthetic recovery of the shadow chain, battery x 10 seeds at prec 40", results, t, 300)
    assert ok, line


def test_criterion_7_theta_convergents(capsys):
    results, t = timed(suite_theta, CTX, 0, SEED)
    ok, line = report(capsys, 7, "Theta_k agreement strictly increasing over steps 2..6 for k = 1, 2", results, t)
    assert ok, line


def test_criterion_8_growth_estimator(capsys):
    results, t = timed(suite_growth, CTX, 0, SEED)
    ok, line = report(capsys, 8, "o_phi estimates h within 0.1 (residual < 0.05) and log(1+x) within 0.15",
                      results, t)
    assert ok, line
