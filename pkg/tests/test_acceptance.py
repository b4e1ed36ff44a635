"""Acceptance criteria 1 to 7, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines appear in the terminal
summary) or ``python tests/test_acceptance.py`` to print them directly.
"""

import time

import pytest

from padic_rtf.cli import RunConfig
from padic_rtf.quadratic import QuadSpace, integration_check
from padic_rtf.suites import run_suite

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

CFG = RunConfig(seed=20240601)


def report(n, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def suite_report(n, name, primes, limit=None):
    t = time.perf_counter()
    res = run_suite(name, CFG, primes=primes)
    dt = time.perf_counter() - t
    bad = [c.name for c in res.lines if not c.ok]
    ok = res.ok and (limit is None or dt < limit)
    head = f"{name} {sum(c.ok for c in res.lines)}/{len(res.lines)} checks in {dt:.2f}s"
    if bad:
        head += " failing: " + ", ".join(bad[:6])
    return report(n, ok, head), res


def test_criterion_1_table_reproduction():
    ok, res = suite_report(1, "table", None, limit=1.0)
    assert ok


def test_criterion_2_gamma_suite():
    ok, _ = suite_report(2, "gamma", [3, 5, 7], limit=60.0)
    assert ok


def test_criterion_3_germ_expansion():
    ok, _ = suite_report(3, "germs", [3, 5], limit=60.0)
    assert ok


def test_criterion_4_reduction_to_basic_cases():
    ok, _ = suite_report(4, "reduction", [3, 5])
    assert ok


def test_criterion_5_transfer_germ_shape():
    ok, _ = suite_report(5, "transfer-shape", [3, 5])
    assert ok


def test_criterion_6_fundamental_lemma_smoke():
    # fails: the transformed basic vector matches the A1 log slope but carries an
    # extra compactly supported term near c = 0 that no single constant absorbs
    ok, _ = suite_report(6, "fl-smoke", [3, 5])
    assert ok


def test_criterion_7_integration_formula():
    worst = 0.0
    for d in (2, 3, 4):
        worst = max(worst, integration_check(QuadSpace(d, 3), (0, 3)).max_deviation)
    ok = worst < 1e-9
    report(7, ok, f"integration formula d=2,3,4 on v in [0,3] max deviation {worst:.2e} tol=1e-9")
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
