"""Acceptance suite: fifteen numbered criteria at their stated tolerances.

Each test prints one ``criterion N PASS|FAIL`` line; the lines are repeated
in the pytest terminal summary.  ``python3 tests/test_acceptance.py`` runs
the same checks without pytest.
"""
import sys
import time
from math import sqrt

import numpy as np

from pfcsim import lab, suites
from pfcsim.lab import ExperimentConfig
from pfcsim.qv import shipped_instance

REPORT: list[str] = []


def _report(label: str, passed: bool, detail: str, t0: float) -> bool:
    line = f"criterion {label:<3} {'PASS' if passed else 'FAIL'}  {detail}  [{time.time() - t0:.1f}s]"
    REPORT.append(line)
    print(line)
    return passed


def criterion_1():
    t0 = time.time()
    r = suites.rotation_sweep((2, 4, 6), tol=1e-9)
    return _report("1", r["passed"], f"coset rotation: {r['rotations']} rotations, "
                   f"max infidelity {r['max_infidelity']:.2e} <= 1e-9", t0)


def criterion_2():
    t0 = time.time()
    r = suites.hadamard_dual_sweep(5, tol=1e-9)
    return _report("2", r["passed"], f"Hadamard-dual: {r['subspaces']} subspaces, "
                   f"max distance {r['max_distance']:.2e} <= 1e-9", t0)


def _pfc(basis, label):
    t0 = time.time()
    r = suites.pfc_correctness(basis, n=4, lam_tok=8, trials=10_000, seed=0, tol=0.05)
    return _report(label, r["passed"], f"PFC {basis}-correctness: TV {r['tv']:.4f} <= 0.05 "
                   f"({r['token_failures']} token failures dropped)", t0)


def criterion_3():
    return _pfc("Z", "3")


def criterion_4():
    return _pfc("X", "4")


def criterion_5():
    t0 = time.time()
    rs = [suites.token_rates(lam, 10_000, seed=lam) for lam in (4, 8)]
    detail = "; ".join(f"lam {r['lam_tok']}: rate {r['rate']:.4f} vs {r['expected']:.4f} "
                       f"(z = {r['z']:+.2f}, |z| <= 3)" for r in rs)
    return _report("5", all(r["passed"] for r in rs), "token " + detail, t0)


def criterion_6():
    t0 = time.time()
    s = suites.tcf_structure(4, seed=0)
    d = suites.tcf_hadamard_decode(3, 10_000, seed=0, tol=0.05)
    return _report("6", s["passed"] and d["passed"],
                   f"TCF structure failures {len(s['failures'])}; Hadamard decode TV {d['tv']:.4f} <= 0.05", t0)


def criterion_7():
    t0 = time.time()
    r = suites.engine_equivalence(10_000, seed=0, tol=0.03)
    return _report("7", r["passed"], f"engine equivalence: max joint-outcome TV {r['max_tv']:.4f} <= 0.03 "
                   f"over {len(r['tv'])} scenarios", t0)


def criterion_8():
    t0 = time.time()
    trivial = suites.pv_completeness(shipped_instance("and2"), 100, seed=0, threshold=95)
    ground = suites.pv_completeness(shipped_instance("zfield_and2"), 100, seed=0, threshold=90)
    return _report("8", trivial["passed"] and ground["passed"],
                   f"PV completeness: trivial {trivial['good']}/100 >= 95, "
                   f"ground-state {ground['good']}/100 >= 90", t0)


def criterion_9():
    t0 = time.time()
    r = suites.obfuscation_functionality(seed=0)
    return _report("9", r["passed"], f"obfuscation: {r['correct']}/{r['total']} inputs correct "
                   f"over {', '.join(r['results'])}", t0)


def criterion_10():
    t0 = time.time()
    r = suites.repeated_evaluation("and2", 100, 3, seed=0, threshold=95)
    return _report("10", r["passed"], f"repeated evaluation: {r['good']}/100 seeds with 3 correct calls >= 95", t0)


def criterion_11():
    t0 = time.time()
    r = suites.adversary_rejections(shipped_instance("and2"), 100, seed=0)
    return _report("11", r["passed"], f"adversaries: flip rejected {r['flip_rejected']}/100 >= 99, "
                   f"replay rejected {r['replay_rejected']}/100 == 100", t0)


def criterion_12():
    t0 = time.time()
    ok, parts = True, []
    for seed in (0, 1):
        m = lab.inner_product_experiment(ExperimentConfig(n=4, d=2, trials=200, seed=seed)).summary["mean"]
        ok &= abs(m - 0.5) <= 1e-12
        parts.append(f"coset seed {seed} |mean-0.5| {abs(m - 0.5):.1e}")
    for n in (4, 6):
        for family in ("a0-uniform", "a0-shared", "a0-random"):
            s = lab.inner_product_experiment(ExperimentConfig(n=n, d=2, trials=1000, family=family)).summary
            ok &= s["mean"] <= 0.5 + 2 / sqrt(1000)
            parts.append(f"{family} n={n} {s['mean']:.3f}")
    return _report("12", ok, f"inner products (a0 bound {0.5 + 2 / sqrt(1000):.3f}): " + ", ".join(parts), t0)


def criterion_13():
    t0 = time.time()
    s = lab.welch_sweep(1000, seed=0).summary
    return _report("13", s["violations"] == 0,
                   f"Welch: {s['violations']} violations over 1000 configs, min slack {s['min_slack']:.3e}", t0)


def criterion_14():
    t0 = time.time()
    r = lab.robustness_facts_scan(100_000, seed=0)
    viol = r["bound_violations"] + r["implication_violations"] + r["inner_product_violations"] + r["projector_violations"]
    sym_ok = abs(r["symmetric_value"] - 1.5) <= 1e-9
    return _report("14", viol == 0 and sym_ok,
                   f"robustness: {viol} violations over {r['samples']} samples, "
                   f"symmetric value {r['symmetric_value']:.12f}", t0)


def criterion_15a():
    t0 = time.time()
    s = lab.dim1_attack_runs(8, 100, dim=1).summary
    ok = s["queries"] == [8] and s["flip_successes"] >= 99
    return _report("15a", ok, f"dim-1 attack n=8: queries {s['queries']}, flip accepted {s['flip_successes']}/100 >= 99", t0)


def criterion_15b():
    t0 = time.time()
    s = lab.dim1_attack_runs(8, 100, dim=4).summary
    fails = s["seeds"] - s["flip_successes"]
    return _report("15b", fails >= 99, f"same script at dim n/2: flip failed {fails}/100 >= 99", t0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13, criterion_14,
            criterion_15a, criterion_15b]


def test_criterion_01_rotation():
    assert criterion_1()


def test_criterion_02_hadamard_dual():
    assert criterion_2()


def test_criterion_03_pfc_z():
    assert criterion_3()


def test_criterion_04_pfc_x():
    assert criterion_4()


def test_criterion_05_token():
    assert criterion_5()


def test_criterion_06_tcf():
    assert criterion_6()


def test_criterion_07_engines():
    assert criterion_7()


def test_criterion_08_completeness():
    assert criterion_8()


def test_criterion_09_obfuscation():
    assert criterion_9()


def test_criterion_10_repeated_evaluation():
    assert criterion_10()


def test_criterion_11_adversaries():
    assert criterion_11()


def test_criterion_12_inner_product():
    assert criterion_12()


def test_criterion_13_welch():
    assert criterion_13()


def test_criterion_14_robustness():
    assert criterion_14()


def test_criterion_15a_dim1_attack():
    assert criterion_15a()


def test_criterion_15b_half_dim_contrast():
    assert criterion_15b()


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA]
    print(f"{sum(results)}/{len(results)} passed")
    sys.exit(0 if all(results) else 1)
