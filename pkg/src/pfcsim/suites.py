"""Seeded check suites shared by the CLI and the test-suite.

Each function returns a plain dict of measurements plus a ``passed`` flag
evaluated against the stated tolerance.
"""
from __future__ import annotations

from itertools import product
from math import sqrt

import numpy as np

from . import f2
from .pfc import (
    _commitment_ok,
    dec_x,
    dec_z,
    open_dense,
    open_x,
    open_z,
    pfc_commit_compressed,
    pfc_commit_dense,
    pfc_gen,
    rotate_coset,
)
from .protocol import ProtocolConfig, combine, flip_test_openings, pv_gen, pv_prove, pv_ver, replay_signature
from .protocol.crosscheck import (
    make_setup,
    outcome_counts,
    run_compressed,
    run_dense,
    total_variation,
)
from .qobf import qeval, qobf
from .qsim.compressed import CompressedState
from .qsim.dense import StateVector, coset_state, fidelity, hadamard_all, measure
from .qv import Circuit, QvInstance, all_inputs, shipped_instance
from .tcf import hadamard_decode, tcf_check, tcf_eval_dense, tcf_gen, tcf_invert
from .token import token_gen, token_sign, token_verify


def tv_counts(a: dict, b: dict) -> float:
    return total_variation(a, b)


# --------------------------------------------------------------- rotation

def balanced_cosets(n: int):
    """Every balanced n/2-dimensional affine subspace of F_2^n."""
    d = n // 2
    for S in f2.all_subspaces(n):
        if S.dim != d or not S.is_balanced:
            continue
        seen = set()
        for v in range(1 << n):
            rep = S.reduce(v)
            if rep not in seen:
                seen.add(rep)
                yield f2.AffineSubspace(S, rep)


def rotation_sweep(n_values=(2, 4, 6), tol: float = 1e-9) -> dict:
    worst, count = 0.0, 0
    for n in n_values:
        for A in balanced_cosets(n):
            A0, A1 = A.split
            s0, s1 = coset_state(A0), coset_state(A1)
            for src, dst in ((s0, s1), (s1, s0)):
                worst = max(worst, 1.0 - fidelity(rotate_coset(src, A.subspace), dst))
                count += 1
    return {"n_values": list(n_values), "rotations": count, "max_infidelity": worst, "passed": worst <= tol}


def hadamard_dual_sweep(n_max: int = 5, tol: float = 1e-9) -> dict:
    worst, count = 0.0, 0
    for n in range(1, n_max + 1):
        for S in f2.all_subspaces(n):
            lhs = hadamard_all(coset_state(f2.affine(S))).amps
            rhs = coset_state(f2.affine(S.dual)).amps
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
            count += 1
    return {"n_max": n_max, "subspaces": count, "max_distance": worst, "passed": worst <= tol}


# ---------------------------------------------------------- PFC correctness

DEFAULT_QUBIT = (sqrt(0.3), sqrt(0.7) * np.exp(0.4j))


def pfc_correctness(basis: str = "Z", n: int = 4, lam_tok: int = 8, trials: int = 10_000, seed: int = 0,
                    engine: str = "compressed", qubit=DEFAULT_QUBIT, tol: float = 0.05,
                    token_register: bool = False) -> dict:
    """TV between direct measurements of a qubit and commit -> open -> decode,
    post-selected on the commitment verifying."""
    rng = np.random.default_rng(seed)
    basis = basis.upper()
    psi = StateVector.qubit(*qubit)
    direct: dict = {}
    for _ in range(trials):
        b = measure(psi, [0], basis, rng).bits[0]
        direct[b] = direct.get(b, 0) + 1
    decoded: dict = {}
    token_fail = bottom = 0
    for _ in range(trials):
        dk, ck = pfc_gen(rng, n, lam_tok)
        if engine == "compressed":
            cs = CompressedState(psi.copy())
            reg, c = pfc_commit_compressed(cs, 0, ck, rng)
            u = (open_z if basis == "Z" else open_x)(cs, 0, reg, rng)
        else:
            st, k0, c = pfc_commit_dense(psi.copy(), 0, ck, rng, token_register=token_register)
            u, _ = open_dense(st, 0, k0, basis, rng)
        if not _commitment_ok(dk, c):
            token_fail += 1
            continue
        bit = (dec_z if basis == "Z" else dec_x)(dk, c, u)
        if bit is None:
            bottom += 1
            key = "bottom"
        else:
            key = bit
        decoded[key] = decoded.get(key, 0) + 1
    tv = tv_counts(direct, decoded)
    return {"basis": basis, "n": n, "lam_tok": lam_tok, "trials": trials, "engine": engine,
            "token_register": token_register, "token_failures": token_fail, "bottom": bottom,
            "direct": {str(k): v for k, v in sorted(direct.items(), key=str)},
            "decoded": {str(k): v for k, v in sorted(decoded.items(), key=str)},
            "tv": tv, "passed": tv <= tol}


# ------------------------------------------------------------------ token

def token_rates(lam: int, trials: int = 10_000, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(trials):
        vk, sk = token_gen(rng, lam, 1)
        m = (int(rng.integers(2)),)
        ok += token_verify(vk, m, token_sign(m, sk, rng))
    p = 1 - 2.0 ** (-lam / 2)
    sigma = sqrt(p * (1 - p) / trials)
    rate = ok / trials
    return {"lam_tok": lam, "trials": trials, "rate": rate, "expected": p, "sigma": sigma,
            "z": (rate - p) / sigma if sigma else 0.0, "passed": abs(rate - p) <= 3 * sigma}


# -------------------------------------------------------------------- TCF

def tcf_structure(w_max: int = 4, keys_per_width: int = 4, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for w in range(1, w_max + 1):
        for _ in range(keys_per_width):
            for h in (0, 1):
                pk, sk = tcf_gen(rng, h, w)
                images: dict = {}
                for b, x in product((0, 1), range(1 << w)):
                    images.setdefault(pk.f(b, x), []).append((b, x))
                if h == 0 and any(len(v) != 1 for v in images.values()):
                    failures.append(("injective", w))
                if h == 1 and any(len(v) != 2 or {b for b, _ in v} != {0, 1} for v in images.values()):
                    failures.append(("two-to-one", w))
                for y, pre in images.items():
                    inv = tcf_invert(h, sk, y)
                    expect = pre[0] if h == 0 else tuple(sorted(pre))
                    if inv != expect or not all(tcf_check(pk, b, x, y) for b, x in pre):
                        failures.append(("invert", w, y))
    return {"w_max": w_max, "failures": failures[:10], "passed": not failures}


def tcf_hadamard_decode(w: int = 3, trials: int = 10_000, seed: int = 0, qubit=DEFAULT_QUBIT,
                        tol: float = 0.05) -> dict:
    """Dense Eval in two-to-one mode, Hadamard-measure X and B, decode; compare
    with measuring the qubit in X directly."""
    rng = np.random.default_rng(seed)
    pk, sk = tcf_gen(rng, 1, w)
    psi = StateVector.qubit(*qubit)
    direct: dict = {}
    decoded: dict = {}
    for _ in range(trials):
        b = measure(psi, [0], "X", rng).bits[0]
        direct[b] = direct.get(b, 0) + 1
        st, xq, y = tcf_eval_dense(psi.copy(), 0, pk, rng)
        out = measure(st, [0] + xq, "X", rng)
        bprime, z = out.value >> w, out.value & ((1 << w) - 1)
        (_, x0), (_, x1) = tcf_invert(1, sk, y)
        m = hadamard_decode(bprime, z, x0, x1)
        decoded[m] = decoded.get(m, 0) + 1
    tv = tv_counts(direct, decoded)
    return {"w": w, "trials": trials, "direct": direct, "decoded": decoded, "tv": tv, "passed": tv <= tol}


# ---------------------------------------------------- engine equivalence

def _cv_state() -> StateVector:
    c = Circuit.from_list(3, [["RY", 0, 0.7], ["H", 1], ["CNOT", 0, 2], ["RY", 2, 1.1], ["S", 1], ["H", 1]])
    return c.apply(StateVector.zero(3))


def _pv_state() -> StateVector:
    c = Circuit.from_list(2, [["RY", 0, 0.9], ["CNOT", 0, 1], ["H", 1], ["T", 1]])
    return c.apply(StateVector.zero(2))


def engine_scenarios():
    """(name, setup) pairs: CV rounds at ℓ = 3 and PV rounds at ℓ = 2, w = 2."""
    cv, pv = _cv_state(), _pv_state()
    return [
        ("cv-test", make_setup(cv, (1, 0, 1), True, 2, 11)),
        ("cv-hadamard", make_setup(cv, (1, 0, 1), False, 2, 12)),
        ("pv-test", make_setup(pv, (1, 1), True, 2, 13, pfc_n=2)),
        ("pv-hadamard", make_setup(pv, (1, 0), False, 2, 14, pfc_n=2)),
    ]


def engine_equivalence(trials: int = 10_000, seed: int = 0, tol: float = 0.03) -> dict:
    out = {}
    for k, (name, setup) in enumerate(engine_scenarios()):
        d = outcome_counts(run_dense, setup, trials, np.random.default_rng([seed, k, 0]))
        c = outcome_counts(run_compressed, setup, trials, np.random.default_rng([seed, k, 1]))
        out[name] = tv_counts(d, c)
    return {"trials": trials, "tv": out, "max_tv": max(out.values()), "passed": max(out.values()) <= tol}


# -------------------------------------------------------------- protocol

def pv_completeness(instance: QvInstance, runs: int = 100, seed: int = 0, cfg=None,
                    threshold: int = 95) -> dict:
    cfg = cfg or ProtocolConfig()
    inputs = all_inputs(instance.input_width)
    good = 0
    for s in range(runs):
        rng = np.random.default_rng([seed, s])
        x = inputs[s % len(inputs)]
        keys = pv_gen(instance, cfg, rng)
        proof = pv_prove(keys.pk, keys.oracles, instance, x, rng)
        samples = pv_ver(keys.vk, x, proof)
        good += samples is not None and combine(instance, samples) == instance.ideal_value(x)
    return {"instance": instance.name, "runs": runs, "good": good, "threshold": threshold,
            "passed": good >= threshold}


def adversary_rejections(instance: QvInstance, runs: int = 100, seed: int = 0, cfg=None) -> dict:
    cfg = cfg or ProtocolConfig()
    inputs = all_inputs(instance.input_width)
    flip_rej = replay_rej = 0
    for s in range(runs):
        rng = np.random.default_rng([seed, s])
        x = inputs[s % len(inputs)]
        x2 = inputs[(s + 1) % len(inputs)]
        key_seed = int(rng.integers(1 << 62))
        keys = pv_gen(instance, cfg, np.random.default_rng(key_seed))
        proof = pv_prove(keys.pk, keys.oracles, instance, x, rng)
        T = keys.oracles.H(proof.y)
        flip_rej += pv_ver(keys.vk, x, flip_test_openings(proof, T, cfg.pfc_n)) is None
        # A second honest proof under the same verification key (a fresh copy
        # of the proving state), for a different input; graft σ from the first.
        twin = pv_gen(instance, cfg, np.random.default_rng(key_seed))
        other = pv_prove(twin.pk, twin.oracles, instance, x2, rng)
        replay_rej += pv_ver(keys.vk, x2, replay_signature(proof, other)) is None
    return {"instance": instance.name, "runs": runs, "flip_rejected": flip_rej, "replay_rejected": replay_rej,
            "passed": flip_rej >= 99 * runs / 100 and replay_rej == runs}


# ------------------------------------------------------------ obfuscation

OBF_CIRCUITS = ("and2", "hh_xor", "or2_hczh")


def obfuscation_functionality(names=OBF_CIRCUITS, seed: int = 0) -> dict:
    table = {}
    good = total = 0
    for k, name in enumerate(names):
        Q = shipped_instance(name)
        bundle = qobf(Q, np.random.default_rng([seed, k]))
        rng = np.random.default_rng([seed, k, 1])
        row = {}
        for x in all_inputs(Q.input_width):
            b = qeval(bundle, x, rng)
            row[x] = b
            good += b == Q.ideal_value(x)
            total += 1
        table[name] = row
    return {"results": table, "correct": good, "total": total, "passed": good == total}


def repeated_evaluation(name: str = "and2", seeds: int = 100, evaluations: int = 3, seed: int = 0,
                        threshold: int = 95) -> dict:
    Q = shipped_instance(name)
    inputs = all_inputs(Q.input_width)
    good = 0
    for s in range(seeds):
        rng = np.random.default_rng([seed, s])
        bundle = qobf(Q, rng)
        xs = [inputs[int(rng.integers(len(inputs)))] for _ in range(evaluations)]
        good += all(qeval(bundle, x, rng) == Q.ideal_value(x) for x in xs)
    return {"instance": name, "seeds": seeds, "evaluations": evaluations, "good": good,
            "threshold": threshold, "passed": good >= threshold}
