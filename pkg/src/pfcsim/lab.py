"""Numeric experiments behind the binding argument.

Inner products over the (A, B) relation, the Welch bound, the two geometric
facts used in the amplitude analysis, the dimension-1 attack, and a small
binding-game harness.  Every experiment is seeded per trial from
``(seed, trial)``, so a parallel run reproduces a serial one exactly.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import comb, sqrt
from typing import Callable, Optional

import numpy as np

from . import f2
from .f2 import AffineSubspace
from .oracles import OracleHandle
from .pfc import PfcDecodeKey, PfcCommitKey, dec_z, make_ck_handle, open_z, pfc_commit_compressed
from .qsim.compressed import CompressedState
from .qsim.dense import StateVector, affine_mask, coset_state
from .token import token_gen, token_verify

FAMILIES = ("coset", "a0-uniform", "a0-shared", "a0-random")


@dataclass
class ExperimentConfig:
    n: int = 4
    d: int = 2
    trials: int = 1000
    seed: int = 0
    eps: float = 0.1
    engine: str = "dense"
    ancilla: int = 1  # width m of the Y register
    family: str = "coset"
    parallel: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.engine != "dense":
            raise ValueError("lab experiments run on the dense engine")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")

    def theorem_hypothesis(self) -> bool:
        """n - d + 1 > 10 log2(1/ε) + 6: recorded, never enforced here."""
        return self.n - self.d + 1 > 10 * np.log2(1 / self.eps) + 6


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


# --------------------------------------------------------- inner products

def _support_vector(A: AffineSubspace, amps: np.ndarray, m: int) -> np.ndarray:
    """Σ_{a ∈ A} |a⟩ ⊗ amps[a] over n + m qubits, normalized."""
    n = A.n
    psi = np.zeros((1 << n, 1 << m), dtype=np.complex128)
    mask = affine_mask(A)
    psi[mask] = amps[mask]
    psi = psi.reshape(-1)
    return psi / np.linalg.norm(psi)


def family_states(family: str, A: AffineSubspace, B: AffineSubspace, m: int,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = A.n
    if family == "coset":
        return coset_state(A).amps, coset_state(B).amps
    A0, B0 = A.split[0], B.split[0]
    if family == "a0-uniform":
        return coset_state(A0).amps, coset_state(B0).amps
    if family == "a0-shared":
        # One committer unitary Σ_s |s⟩⟨s| ⊗ V_s for both states.
        shared = _gaussian(rng, (1 << n, 1 << m))
        shared /= np.linalg.norm(shared, axis=1, keepdims=True)
        return _support_vector(A0, shared, m), _support_vector(B0, shared, m)
    # a0-random: independent random states in Im(Π_{A_0}) and Im(Π_{B_0}).
    return (_support_vector(A0, _gaussian(rng, (1 << n, 1 << m)), m),
            _support_vector(B0, _gaussian(rng, (1 << n, 1 << m)), m))


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _inner_trial(args) -> dict:
    cfg, trial = args
    rng = trial_rng(cfg.seed, trial)
    A, B = f2.sample_relation_pair(rng, cfg.d, cfg.n)
    a, b = family_states(cfg.family, A, B, cfg.ancilla, rng)
    return {"trial": trial, "A": f2.to_bits(A.shift, A.n), "B": f2.to_bits(B.shift, B.n),
            "intersection": f2.intersection_size(A, B), "value": float(abs(np.vdot(a, b)))}


def _map(fn, cfg, items):
    if cfg.parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel) as ex:
            return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * cfg.parallel))))
    return [fn(it) for it in items]


@dataclass
class ExperimentResult:
    rows: list[dict]
    summary: dict

    def to_json(self) -> str:
        return json.dumps({"summary": self.summary, "rows": self.rows}, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.rows:
            w = csv.DictWriter(buf, fieldnames=list(self.rows[0]))
            w.writeheader()
            w.writerows(self.rows)
        buf.write("# summary " + json.dumps(self.summary, sort_keys=True) + "\n")
        return buf.getvalue()


def inner_product_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean and standard error of |⟨ψ_A|ψ_B⟩| over relation pairs."""
    if cfg.d >= cfg.n:
        raise ValueError("the relation needs d < n")
    rows = _map(_inner_trial, cfg, [(cfg, t) for t in range(cfg.trials)])
    vals = np.array([r["value"] for r in rows])
    stderr = float(vals.std(ddof=1) / sqrt(len(vals))) if len(vals) > 1 else 0.0
    summary = {"family": cfg.family, "n": cfg.n, "d": cfg.d, "trials": cfg.trials, "seed": cfg.seed,
               "mean": float(vals.mean()), "stderr": stderr, "max": float(vals.max()),
               "bound": 0.5 + 2 / sqrt(cfg.trials), "hypothesis_holds": bool(cfg.theorem_hypothesis())}
    return ExperimentResult(rows, summary)


# ------------------------------------------------------------------ Welch

def welch_rhs(I: int, dim: int, k: int) -> float:
    return (I / comb(k + dim - 1, k) - 1) / (I - 1)


def welch_check(vectors: np.ndarray, k: int) -> tuple[bool, float]:
    """(c^{2k} >= RHS, slack) for the rows of ``vectors`` (normalized here)."""
    X = np.asarray(vectors, dtype=np.complex128)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    I, dim = X.shape
    if I < 2:
        raise ValueError("need at least two vectors")
    G = np.abs(X.conj() @ X.T)
    np.fill_diagonal(G, 0.0)
    c = float(G.max())
    slack = c ** (2 * k) - welch_rhs(I, dim, k)
    return slack >= -1e-12, slack


def welch_sweep(configs: int = 1000, seed: int = 0) -> ExperimentResult:
    rows = []
    for t in range(configs):
        rng = trial_rng(seed, t)
        dim = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        I = int(rng.integers(2, 3 * dim + 3))
        ok, slack = welch_check(_gaussian(rng, (I, dim)), k)
        rows.append({"trial": t, "dim": dim, "k": k, "I": I, "ok": ok, "slack": slack})
    slacks = [r["slack"] for r in rows]
    summary = {"configs": configs, "violations": sum(not r["ok"] for r in rows),
               "min_slack": float(min(slacks)), "seed": seed}
    return ExperimentResult(rows, summary)


# -------------------------------------------------------- geometric facts

def robustness_sum(ta, tb, tc):
    """u1·u2 + u1·u3 + u2·u3 for u1=(a1,a2,0), u2=(b1,0,b2), u3=(0,c1,c2),
    parametrized by angles in [0, π/2]."""
    a1, a2 = np.cos(ta), np.sin(ta)
    b1, b2 = np.cos(tb), np.sin(tb)
    c1, c2 = np.cos(tc), np.sin(tc)
    p12, p13, p23 = a1 * b1, a2 * c1, b2 * c2
    return p12 + p13 + p23, np.minimum(np.minimum(p12, p13), p23)


def robustness_facts_scan(samples: int = 100_000, seed: int = 0, grid: int = 24) -> dict:
    """Scan both facts; returns counts of violations and the extremes seen."""
    rng = np.random.default_rng(seed)
    g = np.linspace(0, np.pi / 2, grid)
    ga, gb, gc = (v.ravel() for v in np.meshgrid(g, g, g, indexing="ij"))
    rand = rng.uniform(0, np.pi / 2, size=(3, max(0, samples - ga.size)))
    ta, tb, tc = (np.concatenate([x, y]) for x, y in zip((ga, gb, gc), rand))
    total, pmin = robustness_sum(ta, tb, tc)
    bound_viol = int(np.sum(total > 1.5 + 1e-9))
    # "sum >= 3/2 - δ³/2 implies every product >= 1/2 - δ" for all δ ∈ [0, 1/2]
    # fails exactly when sum > 3/2 - min(δ*, 1/2)³/2 with δ* = 1/2 - min product.
    dstar = np.clip(0.5 - pmin, 0.0, 0.5)
    impl_viol = int(np.sum((dstar > 0) & (total > 1.5 - dstar ** 3 / 2 + 1e-12)))
    sym, _ = robustness_sum(np.pi / 4, np.pi / 4, np.pi / 4)

    ip_viol, ip_proj = _inner_product_fact(rng, samples)
    return {
        "samples": int(total.size),
        "max_sum": float(total.max()),
        "bound_violations": bound_viol,
        "implication_violations": impl_viol,
        "symmetric_value": float(sym),
        "inner_product_violations": ip_viol,
        "projector_violations": ip_proj,
        "seed": seed,
    }


def _inner_product_fact(rng: np.random.Generator, samples: int, dim: int = 4) -> tuple[int, int]:
    """|⟨a|c⟩| >= β(1-α) - √(2α) and ‖Πa‖ >= β(1-α) - √(2α) on random triples."""
    def unit(v):
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    b = unit(_gaussian(rng, (samples, dim)))
    scale_a = rng.uniform(0, 1.5, size=(samples, 1))
    scale_c = rng.uniform(0, 3.0, size=(samples, 1))
    a = unit(b + scale_a * _gaussian(rng, (samples, dim)))
    c = unit(b + scale_c * _gaussian(rng, (samples, dim)))
    alpha = 1 - np.abs(np.sum(a.conj() * b, axis=1))
    beta = np.abs(np.sum(b.conj() * c, axis=1))
    lhs = np.abs(np.sum(a.conj() * c, axis=1))
    viol = int(np.sum(lhs < beta * (1 - alpha) - np.sqrt(2 * alpha) - 1e-12))
    # Second part with a random coordinate projector of rank 1..dim-1.
    rank = rng.integers(1, dim, size=samples)
    keep = np.arange(dim)[None, :] < rank[:, None]
    beta2 = np.linalg.norm(np.where(keep, b, 0), axis=1)
    lhs2 = np.linalg.norm(np.where(keep, a, 0), axis=1)
    viol2 = int(np.sum(lhs2 < beta2 * (1 - alpha) - np.sqrt(2 * alpha) - 1e-12))
    return viol, viol2


# ------------------------------------------------------ dimension-1 attack

def _pfc_with_dim(rng, n: int, dim: int, lam_tok: int) -> tuple[PfcDecodeKey, PfcCommitKey]:
    A = f2.random_balanced_affine(rng, dim, n)
    vk, sk = token_gen(rng, lam_tok, 1)
    return PfcDecodeKey(A, vk), PfcCommitKey(A, sk, make_ck_handle(A.subspace, vk))


@dataclass
class AttackRecord:
    n: int
    dim: int
    delta: str
    true_direction: str
    queries: int
    honest_accepted: bool
    flip_accepted: bool


def dim1_attack(n: int, rng: np.random.Generator, dim: int = 1, lam_tok: int = 16) -> AttackRecord:
    """Read Δ off the dual-membership oracle one unit vector at a time, then
    turn an honest Z-opening of b into one of 1 - b."""
    while True:
        dk, ck = _pfc_with_dim(rng, n, dim, lam_tok)
        st = CompressedState(StateVector.basis(1, int(rng.integers(2))))
        reg, c = pfc_commit_compressed(st, 0, ck, rng)
        if token_verify(dk.vk, (1,), c.c):
            break  # the token did not hit the zero vector
    S = dk.coset.subspace
    member = OracleHandle("S-dual", lambda s: S.in_dual(s))
    delta = 0
    for i in range(1, n + 1):
        if not member(f2.unit(i, n)):
            delta |= f2.unit(i, n)
    u = open_z(st, 0, reg, rng)
    flipped = (1 - u.bit, u.s ^ delta)
    return AttackRecord(
        n, dim, f2.to_bits(delta, n), f2.to_bits(dk.coset.direction, n), member.calls,
        dec_z(dk, c, u) == u.bit, dec_z(dk, c, flipped) == 1 - u.bit,
    )


def dim1_attack_runs(n: int, seeds: int, dim: int = 1, base_seed: int = 0) -> ExperimentResult:
    rows = [asdict(dim1_attack(n, trial_rng(base_seed, s), dim)) | {"seed": s} for s in range(seeds)]
    summary = {"n": n, "dim": dim, "seeds": seeds,
               "flip_successes": sum(r["flip_accepted"] for r in rows),
               "honest_accepts": sum(r["honest_accepted"] for r in rows),
               "queries": sorted({r["queries"] for r in rows})}
    return ExperimentResult(rows, summary)


# ------------------------------------------------------------ binding game

@dataclass
class BindingGameRecord:
    A: dict
    committer: str
    opener: str
    value: float
    oracle_queries: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _committer_state(name: str, A: AffineSubspace, rng) -> np.ndarray:
    if name == "uniform-a0":
        return coset_state(A.split[0]).amps
    if name == "random-a0":
        amps = np.where(affine_mask(A.split[0]), _gaussian(rng, 1 << A.n), 0)
        return amps / np.linalg.norm(amps)
    if name == "coset":
        return coset_state(A).amps
    raise ValueError(f"unknown committer {name!r}")


def _opener_unitary(name: str, A: AffineSubspace, O_A: OracleHandle, O_dual: OracleHandle,
                    rng) -> Callable[[np.ndarray], np.ndarray]:
    n = A.n
    idx = np.arange(1 << n)
    if name == "identity":
        return lambda psi: psi
    if name == "add-delta":
        # Δ from e_i queries to the dual-membership oracle, then X^Δ.
        delta = 0
        for i in range(1, n + 1):
            if not O_dual(f2.unit(i, n)):
                delta |= f2.unit(i, n)
        return lambda psi: psi[idx ^ delta]
    if name == "random-unitary":
        support = np.flatnonzero([O_A(int(x)) for x in idx])
        k = support.size
        q, r = np.linalg.qr(_gaussian(rng, (k, k)))
        U = q * (np.diag(r) / np.abs(np.diag(r)))

        def apply(psi):
            out = psi.copy()
            out[support] = U @ psi[support]
            return out

        return apply
    raise ValueError(f"unknown opener {name!r}")


COMMITTERS = ("uniform-a0", "random-a0", "coset")
OPENERS = ("identity", "add-delta", "random-unitary")


def binding_game(n: int, committer: str, opener: str, rng: np.random.Generator,
                 dim: Optional[int] = None) -> BindingGameRecord:
    """‖Π[A_1] U Π[A_0] ψ‖² with the committer holding O[A], O[A^⊥] and the
    opener holding O[A] (plus, for the scripted attack, O[A^⊥])."""
    dim = n // 2 if dim is None else dim
    A = f2.random_balanced_affine(rng, dim, n)
    O_A = OracleHandle("O[A]", lambda x: x in A)
    O_dual = OracleHandle("O[A-dual]", lambda s: A.subspace.in_dual(s))
    psi = _committer_state(committer, A, rng)
    psi = np.where(affine_mask(A.split[0]), psi, 0)
    U = _opener_unitary(opener, A, O_A, O_dual, rng)
    out = U(psi)
    value = float(np.sum(np.abs(out[affine_mask(A.split[1])]) ** 2))
    return BindingGameRecord(A.to_dict(), committer, opener, value,
                             {"O[A]": O_A.calls, "O[A-dual]": O_dual.calls})
