"""Classical verification: Mahadev-style compilation, parallel repetition and
Fiat-Shamir over a pluggable verification backend."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..oracles import OracleHandle, hash_to_weight
from ..qsim.compressed import CompressedRegister, CompressedState
from ..qv import QvInstance, QvParams, qv_gen, qv_prove, qv_ver
from ..tcf import (
    TcfPublicKey,
    TcfSecretKey,
    hadamard_decode,
    tcf_check,
    tcf_eval_on_qubit,
    tcf_gen,
    tcf_invert,
    tcf_is_valid,
)


@dataclass(frozen=True)
class ProtocolConfig:
    r: int = 9
    k: int = 3
    claw_width: int = 4
    pfc_n: int = 8
    pfc_lam_tok: int = 40
    msg_lam_tok: int = 48

    def __post_init__(self):
        if not 0 < self.k <= self.r:
            raise ValueError("need 0 < k <= r")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CvPublic:
    pks: tuple[tuple[TcfPublicKey, ...], ...]

    def to_dict(self) -> dict:
        return {"pks": [[pk.to_dict() for pk in row] for row in self.pks]}


@dataclass(frozen=True)
class CvSecret:
    qv: tuple[QvParams, ...]
    sks: tuple[tuple[TcfSecretKey, ...], ...]


@dataclass(frozen=True)
class CvParams:
    pp: CvPublic
    sp: CvSecret


@dataclass
class CvProof:
    b: list[list[int]]
    y: list[list[int]]
    z: list[list[int]]


def fiat_shamir_handle(key: bytes, r: int, k: int) -> OracleHandle:
    """H: all y values -> T ∈ {0,1}^r of weight k."""

    def H(ys: Sequence[Sequence[int]]) -> tuple[int, ...]:
        return hash_to_weight(key, r, k, [list(map(int, row)) for row in ys])

    return OracleHandle("H", H)


def cv_gen(instance: QvInstance, cfg: ProtocolConfig, rng: np.random.Generator) -> CvParams:
    """Deterministic in ``rng``: for each round a backend draw (h_i, S_i) and
    one TCF key pair per qubit in mode h_{i,j}."""
    qv, pks, sks = [], [], []
    for _ in range(cfg.r):
        params = qv_gen(instance, rng)
        qv.append(params)
        row_pk, row_sk = [], []
        for h in params.h:
            pk, sk = tcf_gen(rng, h, cfg.claw_width)
            row_pk.append(pk)
            row_sk.append(sk)
        pks.append(tuple(row_pk))
        sks.append(tuple(row_sk))
    return CvParams(CvPublic(tuple(pks)), CvSecret(tuple(qv), tuple(sks)))


@dataclass
class CvProverRun:
    """Prover-side state between the Y/Z measurements and P_Meas."""

    rounds: list[CompressedState]
    claws: list[list[CompressedRegister]]
    y: list[list[int]]
    z: list[list[int]] = field(default_factory=list)
    T: tuple[int, ...] = ()


def cv_prove(rounds: list[CompressedState], pp: CvPublic, H: OracleHandle,
             rng: np.random.Generator) -> CvProverRun:
    """Evaluate the TCFs, measure Y, derive T, then collapse every claw
    register: Z for test rounds, Hadamard for the others."""
    y, claws = [], []
    for st, row in zip(rounds, pp.pks):
        ry, rc = [], []
        for j, pk in enumerate(row):
            reg, yy = tcf_eval_on_qubit(pk, st, j, rng)
            ry.append(yy)
            rc.append(reg)
        y.append(ry)
        claws.append(rc)
    run = CvProverRun(rounds, claws, y)
    run.T = tuple(H(y))
    for i, st in enumerate(rounds):
        if run.T[i] == 0:
            run.z.append([st.measure_register_z(reg, rng) for reg in claws[i]])
        else:
            # J is the identity, so "apply J then Hadamard-measure" is a
            # plain Hadamard collapse.
            run.z.append([st.hadamard_collapse(reg, rng)[0] for reg in claws[i]])
    return run


def cv_meas(run: CvProverRun, rng: np.random.Generator) -> CvProof:
    b = []
    for i, st in enumerate(run.rounds):
        basis = "Z" if run.T[i] == 0 else "X"
        b.append(list(st.measure_controls(range(st.num_controls), basis, rng)))
    return CvProof(b, run.y, run.z)


def run_cv_prover(instance: QvInstance, x, pp: CvPublic, H: OracleHandle, rng) -> tuple[CvProof, tuple[int, ...]]:
    r = len(pp.pks)
    rounds = [CompressedState(qv_prove(instance, x, rng)) for _ in range(r)]
    run = cv_prove(rounds, pp, H, rng)
    return cv_meas(run, rng), run.T


def decode_hadamard_round(instance, x, pks, sks, qvp: QvParams, b, y, z):
    """m_i for a Hadamard round, or None on an inversion failure."""
    m = []
    for j, h in enumerate(qvp.h):
        inv = tcf_invert(h, sks[j], y[j])
        if inv is None:
            return None
        if h == 0:
            m.append(inv[0])
        else:
            (_, x0), (_, x1) = inv
            if not tcf_is_valid(x0, x1, z[j]):
                return None
            m.append(hadamard_decode(b[j], z[j], x0, x1))
    return m


def cv_ver(instance: QvInstance, x, params: CvParams, proof: CvProof, H: OracleHandle):
    """Samples {q_{i,t}} for the Hadamard rounds, or None (⊥)."""
    pp, sp = params.pp, params.sp
    T = tuple(H(proof.y))
    out = []
    for i, t in enumerate(T):
        pks, sks, qvp = pp.pks[i], sp.sks[i], sp.qv[i]
        if t == 0:
            for j, pk in enumerate(pks):
                if not tcf_check(pk, proof.b[i][j], proof.z[i][j], proof.y[i][j]):
                    return None
            continue
        m = decode_hadamard_round(instance, x, pks, sks, qvp, proof.b[i], proof.y[i], proof.z[i])
        if m is None:
            return None
        ok, samples = qv_ver(instance, x, qvp, m)
        if not ok:
            return None
        out.append(samples)
    return out


def maj(bits: Sequence[int]) -> int:
    """Majority with ties broken to 0."""
    bits = list(bits)
    return int(2 * sum(bits) > len(bits))


def mm_combine(groups: Sequence[Sequence[int]]) -> int:
    return maj([maj(g) for g in groups])


def combine(instance: QvInstance, samples: Sequence[Sequence[int]]) -> int:
    return mm_combine([[instance.P(q) for q in group] for group in samples])


def test_round_outputs(sp: CvSecret, proof: CvProof, T: Sequence[int]) -> list[tuple[int, ...]]:
    w = []
    for i, t in enumerate(T):
        S = sp.qv[i].S
        w.append(tuple(proof.b[i][j] for j in S) if t == 0 else (0,) * len(S))
    return w


def _inner_values(P: Callable[[int], int], w, n_out: int) -> list[int]:
    vals = []
    for wi in w:
        samples = []
        for t in range(len(wi) // n_out):
            v = 0
            for bit in wi[t * n_out:(t + 1) * n_out]:
                v = (v << 1) | int(bit)
            samples.append(P(v))
        vals.append(maj(samples))
    return vals


def d_in(P: Callable[[int], int], b: int, w, n_out: int = 1) -> bool:
    vals = _inner_values(P, w, n_out)
    return 4 * sum(v == b for v in vals) >= 3 * len(vals)


def d_out(P: Callable[[int], int], b: int, w, n_out: int = 1) -> bool:
    vals = _inner_values(P, w, n_out)
    return 3 * sum(v == 1 - b for v in vals) >= len(vals)
