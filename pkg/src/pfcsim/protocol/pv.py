"""Publicly verifiable lift: PFC commitments on every qubit, token-gated
parameter generation, and oracle handles in place of obfuscated programs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import f2
from ..oracles import OracleHandle, prf, prf_rng
from ..pfc import (
    PfcCommitKey,
    PfcCommitment,
    PfcDecodeKey,
    PfcOpening,
    dec_x,
    dec_z,
    open_x,
    open_z,
    pfc_commit_compressed,
    pfc_gen,
)
from ..qsim.compressed import CompressedState
from ..qv import QvInstance, qv_prove
from ..token import TokenSigningState, TokenVerifyKey, token_gen, token_sign, token_verify
from .cv import CvParams, CvProof, ProtocolConfig, cv_gen, cv_prove, cv_ver, fiat_shamir_handle

DIGEST_BITS = 256


class ProofFailure(RuntimeError):
    """The honest prover could not complete (token zero-vector event)."""


def message_digest(k_msg: bytes, x, c) -> tuple[int, ...]:
    """G(x, c) as DIGEST_BITS bits; the token signs this digest."""
    raw = prf(k_msg, "G", _xbits(x), _flat_c(c))
    raw += prf(k_msg, "G2", _xbits(x), _flat_c(c))
    v = int.from_bytes(raw, "big")
    return tuple((v >> (DIGEST_BITS - 1 - i)) & 1 for i in range(DIGEST_BITS))


def _xbits(x) -> str:
    return x if isinstance(x, str) else "".join(map(str, x))


def _flat_c(c) -> list:
    return [[list(cij.c) if isinstance(cij, PfcCommitment) else list(cij) for cij in row] for row in c]


@dataclass
class PvVerifyKey:
    instance: QvInstance
    cfg: ProtocolConfig
    k1: bytes
    k2: bytes
    k_msg: bytes
    vk_tok: TokenVerifyKey
    dks: list[list[PfcDecodeKey]]


@dataclass
class PvProvingState:
    sk_tok: TokenSigningState
    cks: list[list[PfcCommitKey]]

    @property
    def used(self) -> bool:
        return self.sk_tok.used or any(ck.spent for row in self.cks for ck in row)

    def snapshot(self) -> "PvProvingState":
        return PvProvingState(self.sk_tok.snapshot(), [[ck.snapshot() for ck in row] for row in self.cks])

    def to_dict(self) -> dict:
        return {"token": self.sk_tok.to_dict(), "cks": [[ck.to_dict() for ck in row] for row in self.cks]}

    @classmethod
    def from_dict(cls, d: dict) -> "PvProvingState":
        return cls(TokenSigningState.from_dict(d["token"]),
                   [[PfcCommitKey.from_dict(ck) for ck in row] for row in d["cks"]])


@dataclass
class PvOracles:
    """What the prover may touch: opaque, call-counted handles only."""

    H: OracleHandle
    cvgen: OracleHandle
    G: OracleHandle


@dataclass
class PvKeys:
    vk: PvVerifyKey
    pk: PvProvingState
    oracles: PvOracles


@dataclass
class PvProof:
    c: list[list[PfcCommitment]]
    sigma: tuple[int, ...]
    u: list[list[PfcOpening]]
    y: list[list[int]]
    z: list[list[int]]

    def to_dict(self, cfg: ProtocolConfig) -> dict:
        return {
            "c": [[f2.to_bits(cij.c[0], cfg.pfc_lam_tok) for cij in row] for row in self.c],
            "sigma": [f2.to_bits(s, cfg.msg_lam_tok) for s in self.sigma],
            "u": [[{"b": uij.bit, "s": f2.to_bits(uij.s, cfg.pfc_n), "basis": uij.basis} for uij in row]
                  for row in self.u],
            "y": self.y,
            "z": self.z,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PvProof":
        return cls(
            [[PfcCommitment((f2.from_bits(s),)) for s in row] for row in d["c"]],
            tuple(f2.from_bits(s) for s in d["sigma"]),
            [[PfcOpening(int(u["b"]), f2.from_bits(u["s"]), u["basis"]) for u in row] for row in d["u"]],
            [list(map(int, row)) for row in d["y"]],
            [list(map(int, row)) for row in d["z"]],
        )


def _cvgen_function(instance, cfg, k2, k_msg, vk_tok):
    def CVGen(x, c, sigma):
        if not token_verify(vk_tok, message_digest(k_msg, x, c), sigma):
            return None
        return cv_gen(instance, cfg, cv_coins(k2, x, c, sigma)).pp

    return CVGen


def cv_coins(k2: bytes, x, c, sigma) -> np.random.Generator:
    return prf_rng(k2, "cvgen", _xbits(x), _flat_c(c), [int(s) for s in sigma])


def pv_gen(instance: QvInstance, cfg: ProtocolConfig, rng: np.random.Generator) -> PvKeys:
    ell = instance.num_qubits
    dks, cks = [], []
    for _ in range(cfg.r):
        drow, crow = [], []
        for _ in range(ell):
            dk, ck = pfc_gen(rng, cfg.pfc_n, cfg.pfc_lam_tok)
            drow.append(dk)
            crow.append(ck)
        dks.append(drow)
        cks.append(crow)
    vk_tok, sk_tok = token_gen(rng, cfg.msg_lam_tok, DIGEST_BITS)
    k1, k2, k_msg = rng.bytes(32), rng.bytes(32), rng.bytes(32)
    vk = PvVerifyKey(instance, cfg, k1, k2, k_msg, vk_tok, dks)
    oracles = PvOracles(
        fiat_shamir_handle(k1, cfg.r, cfg.k),
        OracleHandle("CVGen", _cvgen_function(instance, cfg, k2, k_msg, vk_tok)),
        OracleHandle("G", lambda x, c: message_digest(k_msg, x, c)),
    )
    return PvKeys(vk, PvProvingState(sk_tok, cks), oracles)


def pv_prove(pk: PvProvingState, oracles: PvOracles, instance: QvInstance, x,
             rng: np.random.Generator) -> PvProof:
    """Prepare, commit every qubit, sign (x, c), fetch pp, run the CV prover,
    then open each commitment in the basis its round calls for."""
    r = len(pk.cks)
    rounds = [CompressedState(qv_prove(instance, x, rng)) for _ in range(r)]
    c, cregs = [], []
    for i, st in enumerate(rounds):
        crow, rrow = [], []
        for j in range(st.num_controls):
            reg, cij = pfc_commit_compressed(st, j, pk.cks[i][j], rng)
            crow.append(cij)
            rrow.append(reg)
        c.append(crow)
        cregs.append(rrow)
    sigma = token_sign(oracles.G(x, c), pk.sk_tok, rng)
    pp = oracles.cvgen(x, c, sigma)
    if pp is None:
        raise ProofFailure("CVGen refused the honest signature")
    run = cv_prove(rounds, pp, oracles.H, rng)
    u = []
    for i, st in enumerate(rounds):
        opener = open_z if run.T[i] == 0 else open_x
        u.append([opener(st, j, cregs[i][j], rng) for j in range(st.num_controls)])
    return PvProof(c, sigma, u, run.y, run.z)


@dataclass
class PvVerdict:
    samples: Optional[list[list[int]]]
    T: tuple[int, ...]
    b: Optional[list[list[int]]] = None
    reason: str = ""
    params: Optional[CvParams] = field(default=None, repr=False)

    @property
    def accepted(self) -> bool:
        return self.samples is not None


def pv_verify(vk: PvVerifyKey, x, proof: PvProof) -> PvVerdict:
    """pv_ver with the decoded bits and a rejection reason kept for transcripts."""
    cfg, instance = vk.cfg, vk.instance
    H = fiat_shamir_handle(vk.k1, cfg.r, cfg.k)
    T = tuple(H(proof.y))
    if not token_verify(vk.vk_tok, message_digest(vk.k_msg, x, proof.c), proof.sigma):
        return PvVerdict(None, T, reason="signature")
    params = cv_gen(instance, cfg, cv_coins(vk.k2, x, proof.c, proof.sigma))
    b = []
    for i, t in enumerate(T):
        row = []
        h = params.sp.qv[i].h
        for j, dk in enumerate(vk.dks[i]):
            if t == 0:
                bit = dec_z(dk, proof.c[i][j], proof.u[i][j])
            elif h[j] == 1:
                bit = dec_x(dk, proof.c[i][j], proof.u[i][j])
            else:
                bit = 0
            if bit is None:
                return PvVerdict(None, T, reason=f"decode({i},{j})")
            row.append(bit)
        b.append(row)
    samples = cv_ver(instance, x, params, CvProof(b, proof.y, proof.z), H)
    return PvVerdict(samples, T, b, "" if samples is not None else "cv", params)


def pv_ver(vk: PvVerifyKey, x, proof: PvProof):
    """Samples of the Hadamard rounds, or None (⊥)."""
    return pv_verify(vk, x, proof).samples


def transcript(vk: PvVerifyKey, x, proof: PvProof, verdict: PvVerdict) -> dict:
    cfg = vk.cfg
    body = proof.to_dict(cfg)
    rounds = []
    for i in range(len(proof.y)):
        rows = []
        for j in range(len(proof.y[i])):
            rows.append({
                "y": proof.y[i][j],
                "z": proof.z[i][j],
                "u": body["u"][i][j],
                "c": body["c"][i][j],
                "b": None if verdict.b is None else verdict.b[i][j],
            })
        rounds.append(rows)
    return {
        "x": _xbits(x),
        "sigma": body["sigma"],
        "T": "".join(map(str, verdict.T)),
        "rounds": rounds,
        "accepted": verdict.accepted,
        "reason": verdict.reason,
        "samples": verdict.samples,
        "config": cfg.to_dict(),
    }


# ------------------------------------------------------- scripted adversaries

def flip_test_openings(proof: PvProof, T: Sequence[int], n: int) -> PvProof:
    """Flip every test-round opening (b, s) -> (1-b, s ⊕ e_1)."""
    e1 = f2.unit(1, n)
    u = [[PfcOpening(1 - o.bit, o.s ^ e1, o.basis) if T[i] == 0 else o for o in row]
         for i, row in enumerate(proof.u)]
    return PvProof(proof.c, proof.sigma, u, proof.y, proof.z)


def replay_signature(proof: PvProof, other: PvProof) -> PvProof:
    """Graft ``proof``'s σ onto the commitments and openings of ``other``."""
    return PvProof(other.c, proof.sigma, other.u, other.y, other.z)
