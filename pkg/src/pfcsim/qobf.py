"""Obfuscation of pseudo-deterministic quantum circuits over a transparent
toy QFHE, with the classical obfuscation layer realized as oracle handles.

The toy QFHE offers the syntax and evaluation correctness only.  A ciphertext
is the plaintext with a key tag attached, so it hides nothing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb, sqrt
from pathlib import Path
from typing import Optional

import numpy as np

from .oracles import OracleHandle
from .pfc import PfcDecodeKey
from .protocol.cv import ProtocolConfig, combine, fiat_shamir_handle
from .protocol.pv import (
    PvKeys,
    PvOracles,
    PvProof,
    PvProvingState,
    PvVerifyKey,
    _cvgen_function,
    message_digest,
    pv_gen,
    pv_prove,
    pv_verify,
)
from .qv import Circuit, QvInstance
from .token import TokenVerifyKey


class DepthExceeded(ValueError):
    pass


class TagMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ToyQfheKeys:
    pk: tuple[int, ...]
    sk: tuple[int, ...]
    depth: int


@dataclass(frozen=True)
class QfheCiphertext:
    tag: tuple[int, ...]
    payload: object

    def to_dict(self) -> dict:
        return {"tag": "".join(map(str, self.tag)), "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> "QfheCiphertext":
        return cls(tuple(int(c) for c in d["tag"]), d["payload"])


def qfhe_gen(rng: np.random.Generator, depth: int, tag_bits: int = 2) -> ToyQfheKeys:
    tag = tuple(int(b) for b in rng.integers(2, size=tag_bits))
    return ToyQfheKeys(tag, tag, depth)


def qfhe_enc(pk: tuple[int, ...], m) -> QfheCiphertext:
    return QfheCiphertext(tuple(pk), m)


def qfhe_dec(sk: tuple[int, ...], ct: QfheCiphertext):
    if tuple(ct.tag) != tuple(sk):
        raise TagMismatch("ciphertext was not encrypted under this key")
    return ct.payload


def qfhe_eval(keys: ToyQfheKeys, instance: QvInstance, ct: QfheCiphertext, rng: np.random.Generator) -> QfheCiphertext:
    """Run ``instance`` on the encrypted input bits; returns Enc(sampled output)."""
    if instance.circuit.depth() > keys.depth:
        raise DepthExceeded(f"circuit depth {instance.circuit.depth()} exceeds bound {keys.depth}")
    x = ct.payload
    q = int(instance.sample(x, rng)[0])
    return QfheCiphertext(ct.tag, format(q, f"0{instance.n_out}b"))


def evaluation_instance(ct: QfheCiphertext, depth: int) -> QvInstance:
    """E[ct]: on input x, evaluate U[x] on ct.

    Q's gate list (the ciphertext payload) is interpreted on its own wires;
    extra tag wires are written with the ciphertext tag, and the outputs are
    the tag wires followed by Q's outputs, i.e. an encryption of Q(x).
    """
    Q = QvInstance.from_dict(ct.payload)
    t = len(ct.tag)
    base = Q.circuit.wires
    gates = [list(g) for g in Q.circuit.to_list()]
    gates += [["X", base + i] for i, bit in enumerate(ct.tag) if bit]
    circ = Circuit.from_list(base + t, gates)
    if circ.depth() > depth:
        raise DepthExceeded(f"interpreter depth {circ.depth()} exceeds bound {depth}")
    outputs = tuple(range(base, base + t)) + tuple(Q.outputs)
    # The public predicate table is all-zero; the real predicate P[sk]
    # lives behind the DK handle.
    return QvInstance(f"E[{Q.name}]", circ, Q.inputs, outputs, (0,) * (1 << len(outputs)),
                      Q.backend, Q.lam_s, Q.hamiltonian)


def secret_predicate(sk: tuple[int, ...], Q: QvInstance) -> tuple[int, ...]:
    """P[sk] = Dec(sk, ·) followed by Q's predicate; wrong tags decode to 0."""
    t, n = len(sk), Q.n_out
    tag = int("".join(map(str, sk)) or "0", 2)
    table = []
    for q in range(1 << (t + n)):
        table.append(Q.P(q & ((1 << n) - 1)) if (q >> n) == tag else 0)
    return tuple(table)


def _dk_function(vk: PvVerifyKey, predicate: tuple[int, ...]):
    def DK(x, proof) -> Optional[int]:
        try:
            verdict = pv_verify(vk, x, proof)
        except (TypeError, ValueError, IndexError, KeyError, AttributeError):
            return None
        if not verdict.accepted:
            return None
        return combine(_with_predicate(vk.instance, predicate), verdict.samples)

    return DK


def _with_predicate(inst: QvInstance, predicate) -> QvInstance:
    return QvInstance(inst.name, inst.circuit, inst.inputs, inst.outputs, tuple(predicate),
                      inst.backend, inst.lam_s, inst.hamiltonian)


@dataclass
class ObfuscatedProgram:
    ct: QfheCiphertext
    instance: QvInstance
    pk: PvProvingState
    oracles: PvOracles
    DK: OracleHandle
    cfg: ProtocolConfig
    repeated_use: bool = True
    # Secret handle configuration: what an obfuscator would compile into
    # the handles.  Kept only so bundles can be written to disk.
    _secrets: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "ct": self.ct.to_dict(),
            "config": self.cfg.to_dict(),
            "repeated_use": self.repeated_use,
            "proving_key": self.pk.to_dict(),
            "handles": self._secrets,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_dict(cls, d: dict) -> "ObfuscatedProgram":
        ct = QfheCiphertext.from_dict(d["ct"])
        cfg = ProtocolConfig(**d["config"])
        h = d["handles"]
        instance = evaluation_instance(ct, int(h["depth"]))
        vk = PvVerifyKey(
            instance, cfg,
            bytes.fromhex(h["k1"]), bytes.fromhex(h["k2"]), bytes.fromhex(h["k_msg"]),
            TokenVerifyKey.from_dict(h["vk_tok"]),
            [[PfcDecodeKey.from_dict(dk) for dk in row] for row in h["dks"]],
        )
        predicate = tuple(int(b) for b in h["predicate"])
        return _assemble(ct, instance, PvProvingState.from_dict(d["proving_key"]), vk, predicate,
                         cfg, bool(d.get("repeated_use", True)), int(h["depth"]))

    @classmethod
    def load(cls, path) -> "ObfuscatedProgram":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _assemble(ct, instance, pk, vk: PvVerifyKey, predicate, cfg, repeated_use, depth) -> ObfuscatedProgram:
    oracles = PvOracles(
        fiat_shamir_handle(vk.k1, cfg.r, cfg.k),
        OracleHandle("CVGen", _cvgen_function(instance, cfg, vk.k2, vk.k_msg, vk.vk_tok)),
        OracleHandle("G", lambda x, c: message_digest(vk.k_msg, x, c)),
    )
    secrets = {
        "depth": depth,
        "k1": vk.k1.hex(),
        "k2": vk.k2.hex(),
        "k_msg": vk.k_msg.hex(),
        "vk_tok": vk.vk_tok.to_dict(),
        "dks": [[dk.to_dict() for dk in row] for row in vk.dks],
        "predicate": "".join(map(str, predicate)),
    }
    DK = OracleHandle("DK", _dk_function(vk, predicate))
    return ObfuscatedProgram(ct, instance, pk, oracles, DK, cfg, repeated_use, secrets)


def qobf(Q: QvInstance, rng: np.random.Generator, cfg: Optional[ProtocolConfig] = None,
         tag_bits: int = 2, repeated_use: bool = True) -> ObfuscatedProgram:
    cfg = cfg or ProtocolConfig()
    depth = Q.circuit.depth() + 1
    keys = qfhe_gen(rng, depth, tag_bits)
    ct = qfhe_enc(keys.pk, Q.to_dict())
    instance = evaluation_instance(ct, keys.depth)
    pv: PvKeys = pv_gen(instance, cfg, rng)
    predicate = secret_predicate(keys.sk, Q)
    return _assemble(ct, instance, pv.pk, pv.vk, predicate, cfg, repeated_use, keys.depth)


@dataclass
class EvalRecord:
    bit: Optional[int]
    failure_bound: float
    restore_fidelity: float


def majority_failure(eps: float, lam_s: int, k: int) -> float:
    """P[MM over k groups of lam_s samples is wrong] for per-sample error eps."""
    def tail(p: float, m: int) -> float:
        # majority wrong, ties counted as wrong
        return sum(comb(m, j) * p**j * (1 - p) ** (m - j) for j in range((m + 1) // 2, m + 1))

    return tail(tail(eps, lam_s), k)


def qeval_record(bundle: ObfuscatedProgram, x, rng: np.random.Generator) -> EvalRecord:
    """Prove against the handles, then ask DK.

    Repeated-use mode models run-coherently / measure b / reverse: the proving
    key is snapshotted, the proof is produced from the copy, and the key is
    restored.  The restored key's fidelity is bounded by Gentle Measurement
    through the probability δ that the output bit is not deterministic.
    """
    x = x if isinstance(x, str) else "".join(map(str, x))
    if bundle.repeated_use:
        pk = bundle.pk.snapshot()
    else:
        pk = bundle.pk
    proof: PvProof = pv_prove(pk, bundle.oracles, bundle.instance, x, rng)
    b = bundle.DK(x, proof)
    Q = QvInstance.from_dict(bundle.ct.payload)
    eps = 1.0 - Q.determinism(x)
    delta = majority_failure(eps, Q.lam_s, bundle.cfg.k)
    return EvalRecord(b, delta, max(0.0, 1.0 - 10.0 * sqrt(delta)) if bundle.repeated_use else 0.0)


def qeval(bundle: ObfuscatedProgram, x, rng: np.random.Generator) -> Optional[int]:
    return qeval_record(bundle, x, rng).bit
