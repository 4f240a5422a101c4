"""One-shot signature tokens from subspace states.

For each message bit there is a random λ/2-dimensional subspace S of F_2^λ.
The signing register holds |S⟩.  Bit 0 is signed by measuring it in the
computational basis (an element of S), bit 1 by measuring in the Hadamard
basis (an element of S^⊥).  A signature verifies iff it is a nonzero member
of the right set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import f2
from .f2 import Subspace
from .qsim.dense import StateVector, basis_indices, coset_state, extract


class DoubleSign(RuntimeError):
    """The signing state was already (partly) consumed."""


def _bits(m) -> tuple[int, ...]:
    if isinstance(m, str):
        return tuple(int(c) for c in m)
    return tuple(int(b) for b in m)


@dataclass(frozen=True)
class TokenVerifyKey:
    lam: int
    subspaces: tuple[Subspace, ...]

    @property
    def k(self) -> int:
        return len(self.subspaces)

    def to_dict(self) -> dict:
        return {"lam": self.lam, "subspaces": [S.to_text() for S in self.subspaces]}

    @classmethod
    def from_dict(cls, d: dict) -> "TokenVerifyKey":
        return cls(d["lam"], tuple(Subspace.from_text(t) for t in d["subspaces"]))


@dataclass
class TokenSigningState:
    """k registers, register i holding |S_i⟩ (stored by its subspace)."""

    lam: int
    subspaces: tuple[Subspace, ...]
    spent: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.spent:
            self.spent = [False] * len(self.subspaces)

    @property
    def k(self) -> int:
        return len(self.subspaces)

    @property
    def used(self) -> bool:
        return any(self.spent)

    def register_state(self, i: int = 0) -> StateVector:
        """Dense |S_i⟩ for circuit-level simulation."""
        return coset_state(f2.affine(self.subspaces[i]))

    def to_dict(self) -> dict:
        return {"lam": self.lam, "subspaces": [S.to_text() for S in self.subspaces], "spent": list(self.spent)}

    @classmethod
    def from_dict(cls, d: dict) -> "TokenSigningState":
        return cls(d["lam"], tuple(Subspace.from_text(t) for t in d["subspaces"]), list(d["spent"]))

    def snapshot(self) -> "TokenSigningState":
        return TokenSigningState(self.lam, self.subspaces, list(self.spent))


def token_gen(rng: np.random.Generator, lam: int, k: int = 1) -> tuple[TokenVerifyKey, TokenSigningState]:
    if lam < 2 or lam % 2:
        raise ValueError("λ_tok must be even and at least 2")
    subs = tuple(f2.random_subspace(rng, lam // 2, lam) for _ in range(k))
    return TokenVerifyKey(lam, subs), TokenSigningState(lam, subs)


def token_sign(m, sk: TokenSigningState, rng: np.random.Generator) -> tuple[int, ...]:
    bits = _bits(m)
    if len(bits) != sk.k:
        raise ValueError(f"message has {len(bits)} bits, key signs {sk.k}")
    if sk.used:
        raise DoubleSign("signing state already consumed")
    sigma = []
    for b, S in zip(bits, sk.subspaces):
        sigma.append(S.dual.sample(rng) if b else S.sample(rng))
    sk.spent = [True] * sk.k
    return tuple(sigma)


def verify_bit(S: Subspace, b: int, s: int) -> bool:
    if s == 0 or s >> S.n:
        return False
    return S.in_dual(s) if b else s in S


def token_verify(vk: TokenVerifyKey, m, sigma: Sequence[int]) -> bool:
    bits = _bits(m)
    if len(bits) != vk.k or len(sigma) != vk.k:
        return False
    return all(verify_bit(S, b, int(s)) for S, b, s in zip(vk.subspaces, bits, sigma))


def signature_to_text(sigma: Sequence[int], lam: int) -> list[str]:
    return [f2.to_bits(int(s), lam) for s in sigma]


def signature_from_text(lines: Sequence[str]) -> tuple[int, ...]:
    return tuple(f2.from_bits(s) for s in lines)


def coherent_sign_zero(st: StateVector, src: Sequence[int], dst: Sequence[int]) -> StateVector:
    """Transversal CNOT copy src -> dst: Σ_s |s⟩|0⟩ -> Σ_s |s⟩|s⟩.

    This is the purification of signing 0, which is a computational-basis
    measurement.  The map is an involution, so calling it again uncomputes.
    The target must start at |0…0⟩.
    """
    if len(src) != len(dst):
        raise ValueError("source and target widths differ")
    idx = basis_indices(st.n)
    target = extract(idx, dst, st.n)
    if np.sum(st.probabilities()[target != 0]) > 1e-12:
        raise ValueError("target register is not zeroed")
    return _copy(st, src, dst)


def uncompute_sign_zero(st: StateVector, src: Sequence[int], dst: Sequence[int]) -> StateVector:
    return _copy(st, src, dst)


def _copy(st: StateVector, src, dst) -> StateVector:
    out = st.copy()
    for s, t in zip(src, dst):
        out.cnot(s, t)
    return out
