"""Toy dual-mode trapdoor claw-free functions.

f_pk : {0,1} × {0,1}^w -> {0,1}^{w+1}.  Injective mode: f(b, x) = π(b‖x).
Two-to-one mode: f(b, x) = π(0‖(x ⊕ b·Δ)), so f(0, x) = f(1, x ⊕ Δ).  π and Δ
are derived from a public seed: the key reveals its mode and trapdoor.  This
instantiation has the correctness interface only, no hardness.
"""
from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .f2 import dot, random_vector
from .qsim.compressed import ClawPair, CompressedRegister, CompressedState
from .qsim.dense import StateVector, measure

TABLE_MAX_WIDTH = 12
_FEISTEL_ROUNDS = 6


def _derived_rng(seed: int, label: int) -> np.random.Generator:
    return np.random.default_rng([seed & ((1 << 64) - 1), seed >> 64, label])


@lru_cache(maxsize=4096)
def _tables(seed: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    perm = _derived_rng(seed, 0).permutation(1 << (w + 1)).astype(np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.shape[0], dtype=np.int64)
    return perm, inv


@lru_cache(maxsize=4096)
def _delta(seed: int, w: int) -> int:
    while True:
        d = random_vector(_derived_rng(seed, 1), w)
        if d:
            return d
        seed += 1 << 70  # deterministic re-draw


class _Feistel:
    """Keyed permutation of [0, 2^m) by a balanced Feistel network with
    cycle-walking.  Used instead of tables for wide inputs."""

    def __init__(self, seed: int, m: int):
        self.m = m
        self.half = (m + 1) // 2
        self.key = seed.to_bytes(16, "big", signed=False)

    def _f(self, rnd: int, v: int) -> int:
        d = hmac.new(self.key, bytes([rnd]) + v.to_bytes(8, "big"), hashlib.sha256).digest()
        return int.from_bytes(d[:8], "big") & ((1 << self.half) - 1)

    def _round_trip(self, v: int, inverse: bool) -> int:
        mask = (1 << self.half) - 1
        left, right = v >> self.half, v & mask
        rounds = range(_FEISTEL_ROUNDS - 1, -1, -1) if inverse else range(_FEISTEL_ROUNDS)
        for r in rounds:
            if inverse:
                left, right = right ^ self._f(r, left), left
            else:
                left, right = right, left ^ self._f(r, right)
        return (left << self.half) | right

    def forward(self, v: int) -> int:
        v = self._round_trip(v, False)
        while v >> self.m:
            v = self._round_trip(v, False)
        return v

    def backward(self, v: int) -> int:
        v = self._round_trip(v, True)
        while v >> self.m:
            v = self._round_trip(v, True)
        return v


@dataclass(frozen=True)
class TcfPublicKey:
    h: int
    w: int
    seed: int

    def _perm(self, v: int) -> int:
        if self.w <= TABLE_MAX_WIDTH:
            return int(_tables(self.seed, self.w)[0][v])
        return _Feistel(self.seed, self.w + 1).forward(v)

    def f(self, b: int, x: int) -> int:
        if self.h == 0:
            return self._perm((b << self.w) | x)
        return self._perm(x ^ (_delta(self.seed, self.w) if b else 0))

    def table(self) -> np.ndarray:
        """f over the index (b << w) | x."""
        return np.array([self.f(i >> self.w, i & ((1 << self.w) - 1)) for i in range(1 << (self.w + 1))],
                        dtype=np.int64)

    def claw_partner(self, x: int) -> int:
        """x ⊕ Δ: the toy key reveals its claw structure."""
        return x ^ _delta(self.seed, self.w)

    def to_dict(self) -> dict:
        return {"mode": self.h, "width": self.w, "seed": str(self.seed)}

    @classmethod
    def from_dict(cls, d: dict) -> "TcfPublicKey":
        return cls(int(d["mode"]), int(d["width"]), int(d["seed"]))


@dataclass(frozen=True)
class TcfSecretKey:
    h: int
    w: int
    seed: int

    @property
    def delta(self) -> int:
        return _delta(self.seed, self.w)

    def inverse(self, y: int) -> int:
        if self.w <= TABLE_MAX_WIDTH:
            return int(_tables(self.seed, self.w)[1][y])
        return _Feistel(self.seed, self.w + 1).backward(y)

    def to_dict(self) -> dict:
        from .f2 import to_bits
        return {"mode": self.h, "width": self.w, "seed": str(self.seed), "delta": to_bits(self.delta, self.w)}

    @classmethod
    def from_dict(cls, d: dict) -> "TcfSecretKey":
        return cls(int(d["mode"]), int(d["width"]), int(d["seed"]))


def tcf_gen(rng: np.random.Generator, h: int, w: int) -> tuple[TcfPublicKey, TcfSecretKey]:
    if w < 1:
        raise ValueError("claw width must be at least 1")
    if h not in (0, 1):
        raise ValueError("mode must be 0 or 1")
    seed = random_vector(rng, 96)
    return TcfPublicKey(h, w, seed), TcfSecretKey(h, w, seed)


def tcf_invert(h: int, sk: TcfSecretKey, y: int):
    """Injective mode: (b, x).  Two-to-one mode: ((0, x0), (1, x1)).  ⊥ = None."""
    if y < 0 or y >> (sk.w + 1):
        return None
    pre = sk.inverse(y)
    mask = (1 << sk.w) - 1
    if h == 0:
        return pre >> sk.w, pre & mask
    if pre >> sk.w:
        return None
    return (0, pre), (1, pre ^ sk.delta)


def tcf_check(pk: TcfPublicKey, b: int, x: int, y: int) -> bool:
    if b not in (0, 1) or x < 0 or x >> pk.w:
        return False
    return pk.f(b, x) == y


def tcf_is_valid(x0: int, x1: int, d: int) -> bool:
    return True


def J(x: int) -> int:
    return x


def hadamard_decode(b_prime: int, z: int, x0: int, x1: int) -> int:
    """b' ⊕ z·(J(x0) ⊕ J(x1))."""
    return b_prime ^ dot(z, J(x0) ^ J(x1))


def tcf_eval_on_qubit(pk: TcfPublicKey, state: CompressedState, control: int,
                      rng: np.random.Generator) -> tuple[CompressedRegister, int]:
    """Evaluate f on the control in superposition and measure Y."""
    x = random_vector(rng, pk.w)
    if pk.h == 0:
        b = state.collapse_control(control, rng)
        y = pk.f(b, x)
        reg = state.attach(ClawPair(x, x, pk.w), control)
    else:
        y = pk.f(0, x)
        reg = state.attach(ClawPair(x, pk.claw_partner(x), pk.w), control)
    return reg, y


def tcf_eval_dense(st: StateVector, control: int, pk: TcfPublicKey,
                   rng: np.random.Generator) -> tuple[StateVector, list[int], int]:
    """Literal Eval on a dense state: append X in uniform superposition, XOR
    f(b, x) into a fresh Y, measure and drop Y.  Returns (state, X qubits, y)."""
    w = pk.w
    base = st.n
    xq = list(range(base, base + w))
    yq = list(range(base + w, base + 2 * w + 1))
    work = st.tensor(StateVector.zero(2 * w + 1))
    work.h(xq)
    work.xor_oracle([control] + xq, yq, pk.table())
    out = measure(work, yq, "Z", rng, discard=True)
    return out.posterior, xq, out.value
