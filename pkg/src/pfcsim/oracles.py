"""Opaque classical-oracle handles with call accounting, and keyed hashing.

Every secret-dependent classical functionality the prover may touch (CK,
the Fiat-Shamir hash, CVGen, DK) is wrapped in an ``OracleHandle``.  Callers
get the function's outputs and nothing else; each call is counted and
logged, so tests can audit how a party used its oracles.
"""
from __future__ import annotations

import hashlib
import hmac
import threading
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


@dataclass
class OracleHandle:
    name: str
    _fn: Callable[..., Any] = field(repr=False)
    calls: int = 0
    log: list = field(default_factory=list, repr=False)
    keep_log: bool = False
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __call__(self, *args, **kwargs):
        with self._lock:
            self.calls += 1
            if self.keep_log:
                self.log.append(args)
            return self._fn(*args, **kwargs)

    def batch(self, count: int, fn_name: str, *args):
        """Vectorized evaluation exposed by some handles; counts ``count`` calls."""
        with self._lock:
            self.calls += count
            return getattr(self._fn, fn_name)(*args)


def encode(*parts) -> bytes:
    """Unambiguous length-prefixed encoding of nested str/bytes/int/list values."""
    out = bytearray()
    for p in parts:
        if isinstance(p, (list, tuple)):
            body = encode(*p)
            tag = b"L"
        elif isinstance(p, bytes):
            body, tag = p, b"B"
        elif isinstance(p, str):
            body, tag = p.encode(), b"S"
        elif isinstance(p, (int, np.integer)):
            v = int(p)
            body, tag = v.to_bytes((v.bit_length() + 8) // 8, "big", signed=True), b"I"
        else:
            raise TypeError(f"cannot encode {type(p).__name__}")
        out += tag + len(body).to_bytes(4, "big") + body
    return bytes(out)


def prf(key: bytes, domain: str, *parts) -> bytes:
    """Domain-separated HMAC-SHA256."""
    return hmac.new(key, encode(domain, *parts), hashlib.sha256).digest()


def prf_stream(key: bytes, domain: str, *parts):
    """Counter-mode expansion of the PRF: an endless stream of 32-byte blocks."""
    seed = prf(key, domain, *parts)
    ctr = 0
    while True:
        yield hmac.new(seed, ctr.to_bytes(8, "big"), hashlib.sha256).digest()
        ctr += 1


def prf_rng(key: bytes, domain: str, *parts) -> np.random.Generator:
    """Deterministic numpy generator seeded from the first PRF block."""
    block = next(prf_stream(key, domain, *parts))
    return np.random.default_rng(int.from_bytes(block, "big"))


def hash_to_weight(key: bytes, r: int, k: int, *parts) -> tuple[int, ...]:
    """Map input to an r-bit string of Hamming weight exactly k.

    Candidate r-bit strings are read from the counter-mode stream and rejected
    until one has weight k.
    """
    if not 0 <= k <= r:
        raise ValueError("need 0 <= k <= r")
    nbytes = (r + 7) // 8
    buf = b""
    for block in prf_stream(key, "hash-to-weight", r, k, *parts):
        buf += block
        while len(buf) >= nbytes:
            chunk, buf = buf[:nbytes], buf[nbytes:]
            v = int.from_bytes(chunk, "big") >> (8 * nbytes - r)
            if v.bit_count() == k:
                return tuple((v >> (r - 1 - i)) & 1 for i in range(r))
    raise AssertionError("unreachable")
