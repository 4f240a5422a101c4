"""Linear algebra over GF(2) on bit-packed integers.

A vector of length n is a Python int below 2**n.  Position 1 (the "leading"
or leftmost bit) is the most significant bit, so a vector "starts with b"
when ``x >> (n - 1) == b``.  This is also the big-endian basis-index
convention of the dense simulator.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

F2Vector = int


class NotBalanced(ValueError):
    """Raised when a subspace has no basis vector starting with 1."""


def from_bits(s: str) -> F2Vector:
    s = s.strip()
    if s and set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return int(s, 2) if s else 0


def to_bits(x: F2Vector, n: int) -> str:
    return format(x, f"0{n}b") if n else ""


def dot(a: F2Vector, b: F2Vector) -> int:
    return (a & b).bit_count() & 1


def leading(x: F2Vector, n: int) -> int:
    return (x >> (n - 1)) & 1


def unit(i: int, n: int) -> F2Vector:
    """e_i with 1-based position i counted from the left."""
    return 1 << (n - i)


def random_vector(rng: np.random.Generator, n: int) -> F2Vector:
    if n == 0:
        return 0
    words = (n + 63) // 64
    raw = rng.bit_generator.random_raw()
    v = int(raw)
    for _ in range(words - 1):
        v = (v << 64) | int(rng.bit_generator.random_raw())
    return v >> (64 * words - n)


def _check(vectors: Iterable[F2Vector], n: int) -> list[int]:
    out = []
    for v in vectors:
        v = int(v)
        if v < 0 or v >> n:
            raise ValueError(f"vector {v:b} does not fit ambient dimension {n}")
        out.append(v)
    return out


def _reduce(x: int, basis: Sequence[int]) -> int:
    for b in basis:
        if (x >> (b.bit_length() - 1)) & 1:
            x ^= b
    return x


@dataclass(frozen=True)
class Subspace:
    """Span of ``basis`` in F_2^n; the basis is kept in reduced row-echelon form."""

    n: int
    basis: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(b.bit_length() - 1 for b in self.basis)

    def reduce(self, x: F2Vector) -> F2Vector:
        return _reduce(x, self.basis)

    def __contains__(self, x: F2Vector) -> bool:
        return self.reduce(x) == 0

    def contains(self, x: F2Vector) -> bool:
        if x >> self.n:
            raise ValueError("dimension mismatch")
        return self.reduce(x) == 0

    def in_dual(self, x: F2Vector) -> bool:
        """Membership of x in the dual, computed from this basis alone."""
        return all(dot(x, b) == 0 for b in self.basis)

    def elements(self) -> Iterator[F2Vector]:
        yield from span_elements(self.basis)

    @cached_property
    def dual(self) -> "Subspace":
        return dual(self)

    @property
    def is_balanced(self) -> bool:
        return bool(self.basis) and leading(self.basis[0], self.n) == 1

    def sample(self, rng: np.random.Generator) -> F2Vector:
        """Uniform element (a Z measurement of the subspace state)."""
        mask = random_vector(rng, self.dim)
        x = 0
        for k, b in enumerate(self.basis):
            if (mask >> k) & 1:
                x ^= b
        return x

    def to_text(self) -> str:
        return "\n".join([str(self.n)] + [to_bits(b, self.n) for b in self.basis])

    @classmethod
    def from_text(cls, text: str) -> "Subspace":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        n = int(lines[0])
        return rref_basis([from_bits(ln) for ln in lines[1:]], n)


def span_elements(basis: Sequence[int]) -> Iterator[int]:
    """All 2**len(basis) combinations, in Gray-code order."""
    x = 0
    yield x
    for k in range(1, 1 << len(basis)):
        x ^= basis[(k & -k).bit_length() - 1]
        yield x


def rref_basis(vectors: Iterable[F2Vector], n: int) -> Subspace:
    basis: list[int] = []
    for v in _check(vectors, n):
        v = _reduce(v, basis)
        if not v:
            continue
        p = v.bit_length() - 1
        basis = [b ^ v if (b >> p) & 1 else b for b in basis]
        basis.append(v)
    basis.sort(reverse=True)
    return Subspace(n, tuple(basis))


def dual(S: Subspace) -> Subspace:
    pivots = set(S.pivots)
    out = []
    for f in range(S.n):
        if f in pivots:
            continue
        u = 1 << f
        for b in S.basis:
            if (b >> f) & 1:
                u |= 1 << (b.bit_length() - 1)
        out.append(u)
    return rref_basis(out, S.n)


def zero_subspace(n: int) -> Subspace:
    return Subspace(n, ())


def full_space(n: int) -> Subspace:
    return rref_basis([1 << k for k in range(n)], n)


def all_subspaces(n: int) -> Iterator[Subspace]:
    """Every subspace of F_2^n (each exactly once).  Exhaustive tests only."""
    seen: set[tuple[int, ...]] = set()
    frontier = [zero_subspace(n)]
    seen.add(())
    while frontier:
        nxt = []
        for S in frontier:
            yield S
            for x in range(1, 1 << n):
                if x in S:
                    continue
                T = rref_basis(S.basis + (x,), n)
                if T.basis not in seen:
                    seen.add(T.basis)
                    nxt.append(T)
        frontier = nxt


@dataclass(frozen=True)
class AffineSubspace:
    """The coset S + v, with v reduced against the basis of S."""

    subspace: Subspace
    shift: int

    def __post_init__(self):
        object.__setattr__(self, "shift", self.subspace.reduce(self.shift))

    @property
    def n(self) -> int:
        return self.subspace.n

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def __len__(self) -> int:
        return 1 << self.dim

    def __contains__(self, x: F2Vector) -> bool:
        return self.subspace.reduce(x ^ self.shift) == 0

    def elements(self) -> Iterator[F2Vector]:
        for s in self.subspace.elements():
            yield s ^ self.shift

    @cached_property
    def dual(self) -> Subspace:
        return self.subspace.dual

    @property
    def is_balanced(self) -> bool:
        return self.subspace.is_balanced

    @cached_property
    def split(self) -> tuple["AffineSubspace", "AffineSubspace"]:
        return balanced_split(self)

    @cached_property
    def direction(self) -> F2Vector:
        """The w with A_1 = A_0 + w (the unique leading-1 basis row)."""
        if not self.is_balanced:
            raise NotBalanced("no basis vector starts with 1")
        return self.subspace.basis[0]

    def sample(self, rng: np.random.Generator) -> F2Vector:
        return self.subspace.sample(rng) ^ self.shift

    def to_dict(self) -> dict:
        return {"subspace": self.subspace.to_text(), "shift": to_bits(self.shift, self.n)}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineSubspace":
        return cls(Subspace.from_text(d["subspace"]), from_bits(d["shift"]))


def affine(S: Subspace, v: F2Vector = 0) -> AffineSubspace:
    return AffineSubspace(S, v)


def balanced_split(A: AffineSubspace) -> tuple[AffineSubspace, AffineSubspace]:
    """(A_0, A_1), each a coset of S_0 = {s in S : s starts with 0}."""
    S = A.subspace
    if not S.is_balanced:
        raise NotBalanced("no basis vector starts with 1")
    S0 = Subspace(S.n, S.basis[1:])
    # The canonical shift starts with 0: it is reduced against the pivot at the
    # leading position.
    v0 = A.shift
    v1 = A.shift ^ S.basis[0]
    return AffineSubspace(S0, v0), AffineSubspace(S0, v1)


def contains(A: AffineSubspace, x: F2Vector) -> bool:
    if x >> A.n:
        raise ValueError("dimension mismatch")
    return x in A


def contains_dual(A: AffineSubspace, x: F2Vector) -> bool:
    if x >> A.n:
        raise ValueError("dimension mismatch")
    return A.subspace.in_dual(x)


def random_subspace(rng: np.random.Generator, d: int, n: int) -> Subspace:
    """Uniform d-dimensional subspace: span of a uniform independent d-tuple."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    while True:
        S = rref_basis([random_vector(rng, n) for _ in range(d)], n)
        if S.dim == d:
            return S


def random_balanced_affine(rng: np.random.Generator, d: int, n: int) -> AffineSubspace:
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    while True:
        S = random_subspace(rng, d, n)
        if S.is_balanced:
            return AffineSubspace(S, random_vector(rng, n))


def sample_relation_pair(rng: np.random.Generator, d: int, n: int):
    """A pair (A, B) from the relation used by the inner-product argument.

    Both are balanced d-dimensional cosets with dim(A_0 ∩ B_0) = dim(A_1 ∩ B_1)
    = d - 2.  The shared part S lives in the leading-0 hyperplane; the two
    cosets are assembled from representatives with v0 + w0 = v1 + w1 and
    v0 + u0 = v1 + u1.  Requires n >= d + 1: otherwise the leading-0 quotient
    by S has no room for three distinct cosets.
    """
    if d < 2:
        raise ValueError("relation pairs need d >= 2")
    if n < d + 1:
        raise ValueError(f"relation pairs need n >= d + 1, got d={d}, n={n}")
    hyper = n - 1
    S = random_subspace(rng, d - 2, hyper)  # embedded below the leading bit
    while True:
        a = random_vector(rng, hyper)
        c = random_vector(rng, hyper)
        if a not in S and c not in S and (a ^ c) not in S:
            break
    v0 = random_vector(rng, hyper)
    t = (1 << hyper) | random_vector(rng, hyper)  # v1 - v0, starts with 1
    base = list(S.basis)
    A = AffineSubspace(rref_basis(base + [a, t], n), v0)
    B = AffineSubspace(rref_basis(base + [c, t], n), v0)
    return A, B


def intersection_size(A: AffineSubspace, B: AffineSubspace) -> int:
    """|A ∩ B| by enumerating the smaller coset."""
    small, big = (A, B) if A.dim <= B.dim else (B, A)
    return sum(1 for x in small.elements() if x in big)
