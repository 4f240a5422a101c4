"""Dense statevector engine.

Qubit 0 is the leftmost qubit and the most significant bit of a basis index,
so a register of qubits (q, q+1, ...) read left to right is the same integer
as an F2 vector of that length.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .. import _kernels
from ..f2 import AffineSubspace, Subspace

DEFAULT_DENSE_CAP = 20

Predicate = Union[Callable[[int], bool], np.ndarray]

H_GATE = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
X_GATE = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z_GATE = np.array([[1, 0], [0, -1]], dtype=np.complex128)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
T_GATE = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128)


class DenseCapExceeded(ValueError):
    pass


_INDEX_CACHE: dict[int, np.ndarray] = {}


def basis_indices(n: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(n)
    if idx is None:
        idx = np.arange(1 << n, dtype=np.int64)
        if n <= 16:
            _INDEX_CACHE[n] = idx
    return idx


def extract(idx: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Read the listed qubits of each index as an integer (first listed = MSB)."""
    out = np.zeros_like(idx)
    for q in qubits:
        out = (out << 1) | ((idx >> (n - 1 - q)) & 1)
    return out


def deposit(values: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Inverse of ``extract``: place value bits onto the listed qubits."""
    out = np.zeros_like(values)
    m = len(qubits)
    for k, q in enumerate(qubits):
        out |= ((values >> (m - 1 - k)) & 1) << (n - 1 - q)
    return out


class StateVector:
    """Normalized amplitudes of an n-qubit pure state."""

    __slots__ = ("n", "amps")

    def __init__(self, amps: np.ndarray, cap: int = DEFAULT_DENSE_CAP):
        amps = np.ascontiguousarray(amps, dtype=np.complex128)
        n = int(amps.shape[0]).bit_length() - 1
        if amps.ndim != 1 or 1 << n != amps.shape[0]:
            raise ValueError("amplitude count must be a power of two")
        if n > cap:
            raise DenseCapExceeded(f"{n} qubits exceeds the dense cap of {cap}")
        self.n = n
        self.amps = amps

    @classmethod
    def zero(cls, n: int, cap: int = DEFAULT_DENSE_CAP) -> "StateVector":
        if n > cap:
            raise DenseCapExceeded(f"{n} qubits exceeds the dense cap of {cap}")
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, cap)

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        st = cls.zero(n)
        st.amps[0] = 0.0
        st.amps[index] = 1.0
        return st

    @classmethod
    def qubit(cls, alpha: complex, beta: complex) -> "StateVector":
        v = np.array([alpha, beta], dtype=np.complex128)
        return cls(v / np.linalg.norm(v))

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), cap=max(self.n, DEFAULT_DENSE_CAP))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps), cap=max(self.n + other.n, DEFAULT_DENSE_CAP))

    # in-place gates ---------------------------------------------------------

    def apply_1q(self, q: int, u: np.ndarray) -> "StateVector":
        _kernels.apply_1q(self.amps, self.n - 1 - q, np.asarray(u, dtype=np.complex128))
        return self

    def h(self, qubits: Sequence[int]) -> "StateVector":
        pos = np.array([self.n - 1 - q for q in qubits], dtype=np.int64)
        _kernels.hadamard_bits(self.amps, pos)
        return self

    def x(self, q: int) -> "StateVector":
        idx = basis_indices(self.n)
        self.amps = np.ascontiguousarray(self.amps[idx ^ (1 << (self.n - 1 - q))])
        return self

    def permute(self, mapping: np.ndarray) -> "StateVector":
        """|i> -> |mapping[i]> for a permutation of basis indices."""
        new = np.empty_like(self.amps)
        new[mapping] = self.amps
        self.amps = new
        return self

    def xor_oracle(self, in_qubits, out_qubits, table: np.ndarray) -> "StateVector":
        """|a>|t> -> |a>|t xor table[a]> on the given registers."""
        idx = basis_indices(self.n)
        a = extract(idx, in_qubits, self.n)
        return self.permute(idx ^ deposit(np.asarray(table, dtype=np.int64)[a], out_qubits, self.n))

    def cnot(self, control: int, target: int) -> "StateVector":
        idx = basis_indices(self.n)
        c = (idx >> (self.n - 1 - control)) & 1
        return self.permute(idx ^ (c << (self.n - 1 - target)))

    def controlled_z(self, a: int, b: int) -> "StateVector":
        idx = basis_indices(self.n)
        both = ((idx >> (self.n - 1 - a)) & (idx >> (self.n - 1 - b))) & 1
        self.amps[both.astype(bool)] *= -1
        return self

    def toffoli(self, c1: int, c2: int, target: int) -> "StateVector":
        idx = basis_indices(self.n)
        c = ((idx >> (self.n - 1 - c1)) & (idx >> (self.n - 1 - c2))) & 1
        return self.permute(idx ^ (c << (self.n - 1 - target)))

    def apply_phase_mask(self, mask: np.ndarray) -> "StateVector":
        self.amps[np.asarray(mask, dtype=bool)] *= -1
        return self

    def to_json(self) -> str:
        return json.dumps([[float(a.real), float(a.imag)] for a in self.amps])

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        pairs = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in pairs], dtype=np.complex128))


# ------------------------------------------------------------------ helpers

def predicate_mask(n: int, pred: Predicate) -> np.ndarray:
    if isinstance(pred, np.ndarray):
        if pred.shape != (1 << n,):
            raise ValueError("mask length must be 2**n")
        return pred.astype(bool)
    return np.fromiter((bool(pred(i)) for i in range(1 << n)), dtype=bool, count=1 << n)


def dual_mask(S: Subspace) -> np.ndarray:
    """Mask of S^⊥ members: s is in S^⊥ iff s·t = 0 for every basis row t."""
    if not S.basis:
        return np.ones(1 << S.n, dtype=bool)
    return ~_kernels.parity_any(S.n, np.array(S.basis, dtype=np.uint64))


def subspace_mask(S: Subspace) -> np.ndarray:
    D = S.dual
    if not D.basis:
        return np.ones(1 << S.n, dtype=bool)
    return ~_kernels.parity_any(S.n, np.array(D.basis, dtype=np.uint64))


def affine_mask(A: AffineSubspace) -> np.ndarray:
    m = subspace_mask(A.subspace)
    return m[basis_indices(A.n) ^ A.shift]


def coset_state(A: AffineSubspace, cap: int = DEFAULT_DENSE_CAP) -> StateVector:
    if A.n > cap:
        raise DenseCapExceeded(f"{A.n} qubits exceeds the dense cap of {cap}")
    amps = affine_mask(A).astype(np.complex128) / np.sqrt(len(A))
    return StateVector(amps, cap)


def hadamard_all(st: StateVector) -> StateVector:
    out = st.copy()
    return out.h(range(st.n))


def phase_oracle(st: StateVector, pred: Predicate) -> StateVector:
    out = st.copy()
    return out.apply_phase_mask(predicate_mask(st.n, pred))


def projector_weight(st: StateVector, pred: Predicate) -> float:
    return float(np.sum(st.probabilities()[predicate_mask(st.n, pred)]))


def inner(a: StateVector, b: StateVector) -> complex:
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, insensitive to global phase."""
    return abs(inner(a, b))


@dataclass
class MeasurementOutcome:
    bits: tuple[int, ...]
    posterior: StateVector

    @property
    def value(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v


def measure(st: StateVector, indices: Sequence[int], bases: Union[str, Sequence[str]],
            rng: np.random.Generator, discard: bool = False) -> MeasurementOutcome:
    """Born-rule measurement of the listed qubits, each in basis "Z" or "X".

    The posterior is the collapsed state in the original frame.  With
    ``discard`` the measured qubits are removed from it.
    """
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise ValueError("measured indices must be distinct")
    for q in indices:
        if not 0 <= q < st.n:
            raise IndexError(f"qubit {q} out of range for {st.n} qubits")
    if isinstance(bases, str):
        bases = [bases] * len(indices)
    xq = [q for q, b in zip(indices, bases) if b.upper() == "X"]
    work = st.copy()
    if xq:
        work.h(xq)
    idx = basis_indices(st.n)
    key = extract(idx, indices, st.n)
    probs = work.probabilities()
    marginal = np.bincount(key, weights=probs, minlength=1 << len(indices))
    marginal = marginal / marginal.sum()
    outcome = min(int(np.searchsorted(np.cumsum(marginal), rng.random(), side="right")), marginal.shape[0] - 1)
    keep = key == outcome
    bits = tuple((outcome >> (len(indices) - 1 - k)) & 1 for k in range(len(indices)))
    if discard:
        rest = [q for q in range(st.n) if q not in set(indices)]
        sub = work.amps[keep]
        # Surviving indices are in increasing order, which is exactly the
        # order of the remaining qubits read left to right.
        post = StateVector(sub / np.linalg.norm(sub), cap=max(len(rest), DEFAULT_DENSE_CAP))
        return MeasurementOutcome(bits, post)
    amps = np.where(keep, work.amps, 0)
    work.amps = np.ascontiguousarray(amps / np.linalg.norm(amps))
    if xq:
        work.h(xq)
    return MeasurementOutcome(bits, work)


def sample_z(st: StateVector, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Full computational-basis samples without collapsing (repeated preparations)."""
    p = st.probabilities()
    return rng.choice(p.shape[0], size=shots, p=p / p.sum())
