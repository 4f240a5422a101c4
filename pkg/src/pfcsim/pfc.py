"""Publicly-decodable Pauli functional commitment.

Gen samples a balanced n/2-dimensional coset A = S + v and a single-bit
signature token.  The committer holds |A⟩ and the token state; the CK oracle
answers "is s outside S^⊥" but only for a valid signature of 0.  Committing a
qubit maps Σ α_b|b⟩ to Σ α_b|b⟩|A_b⟩; the commitment string is a signature of
1, after which honest parties can no longer open the CK gate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import f2
from .f2 import AffineSubspace, Subspace
from .oracles import OracleHandle
from .qsim.compressed import CompressedRegister, CompressedState, CosetPair
from .qsim.dense import (
    StateVector,
    affine_mask,
    basis_indices,
    coset_state,
    dual_mask,
    extract,
    measure,
)
from .token import (
    TokenSigningState,
    TokenVerifyKey,
    coherent_sign_zero,
    token_gen,
    token_sign,
    token_verify,
    uncompute_sign_zero,
    verify_bit,
)


class SpentKey(RuntimeError):
    pass


@dataclass(frozen=True)
class PfcDecodeKey:
    coset: AffineSubspace
    vk: TokenVerifyKey

    @property
    def n(self) -> int:
        return self.coset.n

    def to_dict(self) -> dict:
        return {"coset": self.coset.to_dict(), "vk": self.vk.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "PfcDecodeKey":
        return cls(AffineSubspace.from_dict(d["coset"]), TokenVerifyKey.from_dict(d["vk"]))


class _CkFunction:
    """CK(σ, s): ⊥ (None) unless σ signs 0; then 0 if s ∈ S^⊥ else 1."""

    def __init__(self, S: Subspace, vk: TokenVerifyKey):
        self._S = S
        self._vk = vk

    def __call__(self, sigma: int, s: int) -> Optional[int]:
        if not token_verify(self._vk, (0,), (sigma,)):
            return None
        return 0 if self._S.in_dual(s) else 1

    def row(self, sigma: int) -> np.ndarray:
        """CK(σ, ·) over every s, with -1 for ⊥."""
        if not token_verify(self._vk, (0,), (sigma,)):
            return np.full(1 << self._S.n, -1, dtype=np.int8)
        return (~dual_mask(self._S)).astype(np.int8)

    def grid(self) -> np.ndarray:
        """CK over all (σ, s) as a (2^λ, 2^n) table, -1 for ⊥."""
        T = self._vk.subspaces[0]
        valid = np.array([verify_bit(T, 0, sg) for sg in range(1 << T.n)])
        outside = (~dual_mask(self._S)).astype(np.int8)
        return np.where(valid[:, None], outside[None, :], np.int8(-1)).astype(np.int8)


@dataclass
class PfcCommitKey:
    """The committer's quantum key (|A⟩, |sk⟩) and the CK handle.

    ``_coset`` stands for the contents of the coset register; only the
    simulator reads it, to build |A⟩ densely or to attach it symbolically.
    """

    _coset: AffineSubspace = field(repr=False)
    signing: TokenSigningState
    ck: OracleHandle
    spent: bool = False

    @property
    def n(self) -> int:
        return self._coset.n

    def coset_register(self) -> StateVector:
        return coset_state(self._coset)

    def to_dict(self) -> dict:
        return {"coset": self._coset.to_dict(), "signing": self.signing.to_dict(), "spent": self.spent}

    @classmethod
    def from_dict(cls, d: dict) -> "PfcCommitKey":
        A = AffineSubspace.from_dict(d["coset"])
        signing = TokenSigningState.from_dict(d["signing"])
        vk = TokenVerifyKey(signing.lam, signing.subspaces)
        return cls(A, signing, make_ck_handle(A.subspace, vk), d["spent"])

    def snapshot(self) -> "PfcCommitKey":
        return PfcCommitKey(self._coset, self.signing.snapshot(), self.ck, self.spent)


@dataclass(frozen=True)
class PfcCommitment:
    c: tuple[int, ...]


@dataclass(frozen=True)
class PfcOpening:
    bit: int
    s: int
    basis: str = "Z"


def make_ck_handle(S: Subspace, vk: TokenVerifyKey) -> OracleHandle:
    return OracleHandle("CK", _CkFunction(S, vk))


def pfc_gen(rng: np.random.Generator, n: int, lam_tok: int) -> tuple[PfcDecodeKey, PfcCommitKey]:
    if n < 2 or n % 2:
        raise ValueError("n must be even and at least 2")
    A = f2.random_balanced_affine(rng, n // 2, n)
    vk, sk = token_gen(rng, lam_tok, 1)
    return PfcDecodeKey(A, vk), PfcCommitKey(A, sk, make_ck_handle(A.subspace, vk))


def rotate_coset(st: StateVector, S: Subspace) -> StateVector:
    """H^{⊗n} · Ph[s ∉ S^⊥] · H^{⊗n}."""
    out = st.copy()
    out.h(range(out.n))
    out.apply_phase_mask(~dual_mask(S))
    out.h(range(out.n))
    return out


# ----------------------------------------------------------------- commit

def _sign_one(ck: PfcCommitKey, rng) -> PfcCommitment:
    return PfcCommitment(token_sign((1,), ck.signing, rng))


def _take(ck: PfcCommitKey) -> None:
    if ck.spent or ck.signing.used:
        raise SpentKey("commitment key already used")
    ck.spent = True


def pfc_commit_compressed(state: CompressedState, control: int, ck: PfcCommitKey,
                          rng: np.random.Generator) -> tuple[CompressedRegister, PfcCommitment]:
    """Analytic Com: the register ends as |A_b⟩ on branch b.

    The first-qubit measurement of |A⟩ gives b' uniformly; the branch b ≠ b'
    is rotated through the CK gate.  The gate is consulted with one nonzero
    branch σ of the coherent Sign(0) register to confirm it opens.
    """
    _take(ck)
    b_prime = int(rng.integers(2))
    w0, w1 = state.branch_weights(control)
    if (w1 if b_prime == 0 else w0) > 0:
        sigma = _nonzero_branch(ck.signing.subspaces[0], rng)
        probe = f2.unit(1, ck.n)
        if ck.ck(sigma, probe) is None:
            raise RuntimeError("CK gate refused an honest signature of 0")
    reg = state.attach(CosetPair(ck._coset), control)
    return reg, _sign_one(ck, rng)


def _nonzero_branch(T: Subspace, rng) -> int:
    while True:
        s = T.sample(rng)
        if s:
            return s


def pfc_commit_dense(st: StateVector, control: int, ck: PfcCommitKey, rng: np.random.Generator,
                     token_register: bool = True) -> tuple[StateVector, list[int], PfcCommitment]:
    """Literal Com circuit on a dense state; appends the n-qubit register K0.

    With ``token_register`` the signing register K1 and the copy register G
    are simulated as qubits (the CK phase reads G).  Without it the gate is
    evaluated on one nonzero branch σ of the coherent sign, idealizing the
    token, which keeps the register count down for multi-qubit cross-checks.
    """
    _take(ck)
    n, base = ck.n, st.n
    k0 = list(range(base, base + n))
    work = st.tensor(ck.coset_register())
    if token_register:
        lam = ck.signing.lam
        k1 = list(range(work.n, work.n + lam))
        g = list(range(work.n + lam, work.n + 2 * lam))
        work = work.tensor(ck.signing.register_state(0)).tensor(StateVector.zero(lam))
        work = coherent_sign_zero(work, k1, g)
        table = ck.ck.batch(1 << (lam + n), "grid")
    else:
        sigma = _nonzero_branch(ck.signing.subspaces[0], rng)
        table = ck.ck.batch(1 << n, "row", sigma)[None, :]
        g = []

    out = measure(work, [k0[0]], "Z", rng)
    work = out.posterior
    b_prime = out.bits[0]

    idx = basis_indices(work.n)
    ctrl = ((idx >> (work.n - 1 - control)) & 1) == (1 - b_prime)
    s_val = extract(idx, k0, work.n)
    g_val = extract(idx, g, work.n) if g else np.zeros_like(idx)
    phase = table[g_val, s_val] == 1
    rot = work.copy()
    rot.h(k0)
    rot.apply_phase_mask(phase)
    rot.h(k0)
    work.amps = np.ascontiguousarray(np.where(ctrl, rot.amps, work.amps))

    if token_register:
        work = uncompute_sign_zero(work, k1, g)
        # Sign(1): Hadamard-measure K1; G is back to |0⟩.
        sig = measure(work, k1, "X", rng, discard=True)
        work = sig.posterior
        c_val = sig.value
        ck.signing.spent = [True]
        tail = measure(work, list(range(work.n - lam, work.n)), "Z", rng, discard=True)
        work = tail.posterior
        commitment = PfcCommitment((c_val,))
    else:
        commitment = _sign_one(ck, rng)
    return work, k0, commitment


def pfc_commit(control, ck: PfcCommitKey, rng: np.random.Generator, engine: str = "compressed", **kw):
    """Commit a control qubit.

    ``engine="compressed"``: control is (CompressedState, index); returns
    (CosetPair register, c).  ``engine="dense"``: control is a StateVector
    (optionally (StateVector, index)); returns (state, K0 qubits, c).
    """
    if engine == "compressed":
        state, q = control
        return pfc_commit_compressed(state, q, ck, rng)
    if engine == "dense":
        if isinstance(control, StateVector):
            control = (control, 0)
        st, q = control
        return pfc_commit_dense(st, q, ck, rng, **kw)
    raise ValueError(f"unknown engine {engine!r}")


# ------------------------------------------------------------------ open

def open_z(state: CompressedState, control: int, reg: CompressedRegister, rng) -> PfcOpening:
    s = state.measure_register_z(reg, rng)
    (b,) = state.measure_controls([control], "Z", rng)
    return PfcOpening(b, s, "Z")


def open_x(state: CompressedState, control: int, reg: CompressedRegister, rng) -> PfcOpening:
    s, _ = state.hadamard_collapse(reg, rng)
    (b,) = state.measure_controls([control], "X", rng)
    return PfcOpening(b, s, "X")


def open_dense(st: StateVector, control: int, k0: Sequence[int], basis: str, rng,
               discard: bool = True) -> tuple[PfcOpening, StateVector]:
    out = measure(st, [control] + list(k0), basis, rng, discard=discard)
    n = len(k0)
    v = out.value
    return PfcOpening(v >> n, v & ((1 << n) - 1), basis.upper()), out.posterior


# ---------------------------------------------------------------- decode

def _commitment_ok(dk: PfcDecodeKey, c) -> bool:
    sig = c.c if isinstance(c, PfcCommitment) else tuple(c)
    return token_verify(dk.vk, (1,), sig)


def _parse(u, n: int):
    try:
        if isinstance(u, PfcOpening):
            b, s = u.bit, u.s
        else:
            b, s = u
        b, s = int(b), int(s)
    except (TypeError, ValueError):
        return None
    if b not in (0, 1) or s < 0 or s >> n:
        return None
    return b, s


def dec_z(dk: PfcDecodeKey, c, u) -> Optional[int]:
    """b if c signs 1 and s ∈ A_b, else ⊥ (None)."""
    parsed = _parse(u, dk.n)
    if parsed is None or not _commitment_ok(dk, c):
        return None
    b, s = parsed
    return b if s in dk.coset.split[b] else None


def dec_x(dk: PfcDecodeKey, c, u) -> Optional[int]:
    """b' ⊕ r with r = 0 if s ∈ S^⊥, r = 1 if s ⊕ e_1 ∈ S^⊥, else ⊥."""
    parsed = _parse(u, dk.n)
    if parsed is None or not _commitment_ok(dk, c):
        return None
    b_prime, s = parsed
    S = dk.coset.subspace
    if S.in_dual(s):
        return b_prime
    if S.in_dual(s ^ f2.unit(1, dk.n)):
        return b_prime ^ 1
    return None


# ------------------------------------------------------- binding projectors

def opening_mask(dk: PfcDecodeKey, c, b: int) -> np.ndarray:
    """Basis strings u = (bit, s) on 1 + n qubits with dec_z(dk, c, u) = b."""
    n = dk.n
    size = 1 << (n + 1)
    if not _commitment_ok(dk, c):
        return np.zeros(size, dtype=bool)
    mask = np.zeros(size, dtype=bool)
    mask[b << n:(b + 1) << n] = affine_mask(dk.coset.split[b])
    return mask


def binding_projector_weight(dk: PfcDecodeKey, c, b: int, st: StateVector) -> float:
    """‖Π_{dk,c,b} ψ‖² on the opening register (first 1 + n qubits of ψ)."""
    n = dk.n
    mask = opening_mask(dk, c, b)
    probs = st.probabilities().reshape(1 << (n + 1), -1).sum(axis=1)
    return float(probs[mask].sum())


def decoded_strings(dks: Sequence[PfcDecodeKey], cs: Sequence, num_qubits: int) -> np.ndarray:
    """For each basis index over m opening registers, the decoded m-bit string
    as an int, or -1 if any position decodes to ⊥."""
    m = len(dks)
    idx = basis_indices(num_qubits)
    out = np.zeros_like(idx)
    bad = np.zeros(idx.shape[0], dtype=bool)
    pos = 0
    for dk, c in zip(dks, cs):
        width = dk.n + 1
        u = extract(idx, list(range(pos, pos + width)), num_qubits)
        m0, m1 = opening_mask(dk, c, 0), opening_mask(dk, c, 1)
        bit = np.where(m1[u], 1, 0)
        bad |= ~(m0[u] | m1[u])
        out = (out << 1) | bit
        pos += width
    out[bad] = -1
    return out


def predicate_projector_weight(dks, cs, W, st: StateVector) -> float:
    """‖Π_{dk,c,W} ψ‖²: weight on openings whose decoded string lies in W."""
    dec = decoded_strings(dks, cs, st.n)
    Wset = {int(w, 2) if isinstance(w, str) else int(w) for w in W}
    mask = np.isin(dec, list(Wset)) & (dec >= 0)
    return float(st.probabilities()[mask].sum())
