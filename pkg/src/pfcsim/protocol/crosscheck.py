"""One CV or PV round run twice: literally on a dense state vector and on the
claw-compressed engine.  Both return the same joint outcome (accept flag plus
decoded bits), so their distributions can be compared directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..pfc import (
    PfcCommitKey,
    PfcDecodeKey,
    PfcOpening,
    dec_x,
    dec_z,
    open_x,
    open_z,
    pfc_commit_compressed,
    pfc_commit_dense,
    pfc_gen,
)
from ..qsim.compressed import CompressedState
from ..qsim.dense import StateVector, measure
from ..tcf import (
    TcfPublicKey,
    TcfSecretKey,
    hadamard_decode,
    tcf_check,
    tcf_eval_dense,
    tcf_eval_on_qubit,
    tcf_gen,
    tcf_invert,
)


@dataclass
class RoundSetup:
    state: StateVector
    h: tuple[int, ...]
    test: bool
    pks: list[TcfPublicKey]
    sks: list[TcfSecretKey]
    pfc_n: int = 0
    pfc_lam_tok: int = 16
    pfc_seed: int = 0
    _pfc: Optional[list] = field(default=None, repr=False)

    @property
    def ell(self) -> int:
        return self.state.n

    def fresh_pfc(self, rng) -> list[tuple[PfcDecodeKey, PfcCommitKey]]:
        """Unspent copies of fixed PFC keys (each copy is one-shot)."""
        if self._pfc is None:
            krng = np.random.default_rng(self.pfc_seed)
            self._pfc = [pfc_gen(krng, self.pfc_n, self.pfc_lam_tok) for _ in range(self.ell)]
        return [(dk, ck.snapshot()) for dk, ck in self._pfc]


def make_setup(state: StateVector, h: Sequence[int], test: bool, w: int, seed: int,
               pfc_n: int = 0, pfc_lam_tok: int = 16) -> RoundSetup:
    rng = np.random.default_rng(seed)
    keys = [tcf_gen(rng, hj, w) for hj in h]
    return RoundSetup(state, tuple(h), test, [k[0] for k in keys], [k[1] for k in keys],
                      pfc_n, pfc_lam_tok, seed + 1)


def _decode(setup: RoundSetup, b, y, z) -> tuple:
    """(accept, bits): test rounds check and report b; Hadamard rounds decode m."""
    if setup.test:
        ok = all(tcf_check(pk, bj, zj, yj) for pk, bj, zj, yj in zip(setup.pks, b, z, y))
        return (int(ok),) + tuple(b)
    m = []
    for hj, sk, bj, yj, zj in zip(setup.h, setup.sks, b, y, z):
        inv = tcf_invert(hj, sk, yj)
        if inv is None:
            return (0,) + (0,) * setup.ell
        if hj == 0:
            m.append(inv[0])
        else:
            (_, x0), (_, x1) = inv
            m.append(hadamard_decode(bj, zj, x0, x1))
    return (1,) + tuple(m)


def _read(v: int, width: int) -> int:
    return v & ((1 << width) - 1)


def run_dense(setup: RoundSetup, rng: np.random.Generator) -> tuple:
    st = setup.state.copy()
    ell, w = setup.ell, setup.pks[0].w
    commits = None
    k0s = []
    if setup.pfc_n:
        commits = setup.fresh_pfc(rng)
        for j, (dk, ck) in enumerate(commits):
            st, k0, c = pfc_commit_dense(st, j, ck, rng, token_register=False)
            k0s.append((k0, c))
    xregs, ys = [], []
    for j, pk in enumerate(setup.pks):
        st, xq, y = tcf_eval_dense(st, j, pk, rng)
        xregs.append(xq)
        ys.append(y)
    claw_basis = "Z" if setup.test else "X"
    flat = [q for xq in xregs for q in xq]
    zs = measure(st, flat, claw_basis, rng)
    st = zs.posterior
    z = [_read(zs.value >> (w * (ell - 1 - j)), w) for j in range(ell)]
    if commits is None:
        out = measure(st, range(ell), claw_basis, rng)
        b = list(out.bits)
        return _decode(setup, b, ys, z)
    b = []
    for j, (dk, _) in enumerate(commits):
        k0, c = k0s[j]
        res = measure(st, [j] + k0, claw_basis, rng)
        st = res.posterior
        n = len(k0)
        bit, s = res.value >> n, _read(res.value, n)
        u = PfcOpening(bit, s, claw_basis)
        dec = dec_z(dk, c, u) if setup.test else (dec_x(dk, c, u) if setup.h[j] else 0)
        if dec is None:
            return (0,) + (0,) * ell
        b.append(dec)
    return _decode(setup, b, ys, z)


def run_compressed(setup: RoundSetup, rng: np.random.Generator) -> tuple:
    cs = CompressedState(setup.state.copy())
    ell = setup.ell
    commits, cregs = None, []
    if setup.pfc_n:
        commits = setup.fresh_pfc(rng)
        for j, (dk, ck) in enumerate(commits):
            cregs.append(pfc_commit_compressed(cs, j, ck, rng))
    claws, ys = [], []
    for j, pk in enumerate(setup.pks):
        reg, y = tcf_eval_on_qubit(pk, cs, j, rng)
        claws.append(reg)
        ys.append(y)
    if setup.test:
        z = [cs.measure_register_z(reg, rng) for reg in claws]
    else:
        z = [cs.hadamard_collapse(reg, rng)[0] for reg in claws]
    if commits is None:
        b = list(cs.measure_controls(range(ell), "Z" if setup.test else "X", rng))
        return _decode(setup, b, ys, z)
    b = []
    for j, (dk, _) in enumerate(commits):
        reg, c = cregs[j]
        u = open_z(cs, j, reg, rng) if setup.test else open_x(cs, j, reg, rng)
        dec = dec_z(dk, c, u) if setup.test else (dec_x(dk, c, u) if setup.h[j] else 0)
        if dec is None:
            return (0,) + (0,) * ell
        b.append(dec)
    return _decode(setup, b, ys, z)


def ideal_outcome(setup: RoundSetup, rng: np.random.Generator) -> tuple:
    """What a perfect QPIP_1 measurement of the input state would report."""
    bases = ["Z" if setup.test or hj == 0 else "X" for hj in setup.h]
    return (1,) + tuple(measure(setup.state, range(setup.ell), bases, rng).bits)


def outcome_counts(runner, setup: RoundSetup, trials: int, rng: np.random.Generator) -> dict:
    counts: dict = {}
    for _ in range(trials):
        o = runner(setup, rng)
        counts[o] = counts.get(o, 0) + 1
    return counts


def total_variation(p: dict, q: dict) -> float:
    np_, nq = sum(p.values()), sum(q.values())
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0) / np_ - q.get(k, 0) / nq) for k in keys)
