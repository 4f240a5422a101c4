"""Structure-compressed engine.

After honest protocol steps every ancilla register is a classical function
of one control qubit: a claw register holds x_b on branch b, and a committed
coset register holds |A_b⟩ on branch b.  Only the control qubits are kept
densely; the registers are stored symbolically and collapsed analytically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..f2 import AffineSubspace, dot, random_vector
from .dense import StateVector, measure


@dataclass(frozen=True)
class ClawPair:
    x0: int
    x1: int
    width: int

    @property
    def degenerate(self) -> bool:
        return self.x0 == self.x1

    def value(self, b: int) -> int:
        return self.x1 if b else self.x0


@dataclass(frozen=True)
class CosetPair:
    coset: AffineSubspace

    @property
    def width(self) -> int:
        return self.coset.n

    @property
    def degenerate(self) -> bool:
        return False


@dataclass
class CompressedRegister:
    kind: Union[ClawPair, CosetPair]
    control: int
    live: bool = True


class ControlMeasured(RuntimeError):
    pass


class NotRepresentable(RuntimeError):
    pass


@dataclass
class CompressedState:
    """Dense control qubits plus symbolic registers slaved to them."""

    core: StateVector
    registers: list[CompressedRegister] = field(default_factory=list)
    consumed: set[int] = field(default_factory=set)

    @property
    def num_controls(self) -> int:
        return self.core.n

    def attach(self, kind: Union[ClawPair, CosetPair], control: int) -> CompressedRegister:
        self._require_control(control)
        reg = CompressedRegister(kind, control)
        self.registers.append(reg)
        return reg

    def _require_control(self, control: int) -> None:
        if not 0 <= control < self.core.n:
            raise IndexError(f"control {control} out of range")
        if control in self.consumed:
            raise ControlMeasured(f"control {control} already measured")

    def _require_live(self, reg: CompressedRegister) -> None:
        if not reg.live:
            raise ControlMeasured("register already collapsed")
        self._require_control(reg.control)

    def branch_weights(self, control: int) -> tuple[float, float]:
        p = self.core.probabilities().reshape(-1, 2, 1 << (self.core.n - 1 - control)).sum(axis=(0, 2))
        return float(p[0]), float(p[1])

    def collapse_control(self, control: int, rng: np.random.Generator) -> int:
        """Z-measure a control without consuming it (it stays as a basis state)."""
        self._require_control(control)
        out = measure(self.core, [control], "Z", rng)
        self.core = out.posterior
        return out.bits[0]

    def branch_phase(self, control: int, p0: complex, p1: complex) -> None:
        self.core.apply_1q(control, np.diag([p0, p1]).astype(np.complex128))

    def measure_register_z(self, reg: CompressedRegister, rng: np.random.Generator) -> int:
        """Computational-basis measurement of a register."""
        self._require_live(reg)
        kind = reg.kind
        if isinstance(kind, ClawPair) and kind.degenerate:
            value = kind.x0
        else:
            b = self.collapse_control(reg.control, rng)
            if isinstance(kind, ClawPair):
                value = kind.value(b)
            else:
                value = kind.coset.split[b].sample(rng)
        reg.live = False
        return value

    def hadamard_collapse(self, reg: CompressedRegister, rng: np.random.Generator):
        """Hadamard-basis measurement of a register; returns (z, (phase_0, phase_1))."""
        self._require_live(reg)
        kind = reg.kind
        if isinstance(kind, ClawPair):
            z = random_vector(rng, kind.width)
            phases = ((-1) ** dot(z, kind.x0), (-1) ** dot(z, kind.x1))
        else:
            A0, A1 = kind.coset.split
            z = A0.subspace.dual.sample(rng)
            phases = ((-1) ** dot(z, A0.shift), (-1) ** dot(z, A1.shift))
        if phases[0] != phases[1]:
            self.branch_phase(reg.control, phases[0], phases[1])
        reg.live = False
        return z, phases

    def _entangled(self, control: int) -> bool:
        live = [r for r in self.registers if r.live and r.control == control and not r.kind.degenerate]
        if not live:
            return False
        w0, w1 = self.branch_weights(control)
        return min(w0, w1) > 1e-15

    def measure_controls(self, indices: Sequence[int], bases, rng: np.random.Generator) -> tuple[int, ...]:
        """Measure control qubits (consuming them).  X measurement of a control
        that still carries a live, non-degenerate register is refused: the
        reduced state is no longer a pure qubit state."""
        indices = list(indices)
        if isinstance(bases, str):
            bases = [bases] * len(indices)
        for q, b in zip(indices, bases):
            self._require_control(q)
            if b.upper() == "X":
                if self._entangled(q):
                    raise NotRepresentable(f"control {q} is entangled with a live register")
                # Only one branch is alive: pin the registers to it.
                w0, w1 = self.branch_weights(q)
                self._pin(q, 0 if w0 >= w1 else 1)
        out = measure(self.core, indices, bases, rng)
        self.core = out.posterior
        for q, b, bit in zip(indices, bases, out.bits):
            if b.upper() == "Z":
                self._pin(q, bit)
            self.consumed.add(q)
        return out.bits

    def _pin(self, control: int, b: int) -> None:
        for r in self.registers:
            if r.live and r.control == control and isinstance(r.kind, ClawPair):
                v = r.kind.value(b)
                r.kind = ClawPair(v, v, r.kind.width)
