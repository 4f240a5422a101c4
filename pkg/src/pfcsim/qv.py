"""Information-theoretic verification backends (prove / gen / ver).

Two reference backends share one interface:

* ``trivial``: the prover's state is λ_s computational-basis copies of output
  samples of Q(x); the verifier measures everything in Z and accepts any
  well-formed string.  Plumbing only.
* ``xz``: a user-supplied XZ Hamiltonian with a known ground state is
  prepended.  The verifier samples one term, measures its support in the
  term's bases, and accepts iff the scaled energy estimate is at most τ.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .qsim.dense import (
    H_GATE,
    S_GATE,
    T_GATE,
    X_GATE,
    Z_GATE,
    StateVector,
    basis_indices,
    extract,
)

_ONE_QUBIT = {"X": X_GATE, "H": H_GATE, "Z": Z_GATE, "S": S_GATE, "T": T_GATE}


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


@dataclass(frozen=True)
class Circuit:
    """Gate list over ``wires`` qubits, all initialized to |0⟩.

    Gates: ["X"|"H"|"Z"|"S"|"T", q], ["RY", q, θ], ["CNOT"|"CX", c, t],
    ["CZ", a, b], ["CCX", c1, c2, t].
    """

    wires: int
    gates: tuple[tuple, ...]

    def __post_init__(self):
        for g in self.gates:
            name = g[0]
            if name in _ONE_QUBIT or name == "RY":
                qs = [g[1]]
            elif name in ("CNOT", "CX", "CZ"):
                qs = [g[1], g[2]]
            elif name == "CCX":
                qs = [g[1], g[2], g[3]]
            else:
                raise ValueError(f"unknown gate {name!r}")
            if any(not 0 <= q < self.wires for q in qs) or len(set(qs)) != len(qs):
                raise ValueError(f"bad wires in gate {g!r}")

    def depth(self) -> int:
        layer = [0] * self.wires
        for g in self.gates:
            qs = [q for q in g[1:] if isinstance(q, int)]
            if g[0] == "RY":
                qs = [g[1]]
            d = max(layer[q] for q in qs) + 1
            for q in qs:
                layer[q] = d
        return max(layer, default=0)

    def apply(self, st: StateVector, offset: int = 0) -> StateVector:
        for g in self.gates:
            name = g[0]
            if name in _ONE_QUBIT:
                st.apply_1q(offset + g[1], _ONE_QUBIT[name])
            elif name == "RY":
                st.apply_1q(offset + g[1], _ry(float(g[2])))
            elif name in ("CNOT", "CX"):
                st.cnot(offset + g[1], offset + g[2])
            elif name == "CZ":
                st.controlled_z(offset + g[1], offset + g[2])
            else:
                st.toffoli(offset + g[1], offset + g[2], offset + g[3])
        return st

    def to_list(self) -> list:
        return [list(g) for g in self.gates]

    @classmethod
    def from_list(cls, wires: int, gates: Sequence[Sequence]) -> "Circuit":
        return cls(wires, tuple(tuple(g) for g in gates))


@dataclass(frozen=True)
class XzTerm:
    coef: float
    pauli: str  # over the Hamiltonian block, letters I/X/Z

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.pauli) if p != "I")


@dataclass(frozen=True)
class XzHamiltonian:
    """H = Σ_t c_t (I − P_t)/2 over ``num_qubits`` qubits."""

    num_qubits: int
    terms: tuple[XzTerm, ...]
    ground: tuple[complex, ...]
    gap_floor: float
    threshold: Optional[float] = None

    def matrix(self) -> np.ndarray:
        n = self.num_qubits
        dim = 1 << n
        I2 = np.eye(2)
        X = np.array([[0, 1], [1, 0]])
        Z = np.diag([1, -1])
        H = np.zeros((dim, dim), dtype=np.complex128)
        for t in self.terms:
            P = np.array([[1.0]])
            for p in t.pauli:
                P = np.kron(P, {"I": I2, "X": X, "Z": Z}[p])
            H += t.coef * (np.eye(dim) - P) / 2
        return H

    def ground_energy(self) -> float:
        g = np.array(self.ground)
        return float(np.real(np.vdot(g, self.matrix() @ g)))

    @property
    def tau(self) -> float:
        if self.threshold is not None:
            return float(self.threshold)
        e0 = self.ground_energy()
        return e0 + self.gap_floor / 2


@dataclass(frozen=True)
class QvInstance:
    name: str
    circuit: Circuit
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    predicate: tuple[int, ...]  # truth table over output strings
    backend: str = "trivial"
    lam_s: int = 3
    hamiltonian: Optional[XzHamiltonian] = None

    def __post_init__(self):
        if self.backend not in ("trivial", "xz"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "xz" and self.hamiltonian is None:
            raise ValueError("xz backend needs a Hamiltonian")
        if len(self.predicate) != 1 << len(self.outputs):
            raise ValueError("predicate truth table has the wrong length")

    @property
    def input_width(self) -> int:
        return len(self.inputs)

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    @property
    def ham_qubits(self) -> int:
        return self.hamiltonian.num_qubits if self.backend == "xz" else 0

    @property
    def num_qubits(self) -> int:
        """ℓ, the prover's register count."""
        return self.ham_qubits + self.lam_s * self.n_out

    @property
    def output_block(self) -> tuple[int, ...]:
        return tuple(range(self.ham_qubits, self.num_qubits))

    def P(self, q: int) -> int:
        return int(self.predicate[q])

    def _bits(self, x) -> tuple[int, ...]:
        if isinstance(x, str):
            bits = tuple(int(c) for c in x)
        else:
            bits = tuple(int(b) for b in x)
        if len(bits) != self.input_width:
            raise ValueError(f"input must have {self.input_width} bits")
        return bits

    def output_state(self, x) -> StateVector:
        st = StateVector.zero(self.circuit.wires)
        for bit, q in zip(self._bits(x), self.inputs):
            if bit:
                st.x(q)
        return self.circuit.apply(st)

    def output_distribution(self, x) -> np.ndarray:
        st = self.output_state(x)
        key = extract(basis_indices(st.n), self.outputs, st.n)
        return np.bincount(key, weights=st.probabilities(), minlength=1 << self.n_out)

    def sample(self, x, rng: np.random.Generator, shots: int = 1) -> np.ndarray:
        p = self.output_distribution(x)
        return rng.choice(p.shape[0], size=shots, p=p / p.sum())

    def ideal_value(self, x) -> int:
        """P(Q(x)): the likelier predicate value."""
        p = self.output_distribution(x)
        p1 = sum(p[q] for q in range(p.shape[0]) if self.predicate[q])
        return int(p1 > 0.5)

    def determinism(self, x) -> float:
        p = self.output_distribution(x)
        p1 = float(sum(p[q] for q in range(p.shape[0]) if self.predicate[q]))
        return max(p1, 1 - p1)

    def is_pseudo_deterministic(self, threshold: float = 0.99) -> bool:
        return all(self.determinism(x) >= threshold for x in all_inputs(self.input_width))

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "wires": self.circuit.wires,
            "gates": self.circuit.to_list(),
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "predicate": list(self.predicate),
            "backend": self.backend,
            "lam_s": self.lam_s,
        }
        if self.hamiltonian is not None:
            H = self.hamiltonian
            d["hamiltonian"] = {
                "num_qubits": H.num_qubits,
                "terms": [{"coef": t.coef, "pauli": t.pauli} for t in H.terms],
                "ground": [[float(a.real), float(a.imag)] for a in H.ground],
                "gap_floor": H.gap_floor,
                "threshold": H.threshold,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "QvInstance":
        H = None
        if "hamiltonian" in d and d["hamiltonian"] is not None:
            h = d["hamiltonian"]
            n = int(h["num_qubits"])
            ground = h["ground"]
            if isinstance(ground, str):
                amps = [0j] * (1 << n)
                amps[int(ground, 2)] = 1 + 0j
            else:
                amps = [complex(re, im) for re, im in ground]
            norm = float(np.linalg.norm(amps))
            H = XzHamiltonian(
                n,
                tuple(XzTerm(float(t["coef"]), t["pauli"]) for t in h["terms"]),
                tuple(a / norm for a in amps),
                float(h["gap_floor"]),
                h.get("threshold"),
            )
            for t in H.terms:
                if len(t.pauli) != n or set(t.pauli) - set("IXZ"):
                    raise ValueError(f"bad term {t.pauli!r}")
        return cls(
            d.get("name", "instance"),
            Circuit.from_list(int(d["wires"]), d["gates"]),
            tuple(d["inputs"]),
            tuple(d["outputs"]),
            tuple(int(b) for b in d["predicate"]),
            d.get("backend", "trivial"),
            int(d.get("lam_s", 3)),
            H,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def load(cls, path) -> "QvInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def all_inputs(width: int) -> list[str]:
    return [format(v, f"0{width}b") if width else "" for v in range(1 << width)]


def shipped_instance(name: str) -> QvInstance:
    """Load one of the bundled instance files by stem."""
    text = resources.files("pfcsim.instances").joinpath(f"{name}.json").read_text()
    return QvInstance.from_dict(json.loads(text))


def shipped_instance_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("pfcsim.instances").iterdir() if p.name.endswith(".json"))


# ------------------------------------------------------------- interface

@dataclass(frozen=True)
class QvParams:
    h: tuple[int, ...]
    S: tuple[int, ...]
    backend: str
    term: Optional[int] = None

    def to_dict(self) -> dict:
        return {"h": "".join(map(str, self.h)), "S": list(self.S), "backend": self.backend, "term": self.term}


def qv_prove(instance: QvInstance, x, rng: np.random.Generator) -> StateVector:
    """The honest prover's ℓ-qubit state."""
    samples = instance.sample(x, rng, instance.lam_s)
    bits = 0
    for q in samples:
        bits = (bits << instance.n_out) | int(q)
    tail = StateVector.basis(instance.lam_s * instance.n_out, bits)
    if instance.backend == "trivial":
        return tail
    ground = StateVector(np.array(instance.hamiltonian.ground, dtype=np.complex128))
    return ground.tensor(tail)


def qv_gen(instance: QvInstance, rng: np.random.Generator) -> QvParams:
    ell = instance.num_qubits
    S = instance.output_block
    if instance.backend == "trivial":
        return QvParams((0,) * ell, S, "trivial")
    H = instance.hamiltonian
    t = int(rng.integers(len(H.terms)))
    h = [0] * ell
    for i, p in enumerate(H.terms[t].pauli):
        if p == "X":
            h[i] = 1
    return QvParams(tuple(h), S, "xz", t)


def term_energy(H: XzHamiltonian, t: int, m: Sequence[int]) -> float:
    term = H.terms[t]
    parity = sum(int(m[i]) for i in term.support) & 1
    return term.coef * parity  # (1 − (−1)^parity)/2 = parity


def qv_ver(instance: QvInstance, x, params: QvParams, m: Sequence[int]):
    """(True, samples) or (False, None).  Samples are λ_s output strings."""
    if len(m) != instance.num_qubits or any(int(b) not in (0, 1) for b in m):
        return False, None
    if instance.backend == "xz":
        H = instance.hamiltonian
        if params.term is None:
            return False, None
        estimate = len(H.terms) * term_energy(H, params.term, m)
        if estimate > H.tau:
            return False, None
    out = [int(m[i]) for i in params.S]
    samples = []
    for t in range(instance.lam_s):
        v = 0
        for b in out[t * instance.n_out:(t + 1) * instance.n_out]:
            v = (v << 1) | b
        samples.append(v)
    return True, samples


def measure_basis(st: StateVector, h: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
    """M(h, ψ): measure qubit i in Z (h_i = 0) or X (h_i = 1)."""
    from .qsim.dense import measure

    out = measure(st, range(st.n), ["X" if b else "Z" for b in h], rng)
    return out.bits
