"""Hot loops of the dense engine.

Each kernel has a numba implementation and a pure-numpy one with identical
results.  ``PFCSIM_KERNELS=numpy`` forces the numpy path; by default numba is
used when it imports.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


# ---------------------------------------------------------------- numpy path

def np_hadamard_bits(amps: np.ndarray, positions: np.ndarray) -> None:
    """In-place H on the listed integer bit positions."""
    size = amps.shape[0]
    for p in positions:
        stride = 1 << int(p)
        view = amps.reshape(size // (2 * stride), 2, stride)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = (lo + hi) * _INV_SQRT2
        view[:, 1, :] = (lo - hi) * _INV_SQRT2


def np_apply_1q(amps: np.ndarray, position: int, u: np.ndarray) -> None:
    size = amps.shape[0]
    stride = 1 << int(position)
    view = amps.reshape(size // (2 * stride), 2, stride)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :].copy()
    view[:, 0, :] = u[0, 0] * lo + u[0, 1] * hi
    view[:, 1, :] = u[1, 0] * lo + u[1, 1] * hi


def np_parity_any(num_bits: int, masks: np.ndarray) -> np.ndarray:
    """For every index i < 2**num_bits: True iff some popcount(i & m) is odd."""
    idx = np.arange(1 << num_bits, dtype=np.uint64)
    out = np.zeros(idx.shape[0], dtype=np.bool_)
    for m in masks:
        out |= (np.bitwise_count(idx & np.uint64(m)) & 1).astype(np.bool_)
    return out


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True)
    def _nb_hadamard_bits(amps, positions):
        size = amps.shape[0]
        for k in range(positions.shape[0]):
            stride = 1 << positions[k]
            for base in range(0, size, 2 * stride):
                for off in range(stride):
                    i = base + off
                    a = amps[i]
                    b = amps[i + stride]
                    amps[i] = (a + b) * _INV_SQRT2
                    amps[i + stride] = (a - b) * _INV_SQRT2

    @numba.njit(cache=True)
    def _nb_apply_1q(amps, position, u):
        size = amps.shape[0]
        stride = 1 << position
        u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
        for base in range(0, size, 2 * stride):
            for off in range(stride):
                i = base + off
                a = amps[i]
                b = amps[i + stride]
                amps[i] = u00 * a + u01 * b
                amps[i + stride] = u10 * a + u11 * b

    @numba.njit(cache=True)
    def _nb_parity_any(num_bits, masks):
        size = 1 << num_bits
        out = np.zeros(size, dtype=np.bool_)
        for i in range(size):
            for k in range(masks.shape[0]):
                v = np.uint64(i) & masks[k]
                par = 0
                while v:
                    v &= v - np.uint64(1)
                    par ^= 1
                if par:
                    out[i] = True
                    break
        return out

    def nb_hadamard_bits(amps, positions):
        _nb_hadamard_bits(amps, np.asarray(positions, dtype=np.int64))

    def nb_apply_1q(amps, position, u):
        _nb_apply_1q(amps, int(position), np.asarray(u, dtype=np.complex128))

    def nb_parity_any(num_bits, masks):
        return _nb_parity_any(int(num_bits), np.asarray(masks, dtype=np.uint64))


def available_backends() -> list[str]:
    return ["numpy", "numba"] if numba is not None else ["numpy"]


def _select(name: str) -> str:
    if name == "numba" and numba is None:
        return "numpy"
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return name


BACKEND = _select(os.environ.get("PFCSIM_KERNELS", "numba"))


def kernels(name: str | None = None):
    """Return (hadamard_bits, apply_1q, parity_any) for a backend."""
    name = _select(name or BACKEND)
    if name == "numba":
        return nb_hadamard_bits, nb_apply_1q, nb_parity_any
    return np_hadamard_bits, np_apply_1q, np_parity_any


hadamard_bits, apply_1q, parity_any = kernels()
