"""Dense and structure-compressed quantum simulation back-ends."""
from .compressed import (
    ClawPair,
    CompressedRegister,
    CompressedState,
    ControlMeasured,
    CosetPair,
    NotRepresentable,
)
from .dense import (
    DEFAULT_DENSE_CAP,
    H_GATE,
    S_GATE,
    T_GATE,
    X_GATE,
    Z_GATE,
    DenseCapExceeded,
    MeasurementOutcome,
    StateVector,
    affine_mask,
    basis_indices,
    coset_state,
    dual_mask,
    extract,
    fidelity,
    hadamard_all,
    inner,
    measure,
    phase_oracle,
    predicate_mask,
    projector_weight,
    sample_z,
    subspace_mask,
)


def compressed_hadamard_collapse(state: CompressedState, reg: CompressedRegister, rng):
    return state.hadamard_collapse(reg, rng)


__all__ = [name for name in dir() if not name.startswith("_")]
