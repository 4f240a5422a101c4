import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfcsim import f2
from pfcsim.f2 import AffineSubspace, rref_basis
from pfcsim.qsim.compressed import ClawPair, CompressedState, ControlMeasured, CosetPair, NotRepresentable
from pfcsim.qsim.dense import (
    DenseCapExceeded,
    StateVector,
    coset_state,
    fidelity,
    hadamard_all,
    measure,
    phase_oracle,
    projector_weight,
)

S2 = 1 / np.sqrt(2)


def naive_hadamard(amps):
    n = int(np.log2(amps.shape[0]))
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    U = np.array([[1.0]])
    for _ in range(n):
        U = np.kron(U, H)
    return U @ amps


def test_coset_state_examples():
    assert np.allclose(coset_state(AffineSubspace(f2.zero_subspace(2), 0b10)).amps, [0, 0, 1, 0])
    assert np.allclose(coset_state(AffineSubspace(f2.full_space(1), 0)).amps, [S2, S2])
    assert np.allclose(coset_state(AffineSubspace(rref_basis([0b11], 2), 0)).amps, [S2, 0, 0, S2])


def test_dense_cap():
    with pytest.raises(DenseCapExceeded):
        coset_state(AffineSubspace(f2.zero_subspace(4), 0), cap=3)


def test_hadamard_examples():
    assert np.allclose(hadamard_all(StateVector.zero(3)).amps, np.full(8, 1 / np.sqrt(8)))
    S = AffineSubspace(rref_basis([0b11], 2), 0)
    assert fidelity(hadamard_all(coset_state(S)), coset_state(S)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", range(1, 6))
def test_hadamard_maps_subspace_to_dual(n):
    for S in f2.all_subspaces(n):
        out = hadamard_all(coset_state(AffineSubspace(S, 0)))
        assert np.allclose(out.amps, coset_state(AffineSubspace(S.dual, 0)).amps, atol=1e-12)


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_hadamard_matches_kron(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    assert np.allclose(hadamard_all(StateVector(amps)).amps, naive_hadamard(amps))


def test_phase_oracle_examples():
    st_ = hadamard_all(StateVector.zero(2))
    assert np.allclose(phase_oracle(st_, lambda x: 0).amps, st_.amps)
    assert np.allclose(phase_oracle(st_, lambda x: 1).amps, -st_.amps)


def test_norm_drift_over_composed_ops():
    rng = np.random.default_rng(0)
    st_ = coset_state(f2.random_balanced_affine(rng, 2, 4))
    for k in range(100):
        st_ = hadamard_all(st_) if k % 2 else phase_oracle(st_, lambda x, k=k: (x * 7 + k) % 3 == 0)
    assert abs(st_.norm() - 1) <= 1e-9


def test_projector_weight_examples():
    A = AffineSubspace(rref_basis([0b1000, 0b0110], 4), 0b0001)
    st_ = coset_state(A)
    assert projector_weight(st_, lambda x: 1) == pytest.approx(1.0)
    assert projector_weight(st_, lambda x: 0) == 0.0
    assert projector_weight(st_, lambda x: x in A.split[0]) == pytest.approx(0.5)


def test_z_measure_coset_uniform():
    rng = np.random.default_rng(5)
    A = AffineSubspace(rref_basis([0b1010, 0b0110], 4), 0b0001)
    st_ = coset_state(A)
    draws = [measure(st_, range(4), "Z", rng).value for _ in range(10_000)]
    vals, counts = np.unique(draws, return_counts=True)
    assert set(vals) == set(A.elements())
    expected = 10_000 / 4
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    # 3 degrees of freedom; mean 3, sd sqrt(6): 4 sigma is about 12.8
    assert chi2 <= 3 + 4 * np.sqrt(6)


def test_x_measure_plus():
    rng = np.random.default_rng(0)
    plus = StateVector.qubit(S2, S2)
    assert all(measure(plus, [0], "X", rng).bits == (0,) for _ in range(200))


def test_first_qubit_of_balanced_coset():
    rng = np.random.default_rng(1)
    A = AffineSubspace(rref_basis([0b1000, 0b0011], 4), 0b0100)
    st_ = coset_state(A)
    ones = 0
    for _ in range(4000):
        out = measure(st_, [0], "Z", rng)
        ones += out.bits[0]
        target = coset_state(A.split[out.bits[0]])
        assert fidelity(out.posterior, target) == pytest.approx(1.0)
    assert abs(ones / 4000 - 0.5) < 4 * 0.5 / np.sqrt(4000)


def test_measure_reproducible():
    st_ = hadamard_all(StateVector.zero(5))
    a = [measure(st_, range(5), "Z", np.random.default_rng(9)).value for _ in range(3)]
    b = [measure(st_, range(5), "Z", np.random.default_rng(9)).value for _ in range(3)]
    assert a == b


def test_measure_validates_indices():
    st_ = StateVector.zero(2)
    with pytest.raises(ValueError):
        measure(st_, [0, 0], "Z", np.random.default_rng(0))
    with pytest.raises(IndexError):
        measure(st_, [2], "Z", np.random.default_rng(0))


def test_measure_discard_keeps_rest():
    st_ = coset_state(AffineSubspace(rref_basis([0b11], 2), 0))
    out = measure(st_, [0], "Z", np.random.default_rng(0), discard=True)
    assert out.posterior.n == 1
    assert np.allclose(out.posterior.probabilities(), [1 - out.bits[0], out.bits[0]])


def test_json_round_trip():
    st_ = StateVector.qubit(0.6, 0.8j)
    assert np.allclose(StateVector.from_json(st_.to_json()).amps, st_.amps)


# compressed engine

def test_degenerate_claw_keeps_control():
    cs = CompressedState(StateVector.qubit(0.6, 0.8))
    reg = cs.attach(ClawPair(5, 5, 3), 0)
    before = cs.core.copy()
    cs.hadamard_collapse(reg, np.random.default_rng(0))
    assert fidelity(cs.core, before) == pytest.approx(1.0)


def test_zero_branch_control_unchanged():
    rng = np.random.default_rng(2)
    for _ in range(20):
        cs = CompressedState(StateVector.basis(1, 0))
        reg = cs.attach(ClawPair(3, 6, 3), 0)
        cs.hadamard_collapse(reg, rng)
        assert np.allclose(cs.core.probabilities(), [1, 0])


def test_claw_z_measure_follows_control():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cs = CompressedState(StateVector.qubit(S2, S2))
        reg = cs.attach(ClawPair(1, 6, 3), 0)
        v = cs.measure_register_z(reg, rng)
        b = cs.measure_controls([0], "Z", rng)[0]
        assert v == (6 if b else 1)


def test_x_measure_entangled_control_refused():
    cs = CompressedState(StateVector.qubit(S2, S2))
    cs.attach(ClawPair(1, 6, 3), 0)
    with pytest.raises(NotRepresentable):
        cs.measure_controls([0], "X", np.random.default_rng(0))


def test_consumed_control_refused():
    cs = CompressedState(StateVector.qubit(S2, S2))
    cs.measure_controls([0], "Z", np.random.default_rng(0))
    with pytest.raises(ControlMeasured):
        cs.attach(ClawPair(0, 1, 1), 0)


def test_collapsed_register_refused():
    cs = CompressedState(StateVector.qubit(S2, S2))
    reg = cs.attach(CosetPair(AffineSubspace(rref_basis([0b10], 2), 0b01)), 0)
    cs.measure_register_z(reg, np.random.default_rng(0))
    with pytest.raises(ControlMeasured):
        cs.hadamard_collapse(reg, np.random.default_rng(0))


def test_coset_hadamard_collapse_matches_dense():
    # |+>|A_b> with A = span{10}+01 in dense form: H on the register, then
    # measure it; the control's post-state must match the analytic phases.
    A = AffineSubspace(rref_basis([0b10], 2), 0b01)
    rng = np.random.default_rng(4)
    for _ in range(20):
        cs = CompressedState(StateVector.qubit(S2, S2))
        reg = cs.attach(CosetPair(A), 0)
        z, (p0, p1) = cs.hadamard_collapse(reg, rng)
        assert (p0, p1) == ((-1) ** f2.dot(z, A.split[0].shift), (-1) ** f2.dot(z, A.split[1].shift))
        assert A.split[0].subspace.in_dual(z)
