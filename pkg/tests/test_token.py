import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfcsim.f2 import AffineSubspace, rref_basis
from pfcsim.qsim.dense import StateVector, coset_state, fidelity
from pfcsim.token import (
    DoubleSign,
    TokenSigningState,
    TokenVerifyKey,
    coherent_sign_zero,
    signature_from_text,
    signature_to_text,
    token_gen,
    token_sign,
    token_verify,
    uncompute_sign_zero,
)

S10 = rref_basis([0b10], 2)


def fixed_key(S):
    return TokenVerifyKey(S.n, (S,)), TokenSigningState(S.n, (S,))


def test_gen_lambda2_is_one_of_three_lines():
    seen = set()
    for seed in range(60):
        vk, _ = token_gen(np.random.default_rng(seed), 2, 1)
        assert vk.subspaces[0].dim == 1
        seen.add(vk.subspaces[0].basis)
    assert seen == {(0b10,), (0b01,), (0b11,)}


def test_gen_structure():
    vk, sk = token_gen(np.random.default_rng(0), 8, 3)
    assert vk.k == 3 and len({S.basis for S in vk.subspaces}) == 3
    assert all(S.dim == 4 and S.n == 8 for S in vk.subspaces)


def test_gen_rejects_odd_lambda():
    with pytest.raises(ValueError):
        token_gen(np.random.default_rng(0), 5, 1)


def test_sign_zero_example():
    rng = np.random.default_rng(0)
    counts = {}
    for _ in range(2000):
        vk, sk = fixed_key(S10)
        sigma = token_sign((0,), sk, rng)
        counts[sigma[0]] = counts.get(sigma[0], 0) + 1
        assert token_verify(vk, (0,), sigma) == (sigma[0] == 0b10)
    assert set(counts) == {0b00, 0b10}
    assert abs(counts[0b10] / 2000 - 0.5) < 4 * 0.5 / np.sqrt(2000)


def test_sign_one_example():
    rng = np.random.default_rng(1)
    for _ in range(200):
        vk, sk = fixed_key(S10)
        sigma = token_sign((1,), sk, rng)
        assert sigma[0] in (0b00, 0b01)
        assert token_verify(vk, (1,), sigma) == (sigma[0] == 0b01)


def test_verify_rejects_zero_vector():
    vk, _ = token_gen(np.random.default_rng(2), 6, 1)
    assert not token_verify(vk, (0,), (0,))
    assert not token_verify(vk, (1,), (0,))


def test_dual_only_vector_rejected_for_zero():
    # S = span{10}: 01 is in the dual but not in S
    vk, _ = fixed_key(S10)
    assert not token_verify(vk, (0,), (0b01,))
    assert token_verify(vk, (1,), (0b01,))


def test_verify_wrong_lengths():
    vk, _ = token_gen(np.random.default_rng(2), 4, 2)
    assert not token_verify(vk, (0,), (1,))
    assert not token_verify(vk, (0, 1), (1,))


def test_double_sign_refused():
    _, sk = token_gen(np.random.default_rng(3), 4, 1)
    token_sign((0,), sk, np.random.default_rng(0))
    with pytest.raises(DoubleSign):
        token_sign((1,), sk, np.random.default_rng(0))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 6, 8]), st.integers(0, 1))
def test_signatures_land_in_the_right_subspace(seed, lam, b):
    rng = np.random.default_rng(seed)
    vk, sk = token_gen(rng, lam, 1)
    sigma = token_sign((b,), sk, rng)
    S = vk.subspaces[0]
    assert (S.in_dual(sigma[0]) if b else sigma[0] in S)
    assert token_verify(vk, (b,), sigma) == (sigma[0] != 0)


def test_membership_exhaustive_many_trials():
    rng = np.random.default_rng(4)
    for _ in range(10_000 // 50):
        vk, _ = token_gen(rng, 6, 1)
        S = vk.subspaces[0]
        for _ in range(50):
            b = int(rng.integers(2))
            sk = TokenSigningState(6, (S,))
            s = token_sign((b,), sk, rng)[0]
            assert S.in_dual(s) if b else s in S


def test_text_round_trip():
    sigma = (0b1010, 0b0001)
    assert signature_from_text(signature_to_text(sigma, 4)) == sigma


def test_coherent_sign_zero_example():
    S = AffineSubspace(S10, 0)
    st_ = coset_state(S).tensor(StateVector.zero(2))
    out = coherent_sign_zero(st_, [0, 1], [2, 3])
    expected = np.zeros(16, dtype=complex)
    expected[0b0000] = expected[0b1010] = 1 / np.sqrt(2)
    assert np.allclose(out.amps, expected)
    back = uncompute_sign_zero(out, [0, 1], [2, 3])
    assert fidelity(back, st_) >= 1 - 1e-10


def test_coherent_sign_needs_clean_target():
    st_ = StateVector.basis(4, 0b0001)
    with pytest.raises(ValueError):
        coherent_sign_zero(st_, [0, 1], [2, 3])


def test_subspace_register_state():
    vk, sk = token_gen(np.random.default_rng(5), 4, 1)
    reg = sk.register_state(0)
    assert fidelity(reg, coset_state(AffineSubspace(vk.subspaces[0], 0))) == pytest.approx(1.0)


def test_key_serialization():
    vk, sk = token_gen(np.random.default_rng(6), 4, 2)
    assert TokenVerifyKey.from_dict(vk.to_dict()) == vk
    again = TokenSigningState.from_dict(sk.to_dict())
    assert again.subspaces == sk.subspaces and not again.used
    snap = sk.snapshot()
    token_sign((0, 1), snap, np.random.default_rng(0))
    assert snap.used and not sk.used
